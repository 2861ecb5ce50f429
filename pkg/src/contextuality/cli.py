"""Command-line surface: classify inputs and run the named scenario checks.

Every subcommand accepts `--seed`, `--out`, and `--format json|text`, and
report-producing subcommands add `--emit-certificate` to include full
certificate payloads instead of compact summaries.  Output is rendered
with sorted keys, so identical inputs and seeds give byte-identical
reports.  Exit codes: 0 when the run classified or reported, 2 on schema
or input errors, 3 on an internal lattice violation (a bug sentinel that
should never fire).
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .classify import (
    LatticeViolation,
    RunConfig,
    classify,
    parse_document,
    prep_ensemble_from_json,
    report_to_json,
)
from .embedding import (
    embed_search,
    embed_sharp,
    gpt_from_json,
    prep_nc_check,
    pusey_incomplete_check,
    six_ensemble_statistics,
)
from .polytope import (
    CHSH_LOCAL_BOUND,
    CHSH_OPTIMAL_ANGLES,
    chsh_value,
    contextuality_to_bell,
    csw_inequality,
    kcbs_graph,
    make_orthogonality_graph,
    membership_lp,
    singlet_behaviour,
)
from .qsl import QslProgram, qsl_compare
from .quantum import (
    PM_LABELS,
    kcbs_construction,
    matrix_from_json,
    peres_mermin_square,
    pvm_from_observable,
    random_density,
    sup_norm,
)
from .scenario import SchemaError, from_quantum, validate_no_disturbance
from .sheaf import solve_global_section

KCBS_SUM_BOUND = -3


def _json_safe(obj):
    """Recursively convert Fractions, numpy scalars, arrays, and tuples."""
    if isinstance(obj, Fraction):
        if obj.denominator == 1:
            return str(obj.numerator)
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_json_safe(x) for x in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_json_safe(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    return obj


def _render_text(value, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(value, dict):
        for key in sorted(value):
            inner = value[key]
            if isinstance(inner, (dict, list)) and inner:
                lines.append(f"{pad}{key}:")
                lines.extend(_render_text(inner, indent + 1))
            else:
                lines.append(f"{pad}{key}: {inner}")
    elif isinstance(value, list):
        for inner in value:
            if isinstance(inner, (dict, list)) and inner:
                lines.append(f"{pad}-")
                lines.extend(_render_text(inner, indent + 1))
            else:
                lines.append(f"{pad}- {inner}")
    else:
        lines.append(f"{pad}{value}")
    return lines


def _emit(payload: dict, args) -> None:
    payload = _json_safe(payload)
    if args.format == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        text = "\n".join(_render_text(payload)) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def _certificates(certs: list[dict], emit: bool) -> list[dict]:
    if emit:
        return certs
    return [{k: c[k] for k in ("role", "kind", "verdict", "scope") if k in c}
            for c in certs]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> dict:
    parsed = parse_document(_load_json(args.input))
    payload: dict = {"kind": parsed.kind, "valid": True}
    if parsed.kind == "empirical":
        nd = validate_no_disturbance(parsed.model)
        payload["measurements"] = len(parsed.model.scenario.measurements)
        payload["contexts"] = len(parsed.model.scenario.contexts)
        payload["no_disturbance"] = nd.passed
        payload["worst_marginal_deviation"] = nd.worst_violation
        if not nd.passed:
            payload["valid"] = False
    elif parsed.kind == "quantum":
        model = from_quantum(parsed.state, parsed.contexts, parsed.sharing)
        payload["hilbert_dim"] = int(parsed.state.shape[0])
        payload["measurements"] = len(model.scenario.measurements)
        payload["contexts"] = len(model.scenario.contexts)
    elif parsed.kind == "gpt":
        payload["dim"] = parsed.gpt.dim
        payload["states"] = parsed.gpt.n_states
        payload["effects"] = parsed.gpt.n_effects
        payload["sharp_contexts"] = len(parsed.gpt.sharp_contexts)
    else:
        payload["components"] = len(parsed.problem.component_states)
        payload["decompositions"] = len(parsed.problem.decompositions)
    if parsed.attachment is not None:
        payload["prep_ensemble_attached"] = True
    return payload


def cmd_classify(args) -> dict:
    doc = _load_json(args.input)
    config = RunConfig(kind=args.kind, seed=args.seed,
                       embed_restarts=args.restarts)
    report = classify(doc, config)
    payload = report_to_json(report,
                             include_certificates=args.emit_certificate)
    payload["kind"] = doc.get("kind")
    payload["seed"] = args.seed
    return payload


def cmd_kcbs(args) -> dict:
    psi, observables, total = kcbs_construction()
    contexts = []
    for j in range(5):
        k = (j + 1) % 5
        contexts.append([pvm_from_observable(observables[j], f"A{j}"),
                         pvm_from_observable(observables[k], f"A{k}")])
    section = solve_global_section(from_quantum(psi, contexts))
    csw = csw_inequality(kcbs_graph(), state=psi)
    return {
        "correlator_sum": total,
        "noncontextual_bound": KCBS_SUM_BOUND,
        "global_section": section.verdict,
        "csw_lhs": csw.lhs,
        "csw_bound": csw.bound,
        "csw_violated": csw.violated,
        "seed": args.seed,
        "certificates": _certificates([section.certificate()],
                                      args.emit_certificate),
    }


def cmd_chsh(args) -> dict:
    if args.angles:
        try:
            angles = tuple(float(t) for t in args.angles.split(","))
        except ValueError as exc:
            raise SchemaError(f"bad --angles value {args.angles!r}") from exc
        if len(angles) != 4:
            raise SchemaError("--angles needs four comma-separated numbers")
    else:
        angles = CHSH_OPTIMAL_ANGLES
    behaviour = singlet_behaviour(angles, alpha=args.alpha)
    membership = membership_lp(behaviour)
    return {
        "alpha": args.alpha,
        "angles": list(angles),
        "chsh_value": float(chsh_value(behaviour)),
        "local_bound": CHSH_LOCAL_BOUND,
        "membership": membership.verdict,
        "seed": args.seed,
        "certificates": _certificates([membership.certificate()],
                                      args.emit_certificate),
    }


def _pm_contexts() -> list:
    grid = peres_mermin_square()
    contexts = []
    for i in range(3):
        contexts.append([pvm_from_observable(grid[i][j], PM_LABELS[i][j])
                         for j in range(3)])
    for j in range(3):
        contexts.append([pvm_from_observable(grid[i][j], PM_LABELS[i][j])
                         for i in range(3)])
    return contexts


def _pm_signs() -> tuple[list[int], list[int]]:
    grid = peres_mermin_square()
    eye = np.eye(4)

    def sign(product: np.ndarray) -> int:
        if sup_norm(product - eye) < 1e-9:
            return 1
        if sup_norm(product + eye) < 1e-9:
            return -1
        raise AssertionError("context product is not +/- identity")

    rows = [sign(grid[i][0] @ grid[i][1] @ grid[i][2]) for i in range(3)]
    cols = [sign(grid[0][j] @ grid[1][j] @ grid[2][j]) for j in range(3)]
    return rows, cols


def _pm_assignment_count(rows: list[int], cols: list[int]) -> int:
    count = 0
    for bits in itertools.product((1, -1), repeat=9):
        grid = [bits[0:3], bits[3:6], bits[6:9]]
        ok = all(grid[i][0] * grid[i][1] * grid[i][2] == rows[i]
                 for i in range(3))
        ok = ok and all(grid[0][j] * grid[1][j] * grid[2][j] == cols[j]
                        for j in range(3))
        if ok:
            count += 1
    return count


def cmd_pm_square(args) -> dict:
    rows, cols = _pm_signs()
    satisfying = _pm_assignment_count(rows, cols)
    contexts = _pm_contexts()
    rng = np.random.default_rng(args.seed)
    verdicts = []
    certs = []
    for _ in range(args.trials):
        section = solve_global_section(
            from_quantum(random_density(4, rng), contexts))
        verdicts.append(section.verdict)
        certs.append(section.certificate())
    return {
        "row_signs": rows,
        "column_signs": cols,
        "satisfying_assignments": satisfying,
        "total_assignments": 512,
        "global_section_verdicts": verdicts,
        "trials": args.trials,
        "seed": args.seed,
        "certificates": _certificates(certs, args.emit_certificate),
    }


def cmd_embed(args) -> dict:
    doc = _load_json(args.input)
    gpt = gpt_from_json(doc["gpt"] if "kind" in doc else doc)
    payload: dict = {"dim": gpt.dim, "states": gpt.n_states,
                     "effects": gpt.n_effects, "seed": args.seed}
    if gpt.sharp_contexts:
        result = embed_sharp(gpt)
        payload["route"] = "sharp-constructor"
        payload["verdict"] = result.verdict
    else:
        result = embed_search(gpt, seed=args.seed, restarts=args.restarts)
        payload["route"] = "heuristic-search"
        payload["verdict"] = result.verdict
        payload["restarts_used"] = result.restarts_used
    payload["certificates"] = _certificates([result.certificate()],
                                            args.emit_certificate)
    return payload


def cmd_prep_nc(args) -> dict:
    if args.input:
        problem = prep_ensemble_from_json(_load_json(args.input))
    elif args.r is not None:
        doc: dict = {"r": args.r}
        if args.axis:
            try:
                doc["axis"] = [float(t) for t in args.axis.split(",")]
            except ValueError as exc:
                raise SchemaError(f"bad --axis value {args.axis!r}") from exc
        if args.q is not None:
            doc["q"] = args.q
        problem = prep_ensemble_from_json(doc)
    else:
        raise SchemaError("prep-nc needs an input file or --r")
    result = prep_nc_check(problem)
    return {
        "verdict": result.verdict,
        "cases": len(result.cases),
        "infeasible_cases": sum(1 for c in result.cases if not c.feasible),
        "model_constructed": result.model is not None,
        "seed": args.seed,
        "certificates": _certificates([result.certificate()],
                                      args.emit_certificate),
    }


def _pusey_stats_from_json(doc: dict):
    if "preps" not in doc or not isinstance(doc["preps"], dict):
        raise SchemaError("pusey input needs a 'preps' object")
    stats = {}
    for label, meas in doc["preps"].items():
        if not isinstance(meas, dict):
            raise SchemaError(f"preparation {label!r} must map measurements "
                              "to outcome lists")
        converted = {}
        for m_label, values in meas.items():
            if not isinstance(values, list):
                raise SchemaError(f"outcomes for {label!r}/{m_label!r} must "
                                  "be a list")
            row = []
            for v in values:
                if isinstance(v, bool):
                    raise SchemaError("probabilities must be numbers")
                if isinstance(v, float):
                    row.append(v)
                else:
                    try:
                        row.append(Fraction(v))
                    except (TypeError, ValueError) as exc:
                        raise SchemaError(f"bad probability {v!r}") from exc
            converted[m_label] = tuple(row)
        stats[label] = converted
    groups = []
    for raw_group in doc.get("equivalences", []):
        group = []
        for raw_mix in raw_group:
            if not isinstance(raw_mix, dict):
                raise SchemaError("each equivalence entry must map "
                                  "preparation labels to exact weights")
            mix = {}
            for label, w in raw_mix.items():
                if isinstance(w, (bool, float)):
                    raise SchemaError("equivalence weights must be exact "
                                      "(int or 'a/b' string)")
                try:
                    mix[label] = Fraction(w)
                except (TypeError, ValueError) as exc:
                    raise SchemaError(f"bad weight {w!r}") from exc
            group.append(mix)
        groups.append(group)
    return stats, groups or None


def cmd_pusey(args) -> dict:
    if args.six_ensemble is not None:
        try:
            r = Fraction(args.six_ensemble)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad --six-ensemble value "
                              f"{args.six_ensemble!r}") from exc
        stats, group, _ = six_ensemble_statistics(r)
        equivalences = [group]
    elif args.input:
        stats, equivalences = _pusey_stats_from_json(_load_json(args.input))
    else:
        raise SchemaError("pusey needs an input file or --six-ensemble")
    result = pusey_incomplete_check(stats, declared_equivalences=equivalences)
    return {
        "verdict": result.verdict,
        "scan_contextual": result.scan_contextual,
        "equivalence_contextual": result.equivalence_contextual,
        "pairs_checked": result.pairs_checked,
        "pairs_covered": result.pairs_covered,
        "seed": args.seed,
        "certificates": _certificates([result.certificate()],
                                      args.emit_certificate),
    }


def cmd_convert_bell(args) -> dict:
    if args.input:
        doc = _load_json(args.input)
        try:
            weights = {l: Fraction(w) for l, w in doc["weights"].items()}
            edges = [tuple(e) for e in doc["edges"]]
            projectors = {l: matrix_from_json(m)
                          for l, m in doc["projectors"].items()}
            dim = int(doc["dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed graph document: {exc}") from exc
        graph = make_orthogonality_graph(weights, edges, projectors=projectors)
    else:
        graph = kcbs_graph()
        dim = args.dim
    lift = contextuality_to_bell(graph, dim)
    return {
        "labels": list(lift.graph.labels),
        "dim": dim,
        "bound": lift.bound,
        "ld_maximum": lift.ld_maximum(),
        "quantum_value": lift.quantum_value,
        "violated": bool(lift.quantum_value > float(lift.bound) + 1e-12),
        "seed": args.seed,
    }


def cmd_qsl_run(args) -> dict:
    try:
        basis, value = args.prep.split(":")
        program = QslProgram(
            preparation=(basis, int(value)),
            gates=tuple(g for g in args.gates.split(",") if g),
            measurement=args.measure,
            shots=args.shots,
            seed=args.seed,
        )
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    return qsl_compare(program)


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def _add_common(parser, certificate: bool = False) -> None:
    parser.add_argument("--seed", type=int, default=0,
                        help="seed recorded in the report and used by any "
                             "randomized step")
    parser.add_argument("--out", default=None,
                        help="write the report to this path instead of stdout")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    if certificate:
        parser.add_argument("--emit-certificate", action="store_true",
                            help="include full certificate payloads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contextuality",
        description="Classify physical scenarios along the classicality "
                    "hierarchy and emit machine-checkable certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and schema-check an input")
    p.add_argument("input")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", help="full three-verdict classification")
    p.add_argument("input")
    p.add_argument("--kind", default=None,
                   choices=("empirical", "quantum", "gpt", "prep-ensemble"))
    p.add_argument("--restarts", type=int, default=16,
                   help="restarts for the heuristic embedding search")
    _add_common(p, certificate=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("kcbs", help="pentagon scenario on a qutrit")
    _add_common(p, certificate=True)
    p.set_defaults(func=cmd_kcbs)

    p = sub.add_parser("chsh", help="two-party correlation test")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="noise weight of the singlet component")
    p.add_argument("--angles", default=None,
                   help="four comma-separated measurement angles")
    _add_common(p, certificate=True)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("pm-square", help="two-qubit observable grid")
    p.add_argument("--trials", type=int, default=3,
                   help="random states for the state-independence spot check")
    _add_common(p, certificate=True)
    p.set_defaults(func=cmd_pm_square)

    p = sub.add_parser("embed", help="simplex-embedding test for a GPT")
    p.add_argument("input")
    p.add_argument("--restarts", type=int, default=64,
                   help="restarts for the heuristic search route")
    _add_common(p, certificate=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("prep-nc",
                       help="preparation noncontextuality case analysis")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--r", default=None,
                   help="target polar coordinate as an exact rational")
    p.add_argument("--axis", default=None,
                   help="three comma-separated target direction components")
    p.add_argument("--q", default=None,
                   help="decomposition weight as an exact rational")
    _add_common(p, certificate=True)
    p.set_defaults(func=cmd_prep_nc)

    p = sub.add_parser("pusey",
                       help="assignment-polytope scan without tomographic "
                            "completeness")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--six-ensemble", default=None,
                   help="run the built-in six-decomposition ensemble at "
                        "this exact r")
    _add_common(p, certificate=True)
    p.set_defaults(func=cmd_pusey)

    p = sub.add_parser("convert-bell",
                       help="lift an exclusivity inequality to a two-party "
                            "test")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--dim", type=int, default=3,
                   help="Hilbert dimension for the built-in pentagon graph")
    _add_common(p)
    p.set_defaults(func=cmd_convert_bell)

    p = sub.add_parser("qsl", help="classical two-bit qubit simulator")
    qsl_sub = p.add_subparsers(dest="qsl_command", required=True)
    run_p = qsl_sub.add_parser("run", help="run a prepare-gate-measure "
                                           "program and compare with quantum")
    run_p.add_argument("--prep", required=True, help="basis:value, e.g. Z:0")
    run_p.add_argument("--gates", default="",
                       help="comma-separated gate list, e.g. X,X")
    run_p.add_argument("--measure", required=True, help="measurement basis")
    run_p.add_argument("--shots", type=int, default=100_000)
    _add_common(run_p)
    run_p.set_defaults(func=cmd_qsl_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload = args.func(args)
    except LatticeViolation as exc:
        print(f"internal lattice violation: {exc}", file=sys.stderr)
        return 3
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(payload, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
