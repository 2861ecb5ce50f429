"""Measurement scenarios, empirical models, no-disturbance checks, and sequential-statistics bounds.

Probability entries are exact `Fraction`s when supplied as rationals and
doubles otherwise.  Paths that feed exact feasibility solvers go through
`rationalize_model`, which rebuilds a nearby all-rational model that is
exactly normalised and exactly marginal-consistent, rather than rounding
entries independently (independent rounding breaks both properties).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactlp import solve_box_eq
from .quantum import ProjectiveContext, sup_norm

ND_TOL = 1e-9
SHARING_TOL = 1e-10


class SchemaError(ValueError):
    """Malformed JSON input."""


class LabelMismatch(ValueError):
    pass


class DegenerateContexts(ValueError):
    pass


class NotASubset(ValueError):
    pass


class DisturbingModel(ValueError):
    pass


class NonCommutingContext(ValueError):
    pass


class InconsistentSharing(ValueError):
    pass


# ---------------------------------------------------------------------------
# Scenario and model containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementScenario:
    """Measurements with finite outcome sets plus a cover of compatible contexts.

    Contexts are stored in canonical form: measurement labels ordered by their
    position in `measurements`.  Treat instances as immutable.
    """

    measurements: tuple
    outcomes: dict
    contexts: tuple

    def outcome_tuples(self, context) -> list[tuple]:
        """Joint outcomes of a context, lexicographic in canonical label order."""
        return list(itertools.product(*(self.outcomes[m] for m in context)))

    def canonical_context(self, labels) -> tuple:
        order = {m: i for i, m in enumerate(self.measurements)}
        for lab in labels:
            if lab not in order:
                raise LabelMismatch(f"unknown measurement {lab!r}")
        return tuple(sorted(labels, key=order.__getitem__))


def make_scenario(measurements, contexts) -> MeasurementScenario:
    """Validated scenario constructor.

    `measurements` is an ordered mapping/sequence of (label, outcomes);
    `contexts` a list of label collections.  Every measurement must be covered,
    every outcome set must have at least two elements, and no two contexts may
    be equal as sets.
    """
    if isinstance(measurements, dict):
        items = list(measurements.items())
    else:
        items = [(lab, outs) for lab, outs in measurements]
    labels = tuple(lab for lab, _ in items)
    if len(set(labels)) != len(labels):
        raise LabelMismatch("duplicate measurement labels")
    outcomes = {}
    for lab, outs in items:
        outs = tuple(outs)
        if len(outs) < 2:
            raise ValueError(f"measurement {lab!r} needs >= 2 outcomes, got {len(outs)}")
        if len(set(outs)) != len(outs):
            raise ValueError(f"measurement {lab!r} has duplicate outcomes")
        outcomes[lab] = outs
    order = {m: i for i, m in enumerate(labels)}
    canon = []
    for ctx in contexts:
        ctx = list(ctx)
        for lab in ctx:
            if lab not in order:
                raise LabelMismatch(f"context references unknown measurement {lab!r}")
        if len(set(ctx)) != len(ctx):
            raise LabelMismatch(f"context {ctx} repeats a measurement")
        canon.append(tuple(sorted(ctx, key=order.__getitem__)))
    if len({frozenset(c) for c in canon}) != len(canon):
        raise DegenerateContexts("two contexts contain the same measurement set")
    covered = set().union(*map(set, canon)) if canon else set()
    missing = [m for m in labels if m not in covered]
    if missing:
        raise ValueError(f"measurements not covered by any context: {missing}")
    return MeasurementScenario(measurements=labels, outcomes=outcomes,
                               contexts=tuple(canon))


@dataclass(frozen=True)
class EmpiricalModel:
    """Per-context joint outcome distributions over a measurement scenario."""

    scenario: MeasurementScenario
    tables: dict

    @property
    def is_rational(self) -> bool:
        return all(isinstance(v, Fraction)
                   for t in self.tables.values() for v in t.values())

    def table(self, context) -> dict:
        return self.tables[self.scenario.canonical_context(context)]


def make_model(scenario: MeasurementScenario, tables: dict) -> EmpiricalModel:
    """Validated model constructor.

    Table keys may list a context's labels in any order; outcome tuples are
    permuted into canonical order.  Missing joint outcomes are filled with
    zero.  If any entry is a float the whole model is stored as floats,
    otherwise everything is an exact `Fraction`.
    """
    staged: dict[tuple, dict] = {}
    for key, table in tables.items():
        labels = tuple(key) if not isinstance(key, str) else tuple(key.split(","))
        canon = scenario.canonical_context(labels)
        if canon not in scenario.contexts:
            raise LabelMismatch(f"{labels} is not a declared context")
        perm = [labels.index(m) for m in canon]
        entries = {}
        for outc, val in table.items():
            outc = tuple(outc) if isinstance(outc, (tuple, list)) else (outc,)
            if len(outc) != len(canon):
                raise ValueError(f"outcome {outc} has wrong arity for context {canon}")
            entries[tuple(outc[i] for i in perm)] = val
        staged[canon] = entries
    missing = [c for c in scenario.contexts if c not in staged]
    if missing:
        raise ValueError(f"no table supplied for contexts {missing}")

    has_float = any(isinstance(v, float)
                    for t in staged.values() for v in t.values())
    zero = 0.0 if has_float else Fraction(0)

    tables_out: dict[tuple, dict] = {}
    for canon, entries in staged.items():
        valid = scenario.outcome_tuples(canon)
        valid_set = set(valid)
        for outc in entries:
            if outc not in valid_set:
                raise ValueError(f"outcome {outc} not valid for context {canon}")
        full = {}
        for outc in valid:
            v = entries.get(outc, zero)
            if has_float:
                v = float(v)
                if v < -1e-12:
                    raise ValueError(f"negative probability {v} in context {canon}")
                v = max(0.0, v)
            else:
                v = v if isinstance(v, Fraction) else Fraction(v)
                if v < 0:
                    raise ValueError(f"negative probability {v} in context {canon}")
            full[outc] = v
        total = sum(full.values())
        if abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"context {canon} table sums to {float(total)}, not 1")
        tables_out[canon] = full
    return EmpiricalModel(scenario=scenario, tables=tables_out)


# ---------------------------------------------------------------------------
# Marginals and no-disturbance
# ---------------------------------------------------------------------------

def marginalize(table: dict, context, subset) -> dict:
    """Sum a joint table over the measurements outside `subset`.

    `context` names the positions of the joint outcome tuples; the result is
    keyed by outcome tuples in the order `subset` lists its labels.
    """
    context = tuple(context)
    subset = tuple(subset)
    if not set(subset) <= set(context):
        raise NotASubset(f"{subset} is not a subset of {context}")
    idx = [context.index(m) for m in subset]
    out: dict = {}
    for outc, v in table.items():
        key = tuple(outc[i] for i in idx)
        out[key] = out.get(key, v * 0) + v
    return out


@dataclass(frozen=True)
class NoDisturbanceReport:
    passed: bool
    worst_violation: float
    worst_pair: tuple | None

    def __str__(self) -> str:
        if self.passed:
            return f"no-disturbance: pass (worst violation {self.worst_violation:.3e})"
        a, b, overlap = self.worst_pair
        return (f"no-disturbance: FAIL (violation {self.worst_violation:.3e} "
                f"between {a} and {b} on {overlap})")


def validate_no_disturbance(model: EmpiricalModel, tol: float = ND_TOL) -> NoDisturbanceReport:
    """Max l-infinity distance between context marginals on every overlap."""
    sc = model.scenario
    worst = 0.0
    worst_pair = None
    for ca, cb in itertools.combinations(sc.contexts, 2):
        overlap = tuple(m for m in sc.measurements if m in set(ca) & set(cb))
        if not overlap:
            continue
        ma = marginalize(model.tables[ca], ca, overlap)
        mb = marginalize(model.tables[cb], cb, overlap)
        for outc in sc.outcome_tuples(overlap):
            d = abs(float(ma.get(outc, 0)) - float(mb.get(outc, 0)))
            if d > worst:
                worst = d
                worst_pair = (ca, cb, overlap)
    return NoDisturbanceReport(passed=worst <= tol, worst_violation=worst,
                               worst_pair=worst_pair)


def exact_no_disturbance(model: EmpiricalModel) -> bool:
    """Exact marginal agreement; meaningful only for all-rational models."""
    sc = model.scenario
    for ca, cb in itertools.combinations(sc.contexts, 2):
        overlap = tuple(m for m in sc.measurements if m in set(ca) & set(cb))
        if not overlap:
            continue
        ma = marginalize(model.tables[ca], ca, overlap)
        mb = marginalize(model.tables[cb], cb, overlap)
        for outc in set(ma) | set(mb):
            if ma.get(outc, Fraction(0)) != mb.get(outc, Fraction(0)):
                return False
    return True


# ---------------------------------------------------------------------------
# Quantum -> empirical conversion
# ---------------------------------------------------------------------------

def from_quantum(state: np.ndarray, contexts, sharing: dict | None = None) -> EmpiricalModel:
    """Empirical model of a density matrix under commuting projective contexts.

    `contexts` is a list of contexts, each a list of `ProjectiveContext`
    measurements.  `sharing` maps measurement labels to scenario labels so the
    same observable appearing in several contexts is identified; it defaults
    to the identity on labels.  Repeated labels must carry identical outcome
    lists and projectors (sup-norm within 1e-10), and measurements within one
    context must commute projector-by-projector (within 1e-10).
    """
    sharing = dict(sharing or {})
    state = np.asarray(state, dtype=complex)
    if state.ndim == 2 and state.shape[1] == 1:
        state = state @ state.conj().T

    seen: dict[str, ProjectiveContext] = {}
    order: list[str] = []
    ctx_labels: list[list[str]] = []
    ctx_members: list[list[ProjectiveContext]] = []
    for ctx in contexts:
        members = [ctx] if isinstance(ctx, ProjectiveContext) else list(ctx)
        labels = []
        for pc in members:
            lab = sharing.get(pc.label, pc.label)
            if lab in seen:
                prev = seen[lab]
                if prev.outcomes != pc.outcomes:
                    raise InconsistentSharing(f"label {lab!r} re-used with different outcomes")
                diff = max(sup_norm(p - q) for p, q in zip(prev.projectors, pc.projectors))
                if diff > SHARING_TOL:
                    raise InconsistentSharing(
                        f"label {lab!r} re-used with different projectors (diff {diff:.2e})")
            else:
                seen[lab] = pc
                order.append(lab)
            labels.append(lab)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                for p in members[i].projectors:
                    for q in members[j].projectors:
                        if sup_norm(p @ q - q @ p) > SHARING_TOL:
                            raise NonCommutingContext(
                                f"measurements {labels[i]!r} and {labels[j]!r} do not commute")
        ctx_labels.append(labels)
        ctx_members.append(members)

    scenario = make_scenario([(lab, seen[lab].outcomes) for lab in order], ctx_labels)
    tables = {}
    for labels, members in zip(ctx_labels, ctx_members):
        table = {}
        for picks in itertools.product(*(range(len(m.outcomes)) for m in members)):
            op = np.eye(state.shape[0], dtype=complex)
            for m, k in zip(members, picks):
                op = op @ m.projectors[k]
            p = float(np.trace(state @ op).real)
            table[tuple(m.outcomes[k] for m, k in zip(members, picks))] = max(0.0, p)
        tables[tuple(labels)] = table
    model = make_model(scenario, tables)
    report = validate_no_disturbance(model)
    if not report.passed:
        raise DisturbingModel(str(report))
    return model


# ---------------------------------------------------------------------------
# Sequential-measurement statistics (diagnostic only)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SequentialStats:
    """Outcome statistics for sequences over two +-1 observables A and B.

    `p_a`, `p_b`: single-measurement distributions over {+1, -1}.
    `p_ab`: joint distribution over outcome pairs of the sequence A then B.
    `p_bab`: joint distribution over the first and third outcomes of the
    sequence B, A, B (middle outcome discarded).
    `hv_ab`: optional joint counterfactual distribution assigning both
    single-shot values at once; defaults to `p_ab`.
    `flip_joint`: optional joint distribution of the single-shot B outcome
    and the second outcome of the A-then-B sequence; defaults to `p_bab`.
    """

    p_a: dict
    p_b: dict
    p_ab: dict
    p_bab: dict
    hv_ab: dict | None = None
    flip_joint: dict | None = None

    def __post_init__(self):
        for name in ("p_a", "p_b", "p_ab", "p_bab", "hv_ab", "flip_joint"):
            dist = getattr(self, name)
            if dist is None:
                continue
            vals = list(dist.values())
            if any(float(v) < -1e-12 or float(v) > 1 + 1e-12 for v in vals):
                raise ValueError(f"{name} has entries outside [0, 1]")
            if abs(sum(float(v) for v in vals) - 1.0) > 1e-9:
                raise ValueError(f"{name} is not normalised")


def _pair_correlator(dist: dict) -> float:
    return sum(a * b * float(p) for (a, b), p in dist.items())


@dataclass(frozen=True)
class FlipErrorReport:
    corr_joint: float
    corr_sequential: float
    lhs: float
    p_flip: float
    p_err: float
    chain_holds: bool


def flip_error_bounds(stats: SequentialStats, tol: float = 1e-12) -> FlipErrorReport:
    """Disagreement bounds linking joint, sequential, and repeated statistics.

    Checks the two-step chain: the gap between the joint correlator and the
    sequential correlator is at most twice the flip probability of B across
    an intervening A, which in turn is at most twice the error probability
    read off the B,A,B sequence.  Diagnostic only; never feeds verdicts.
    """
    hv = stats.hv_ab if stats.hv_ab is not None else stats.p_ab
    flip = stats.flip_joint if stats.flip_joint is not None else stats.p_bab
    corr_joint = _pair_correlator(hv)
    corr_seq = _pair_correlator(stats.p_ab)
    lhs = abs(corr_joint - corr_seq)
    p_flip = float(flip.get((1, -1), 0)) + float(flip.get((-1, 1), 0))
    p_err = float(stats.p_bab.get((1, -1), 0)) + float(stats.p_bab.get((-1, 1), 0))
    chain = (lhs <= 2 * p_flip + tol) and (2 * p_flip <= 2 * p_err + tol)
    return FlipErrorReport(corr_joint=corr_joint, corr_sequential=corr_seq,
                           lhs=lhs, p_flip=p_flip, p_err=p_err, chain_holds=chain)


def sequential_stats_from_quantum(state, obs_a, obs_b) -> SequentialStats:
    """Statistics of projective sequences of two +-1 observables under state-update.

    Post-measurement states follow the projection postulate; the middle
    outcome of the B,A,B sequence is summed out.
    """
    from .quantum import eigen_projector

    rho = np.asarray(state, dtype=complex)
    if rho.ndim == 2 and rho.shape[1] == 1:
        rho = rho @ rho.conj().T
    proj_a = {s: eigen_projector(obs_a, s) for s in (1, -1)}
    proj_b = {s: eigen_projector(obs_b, s) for s in (1, -1)}

    def prob(op, sigma):
        return max(0.0, float(np.trace(sigma @ op).real))

    p_a = {s: prob(proj_a[s], rho) for s in (1, -1)}
    p_b = {s: prob(proj_b[s], rho) for s in (1, -1)}
    p_ab = {}
    for a in (1, -1):
        for b in (1, -1):
            p_ab[(a, b)] = prob(proj_b[b] @ proj_a[a] @ rho @ proj_a[a], np.eye(len(rho)))
    p_bab = {}
    for b1 in (1, -1):
        for b3 in (1, -1):
            total = 0.0
            for a in (1, -1):
                chain = proj_a[a] @ proj_b[b1] @ rho @ proj_b[b1] @ proj_a[a]
                total += prob(proj_b[b3] @ chain, np.eye(len(rho)))
            p_bab[(b1, b3)] = total
    return SequentialStats(p_a=p_a, p_b=p_b, p_ab=p_ab, p_bab=p_bab)


# ---------------------------------------------------------------------------
# Rationalization
# ---------------------------------------------------------------------------

def _limit(x: float, max_den: int) -> Fraction:
    return Fraction(x).limit_denominator(max_den)


def _solve_overlap(values: list[float], rows, rhs, slack: Fraction, max_den: int,
                   attempts: int = 10):
    """Box LP around float centres, retrying with doubled slack on infeasibility."""
    n = len(values)
    sum_row = [[Fraction(1)] * n]
    a_rows = sum_row + rows
    b = [Fraction(1)] + rhs
    for attempt in range(attempts):
        s = slack * (2 ** attempt)
        lower, upper = [], []
        for f in values:
            if f <= 1e-9 and attempt < 5:
                lower.append(Fraction(0))
                upper.append(Fraction(0))
            else:
                c = _limit(f, max_den)
                lower.append(max(Fraction(0), c - s))
                upper.append(min(Fraction(1), c + s))
        sol = solve_box_eq(a_rows, b, lower, upper)
        if sol is not None:
            return sol
    return None


def rationalize_model(model: EmpiricalModel, max_den: int = 10 ** 6,
                      slack: Fraction = Fraction(1, 10 ** 5)) -> EmpiricalModel:
    """Nearby all-rational model that is exactly normalised and exactly marginal-consistent.

    Already-rational exactly-consistent models pass through unchanged.
    Otherwise overlap distributions are fixed first (smallest overlaps first,
    each constrained to agree with previously fixed sub-overlaps), then each
    context table is rebuilt around its float entries subject to the fixed
    overlap marginals.  Entries move by at most a few times `slack`; float
    entries at or below 1e-9 are pinned to exact zero so that downstream
    support arguments remain valid.
    """
    if model.is_rational:
        if all(sum(t.values()) == 1 for t in model.tables.values()) \
                and exact_no_disturbance(model):
            return model

    report = validate_no_disturbance(model)
    if not report.passed:
        raise DisturbingModel(str(report))

    sc = model.scenario
    float_tables = {c: {o: float(v) for o, v in t.items()} for c, t in model.tables.items()}

    overlaps: set[tuple] = set()
    for ca, cb in itertools.combinations(sc.contexts, 2):
        inter = tuple(m for m in sc.measurements if m in set(ca) & set(cb))
        if inter:
            overlaps.add(inter)
    ordered = sorted(overlaps, key=lambda u: (len(u), u))

    fixed: dict[tuple, dict] = {}
    for u in ordered:
        host = next(c for c in sc.contexts if set(u) <= set(c))
        marg = marginalize(float_tables[host], host, u)
        outs = sc.outcome_tuples(u)
        values = [marg.get(o, 0.0) for o in outs]
        rows, rhs = [], []
        for w in ordered:
            if w in fixed and set(w) < set(u):
                idx = [u.index(m) for m in w]
                for wo, wv in fixed[w].items():
                    rows.append([Fraction(1) if tuple(o[i] for i in idx) == wo
                                 else Fraction(0) for o in outs])
                    rhs.append(wv)
        sol = _solve_overlap(values, rows, rhs, slack, max_den)
        if sol is None:
            raise ValueError(f"could not rationalize overlap {u}")
        fixed[u] = dict(zip(outs, sol))

    new_tables = {}
    for c in sc.contexts:
        outs = sc.outcome_tuples(c)
        if c in fixed:
            new_tables[c] = {o: fixed[c][o] for o in outs}
            continue
        values = [float_tables[c].get(o, 0.0) for o in outs]
        rows, rhs = [], []
        for u in ordered:
            if set(u) < set(c):
                idx = [c.index(m) for m in u]
                for uo, uv in fixed[u].items():
                    rows.append([Fraction(1) if tuple(o[i] for i in idx) == uo
                                 else Fraction(0) for o in outs])
                    rhs.append(uv)
        sol = _solve_overlap(values, rows, rhs, 2 * slack, max_den)
        if sol is None:
            raise ValueError(f"could not rationalize context {c}")
        new_tables[c] = dict(zip(outs, sol))

    out = EmpiricalModel(scenario=sc, tables=new_tables)
    if not exact_no_disturbance(out):
        raise AssertionError("rationalized model lost exact marginal consistency")
    return out


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def _value_to_json(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    return float(v)


def _value_from_json(v):
    if isinstance(v, bool):
        raise SchemaError(f"probability entries must be numbers, got {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad rational literal {v!r}") from exc
    raise SchemaError(f"unsupported probability entry {v!r}")


def model_to_json(model: EmpiricalModel) -> dict:
    sc = model.scenario
    return {
        "measurements": [{"label": m, "outcomes": list(sc.outcomes[m])}
                         for m in sc.measurements],
        "contexts": [list(c) for c in sc.contexts],
        "tables": {
            ",".join(str(m) for m in c): {
                ",".join(str(o) for o in outc): _value_to_json(v)
                for outc, v in table.items()
            }
            for c, table in model.tables.items()
        },
    }


def _match_outcome(token: str, declared) -> object:
    for o in declared:
        if str(o) == token:
            return o
    raise SchemaError(f"outcome token {token!r} not among declared outcomes {declared}")


def model_from_json(doc: dict) -> EmpiricalModel:
    """Parse {"measurements", "contexts", "tables"}; rationals accepted as "3/10"."""
    try:
        meas = [(m["label"], tuple(m["outcomes"])) for m in doc["measurements"]]
        contexts = [list(c) for c in doc["contexts"]]
        raw_tables = doc["tables"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"missing or malformed field: {exc}") from exc
    try:
        scenario = make_scenario(meas, contexts)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc

    tables = {}
    for key, table in raw_tables.items():
        labels = tuple(key.split(","))
        try:
            canon = scenario.canonical_context(labels)
        except LabelMismatch as exc:
            raise SchemaError(str(exc)) from exc
        entries = {}
        for okey, val in table.items():
            tokens = okey.split(",")
            if len(tokens) != len(labels):
                raise SchemaError(f"outcome key {okey!r} has wrong arity for {key!r}")
            outc = tuple(_match_outcome(t, scenario.outcomes[m])
                         for t, m in zip(tokens, labels))
            entries[outc] = _value_from_json(val)
        tables[labels] = entries
    try:
        return make_model(scenario, tables)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
