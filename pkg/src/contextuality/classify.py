"""Classicality hierarchy classifier with machine-checkable certificates.

Given an empirical model, a quantum scenario, a generalized probabilistic
theory, or a qubit preparation ensemble, this module runs the applicable
testers and assembles a three-verdict report: Bell locality (for inputs
with a complete two-party structure), existence of a global outcome
assignment (Kochen-Specker noncontextuality), and existence of a simplex
embedding or noncontextual ontic expansion (Spekkens noncontextuality).

The verdicts form an implication lattice: Bell nonlocality implies the
absence of a global assignment, which in turn implies the absence of a
noncontextual ontic expansion, and a certified ontic expansion requires
the other two verdicts not to contradict it.  Every assembled report is
checked against the lattice; a violation raises `LatticeViolation`, an
internal bug sentinel that no input should ever trigger.

Verification strategy: each "no" verdict carries the certificate produced
and re-verified by the underlying solver (exact Farkas duals, separating
inequalities with exact vertex bounds, embedding-refusal witnesses); for
bipartite empirical inputs the Bell and assignment verdicts are computed
from one shared rationalized model so their exact equivalence on finite
data cannot be broken by rounding.  Sub-tests are independent of each
other; sequential execution here is one valid schedule of the parallel
composition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .embedding import (
    DimensionTooLarge,
    Gpt,
    GptError,
    PrepEnsembleProblem,
    UnsharpEffectFlagged,
    embed_search,
    embed_sharp,
    gpt_from_json,
    induced_model,
    prep_nc_check,
    qubit_prep_ensemble,
    sharp_gpt_from_quantum,
)
from .polytope import TooLarge, make_behaviour, membership_lp
from .quantum import QuantumInputError, matrix_from_json, projective_context
from .scenario import (
    DisturbingModel,
    EmpiricalModel,
    SchemaError,
    from_quantum,
    model_from_json,
    rationalize_model,
    validate_no_disturbance,
)
from .sheaf import ScenarioTooLarge, solve_global_section

YES = "yes"
NO = "no"
UNDECIDED = "undecided"
NOT_APPLICABLE = "not-applicable"

KINDS = ("empirical", "quantum", "gpt", "prep-ensemble")

BELL_VALUES = (YES, NO, NOT_APPLICABLE)
TRI_VALUES = (YES, NO, UNDECIDED)

HIERARCHY_LEVELS = (
    "bell-nonlocal",
    "ks-contextual",
    "spekkens-contextual",
    "spekkens-noncontextual",
    "ks-noncontextual",
    "bell-local",
    "undecided",
)


class LatticeViolation(AssertionError):
    """Bug sentinel: an assembled report broke the implication lattice."""


@dataclass(frozen=True)
class RunConfig:
    """Execution knobs: expected input kind, seed, and solver limits."""

    kind: str | None = None
    seed: int = 0
    nd_tol: float = 1e-9
    embed_restarts: int = 16
    out: str | None = None

    def __post_init__(self):
        if self.kind is not None and self.kind not in KINDS:
            raise SchemaError(f"unknown input kind {self.kind!r}; "
                              f"expected one of {KINDS}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise SchemaError("seed must be a nonnegative integer")
        if self.embed_restarts < 1:
            raise SchemaError("embed_restarts must be positive")


@dataclass(frozen=True)
class ClassificationReport:
    """Three-verdict classicality report with certificates and notes."""

    bell_local: str
    ks_noncontextual: str
    spekkens_noncontextual: str
    hierarchy_level: str
    certificates: tuple
    notes: tuple = ()
    claims: dict | None = None
    claim_check: str | None = None


def check_implications(report: ClassificationReport) -> str | None:
    """Pure lattice check: `None` when consistent, else a violation detail.

    The rules: Bell nonlocality forces the assignment verdict to "no"; an
    assignment "no" forces the ontic-expansion verdict to "no"; an
    ontic-expansion "yes" requires the assignment verdict in {yes, undecided}
    and the Bell verdict in {yes, not-applicable}.
    """
    bell = report.bell_local
    ks = report.ks_noncontextual
    sp = report.spekkens_noncontextual
    if bell not in BELL_VALUES:
        return f"bell_local must be one of {BELL_VALUES}, got {bell!r}"
    if ks not in TRI_VALUES:
        return f"ks_noncontextual must be one of {TRI_VALUES}, got {ks!r}"
    if sp not in TRI_VALUES:
        return f"spekkens_noncontextual must be one of {TRI_VALUES}, got {sp!r}"
    if bell == NO and ks != NO:
        return f"bell_local=no requires ks_noncontextual=no, got {ks!r}"
    if ks == NO and sp != NO:
        return f"ks_noncontextual=no requires spekkens_noncontextual=no, got {sp!r}"
    if sp == YES and ks not in (YES, UNDECIDED):
        return f"spekkens_noncontextual=yes forbids ks_noncontextual={ks!r}"
    if sp == YES and bell not in (YES, NOT_APPLICABLE):
        return f"spekkens_noncontextual=yes forbids bell_local={bell!r}"
    return None


def hierarchy_level(bell: str, ks: str, sp: str) -> str:
    """Ladder label for a verdict triple, most nonclassical level first."""
    if bell == NO:
        return "bell-nonlocal"
    if ks == NO:
        return "ks-contextual"
    if sp == NO:
        return "spekkens-contextual"
    if sp == YES:
        return "spekkens-noncontextual"
    if ks == YES:
        return "ks-noncontextual"
    if bell == YES:
        return "bell-local"
    return "undecided"


def _claim_check(claims: dict | None, bell: str, ks: str, sp: str) -> str | None:
    if not claims or not claims.get("classical"):
        return None
    if NO in (bell, ks, sp):
        return "refuted"
    if bell in (YES, NOT_APPLICABLE) and ks == YES and sp == YES:
        return "consistent"
    return "undetermined"


def assemble_report(bell: str, ks: str, sp: str, certificates=(), notes=(),
                    claims: dict | None = None) -> ClassificationReport:
    """Build a report, asserting the implication lattice.

    Raises `LatticeViolation` when the triple breaks the lattice; routing
    in this module infers downward implications before assembly, so the
    sentinel firing means a solver bug, not bad input.
    """
    report = ClassificationReport(
        bell_local=bell,
        ks_noncontextual=ks,
        spekkens_noncontextual=sp,
        hierarchy_level=hierarchy_level(bell, ks, sp),
        certificates=tuple(certificates),
        notes=tuple(notes),
        claims=dict(claims) if claims else None,
        claim_check=_claim_check(claims, bell, ks, sp),
    )
    violation = check_implications(report)
    if violation is not None:
        raise LatticeViolation(violation)
    return report


# ---------------------------------------------------------------------------
# Bipartite structure detection
# ---------------------------------------------------------------------------

def bipartite_structure(model: EmpiricalModel) -> tuple[tuple, tuple] | None:
    """Detect a complete two-party layout in a scenario, or return `None`.

    Requires every context to pair two measurements, the co-occurrence graph
    to be two-colorable, every cross pair to appear as a context, and each
    side's measurements to share an outcome count.  The side containing the
    first declared measurement is reported first.
    """
    sc = model.scenario
    if not sc.contexts or any(len(c) != 2 for c in sc.contexts):
        return None
    neighbours: dict = {m: set() for m in sc.measurements}
    for a, b in sc.contexts:
        neighbours[a].add(b)
        neighbours[b].add(a)
    colour: dict = {}
    for start in sc.measurements:
        if start in colour:
            continue
        colour[start] = 0
        queue = [start]
        while queue:
            m = queue.pop()
            for nb in neighbours[m]:
                if nb not in colour:
                    colour[nb] = 1 - colour[m]
                    queue.append(nb)
                elif colour[nb] == colour[m]:
                    return None
    side_a = tuple(m for m in sc.measurements if colour[m] == 0)
    side_b = tuple(m for m in sc.measurements if colour[m] == 1)
    if not side_a or not side_b:
        return None
    if len(sc.contexts) != len(side_a) * len(side_b):
        return None
    pairs = {frozenset(c) for c in sc.contexts}
    if any(frozenset((a, b)) not in pairs for a in side_a for b in side_b):
        return None
    if len({len(sc.outcomes[m]) for m in side_a}) != 1:
        return None
    if len({len(sc.outcomes[m]) for m in side_b}) != 1:
        return None
    return side_a, side_b


def _behaviour_from_bipartite(model: EmpiricalModel, sides):
    side_a, side_b = sides
    sc = model.scenario
    n_a = len(sc.outcomes[side_a[0]])
    n_b = len(sc.outcomes[side_b[0]])
    index = {m: {o: i for i, o in enumerate(sc.outcomes[m])}
             for m in sc.measurements}
    p = {}
    for x, ma in enumerate(side_a):
        for y, mb in enumerate(side_b):
            canon = sc.canonical_context((ma, mb))
            pos_a = canon.index(ma)
            pos_b = canon.index(mb)
            for outc, v in model.tables[canon].items():
                p[(index[ma][outc[pos_a]], index[mb][outc[pos_b]], x, y)] = v
    return make_behaviour(len(side_a), len(side_b), n_a, n_b, p)


def _deterministic(model: EmpiricalModel) -> bool:
    return all(v == 0 or v == 1
               for table in model.tables.values() for v in table.values())


# ---------------------------------------------------------------------------
# Per-kind classifiers
# ---------------------------------------------------------------------------

def classify_model(model: EmpiricalModel,
                   config: RunConfig | None = None) -> ClassificationReport:
    """Classify an empirical model (per-context outcome tables).

    The assignment verdict comes from the exact global-section solver; when
    the scenario has a complete two-party layout the Bell verdict comes from
    local-polytope membership computed on the same rationalized model, so
    the two verdicts agree exactly on finite data.  The ontic-expansion
    verdict is inferred downward from a "no", read off a deterministic
    table, and left undecided otherwise: a bare table carries no embedding
    structure to test.
    """
    config = config or RunConfig()
    nd = validate_no_disturbance(model, tol=config.nd_tol)
    if not nd.passed:
        raise DisturbingModel(str(nd))
    rational = model if model.is_rational else rationalize_model(model)
    certificates: list = []
    notes: list = []

    try:
        section = solve_global_section(rational)
        ks = YES if section.feasible else NO
        certificates.append({"role": "ks", **section.certificate()})
    except ScenarioTooLarge as exc:
        ks = UNDECIDED
        notes.append(f"global-section solver skipped: {exc}")

    sides = bipartite_structure(rational)
    if sides is None:
        bell = NOT_APPLICABLE
        notes.append("no complete two-party structure; Bell verdict "
                     "not applicable")
    else:
        try:
            membership = membership_lp(_behaviour_from_bipartite(rational, sides))
            bell = YES if membership.inside else NO
            certificates.append({"role": "bell", **membership.certificate()})
        except TooLarge as exc:
            bell = NOT_APPLICABLE
            notes.append(f"membership solver skipped: {exc}")

    if bell == NO and ks == UNDECIDED:
        ks = NO
        notes.append("assignment verdict inferred from Bell nonlocality")
        certificates.append({"role": "ks", "kind": "implied-by-bell-nonlocality"})

    if ks == NO:
        sp = NO
        certificates.append({"role": "spekkens",
                             "kind": "implied-by-ks-contextuality"})
        notes.append("ontic-expansion verdict inferred: no global assignment "
                     "exists, so no noncontextual expansion exists")
    elif ks == YES and _deterministic(rational):
        sp = YES
        notes.append("deterministic table: the point assignment itself is a "
                     "noncontextual ontic model")
    else:
        sp = UNDECIDED
        notes.append("a bare empirical table carries no embedding structure; "
                     "ontic-expansion verdict undecided")
    return assemble_report(bell, ks, sp, certificates, notes)


def classify_quantum(state, contexts, config: RunConfig | None = None,
                     sharing: dict | None = None) -> ClassificationReport:
    """Classify a quantum scenario: a state plus commuting projective contexts.

    The assignment verdict is the global-section verdict of the Born-rule
    empirical model.  A "no" propagates down to the ontic-expansion verdict
    before any embedding runs; only when a global assignment exists is the
    scenario's sharp effect algebra built and tested for a simplex
    embedding.  Bell is not applicable: the input declares no party split.
    """
    config = config or RunConfig()
    model = from_quantum(state, contexts, sharing)
    certificates: list = []
    notes: list = ["quantum scenario declares no party split; Bell verdict "
                   "not applicable"]

    try:
        section = solve_global_section(model)
        ks = YES if section.feasible else NO
        certificates.append({"role": "ks", **section.certificate()})
    except ScenarioTooLarge as exc:
        ks = UNDECIDED
        notes.append(f"global-section solver skipped: {exc}")

    if ks == NO:
        sp = NO
        certificates.append({"role": "spekkens",
                             "kind": "implied-by-ks-contextuality"})
        notes.append("ontic-expansion verdict inferred: no global assignment "
                     "exists, so no noncontextual expansion exists")
    else:
        try:
            gpt = sharp_gpt_from_quantum([state], contexts)
            result = embed_sharp(gpt)
            sp = YES if result.feasible else NO
            certificates.append({"role": "spekkens", **result.certificate()})
        except (UnsharpEffectFlagged, ScenarioTooLarge, GptError) as exc:
            sp = UNDECIDED
            notes.append(f"embedding route unavailable: {exc}")
    return assemble_report(NOT_APPLICABLE, ks, sp, certificates, notes)


def classify_gpt(gpt: Gpt, config: RunConfig | None = None) -> ClassificationReport:
    """Classify a generalized probabilistic theory.

    With declared sharp contexts, the assignment verdict runs the
    global-section solver on every state's induced dichotomic model, and
    the ontic-expansion verdict runs the exact embedding constructor whose
    verdict provably coincides with the assignment verdict on such inputs.
    Without sharp contexts there is no outcome scenario to test, so the
    assignment verdict stays undecided and the heuristic embedding search
    can at most certify "yes" (its non-answers stay undecided).
    """
    config = config or RunConfig()
    certificates: list = []
    notes: list = []

    if gpt.sharp_contexts:
        ks = YES
        try:
            for i in range(gpt.n_states):
                section = solve_global_section(induced_model(gpt, i))
                if not section.feasible:
                    ks = NO
                    certificates.append({"role": "ks", "state": i,
                                         **section.certificate()})
                    break
            else:
                notes.append(f"all {gpt.n_states} induced models admit "
                             "global assignments")
        except (ScenarioTooLarge, UnsharpEffectFlagged) as exc:
            ks = UNDECIDED
            notes.append(f"global-section route unavailable: {exc}")
        try:
            result = embed_sharp(gpt)
            sp = YES if result.feasible else NO
            certificates.append({"role": "spekkens", **result.certificate()})
        except (ScenarioTooLarge, UnsharpEffectFlagged, GptError) as exc:
            if ks == NO:
                sp = NO
                certificates.append({"role": "spekkens",
                                     "kind": "implied-by-ks-contextuality"})
            else:
                sp = UNDECIDED
            notes.append(f"embedding constructor unavailable: {exc}")
    else:
        ks = UNDECIDED
        notes.append("no sharp contexts declared; no outcome scenario for "
                     "the assignment verdict")
        try:
            result = embed_search(gpt, seed=config.seed,
                                  restarts=config.embed_restarts)
            sp = YES if result.verdict == "embeddable" else UNDECIDED
            certificates.append({"role": "spekkens", **result.certificate()})
            if result.verdict != "embeddable":
                notes.append("embedding search is heuristic; its non-answer "
                             "leaves the verdict undecided")
        except DimensionTooLarge as exc:
            sp = UNDECIDED
            notes.append(f"embedding search skipped: {exc}")
    return assemble_report(NOT_APPLICABLE, ks, sp, certificates, notes)


def classify_prep_ensemble(problem: PrepEnsembleProblem,
                           config: RunConfig | None = None) -> ClassificationReport:
    """Classify a qubit preparation ensemble via the exact case analysis.

    An infeasible case analysis certifies preparation contextuality
    (ontic-expansion verdict "no"); a feasible analysis upgrades to "yes"
    only when an explicit ontic model was materialized.  Measurement-side
    verdicts do not apply: the input declares no measurement contexts.
    """
    config = config or RunConfig()
    result = prep_nc_check(problem)
    certificates = [{"role": "spekkens", **result.certificate()}]
    notes = ["preparation ensemble declares no measurement contexts; "
             "assignment verdict undecided, Bell not applicable"]
    if not result.feasible:
        sp = NO
    elif result.model is not None:
        sp = YES
        notes.append("explicit ontic model constructed and verified")
    else:
        sp = UNDECIDED
        notes.append("case analysis found no obstruction, but no ontic "
                     "model was materialized; verdict stays undecided")
    return assemble_report(NOT_APPLICABLE, UNDECIDED, sp, certificates, notes)


# ---------------------------------------------------------------------------
# Document parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParsedInput:
    """One parsed classifier input document."""

    kind: str
    model: EmpiricalModel | None = None
    state: np.ndarray | None = None
    contexts: tuple | None = None
    sharing: dict | None = None
    gpt: Gpt | None = None
    problem: PrepEnsembleProblem | None = None
    attachment: PrepEnsembleProblem | None = None
    claims: dict = field(default_factory=dict)


def _exact_fraction(value, name: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise SchemaError(f"{name} must be exact: an integer or an 'a/b' "
                          f"string, got {value!r}")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational literal for {name}: {value!r}") from exc


def prep_ensemble_from_json(doc: dict) -> PrepEnsembleProblem:
    """Parse `{"r", "axis"?, "q"?}` into a verified preparation ensemble."""
    if not isinstance(doc, dict):
        raise SchemaError("preparation ensemble must be a JSON object")
    if "r" not in doc:
        raise SchemaError("preparation ensemble needs field 'r'")
    r = _exact_fraction(doc["r"], "r")
    q = _exact_fraction(doc["q"], "q") if doc.get("q") is not None else None
    axis = doc.get("axis", (0.0, 0.0, 1.0))
    if not isinstance(axis, (list, tuple)) or len(axis) != 3:
        raise SchemaError("axis must be a list of three numbers")
    try:
        return qubit_prep_ensemble(r, axis=tuple(float(a) for a in axis), q=q)
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def _quantum_from_json(doc: dict):
    try:
        state = matrix_from_json(doc["state"])
        raw_contexts = doc["contexts"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"quantum input needs 'state' and 'contexts': {exc}") from exc
    contexts = []
    try:
        for raw_ctx in raw_contexts:
            members = []
            for raw_pc in raw_ctx:
                projs = [matrix_from_json(p) for p in raw_pc["projectors"]]
                members.append(projective_context(
                    raw_pc["label"], projs,
                    outcomes=raw_pc.get("outcomes")))
            contexts.append(members)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed projective context: {exc}") from exc
    except QuantumInputError as exc:
        raise SchemaError(str(exc)) from exc
    sharing = doc.get("sharing")
    if sharing is not None and not isinstance(sharing, dict):
        raise SchemaError("sharing must map measurement labels to labels")
    return state, tuple(contexts), sharing


def parse_document(doc) -> ParsedInput:
    """Parse one classifier input document, validating its schema."""
    if not isinstance(doc, dict):
        raise SchemaError("input document must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"unknown input kind {kind!r}; expected one of {KINDS}")
    claims = doc.get("claims", {})
    if not isinstance(claims, dict):
        raise SchemaError("claims must be a JSON object")
    attachment = None
    if "prep_ensemble" in doc:
        if kind == "prep-ensemble":
            raise SchemaError("a prep-ensemble input cannot carry a "
                              "prep_ensemble attachment")
        attachment = prep_ensemble_from_json(doc["prep_ensemble"])
    if kind == "empirical":
        if "model" not in doc:
            raise SchemaError("empirical input needs a 'model' field")
        return ParsedInput(kind=kind, model=model_from_json(doc["model"]),
                           attachment=attachment, claims=claims)
    if kind == "quantum":
        state, contexts, sharing = _quantum_from_json(doc)
        return ParsedInput(kind=kind, state=state, contexts=contexts,
                           sharing=sharing, attachment=attachment, claims=claims)
    if kind == "gpt":
        if "gpt" not in doc:
            raise SchemaError("gpt input needs a 'gpt' field")
        return ParsedInput(kind=kind, gpt=gpt_from_json(doc["gpt"]),
                           attachment=attachment, claims=claims)
    return ParsedInput(kind=kind, problem=prep_ensemble_from_json(doc),
                       claims=claims)


def _apply_attachment(report: ClassificationReport,
                      problem: PrepEnsembleProblem) -> tuple:
    """Fold an attached preparation ensemble into (sp, certificates, notes).

    Only contextuality transfers: an infeasible attached ensemble witnesses
    contextuality of the whole scenario, while a feasible one certifies
    nothing beyond itself and leaves the main verdict alone.
    """
    result = prep_nc_check(problem)
    cert = {"role": "spekkens", "scope": "attached-preparation-ensemble",
            **result.certificate()}
    if not result.feasible:
        sp = NO
        note = ("attached preparation ensemble is contextual; "
                "ontic-expansion verdict set to no")
    else:
        sp = report.spekkens_noncontextual
        note = ("attached preparation ensemble shows no obstruction; "
                "main verdict unchanged")
    return sp, report.certificates + (cert,), report.notes + (note,)


def classify(doc: dict, config: RunConfig | None = None) -> ClassificationReport:
    """Classify one input document (see `parse_document` for the schemas).

    Routes per declared kind, folds in an optional attached preparation
    ensemble and user claims, and asserts the implication lattice on the
    final report.
    """
    config = config or RunConfig()
    parsed = parse_document(doc)
    if config.kind is not None and config.kind != parsed.kind:
        raise SchemaError(f"input kind {parsed.kind!r} does not match "
                          f"configured kind {config.kind!r}")
    if parsed.kind == "empirical":
        report = classify_model(parsed.model, config)
    elif parsed.kind == "quantum":
        report = classify_quantum(parsed.state, parsed.contexts, config,
                                  sharing=parsed.sharing)
    elif parsed.kind == "gpt":
        report = classify_gpt(parsed.gpt, config)
    else:
        report = classify_prep_ensemble(parsed.problem, config)

    sp = report.spekkens_noncontextual
    certificates = report.certificates
    notes = report.notes
    if parsed.attachment is not None:
        sp, certificates, notes = _apply_attachment(report, parsed.attachment)
    return assemble_report(report.bell_local, report.ks_noncontextual, sp,
                           certificates, notes, claims=parsed.claims)


def report_to_json(report: ClassificationReport,
                   include_certificates: bool = True) -> dict:
    """JSON-ready report document; certificates shrink to summaries if asked."""
    doc: dict = {
        "bell_local": report.bell_local,
        "ks_noncontextual": report.ks_noncontextual,
        "spekkens_noncontextual": report.spekkens_noncontextual,
        "hierarchy_level": report.hierarchy_level,
        "notes": list(report.notes),
    }
    if report.claims:
        doc["claims"] = dict(report.claims)
        doc["claim_check"] = report.claim_check
    if include_certificates:
        doc["certificates"] = [dict(c) for c in report.certificates]
    else:
        doc["certificates"] = [
            {k: c[k] for k in ("role", "kind", "verdict", "scope") if k in c}
            for c in report.certificates]
    return doc
