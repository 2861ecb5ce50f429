"""Bell-local polytope membership, two-party inequalities, and graph-based noncontextuality bounds.

Membership in the local polytope is decided by an exact rational LP over the
deterministic vertices; an outside verdict ships a separating inequality
normalised so that its bound is the exact maximum over those vertices, which
the behaviour then exceeds strictly.  Graph machinery covers weighted
independence numbers, single-system exclusivity inequalities, and their
two-party lift evaluated on the uniform maximally entangled vector.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactlp import check_farkas, check_solution, format_fraction, solve_eq_nonneg
from .quantum import (
    eigen_projector,
    max_entangled,
    sup_norm,
    tensor,
)
from .scenario import (
    EmpiricalModel,
    LabelMismatch,
    SchemaError,
    make_model,
    make_scenario,
    rationalize_model,
)

MAX_LD_VERTICES = 10 ** 6
MAX_GRAPH_VERTICES = 40
MAX_LIFT_VERTICES = 10


class TooLarge(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class DegenerateContexts(ValueError):
    pass


class MissingProjectors(ValueError):
    pass


# ---------------------------------------------------------------------------
# Behaviours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Behaviour:
    """Two-party conditional table p(a, b | x, y) with integer-indexed settings/outcomes."""

    nX: int
    nY: int
    nA: int
    nB: int
    p: dict

    @property
    def is_rational(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.p.values())

    def prob(self, a, b, x, y):
        return self.p[(a, b, x, y)]

    def coords(self) -> list[tuple]:
        return [(a, b, x, y)
                for x in range(self.nX) for y in range(self.nY)
                for a in range(self.nA) for b in range(self.nB)]

    def vector(self) -> list:
        return [self.p[c] for c in self.coords()]

    def correlator(self, x: int, y: int) -> float:
        """E(x, y) with outcome index 0 valued +1 and index 1 valued -1 (dichotomic only)."""
        if self.nA != 2 or self.nB != 2:
            raise ShapeMismatch("correlators need dichotomic outcomes on both sides")
        return sum((1 - 2 * a) * (1 - 2 * b) * self.p[(a, b, x, y)]
                   for a in range(2) for b in range(2))


def make_behaviour(nX: int, nY: int, nA: int, nB: int, p: dict) -> Behaviour:
    """Validated constructor; missing entries are filled with zero."""
    has_float = any(isinstance(v, float) for v in p.values())
    zero = 0.0 if has_float else Fraction(0)
    full = {}
    for x in range(nX):
        for y in range(nY):
            s = zero
            for a in range(nA):
                for b in range(nB):
                    v = p.get((a, b, x, y), zero)
                    v = float(v) if has_float else (v if isinstance(v, Fraction) else Fraction(v))
                    if v < 0:
                        if not (has_float and v >= -1e-12):
                            raise ValueError(f"negative probability at {(a, b, x, y)}")
                        v = 0.0
                    full[(a, b, x, y)] = v
                    s = s + v
            if abs(float(s) - 1.0) > 1e-12:
                raise ValueError(f"slice (x={x}, y={y}) sums to {float(s)}, not 1")
    for key in p:
        a, b, x, y = key
        if not (0 <= a < nA and 0 <= b < nB and 0 <= x < nX and 0 <= y < nY):
            raise ShapeMismatch(f"entry {key} outside declared ranges")
    return Behaviour(nX=nX, nY=nY, nA=nA, nB=nB, p=full)


@dataclass(frozen=True)
class NoSignalingReport:
    passed: bool
    worst_violation: float


def no_signaling_report(b: Behaviour, tol: float = 1e-9) -> NoSignalingReport:
    """Marginal of each side must not depend on the other side's setting.

    Rational tables are compared exactly (a zero tolerance is then meaningful).
    """
    worst = 0
    for x in range(b.nX):
        for a in range(b.nA):
            margs = [sum(b.p[(a, bb, x, y)] for bb in range(b.nB))
                     for y in range(b.nY)]
            worst = max(worst, max(margs) - min(margs))
    for y in range(b.nY):
        for bb in range(b.nB):
            margs = [sum(b.p[(a, bb, x, y)] for a in range(b.nA))
                     for x in range(b.nX)]
            worst = max(worst, max(margs) - min(margs))
    return NoSignalingReport(passed=worst <= tol, worst_violation=float(worst))


def behaviour_to_model(b: Behaviour) -> EmpiricalModel:
    """Bipartite empirical model with one context per setting pair."""
    meas = [(f"A{x}", tuple(range(b.nA))) for x in range(b.nX)] + \
           [(f"B{y}", tuple(range(b.nB))) for y in range(b.nY)]
    contexts = [[f"A{x}", f"B{y}"] for x in range(b.nX) for y in range(b.nY)]
    sc = make_scenario(meas, contexts)
    tables = {}
    for x in range(b.nX):
        for y in range(b.nY):
            tables[(f"A{x}", f"B{y}")] = {
                (a, bb): b.p[(a, bb, x, y)]
                for a in range(b.nA) for bb in range(b.nB)}
    return make_model(sc, tables)


def rationalize_behaviour(b: Behaviour, max_den: int = 10 ** 6) -> Behaviour:
    """Nearby exactly no-signaling rational behaviour (via the empirical-model bridge)."""
    if b.is_rational and no_signaling_report(b, tol=0.0).passed:
        return b
    model = rationalize_model(behaviour_to_model(b), max_den=max_den)
    p = {}
    for x in range(b.nX):
        for y in range(b.nY):
            table = model.tables[(f"A{x}", f"B{y}")]
            for (a, bb), v in table.items():
                p[(a, bb, x, y)] = v
    return make_behaviour(b.nX, b.nY, b.nA, b.nB, p)


def behaviour_from_quantum(state, alice, bob) -> Behaviour:
    """Born-rule behaviour for per-setting projective measurements on a bipartite state.

    `alice` and `bob` list one `ProjectiveContext` per setting; outcome indices
    follow each measurement's projector order.  All settings on a side must
    share an outcome count.
    """
    rho = np.asarray(state, dtype=complex)
    if rho.ndim == 2 and rho.shape[1] == 1:
        rho = rho @ rho.conj().T
    nA = len(alice[0].projectors)
    nB = len(bob[0].projectors)
    if any(len(m.projectors) != nA for m in alice) or \
            any(len(m.projectors) != nB for m in bob):
        raise ShapeMismatch("all settings on one side must share an outcome count")
    p = {}
    for x, ma in enumerate(alice):
        for y, mb in enumerate(bob):
            for a, pa in enumerate(ma.projectors):
                for b, pb in enumerate(mb.projectors):
                    op = tensor(pa, pb)
                    if op.shape != rho.shape:
                        raise ShapeMismatch(
                            f"state dim {rho.shape[0]} vs projectors {op.shape[0]}")
                    p[(a, b, x, y)] = max(0.0, float(np.trace(rho @ op).real))
    return make_behaviour(len(alice), len(bob), nA, nB, p)


def behaviour_to_json(b: Behaviour) -> dict:
    def enc(v):
        if isinstance(v, Fraction):
            return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
        return float(v)
    return {"nX": b.nX, "nY": b.nY, "nA": b.nA, "nB": b.nB,
            "p": {f"{a},{b}|{x},{y}": enc(v) for (a, b, x, y), v in b.p.items()}}


def behaviour_from_json(doc: dict) -> Behaviour:
    try:
        nX, nY, nA, nB = (int(doc[k]) for k in ("nX", "nY", "nA", "nB"))
        raw = doc["p"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"missing or malformed behaviour field: {exc}") from exc
    p = {}
    for key, val in raw.items():
        try:
            outs, setts = key.split("|")
            a, b = (int(t) for t in outs.split(","))
            x, y = (int(t) for t in setts.split(","))
        except ValueError as exc:
            raise SchemaError(f"bad behaviour key {key!r}") from exc
        if isinstance(val, bool):
            raise SchemaError(f"probability entries must be numbers, got {val!r}")
        if isinstance(val, int):
            p[(a, b, x, y)] = Fraction(val)
        elif isinstance(val, float):
            p[(a, b, x, y)] = val
        elif isinstance(val, str):
            try:
                p[(a, b, x, y)] = Fraction(val)
            except (ValueError, ZeroDivisionError) as exc:
                raise SchemaError(f"bad rational literal {val!r}") from exc
        else:
            raise SchemaError(f"unsupported probability entry {val!r}")
    try:
        return make_behaviour(nX, nY, nA, nB, p)
    except (ValueError, ShapeMismatch) as exc:
        raise SchemaError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Local deterministic vertices and membership
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LdVertex:
    """Deterministic strategy: one outcome per setting on each side."""

    f: tuple
    g: tuple

    def behaviour(self, nA: int, nB: int) -> Behaviour:
        p = {}
        for x, a in enumerate(self.f):
            for y, b in enumerate(self.g):
                p[(a, b, x, y)] = Fraction(1)
        return make_behaviour(len(self.f), len(self.g), nA, nB, p)


def enumerate_ld_vertices(nX: int, nY: int, nA: int, nB: int) -> list[LdVertex]:
    count = nA ** nX * nB ** nY
    if count > MAX_LD_VERTICES:
        raise TooLarge(f"{count} deterministic vertices exceed the supported {MAX_LD_VERTICES}")
    out = []
    for f in itertools.product(range(nA), repeat=nX):
        for g in itertools.product(range(nB), repeat=nY):
            out.append(LdVertex(f=f, g=g))
    return out


@dataclass(frozen=True)
class LinearInequality:
    """Functional sum of coefficients[a,b,x,y] * p(a,b|x,y) bounded above."""

    coefficients: dict
    bound: Fraction
    kind: str = "bell"

    def to_json(self) -> dict:
        return {"kind": self.kind,
                "coefficients": {f"{a},{b}|{x},{y}": format_fraction(Fraction(v))
                                 for (a, b, x, y), v in self.coefficients.items()},
                "bound": format_fraction(Fraction(self.bound))}


def evaluate_inequality(ineq: LinearInequality, b: Behaviour):
    """Exact inner product plus the satisfied flag (tolerance 1e-12 for float tables)."""
    value = 0
    for key, coeff in ineq.coefficients.items():
        if key not in b.p:
            raise ShapeMismatch(f"coefficient key {key} outside behaviour shape")
        value = value + coeff * b.p[key]
    tol = 0 if b.is_rational else 1e-12
    return value, bool(value <= ineq.bound + tol)


@dataclass(frozen=True)
class MembershipResult:
    inside: bool
    weights: tuple | None
    separating: LinearInequality | None
    value: Fraction | None
    witness_vertex: int | None
    behaviour: Behaviour

    @property
    def verdict(self) -> str:
        return "inside" if self.inside else "outside"

    def certificate(self) -> dict:
        cert: dict = {"kind": "local-polytope-membership", "verdict": self.verdict}
        if self.weights is not None:
            cert["weights"] = [format_fraction(w) for w in self.weights]
        if self.separating is not None:
            cert["separating"] = self.separating.to_json()
            cert["value_on_behaviour"] = format_fraction(self.value)
            cert["witness_vertex"] = self.witness_vertex
        return cert


def membership_lp(b: Behaviour) -> MembershipResult:
    """Exact convex-mixture test against the deterministic vertices.

    Float behaviours are first replaced by a nearby exactly no-signaling
    rational behaviour.  Outside verdicts carry a separating inequality whose
    bound is the exact vertex maximum, so the behaviour's value exceeds the
    bound strictly and every vertex satisfies it, both re-checkable by direct
    arithmetic.
    """
    rb = rationalize_behaviour(b)
    vertices = enumerate_ld_vertices(rb.nX, rb.nY, rb.nA, rb.nB)
    coords = rb.coords()
    columns = []
    for v in vertices:
        vb = v.behaviour(rb.nA, rb.nB)
        columns.append([vb.p[c] for c in coords] + [Fraction(1)])
    rows = [[col[i] for col in columns] for i in range(len(coords) + 1)]
    rhs = [rb.p[c] for c in coords] + [Fraction(1)]
    res = solve_eq_nonneg(rows, rhs)
    if res.feasible:
        if not check_solution(rows, rhs, res.x):
            raise AssertionError("membership primal failed re-verification")
        return MembershipResult(inside=True, weights=res.x, separating=None,
                                value=None, witness_vertex=None, behaviour=rb)
    if not check_farkas(rows, rhs, res.farkas):
        raise AssertionError("membership dual failed re-verification")
    y = res.farkas
    coeffs = {c: y[i] for i, c in enumerate(coords)}
    vertex_values = []
    for col in columns:
        vertex_values.append(sum(y[i] * col[i] for i in range(len(coords))))
    bound = max(vertex_values)
    witness = vertex_values.index(bound)
    ineq = LinearInequality(coefficients=coeffs, bound=bound, kind="bell")
    value = sum(coeffs[c] * rb.p[c] for c in coords)
    if not value > bound:
        raise AssertionError("separating inequality fails to separate")
    return MembershipResult(inside=False, weights=None, separating=ineq,
                            value=value, witness_vertex=witness, behaviour=rb)


# ---------------------------------------------------------------------------
# Two-setting correlator form
# ---------------------------------------------------------------------------

CHSH_OPTIMAL_ANGLES = (0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4)


def chsh_value(b: Behaviour):
    """|E(0,0) - E(0,1)| + |E(1,0) + E(1,1)| for a 2-setting dichotomic behaviour."""
    if b.nX != 2 or b.nY != 2:
        raise ShapeMismatch("the two-setting functional needs nX = nY = 2")
    e = {(x, y): b.correlator(x, y) for x in range(2) for y in range(2)}
    return abs(e[(0, 0)] - e[(0, 1)]) + abs(e[(1, 0)] + e[(1, 1)])


CHSH_LOCAL_BOUND = 2


def measurement_angle_context(theta: float, label: str):
    """Dichotomic spin measurement in the x-z plane at the given angle.

    Outcome index 0 is the +1 eigenvector, index 1 the -1 eigenvector, so
    behaviour correlators reproduce the familiar -cos(angle difference) law
    on the two-qubit singlet.
    """
    from .quantum import PAULI_X, PAULI_Z, projective_context

    obs = np.cos(theta) * PAULI_Z + np.sin(theta) * PAULI_X
    plus = eigen_projector(obs, +1)
    minus = eigen_projector(obs, -1)
    return projective_context(label, [plus, minus], (0, 1))


def singlet_behaviour(angles=CHSH_OPTIMAL_ANGLES, alpha: float = 1.0) -> Behaviour:
    """Behaviour of the singlet (or its white-noise mixture) at four planar angles.

    `angles` lists Alice's two settings then Bob's two settings.
    """
    from .quantum import werner_state

    a0, a1, b0, b1 = angles
    alice = [measurement_angle_context(a0, "A0"), measurement_angle_context(a1, "A1")]
    bob = [measurement_angle_context(b0, "B0"), measurement_angle_context(b1, "B1")]
    return behaviour_from_quantum(werner_state(alpha), alice, bob)


def pr_box_behaviour() -> Behaviour:
    """Extremal no-signaling box: outcomes agree except on the (0, 1) setting pair.

    The anticorrelated pair is placed where `chsh_value` subtracts, so this
    box attains the algebraic maximum 4 of the implemented functional.
    """
    h = Fraction(1, 2)
    p = {}
    for x in range(2):
        for y in range(2):
            if x == 0 and y == 1:
                p[(0, 1, x, y)] = h
                p[(1, 0, x, y)] = h
            else:
                p[(0, 0, x, y)] = h
                p[(1, 1, x, y)] = h
    return make_behaviour(2, 2, 2, 2, p)


# ---------------------------------------------------------------------------
# Pairwise-correlation noncontextuality bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairwiseCorrelationInequality:
    """Functional sum of singles minus sum over compatible pairs, bounded by n(d-2)-2.

    `d` counts measurement contexts (not the Hilbert dimension; the two
    readings are easy to conflate).  The pair sum runs over unordered pairs of
    observables that share at least one context, each with coefficient 1
    (equivalently, half the sum over ordered pairs).
    """

    n: int
    d: int
    pairs: tuple
    bound: int

    def evaluate_assignment(self, values) -> int:
        """Value on one deterministic +-1 assignment (index-aligned with observables)."""
        if len(values) != self.n:
            raise ShapeMismatch(f"expected {self.n} values, got {len(values)}")
        if any(v not in (1, -1) for v in values):
            raise ValueError("assignments must be +-1 valued")
        singles = sum(values)
        corr = sum(values[i] * values[j] for i, j in self.pairs)
        return singles - corr

    def evaluate(self, singles, pair_correlators) -> float:
        """Value from expectation data: singles[i] and pair_correlators[(i, j)]."""
        total = sum(singles[i] for i in range(self.n))
        for i, j in self.pairs:
            key = (i, j) if (i, j) in pair_correlators else (j, i)
            total -= pair_correlators[key]
        return total


def badziag_inequality(n: int, d: int | None = None,
                       contexts=None) -> PairwiseCorrelationInequality:
    """Pairwise-correlation inequality for n observables over d contexts.

    With `contexts` given (index sets over range(n)), `d` defaults to the
    context count and compatible pairs are those co-appearing in at least one
    context; without it, all pairs are taken compatible and `d` is required.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if contexts is not None:
        contexts = [tuple(c) for c in contexts]
        for c in contexts:
            if any(not 0 <= i < n for i in c):
                raise ShapeMismatch(f"context {c} references an observable outside range({n})")
        if d is None:
            d = len(contexts)
        elif d != len(contexts):
            raise ValueError(f"d={d} disagrees with {len(contexts)} declared contexts")
        pairs = sorted({tuple(sorted(p))
                        for c in contexts for p in itertools.combinations(set(c), 2)})
    else:
        if d is None:
            raise ValueError("either d or contexts must be given")
        pairs = list(itertools.combinations(range(n), 2))
    if d < 3:
        raise DegenerateContexts(f"the bound n(d-2)-2 needs d >= 3 contexts, got {d}")
    return PairwiseCorrelationInequality(n=n, d=d, pairs=tuple(pairs),
                                         bound=n * (d - 2) - 2)


# ---------------------------------------------------------------------------
# Orthogonality graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrthogonalityGraph:
    labels: tuple
    weights: dict
    edges: tuple
    projectors: dict | None = None


def make_orthogonality_graph(weights: dict, edges, projectors: dict | None = None
                             ) -> OrthogonalityGraph:
    labels = tuple(weights)
    for lab, w in weights.items():
        if w < 0:
            raise ValueError(f"vertex {lab!r} has negative weight {w}")
    canon = []
    for e in edges:
        a, b = tuple(e)
        if a == b:
            raise ValueError(f"self-loop at {a!r}")
        if a not in weights or b not in weights:
            raise LabelMismatch(f"edge {(a, b)} references an unknown vertex")
        canon.append(tuple(sorted((a, b), key=str)))
    if projectors is not None:
        missing = [l for l in labels if l not in projectors]
        if missing:
            raise LabelMismatch(f"projectors missing for vertices {missing}")
    return OrthogonalityGraph(labels=labels, weights=dict(weights),
                              edges=tuple(sorted(set(canon))), projectors=projectors)


def graph_from_projectors(projectors: dict, weights: dict | None = None,
                          tol: float = 1e-10) -> OrthogonalityGraph:
    """Orthogonality graph of a projector family: edges where products vanish."""
    labels = list(projectors)
    if weights is None:
        weights = {l: Fraction(1) for l in labels}
    edges = []
    for a, b in itertools.combinations(labels, 2):
        if sup_norm(projectors[a] @ projectors[b]) <= tol:
            edges.append((a, b))
    return make_orthogonality_graph(weights, edges, projectors=dict(projectors))


def kcbs_graph() -> OrthogonalityGraph:
    """Pentagon orthogonality graph with its qutrit rank-1 projectors attached."""
    from .quantum import kcbs_vectors

    vs = kcbs_vectors()
    projs = {f"P{j}": np.outer(v, v.conj()) for j, v in enumerate(vs)}
    return graph_from_projectors(projs)


def weighted_independence_number(g: OrthogonalityGraph):
    """Exact maximum-weight independent set by branch and bound.

    Returns (alpha, witness_labels); the witness is independent and attains
    alpha.  Refuses graphs with more than 40 vertices.
    """
    n = len(g.labels)
    if n > MAX_GRAPH_VERTICES:
        raise TooLarge(f"{n} vertices exceed the supported {MAX_GRAPH_VERTICES}")
    idx = {l: i for i, l in enumerate(g.labels)}
    adj = [0] * n
    for a, b in g.edges:
        adj[idx[a]] |= 1 << idx[b]
        adj[idx[b]] |= 1 << idx[a]
    weights = [Fraction(g.weights[l]) if not isinstance(g.weights[l], Fraction)
               else g.weights[l] for l in g.labels]
    order = sorted(range(n), key=lambda i: (-weights[i], i))

    best_value = Fraction(0)
    best_set = 0

    def rest_weight(pos: int, available: int) -> Fraction:
        total = Fraction(0)
        for k in range(pos, n):
            if available >> order[k] & 1:
                total += weights[order[k]]
        return total

    def recurse(pos: int, available: int, current: Fraction, chosen: int):
        nonlocal best_value, best_set
        if current > best_value:
            best_value = current
            best_set = chosen
        if pos == n:
            return
        if current + rest_weight(pos, available) <= best_value:
            return
        i = order[pos]
        if available >> i & 1:
            recurse(pos + 1, available & ~adj[i] & ~(1 << i),
                    current + weights[i], chosen | 1 << i)
        recurse(pos + 1, available & ~(1 << i), current, chosen)

    recurse(0, (1 << n) - 1, Fraction(0), 0)
    witness = tuple(l for i, l in enumerate(g.labels) if best_set >> i & 1)
    return best_value, witness


@dataclass(frozen=True)
class ExclusivityReport:
    lhs: float
    bound: Fraction
    violated: bool
    independence_witness: tuple


def csw_inequality(g: OrthogonalityGraph, singles: dict | None = None,
                   joints: dict | None = None, state=None) -> ExclusivityReport:
    """Weighted-sum exclusivity inequality: singles minus penalised edge joints vs alpha.

    Either pass `singles` (probability of outcome 1 per vertex) together with
    `joints` (probability both endpoints give 1, per edge), or pass a quantum
    `state` to evaluate both from the attached projectors.
    """
    if state is not None:
        if g.projectors is None:
            raise LabelMismatch("graph carries no projectors for quantum evaluation")
        rho = np.asarray(state, dtype=complex)
        if rho.ndim == 2 and rho.shape[1] == 1:
            rho = rho @ rho.conj().T
        singles = {l: max(0.0, float(np.trace(rho @ g.projectors[l]).real))
                   for l in g.labels}
        joints = {}
        for a, b in g.edges:
            val = float(np.trace(rho @ g.projectors[a] @ g.projectors[b]).real)
            joints[(a, b)] = max(0.0, val)
    if singles is None:
        raise LabelMismatch("either probabilities or a state must be supplied")
    missing = [l for l in g.labels if l not in singles]
    if missing:
        raise LabelMismatch(f"single-outcome probabilities missing for {missing}")
    joints = joints or {}
    lhs = sum(g.weights[l] * singles[l] for l in g.labels)
    for a, b in g.edges:
        joint = joints.get((a, b), joints.get((b, a)))
        if joint is None:
            raise LabelMismatch(f"joint probability missing for edge {(a, b)}")
        lhs -= max(g.weights[a], g.weights[b]) * joint
    alpha, witness = weighted_independence_number(g)
    tol = 0 if isinstance(lhs, Fraction) else 1e-12
    return ExclusivityReport(lhs=lhs, bound=alpha, violated=bool(lhs > float(alpha) + tol),
                             independence_witness=witness)


# ---------------------------------------------------------------------------
# Two-party lift of an exclusivity inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteLift:
    """Two-party functional lifted from an orthogonality graph.

    Value = sum_i w_i P(1,1 | i, i) - sum_{(i,j) in E} max(w_i, w_j)/2
    [P(1,1 | i, j) + P(1,1 | j, i)], bounded by alpha(G, w) over deterministic
    strategies.  The second party's projectors are the entrywise complex
    conjugates of the first party's, so the uniform maximally entangled
    vector reproduces single-system statistics.
    """

    graph: OrthogonalityGraph
    dim: int
    bound: Fraction
    quantum_value: float

    def evaluate_deterministic(self, assign_a: dict, assign_b: dict):
        """Value when each side deterministically answers 0/1 per vertex."""
        val = 0
        for l in self.graph.labels:
            val = val + self.graph.weights[l] * assign_a[l] * assign_b[l]
        for a, b in self.graph.edges:
            w = max(self.graph.weights[a], self.graph.weights[b])
            val = val - w * Fraction(1, 2) * (assign_a[a] * assign_b[b]
                                              + assign_a[b] * assign_b[a])
        return val

    def ld_maximum(self):
        """Exact maximum over all two-sided deterministic strategies."""
        n = len(self.graph.labels)
        if n > MAX_LIFT_VERTICES:
            raise TooLarge(f"{n} vertices give 4^{n} strategies; refusing")
        best = None
        for bits_a in itertools.product((0, 1), repeat=n):
            a = dict(zip(self.graph.labels, bits_a))
            for bits_b in itertools.product((0, 1), repeat=n):
                b = dict(zip(self.graph.labels, bits_b))
                v = self.evaluate_deterministic(a, b)
                if best is None or v > best:
                    best = v
        return best


def contextuality_to_bell(g: OrthogonalityGraph, d: int) -> BipartiteLift:
    """Lift a projector-decorated graph to a two-party inequality and evaluate it.

    Evaluation is literal: each joint probability is the Born value of
    (projector tensor conjugated projector) on the uniform maximally
    entangled vector in dimension d.
    """
    if g.projectors is None:
        raise MissingProjectors("the lift needs projectors attached to the graph")
    for l in g.labels:
        if g.projectors[l].shape != (d, d):
            raise ShapeMismatch(
                f"projector {l!r} has shape {g.projectors[l].shape}, expected ({d}, {d})")
    psi = max_entangled(d)
    rho = psi @ psi.conj().T

    def joint(i, j) -> float:
        op = tensor(g.projectors[i], g.projectors[j].conj())
        return max(0.0, float(np.trace(rho @ op).real))

    value = sum(float(g.weights[l]) * joint(l, l) for l in g.labels)
    for a, b in g.edges:
        w = float(max(g.weights[a], g.weights[b]))
        value -= w / 2 * (joint(a, b) + joint(b, a))
    alpha, _ = weighted_independence_number(g)
    return BipartiteLift(graph=g, dim=d, bound=alpha, quantum_value=value)


# ---------------------------------------------------------------------------
# State-independent to state-dependent reduction
# ---------------------------------------------------------------------------

def sic_to_sdc_reduction(observables, chosen, eigenvalue):
    """Use one observable of a set as a preparation and drop it from the set.

    `observables` maps labels to Hermitian matrices.  Returns (reduced
    observables, post-measurement state), where the state is the normalised
    projection onto the chosen observable's eigenspace at `eigenvalue`.
    Raises `BadEigenvalue` when the eigenvalue is not in the spectrum.
    """
    observables = dict(observables)
    if chosen not in observables:
        raise LabelMismatch(f"{chosen!r} is not among the observables")
    proj = eigen_projector(observables[chosen], eigenvalue)
    rank = float(np.trace(proj).real)
    post_state = proj / rank
    reduced = {l: m for l, m in observables.items() if l != chosen}
    return reduced, post_state
