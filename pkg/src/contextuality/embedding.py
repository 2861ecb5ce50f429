"""Generalized probabilistic theories and classicality embeddings.

Verification strategy: every embedding returned by any search path is
re-checked against the simplex, dual-hypercube, and probability
reproduction invariants at 1e-9 before it reaches the caller; refusals
carry exact Farkas certificates that are re-multiplied against the
constraint rows; the preparation-ensemble and assignment-polytope
checkers run entirely in exact rational arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactlp import (
    Feasibility,
    TooLargeError,
    check_farkas,
    check_solution,
    enumerate_vertices,
    format_fraction,
    solve_eq_nonneg,
    to_fraction,
)
from .quantum import (
    CONSTRUCTION_TOL,
    ID2,
    PAULIS,
    ProjectiveContext,
    bloch_state,
    dm,
    eigen_projector,
    sup_norm,
    validate_density,
)
from .scenario import (
    NonCommutingContext,
    SchemaError,
    make_model,
    make_scenario,
    rationalize_model,
)
from .sheaf import ScenarioTooLarge

EMBED_TOL = 1e-9
MERGE_TOL = 1e-10
RANK_TOL = 1e-8
MAX_EMBED_DIM = 10
MAX_SHARP_ASSIGNMENTS = 2**20
MAX_ASSIGNMENT_TUPLES = 2**12
MAX_POLYTOPE_VERTICES = 10_000
MAX_SUBSET_PAIRS = 20_000


class GptError(ValueError):
    """Malformed generalized-probabilistic-theory data."""


class InconsistentUnit(GptError):
    """The declared or derived unit effect does not evaluate to 1."""


class UnsharpEffectFlagged(GptError):
    """The declared sharp-context structure is not a resolution of the unit."""


class DimensionTooLarge(GptError):
    """The heuristic embedding search only runs up to dimension 10."""


class DecompositionMismatch(ValueError):
    """A supplied convex decomposition does not reproduce the target state."""


class EmptyAssignmentPolytope(ValueError):
    """No deterministic-assignment mixture reproduces the given statistics."""


# ---------------------------------------------------------------------------
# GPT construction


@dataclass(frozen=True, eq=False)
class Gpt:
    """Finite prepare-measure theory: vectors with a probability pairing.

    ``states`` and ``effects`` are dim-vectors; the probability of effect
    ``e`` on state ``s`` is the standard dot product.  ``sharp_contexts``
    lists groups of effect indices that each resolve the unit effect.
    """

    dim: int
    states: tuple
    effects: tuple
    unit: np.ndarray
    sharp_contexts: tuple = ()

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_effects(self) -> int:
        return len(self.effects)

    def probability(self, effect_index: int, state_index: int) -> float:
        return float(np.dot(self.effects[effect_index], self.states[state_index]))

    def table(self) -> np.ndarray:
        """Effects-by-states probability table."""
        return np.array([[self.probability(i, j) for j in range(self.n_states)]
                         for i in range(self.n_effects)])


def make_gpt(states, effects, unit, sharp_contexts=(), *, tol: float = 1e-10) -> Gpt:
    """Validate and freeze a `Gpt`.

    Checks that every pairing lands in [0, 1] within ``tol`` and that the
    unit evaluates to 1 on every state; the unit is appended to the effect
    list when no listed effect matches it.
    """
    states = tuple(np.asarray(s, dtype=float).reshape(-1) for s in states)
    effects = tuple(np.asarray(e, dtype=float).reshape(-1) for e in effects)
    unit = np.asarray(unit, dtype=float).reshape(-1)
    if not states:
        raise GptError("a GPT needs at least one state")
    dim = unit.shape[0]
    for s in states:
        if s.shape[0] != dim:
            raise GptError(f"state length {s.shape[0]} != dim {dim}")
    for e in effects:
        if e.shape[0] != dim:
            raise GptError(f"effect length {e.shape[0]} != dim {dim}")
    for j, s in enumerate(states):
        val = float(np.dot(unit, s))
        if abs(val - 1.0) > tol:
            raise InconsistentUnit(f"unit evaluates to {val} on state {j}")
    if not any(np.max(np.abs(e - unit)) <= tol for e in effects):
        effects = effects + (unit.copy(),)
    for i, e in enumerate(effects):
        for j, s in enumerate(states):
            val = float(np.dot(e, s))
            if val < -tol or val > 1.0 + tol:
                raise GptError(f"probability {val} of effect {i} on state {j} "
                               "outside [0, 1]")
    contexts = tuple(tuple(int(i) for i in ctx) for ctx in sharp_contexts)
    for ctx in contexts:
        if len(set(ctx)) != len(ctx):
            raise GptError(f"sharp context {ctx} repeats an effect index")
        for i in ctx:
            if not 0 <= i < len(effects):
                raise GptError(f"sharp context {ctx} references unknown effect {i}")
    return Gpt(dim=dim, states=states, effects=effects, unit=unit,
               sharp_contexts=contexts)


def gpt_from_data(prob_matrix, *, unit_row: int | None = None,
                  rank_tol: float = RANK_TOL,
                  merge_tol: float = MERGE_TOL) -> Gpt:
    """Reconstruct a GPT from an effects-by-states probability table.

    Duplicate rows/columns (identical statistics within ``merge_tol``) are
    merged first; the table is then factored at numerical rank ``rank_tol``
    so the result is tomographically minimal.  A row of all ones is used as
    the unit if present, otherwise one is appended.
    """
    table = np.asarray(prob_matrix, dtype=float)
    if table.ndim != 2 or table.size == 0:
        raise GptError("probability table must be a nonempty 2-D array")
    if np.min(table) < -1e-10 or np.max(table) > 1.0 + 1e-10:
        raise GptError("probability table entries must lie in [0, 1]")
    if unit_row is not None:
        if not 0 <= unit_row < table.shape[0]:
            raise GptError(f"unit row index {unit_row} out of range")
        if np.max(np.abs(table[unit_row] - 1.0)) > 1e-10:
            raise InconsistentUnit(
                f"declared unit row {unit_row} is not identically 1")

    # Merge operationally equivalent columns (states), keeping the first.
    kept_cols: list[int] = []
    for j in range(table.shape[1]):
        if not any(np.max(np.abs(table[:, j] - table[:, k])) <= merge_tol
                   for k in kept_cols):
            kept_cols.append(j)
    table = table[:, kept_cols]

    # Merge operationally equivalent rows (effects), keeping the first.
    kept_rows: list[int] = []
    for i in range(table.shape[0]):
        if not any(np.max(np.abs(table[i] - table[k])) <= merge_tol
                   for k in kept_rows):
            kept_rows.append(i)
    if unit_row is not None:
        unit_row = min(k for k in kept_rows
                       if np.max(np.abs(table[k] - table[unit_row])) <= merge_tol)
        unit_row = kept_rows.index(unit_row)
    table = table[kept_rows]

    if unit_row is None:
        ones = [i for i in range(table.shape[0])
                if np.max(np.abs(table[i] - 1.0)) <= 1e-10]
        if ones:
            unit_row = ones[0]
        else:
            table = np.vstack([table, np.ones(table.shape[1])])
            unit_row = table.shape[0] - 1

    u_mat, svals, vt_mat = np.linalg.svd(table, full_matrices=False)
    rank = int(np.sum(svals > rank_tol * max(1.0, float(svals[0]))))
    effect_rows = u_mat[:, :rank] * svals[:rank]
    state_cols = vt_mat[:rank, :]
    residual = float(np.max(np.abs(effect_rows @ state_cols - table)))
    if residual > 1e-7:
        raise GptError(f"rank-{rank} factorization residual {residual} too large")
    states = [state_cols[:, j] for j in range(state_cols.shape[1])]
    effects = [effect_rows[i] for i in range(effect_rows.shape[0])]
    return make_gpt(states, effects, effect_rows[unit_row], tol=1e-9)


def hermitian_to_vector(matrix) -> np.ndarray:
    """Embed a Hermitian matrix as a real vector whose dot is the trace pairing.

    Concatenating real and imaginary parts makes ``vec(A) . vec(B)`` equal
    ``Tr(A B)`` for Hermitian ``A`` and ``B``.
    """
    a = np.asarray(matrix, dtype=complex)
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def sharp_gpt_from_quantum(states, contexts, *, tol: float = 1e-10) -> Gpt:
    """GPT of density matrices against the atoms of commuting projective contexts.

    Each context is a list of `ProjectiveContext` measurements; its atoms are
    the nonzero products of one projector per measurement.  Atoms equal
    within ``tol`` are shared across contexts, which is what carries the
    compatibility structure into the GPT.
    """
    dms = []
    for s in states:
        arr = np.asarray(s, dtype=complex)
        if arr.ndim == 1 or (arr.ndim == 2 and 1 in arr.shape):
            arr = dm(arr)
        validate_density(arr)
        dms.append(arr)
    hdim = dms[0].shape[0]
    norm_contexts = []
    for ctx in contexts:
        if isinstance(ctx, ProjectiveContext):
            ctx = [ctx]
        norm_contexts.append(list(ctx))

    atoms: list[np.ndarray] = []

    def atom_index(candidate: np.ndarray) -> int:
        for k, existing in enumerate(atoms):
            if sup_norm(existing - candidate) <= tol:
                return k
        atoms.append(candidate)
        return len(atoms) - 1

    sharp_contexts = []
    for ctx in norm_contexts:
        for pc_a, pc_b in itertools.combinations(ctx, 2):
            for pa in pc_a.projectors:
                for pb in pc_b.projectors:
                    if sup_norm(pa @ pb - pb @ pa) > tol:
                        raise NonCommutingContext(
                            f"measurements {pc_a.label!r} and {pc_b.label!r} "
                            "do not commute")
        indices = []
        for combo in itertools.product(*[pc.projectors for pc in ctx]):
            prod = np.eye(hdim, dtype=complex)
            for p in combo:
                prod = prod @ p
            prod = (prod + prod.conj().T) / 2
            if sup_norm(prod) <= tol:
                continue
            indices.append(atom_index(prod))
        sharp_contexts.append(tuple(indices))

    effects = [hermitian_to_vector(a) for a in atoms]
    gpt_states = [hermitian_to_vector(r) for r in dms]
    unit = hermitian_to_vector(np.eye(hdim, dtype=complex))
    return make_gpt(gpt_states, effects, unit, sharp_contexts, tol=1e-9)


# ---------------------------------------------------------------------------
# Sharp embedding (deterministic value assignments + exact LPs)


def induced_model(gpt: Gpt, state_index: int):
    """Dichotomic empirical model of the sharp contexts on one state.

    Each flagged effect becomes a two-outcome measurement; within a context
    exactly one effect fires, so the tables are supported on one-hot outcome
    tuples with the effect probabilities as weights.
    """
    if not gpt.sharp_contexts:
        raise UnsharpEffectFlagged("no sharp contexts declared")
    atom_indices = sorted({i for ctx in gpt.sharp_contexts for i in ctx})
    measurements = [(f"E{i}", (0, 1)) for i in atom_indices]
    contexts = [tuple(f"E{i}" for i in sorted(ctx)) for ctx in gpt.sharp_contexts]
    tables = {}
    for ctx in gpt.sharp_contexts:
        ordered = sorted(ctx)
        labels = tuple(f"E{i}" for i in ordered)
        probs = [max(0.0, gpt.probability(i, state_index)) for i in ordered]
        total = sum(probs)
        if abs(total - 1.0) > 1e-9:
            raise UnsharpEffectFlagged(
                f"sharp context {ctx} resolves to total probability {total} "
                f"on state {state_index}")
        table = {}
        for slot in range(len(ordered)):
            outcome = tuple(1 if k == slot else 0 for k in range(len(ordered)))
            table[outcome] = probs[slot] / total
        tables[labels] = table
    scenario = make_scenario(measurements, contexts)
    return make_model(scenario, tables)


def consistent_assignments(gpt: Gpt) -> tuple[tuple[int, ...], list[tuple[int, ...]]]:
    """All Boolean effect assignments firing exactly one atom per context.

    Returns the ordered atom index tuple and the assignments as 0/1 tuples
    over it.  Effects shared between contexts keep a single value, which is
    where cross-context consistency enters.
    """
    if not gpt.sharp_contexts:
        raise UnsharpEffectFlagged("no sharp contexts declared")
    atom_indices = tuple(sorted({i for ctx in gpt.sharp_contexts for i in ctx}))
    position = {i: k for k, i in enumerate(atom_indices)}
    bound = 1
    for ctx in gpt.sharp_contexts:
        bound *= max(1, len(ctx))
        if bound > MAX_SHARP_ASSIGNMENTS:
            raise ScenarioTooLarge(
                f"more than {MAX_SHARP_ASSIGNMENTS} candidate assignments")
    assignments: list[tuple[int, ...]] = []
    values: dict[int, int] = {}

    def backtrack(depth: int) -> None:
        if depth == len(gpt.sharp_contexts):
            full = [0] * len(atom_indices)
            for idx, val in values.items():
                full[position[idx]] = val
            assignments.append(tuple(full))
            return
        ctx = gpt.sharp_contexts[depth]
        for fired in ctx:
            if values.get(fired) == 0:
                continue
            if any(values.get(other) == 1 for other in ctx if other != fired):
                continue
            staged = {}
            ok = True
            for other in ctx:
                want = 1 if other == fired else 0
                if other in values:
                    if values[other] != want:
                        ok = False
                        break
                else:
                    staged[other] = want
            if not ok:
                continue
            values.update(staged)
            backtrack(depth + 1)
            for key in staged:
                del values[key]

    backtrack(0)
    return atom_indices, assignments


@dataclass(frozen=True, eq=False)
class SimplexEmbedding:
    """Linear maps placing states in a simplex and effects in its dual cube.

    ``iota`` and ``kappa`` are d-by-dim matrices acting on state and effect
    vectors; probabilities are preserved as ``kappa(e) . iota(s)``.
    """

    d: int
    iota: np.ndarray
    kappa: np.ndarray

    def embed_state(self, state) -> np.ndarray:
        return self.iota @ np.asarray(state, dtype=float)

    def embed_effect(self, effect) -> np.ndarray:
        return self.kappa @ np.asarray(effect, dtype=float)


@dataclass(frozen=True)
class EmbeddingCheck:
    """Worst-case deviations of an embedding from the three invariants."""

    passed: bool
    worst_simplex: float
    worst_cube: float
    worst_pairing: float


def verify_embedding(embedding: SimplexEmbedding, gpt: Gpt,
                     tol: float = EMBED_TOL) -> EmbeddingCheck:
    """Independently re-check simplex membership, cube membership, pairing."""
    worst_simplex = 0.0
    worst_cube = 0.0
    worst_pairing = 0.0
    for s in gpt.states:
        img = embedding.embed_state(s)
        worst_simplex = max(worst_simplex,
                            float(-np.min(img)),
                            abs(float(np.sum(img)) - 1.0))
    for e in gpt.effects:
        img = embedding.embed_effect(e)
        worst_cube = max(worst_cube,
                         float(-np.min(img)),
                         float(np.max(img)) - 1.0)
    for e in gpt.effects:
        ke = embedding.embed_effect(e)
        for s in gpt.states:
            lhs = float(np.dot(ke, embedding.embed_state(s)))
            worst_pairing = max(worst_pairing,
                                abs(lhs - float(np.dot(e, s))))
    passed = (worst_simplex <= tol and worst_cube <= tol
              and worst_pairing <= tol)
    return EmbeddingCheck(passed, worst_simplex, worst_cube, worst_pairing)


@dataclass(frozen=True, eq=False)
class EmbedSharpResult:
    """Outcome of the deterministic-assignment embedding construction."""

    feasible: bool
    embedding: SimplexEmbedding | None
    atom_indices: tuple
    assignments: tuple
    state_weights: tuple
    refusal_state: int | None
    refusal_farkas: tuple | None
    rhs_rows: tuple

    @property
    def verdict(self) -> str:
        return "embeddable" if self.feasible else "refused"

    def certificate(self) -> dict:
        if self.feasible:
            return {
                "kind": "simplex-embedding",
                "verdict": "embeddable",
                "d": self.embedding.d,
                "atoms": list(self.atom_indices),
                "assignments": [list(a) for a in self.assignments],
                "state_weights": [[format_fraction(w) for w in ws]
                                  for ws in self.state_weights],
            }
        return {
            "kind": "simplex-embedding-refusal",
            "verdict": "refused",
            "state_index": self.refusal_state,
            "atoms": list(self.atom_indices),
            "farkas": [format_fraction(y) for y in self.refusal_farkas],
            "rhs": [format_fraction(v) for v in self.rhs_rows],
        }


def _sharp_state_system(gpt: Gpt, atom_indices, assignments, state_index: int,
                        rationalized) -> tuple[list, list]:
    """Exact rows/rhs expressing one state as a mixture of assignments."""
    scenario = rationalized.scenario
    rhs = []
    rows = []
    for pos, atom in enumerate(atom_indices):
        label = f"E{atom}"
        context = next(ctx for ctx in scenario.contexts if label in ctx)
        table = rationalized.table(context)
        slot = context.index(label)
        # marginal of "atom fired"; any containing context gives the same value
        value = Fraction(sum(v for o, v in table.items() if o[slot] == 1))
        rows.append([Fraction(a[pos]) for a in assignments])
        rhs.append(value)
    rows.append([Fraction(1)] * len(assignments))
    rhs.append(Fraction(1))
    return rows, rhs


def embed_sharp(gpt: Gpt, *, tol: float = EMBED_TOL) -> EmbedSharpResult:
    """Simplex embedding of a sharp GPT or an exact refusal certificate.

    Enumerates context-consistent Boolean value assignments on the flagged
    effects, then asks (by exact LP, one per state) for a mixture of
    assignments reproducing each state's rationalized statistics.  Success
    assembles Boolean-row kappa and a verified iota; failure returns the
    Farkas certificate of the first unembeddable state.  The verdict agrees
    with the global-section solver on `induced_model` by construction.
    """
    if not gpt.sharp_contexts:
        raise UnsharpEffectFlagged("no sharp contexts declared")
    atom_set = {i for ctx in gpt.sharp_contexts for i in ctx}
    for i, e in enumerate(gpt.effects):
        if i in atom_set:
            continue
        if np.max(np.abs(e - gpt.unit)) <= 1e-9:
            continue
        raise UnsharpEffectFlagged(
            f"effect {i} is neither the unit nor covered by a sharp context")
    for ctx in gpt.sharp_contexts:
        total = np.sum([gpt.effects[i] for i in ctx], axis=0)
        for j, s in enumerate(gpt.states):
            val = float(np.dot(total, s))
            if abs(val - 1.0) > 1e-9:
                raise UnsharpEffectFlagged(
                    f"sharp context {ctx} sums to {val} on state {j}")

    atom_indices, assignments = consistent_assignments(gpt)
    solutions = []
    rhs_used = None
    for j in range(gpt.n_states):
        rationalized = rationalize_model(induced_model(gpt, j))
        rows, rhs = _sharp_state_system(gpt, atom_indices, assignments, j,
                                        rationalized)
        if not assignments:
            farkas = tuple(Fraction(1) if i == len(rows) - 1 else Fraction(0)
                           for i in range(len(rows)))
            assert check_farkas(rows, rhs, farkas)
            return EmbedSharpResult(False, None, atom_indices, (), (),
                                    j, farkas, tuple(rhs))
        res = solve_eq_nonneg(rows, rhs)
        if not res.feasible:
            assert check_farkas(rows, rhs, res.farkas)
            return EmbedSharpResult(False, None, atom_indices, (),
                                    (), j, res.farkas, tuple(rhs))
        assert check_solution(rows, rhs, res.x)
        rhs_used = rhs
        solutions.append(res.x)

    kept = sorted({k for x in solutions for k, v in enumerate(x) if v != 0})
    if not kept:
        kept = [0]
    kept_assignments = tuple(assignments[k] for k in kept)
    d = len(kept)

    # kappa: Boolean target rows for each atom (plus the all-ones unit row),
    # lifted to a linear map on effect vectors by pseudo-inverse.
    targets = np.array([[float(a[pos]) for a in kept_assignments]
                        for pos in range(len(atom_indices))])
    effect_mat = np.array([gpt.effects[i] for i in atom_indices]
                          + [gpt.unit])
    target_mat = np.vstack([targets, np.ones((1, d))])
    kappa = target_mat.T @ np.linalg.pinv(effect_mat).T

    weights = np.array([[float(solutions[j][k]) for j in range(gpt.n_states)]
                        for k in kept])
    state_mat = np.array(gpt.states).T
    iota = weights @ np.linalg.pinv(state_mat)

    embedding = SimplexEmbedding(d=d, iota=iota, kappa=kappa)
    check = verify_embedding(embedding, gpt, tol)
    if not check.passed:
        iota = _iota_feasibility_lp(gpt, target_mat, atom_indices, d)
        if iota is not None:
            embedding = SimplexEmbedding(d=d, iota=iota, kappa=kappa)
            check = verify_embedding(embedding, gpt, tol)
    assert check.passed, (
        "state mixtures found but no verified linear embedding assembled: "
        f"{check}")
    state_weights = tuple(tuple(solutions[j][k] for k in kept)
                          for j in range(gpt.n_states))
    return EmbedSharpResult(True, embedding, atom_indices, kept_assignments,
                            state_weights, None, None,
                            tuple(rhs_used) if rhs_used else ())


def _iota_feasibility_lp(gpt: Gpt, target_mat: np.ndarray, atom_indices,
                         d: int) -> np.ndarray | None:
    """Float LP fallback: solve for iota entries against fixed Boolean kappa."""
    from scipy.optimize import linprog

    dim = gpt.dim
    n_vars = d * dim
    a_eq = []
    b_eq = []
    for j, s in enumerate(gpt.states):
        for row, atom in enumerate(list(atom_indices) + [None]):
            coeff = np.zeros(n_vars)
            krow = target_mat[row]
            for l in range(d):
                coeff[l * dim:(l + 1) * dim] += krow[l] * s
            a_eq.append(coeff)
            if atom is None:
                b_eq.append(1.0)
            else:
                b_eq.append(gpt.probability(atom, j))
    a_ub = []
    b_ub = []
    for s in gpt.states:
        for l in range(d):
            coeff = np.zeros(n_vars)
            coeff[l * dim:(l + 1) * dim] = -s
            a_ub.append(coeff)
            b_ub.append(0.0)
    res = linprog(c=np.zeros(n_vars), A_eq=np.array(a_eq), b_eq=np.array(b_eq),
                  A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  bounds=[(None, None)] * n_vars, method="highs")
    if not res.success:
        return None
    return res.x.reshape(d, dim)


# ---------------------------------------------------------------------------
# Heuristic embedding search (alternating LPs)


@dataclass(frozen=True, eq=False)
class EmbedSearchResult:
    """Outcome of the alternating-LP search at simplex size = GPT dimension."""

    verdict: str  # "embeddable" | "unknown"
    embedding: SimplexEmbedding | None
    restarts_used: int
    seed: int

    def certificate(self) -> dict:
        if self.embedding is None:
            return {"kind": "embedding-search", "verdict": "unknown",
                    "restarts": self.restarts_used, "seed": self.seed}
        return {"kind": "embedding-search", "verdict": "embeddable",
                "d": self.embedding.d,
                "iota": self.embedding.iota.tolist(),
                "kappa": self.embedding.kappa.tolist(),
                "restarts": self.restarts_used, "seed": self.seed}


def _kappa_step(gpt: Gpt, iota: np.ndarray):
    from scipy.optimize import linprog

    d, dim = iota.shape
    n_vars = d * dim + 1
    images = [iota @ s for s in gpt.states]
    a_ub = []
    b_ub = []
    for i, e in enumerate(gpt.effects):
        for j, s in enumerate(gpt.states):
            coeff = np.zeros(n_vars)
            for l in range(d):
                coeff[l * dim:(l + 1) * dim] = e * images[j][l]
            p = float(np.dot(e, s))
            coeff[-1] = -1.0
            a_ub.append(coeff.copy())
            b_ub.append(p)
            coeff2 = -coeff
            coeff2[-1] = -1.0
            a_ub.append(coeff2)
            b_ub.append(-p)
        for l in range(d):
            coeff = np.zeros(n_vars)
            coeff[l * dim:(l + 1) * dim] = -e
            a_ub.append(coeff)
            b_ub.append(0.0)
            coeff = np.zeros(n_vars)
            coeff[l * dim:(l + 1) * dim] = e
            a_ub.append(coeff)
            b_ub.append(1.0)
    c = np.zeros(n_vars)
    c[-1] = 1.0
    res = linprog(c=c, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  bounds=[(None, None)] * (n_vars - 1) + [(0, None)],
                  method="highs")
    if not res.success:
        return None, np.inf
    return res.x[:-1].reshape(d, dim), float(res.x[-1])


def _iota_step(gpt: Gpt, kappa: np.ndarray):
    from scipy.optimize import linprog

    d, dim = kappa.shape
    n_vars = d * dim + 1
    keffs = [kappa @ e for e in gpt.effects]
    a_ub = []
    b_ub = []
    a_eq = []
    b_eq = []
    for j, s in enumerate(gpt.states):
        for i, e in enumerate(gpt.effects):
            coeff = np.zeros(n_vars)
            for l in range(d):
                coeff[l * dim:(l + 1) * dim] = s * keffs[i][l]
            p = float(np.dot(e, s))
            coeff[-1] = -1.0
            a_ub.append(coeff.copy())
            b_ub.append(p)
            coeff2 = -coeff
            coeff2[-1] = -1.0
            a_ub.append(coeff2)
            b_ub.append(-p)
        for l in range(d):
            coeff = np.zeros(n_vars)
            coeff[l * dim:(l + 1) * dim] = -s
            a_ub.append(coeff)
            b_ub.append(0.0)
        coeff = np.zeros(n_vars)
        for l in range(d):
            coeff[l * dim:(l + 1) * dim] = s
        a_eq.append(coeff)
        b_eq.append(1.0)
    c = np.zeros(n_vars)
    c[-1] = 1.0
    res = linprog(c=c, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  A_eq=np.array(a_eq), b_eq=np.array(b_eq),
                  bounds=[(None, None)] * (n_vars - 1) + [(0, None)],
                  method="highs")
    if not res.success:
        return None, np.inf
    return res.x[:-1].reshape(d, dim), float(res.x[-1])


def embed_search(gpt: Gpt, *, seed: int = 0, restarts: int = 64,
                 max_iterations: int = 12,
                 tol: float = EMBED_TOL) -> EmbedSearchResult:
    """Heuristic search for an embedding into the simplex of size = GPT dim.

    Tries the identity maps first, then alternates linear programs (fix iota,
    solve kappa; fix kappa, solve iota) from ``restarts`` seeded random
    starts.  Only invariant-verified embeddings are returned; anything else
    is the verdict "unknown" -- the heuristic can never certify
    non-embeddability.
    """
    if gpt.dim > MAX_EMBED_DIM:
        raise DimensionTooLarge(
            f"embedding search supports dim <= {MAX_EMBED_DIM}, got {gpt.dim}")
    identity = SimplexEmbedding(d=gpt.dim, iota=np.eye(gpt.dim),
                                kappa=np.eye(gpt.dim))
    if verify_embedding(identity, gpt, tol).passed:
        return EmbedSearchResult("embeddable", identity, 0, seed)
    rng = np.random.default_rng(seed)
    for restart in range(1, restarts + 1):
        iota = rng.normal(size=(gpt.dim, gpt.dim))
        previous = np.inf
        for _ in range(max_iterations):
            kappa, _ = _kappa_step(gpt, iota)
            if kappa is None:
                break
            iota_new, gap = _iota_step(gpt, kappa)
            if iota_new is None:
                break
            iota = iota_new
            candidate = SimplexEmbedding(d=gpt.dim, iota=iota, kappa=kappa)
            if gap <= 1e-10 and verify_embedding(candidate, gpt, tol).passed:
                return EmbedSearchResult("embeddable", candidate, restart, seed)
            if gap >= previous - 1e-12:
                break
            previous = gap
    return EmbedSearchResult("unknown", None, restarts, seed)


# ---------------------------------------------------------------------------
# Preparation noncontextuality for qubit ensembles


@dataclass(frozen=True, eq=False)
class PrepEnsembleProblem:
    """A mixed qubit state with several declared convex decompositions.

    ``decompositions`` lists (weight, component label) terms; every
    decomposition must reproduce ``target``.  ``orthogonal_pairs`` names the
    component pairs whose supports a noncontextual model must keep disjoint.
    """

    target: np.ndarray
    q: Fraction
    component_states: dict
    decompositions: tuple
    orthogonal_pairs: tuple


def _perpendicular_frame(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([0.0, 0.0, 1.0])
    if abs(float(np.dot(direction, helper))) > 0.9:
        helper = np.array([1.0, 0.0, 0.0])
    u = np.cross(direction, helper)
    u = u / np.linalg.norm(u)
    w = np.cross(direction, u)
    return u, w


def qubit_prep_ensemble(r, axis=(0.0, 0.0, 1.0), q=None) -> PrepEnsembleProblem:
    """The six-decomposition ensemble for the qubit state (1 + r n.sigma)/2.

    ``r`` must be rational with |r| < 1 (mixed states only); ``q`` defaults
    to |r| so the polar component is the pure Bloch state along the target
    direction.  The equatorial triple sits 120 degrees apart in the plane
    orthogonal to the axis.
    """
    r = to_fraction(r)
    if not abs(r) < 1:
        raise ValueError(f"|r| must be < 1 for a mixed target, got {r}")
    q = abs(r) if q is None else to_fraction(q)
    if not 0 <= q < 1:
        raise ValueError(f"q must lie in [0, 1), got {q}")
    axis = np.asarray(axis, dtype=float)
    norm = float(np.linalg.norm(axis))
    if norm <= 0:
        raise ValueError("axis must be a nonzero Bloch vector")
    direction = axis / norm
    if r < 0:
        direction = -direction
    u, w = _perpendicular_frame(direction)
    half = np.sqrt(3.0) / 2.0
    dirs = {
        "phi": direction,
        "phi_perp": -direction,
        "psi_a": u,
        "psi_a_perp": -u,
        "psi_b": -0.5 * u + half * w,
        "psi_b_perp": 0.5 * u - half * w,
        "psi_c": -0.5 * u - half * w,
        "psi_c_perp": 0.5 * u + half * w,
    }
    components = {name: bloch_state(v) for name, v in dirs.items()}
    target = 0.5 * (ID2 + float(q) * (direction[0] * PAULIS["X"]
                                      + direction[1] * PAULIS["Y"]
                                      + direction[2] * PAULIS["Z"]))
    one = Fraction(1)
    decompositions = (
        (((one - q) / 2, "phi_perp"), ((one + q) / 2, "phi")),
        (((one - q) / 2, "psi_a"), ((one - q) / 2, "psi_a_perp"), (q, "phi")),
        (((one - q) / 2, "psi_b"), ((one - q) / 2, "psi_b_perp"), (q, "phi")),
        (((one - q) / 2, "psi_c"), ((one - q) / 2, "psi_c_perp"), (q, "phi")),
        (((one - q) / 3, "psi_a"), ((one - q) / 3, "psi_b"),
         ((one - q) / 3, "psi_c"), (q, "phi")),
        (((one - q) / 3, "psi_a_perp"), ((one - q) / 3, "psi_b_perp"),
         ((one - q) / 3, "psi_c_perp"), (q, "phi")),
    )
    pairs = (("phi", "phi_perp"), ("psi_a", "psi_a_perp"),
             ("psi_b", "psi_b_perp"), ("psi_c", "psi_c_perp"))
    problem = PrepEnsembleProblem(target=target, q=q,
                                  component_states=components,
                                  decompositions=decompositions,
                                  orthogonal_pairs=pairs)
    _verify_decompositions(problem)
    return problem


def _verify_decompositions(problem: PrepEnsembleProblem,
                           tol: float = CONSTRUCTION_TOL) -> None:
    for k, decomposition in enumerate(problem.decompositions):
        total = np.zeros_like(problem.target)
        for weight, label in decomposition:
            if label not in problem.component_states:
                raise DecompositionMismatch(
                    f"decomposition {k} references unknown component {label!r}")
            total = total + float(weight) * problem.component_states[label]
        if sup_norm(total - problem.target) > tol:
            raise DecompositionMismatch(
                f"decomposition {k} misses the target by "
                f"{sup_norm(total - problem.target)}")


@dataclass(frozen=True, eq=False)
class OntModel:
    """Finite ontological model: distributions per preparation, responses per effect."""

    ontic_labels: tuple
    mu: dict
    xi: dict


def verify_ont_model(model: OntModel, expectations, tol: float = EMBED_TOL) -> bool:
    """Check sum_lambda xi_e mu_p against each expected probability."""
    for (prep, effect), expected in expectations.items():
        mu = model.mu[prep]
        xi = model.xi[effect]
        value = float(sum(float(x) * float(m) for x, m in zip(xi, mu)))
        if abs(value - float(expected)) > tol:
            return False
    return True


@dataclass(frozen=True, eq=False)
class PrepNcCase:
    """One support pattern: which member of each orthogonal pair is dead."""

    dead: tuple
    feasible: bool
    solution: tuple | None
    farkas: tuple | None


@dataclass(frozen=True, eq=False)
class PrepNcResult:
    """Outcome of the exact case analysis over support patterns."""

    feasible: bool
    cases: tuple
    model: OntModel | None

    @property
    def verdict(self) -> str:
        return "feasible" if self.feasible else "infeasible"

    def certificate(self) -> dict:
        return {
            "kind": "preparation-noncontextuality",
            "verdict": self.verdict,
            "cases": [
                {
                    "dead": list(case.dead),
                    "feasible": case.feasible,
                    "certificate": [format_fraction(v) for v in
                                    (case.solution if case.feasible
                                     else case.farkas)],
                }
                for case in self.cases
            ],
        }


def _pattern_system(problem: PrepEnsembleProblem, dead: tuple):
    """Exact rows over the alive components for one support pattern."""
    labels = []
    for pair in problem.orthogonal_pairs:
        labels.extend(pair)
    for label in problem.component_states:
        if label not in labels:
            labels.append(label)
    alive = [l for l in labels if l not in dead]
    weight_rows = []
    for decomposition in problem.decompositions:
        weights = {label: Fraction(0) for label in alive}
        for w, label in decomposition:
            if label in weights:
                weights[label] += Fraction(w)
        weight_rows.append([weights[l] for l in alive])
    rows = []
    rhs = []
    for k in range(1, len(weight_rows)):
        rows.append([weight_rows[k][i] - weight_rows[0][i]
                     for i in range(len(alive))])
        rhs.append(Fraction(0))
    rows.append(list(weight_rows[0]))
    rhs.append(Fraction(1))
    return alive, rows, rhs


def prep_nc_check(problem: PrepEnsembleProblem) -> PrepNcResult:
    """Case analysis: can any ontic state carry all declared decompositions?

    For each of the 16 support patterns the exact LP asks for nonnegative
    component masses at a single ontic state, equal across all declared
    decompositions and normalizable to carry weight.  All patterns failing
    is a proof of preparation contextuality; a satisfiable pattern (as with
    a single decomposition) is reported feasible.
    """
    _verify_decompositions(problem)
    cases = []
    feasible_any = False
    for choice in itertools.product(*problem.orthogonal_pairs):
        alive, rows, rhs = _pattern_system(problem, choice)
        res = solve_eq_nonneg(rows, rhs)
        if res.feasible:
            assert check_solution(rows, rhs, res.x)
            feasible_any = True
            cases.append(PrepNcCase(choice, True, res.x, None))
        else:
            assert check_farkas(rows, rhs, res.farkas)
            cases.append(PrepNcCase(choice, False, None, res.farkas))
    model = None
    if feasible_any and len(problem.decompositions) == 1:
        model = _single_decomposition_model(problem)
    return PrepNcResult(feasible_any, tuple(cases), model)


def _single_decomposition_model(problem: PrepEnsembleProblem) -> OntModel:
    """Trivial exact model: one ontic state per component of the decomposition."""
    merged: dict[str, Fraction] = {}
    for weight, label in problem.decompositions[0]:
        merged[label] = merged.get(label, Fraction(0)) + Fraction(weight)
    labels = tuple(merged)
    mu = {"target": tuple(merged[l] for l in labels)}
    for k, label in enumerate(labels):
        mu[label] = tuple(Fraction(1) if i == k else Fraction(0)
                          for i in range(len(labels)))
    xi = {}
    for effect_label, state in problem.component_states.items():
        xi[effect_label] = tuple(
            float(np.real(np.trace(state @ problem.component_states[l])))
            for l in labels)
    return OntModel(ontic_labels=labels, mu=mu, xi=xi)


# ---------------------------------------------------------------------------
# Assignment-polytope route (no tomographic completeness assumed)


@dataclass(frozen=True, eq=False)
class AssignmentPolytope:
    """Vertices of the distributions over deterministic assignments
    reproducing one preparation's statistics."""

    preparation: str
    measurements: tuple
    assignments: tuple
    distributions: dict
    vertices: tuple


def _normalize_stats(probs, n_outcomes: int, max_den: int = 10**6):
    """Rationalize one outcome distribution exactly.

    Float entries are rounded at ``max_den`` with the last outcome absorbing
    the rounding so valid float data stays exactly normalized; genuinely
    inconsistent sums are rejected.
    """
    values = []
    has_float = any(isinstance(p, float) for p in probs)
    for p in probs:
        if isinstance(p, float):
            values.append(Fraction(p).limit_denominator(max_den))
        else:
            values.append(to_fraction(p))
    if len(values) != n_outcomes:
        raise SchemaError(f"expected {n_outcomes} outcome probabilities, "
                          f"got {len(values)}")
    if any(v < 0 for v in values):
        raise EmptyAssignmentPolytope("negative outcome probability")
    total = sum(values)
    if has_float and total != 1:
        if abs(total - 1) > Fraction(1, 10**6):
            raise EmptyAssignmentPolytope(
                f"outcome probabilities sum to {float(total)}")
        values[-1] += 1 - total
        if values[-1] < 0:
            raise EmptyAssignmentPolytope("negative outcome probability")
    return tuple(values)


def build_assignment_polytope(preparation: str, measurements, stats,
                              *, max_vertices: int = MAX_POLYTOPE_VERTICES
                              ) -> AssignmentPolytope:
    """Enumerate the vertices of one preparation's assignment polytope.

    ``measurements`` is an ordered tuple of (label, outcome count); ``stats``
    maps each label to its outcome distribution.  Raises
    `EmptyAssignmentPolytope` when no assignment mixture reproduces the
    statistics (inconsistent input).
    """
    measurements = tuple((str(label), int(n)) for label, n in measurements)
    count = 1
    for _, n in measurements:
        count *= n
        if count > MAX_ASSIGNMENT_TUPLES:
            raise TooLargeError(
                f"more than {MAX_ASSIGNMENT_TUPLES} deterministic assignments")
    assignments = tuple(itertools.product(*[range(n) for _, n in measurements]))
    dists = {}
    for label, n in measurements:
        if label not in stats:
            raise SchemaError(f"missing statistics for measurement {label!r}")
        dists[label] = _normalize_stats(stats[label], n)
    rows = []
    rhs = []
    for m_index, (label, n) in enumerate(measurements):
        for outcome in range(n):
            rows.append([Fraction(1) if a[m_index] == outcome else Fraction(0)
                         for a in assignments])
            rhs.append(dists[label][outcome])
    rows.append([Fraction(1)] * len(assignments))
    rhs.append(Fraction(1))
    vertices = enumerate_vertices(rows, rhs, max_vertices=max_vertices)
    if not vertices:
        raise EmptyAssignmentPolytope(
            f"no assignment mixture reproduces preparation {preparation!r}")
    return AssignmentPolytope(preparation=preparation,
                              measurements=measurements,
                              assignments=assignments,
                              distributions=dists,
                              vertices=tuple(vertices))


def _disjoint_subset_pairs(n: int):
    """All unordered pairs of disjoint nonempty subsets of range(n).

    The pair is oriented so the overall smallest element sits on the first
    side, which enumerates each unordered pair exactly once.
    """
    indices = list(range(n))
    for s_mask in range(1, 2**n):
        s = tuple(i for i in indices if (s_mask >> i) & 1)
        rest = [i for i in indices if i > s[0] and not (s_mask >> i) & 1]
        for t_size in range(1, len(rest) + 1):
            for t in itertools.combinations(rest, t_size):
                yield (s, t)


def _bipartitions(n: int):
    """All unordered two-block partitions of range(n); element 0 sits first."""
    indices = list(range(n))
    for s_mask in range(1, 2**n - 1, 2):
        s = tuple(i for i in indices if (s_mask >> i) & 1)
        t = tuple(i for i in indices if not (s_mask >> i) & 1)
        yield (s, t)


@dataclass(frozen=True, eq=False)
class PuseyResult:
    """Outcome of the assignment-polytope contextuality scan."""

    verdict: str  # "contextual" | "inconclusive"
    scan_contextual: bool
    equivalence_contextual: bool
    pairs_checked: int
    pairs_covered: int
    intersecting_pair: tuple | None
    equivalence_farkas: tuple | None
    polytopes: dict

    def certificate(self) -> dict:
        cert = {
            "kind": "assignment-polytope-scan",
            "verdict": self.verdict,
            "pairs_checked": self.pairs_checked,
            "pairs_covered": self.pairs_covered,
            "scan_contextual": self.scan_contextual,
            "equivalence_contextual": self.equivalence_contextual,
            "vertex_counts": {p: len(poly.vertices)
                              for p, poly in self.polytopes.items()},
        }
        if self.intersecting_pair is not None:
            cert["intersecting_pair"] = [list(side)
                                         for side in self.intersecting_pair]
        if self.equivalence_farkas is not None:
            cert["equivalence_farkas"] = [format_fraction(v)
                                          for v in self.equivalence_farkas]
        return cert


def _hull_pair_feasibility(points_a, points_b) -> Feasibility:
    dim = len(points_a[0])
    na, nb = len(points_a), len(points_b)
    rows = []
    rhs = []
    for k in range(dim):
        rows.append([Fraction(p[k]) for p in points_a]
                    + [-Fraction(p[k]) for p in points_b])
        rhs.append(Fraction(0))
    rows.append([Fraction(1)] * na + [Fraction(0)] * nb)
    rhs.append(Fraction(1))
    rows.append([Fraction(0)] * na + [Fraction(1)] * nb)
    rhs.append(Fraction(1))
    res = solve_eq_nonneg(rows, rhs)
    if res.feasible:
        assert check_solution(rows, rhs, res.x)
    else:
        assert check_farkas(rows, rhs, res.farkas)
    return res


def pusey_incomplete_check(preps, *, declared_equivalences=None,
                           max_vertices: int = MAX_POLYTOPE_VERTICES
                           ) -> PuseyResult:
    """Preparation-contextuality scan without tomographic completeness.

    Builds each preparation's assignment polytope, enumerates its vertices
    exactly, and tests every pair of disjoint preparation subsets for a
    convex-hull intersection.  Growing a subset grows its hull, so a pair
    intersects only if the bipartition containing it does; testing the
    bipartitions therefore decides every covered pair with exponentially
    fewer LPs and an identical verdict.  The scan concludes "contextual"
    only when at least one disjoint pair exists and no pair intersects;
    note this is the literal subset-pair criterion, which does not restrict
    attention to operationally coinciding mixtures.  When
    ``declared_equivalences`` supplies groups of mixtures asserted equal,
    a single exact LP additionally demands per-assignment equality of the
    mixed ontic distributions; its infeasibility is a second, independent
    route to "contextual" with a Farkas certificate.
    """
    preps = dict(preps)
    if not preps:
        raise SchemaError("at least one preparation is required")
    labels = list(preps.keys())
    first = preps[labels[0]]
    measurement_labels = list(first.keys())
    measurements = tuple((m, len(first[m])) for m in measurement_labels)
    for label in labels:
        if set(preps[label].keys()) != set(measurement_labels):
            raise SchemaError(
                f"preparation {label!r} lists different measurements")
    polytopes = {}
    for label in labels:
        polytopes[label] = build_assignment_polytope(
            label, measurements, preps[label], max_vertices=max_vertices)

    n = len(labels)
    pair_total = (3**n - 2**(n + 1) + 1) // 2
    if pair_total > MAX_SUBSET_PAIRS:
        raise TooLargeError(
            f"{pair_total} disjoint subset pairs exceed {MAX_SUBSET_PAIRS}")
    pairs_checked = 0
    intersecting = None
    for s_idx, t_idx in _bipartitions(n):
        pairs_checked += 1
        points_a = [v for i in s_idx for v in polytopes[labels[i]].vertices]
        points_b = [v for i in t_idx for v in polytopes[labels[i]].vertices]
        res = _hull_pair_feasibility(points_a, points_b)
        if res.feasible and intersecting is None:
            intersecting = (tuple(labels[i] for i in s_idx),
                            tuple(labels[i] for i in t_idx))
    scan_contextual = pairs_checked > 0 and intersecting is None

    equivalence_contextual = False
    equivalence_farkas = None
    if declared_equivalences:
        rows, rhs = _equivalence_system(labels, polytopes,
                                        declared_equivalences)
        res = solve_eq_nonneg(rows, rhs)
        if res.feasible:
            assert check_solution(rows, rhs, res.x)
        else:
            assert check_farkas(rows, rhs, res.farkas)
            equivalence_contextual = True
            equivalence_farkas = res.farkas

    verdict = ("contextual" if scan_contextual or equivalence_contextual
               else "inconclusive")
    return PuseyResult(verdict=verdict,
                       scan_contextual=scan_contextual,
                       equivalence_contextual=equivalence_contextual,
                       pairs_checked=pairs_checked,
                       pairs_covered=pair_total,
                       intersecting_pair=intersecting,
                       equivalence_farkas=equivalence_farkas,
                       polytopes=polytopes)


def _equivalence_system(labels, polytopes, declared_equivalences):
    """Joint exact LP: per-prep statistics plus pointwise mixture equality."""
    assignments = polytopes[labels[0]].assignments
    measurements = polytopes[labels[0]].measurements
    n_a = len(assignments)
    offsets = {label: k * n_a for k, label in enumerate(labels)}
    n_vars = n_a * len(labels)
    rows = []
    rhs = []
    for label in labels:
        poly = polytopes[label]
        base = offsets[label]
        for m_index, (m_label, n_out) in enumerate(measurements):
            for outcome in range(n_out):
                row = [Fraction(0)] * n_vars
                for a_index, a in enumerate(assignments):
                    if a[m_index] == outcome:
                        row[base + a_index] = Fraction(1)
                rows.append(row)
                rhs.append(poly.distributions[m_label][outcome])
    for group in declared_equivalences:
        mixtures = [dict(mix) for mix in group]
        for mix in mixtures:
            for label, weight in mix.items():
                if label not in offsets:
                    raise SchemaError(f"mixture references unknown preparation "
                                      f"{label!r}")
                mix[label] = to_fraction(weight)
            if sum(mix.values()) != 1:
                raise SchemaError("mixture weights must sum to 1")
        for k in range(1, len(mixtures)):
            for a_index in range(n_a):
                row = [Fraction(0)] * n_vars
                for label, weight in mixtures[k].items():
                    row[offsets[label] + a_index] += weight
                for label, weight in mixtures[0].items():
                    row[offsets[label] + a_index] -= weight
                rows.append(row)
                rhs.append(Fraction(0))
    return rows, rhs


def six_ensemble_statistics(r, axis=(0.0, 0.0, 1.0), *, max_den: int = 10**6):
    """X, Y, Z statistics of the six-decomposition components plus equivalences.

    Returns (stats, equivalence group, problem): per-component outcome
    distributions for the three Pauli measurements (rationalized at
    ``max_den``), and the six decompositions as mixtures declared
    operationally equivalent.
    """
    problem = qubit_prep_ensemble(r, axis)
    bases = ("X", "Y", "Z")
    stats = {}
    for label, state in problem.component_states.items():
        per = {}
        for basis in bases:
            plus = eigen_projector(PAULIS[basis], 1.0)
            p0 = float(np.real(np.trace(plus @ state)))
            p0 = min(1.0, max(0.0, p0))
            frac = Fraction(p0).limit_denominator(max_den)
            per[basis] = (frac, 1 - frac)
        stats[label] = per
    group = []
    for decomposition in problem.decompositions:
        mix: dict[str, Fraction] = {}
        for w, label in decomposition:
            mix[label] = mix.get(label, Fraction(0)) + Fraction(w)
        group.append(mix)
    return stats, group, problem


# ---------------------------------------------------------------------------
# JSON interface


def gpt_to_json(gpt: Gpt) -> dict:
    return {
        "dim": gpt.dim,
        "states": [list(map(float, s)) for s in gpt.states],
        "effects": [list(map(float, e)) for e in gpt.effects],
        "unit": list(map(float, gpt.unit)),
        "sharp_contexts": [list(ctx) for ctx in gpt.sharp_contexts],
    }


def gpt_from_json(data) -> Gpt:
    if not isinstance(data, dict):
        raise SchemaError("GPT JSON must be an object")
    for key in ("dim", "states", "effects", "unit"):
        if key not in data:
            raise SchemaError(f"GPT JSON missing key {key!r}")
    try:
        gpt = make_gpt(data["states"], data["effects"], data["unit"],
                       data.get("sharp_contexts", ()))
    except (TypeError, GptError) as exc:
        if isinstance(exc, (InconsistentUnit, UnsharpEffectFlagged)):
            raise
        raise SchemaError(f"malformed GPT JSON: {exc}") from exc
    if int(data["dim"]) != gpt.dim:
        raise SchemaError(f"declared dim {data['dim']} != vector length {gpt.dim}")
    return gpt
