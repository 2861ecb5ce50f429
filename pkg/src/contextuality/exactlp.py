"""Exact rational feasibility LPs with machine-checkable certificates.

Every verdict this package emits reduces to feasibility of a linear system
``{A x = b, x >= 0}`` over the rationals.  The solver here is a phase-1
simplex with Bland's rule on ``fractions.Fraction`` entries: feasible
instances return an exact nonnegative solution, infeasible instances return
a Farkas certificate ``y`` with ``y^T A <= 0`` componentwise and
``y^T b > 0``, re-checkable by direct multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence


class TooLargeError(ValueError):
    """Instance exceeds the documented desk-scale guards."""


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings to Fraction; floats are rejected."""
    if isinstance(value, float):
        raise TypeError(f"exact LP input must be rational, got float {value!r}")
    return Fraction(value)


def format_fraction(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


@dataclass(frozen=True)
class Feasibility:
    """Outcome of an exact feasibility solve.

    ``x`` is a nonnegative rational solution when ``feasible``; otherwise
    ``farkas`` holds y with y^T A <= 0 and y^T b > 0.
    """

    feasible: bool
    x: tuple[Fraction, ...] | None = None
    farkas: tuple[Fraction, ...] | None = None


def check_farkas(a_rows: Sequence[Sequence[Fraction]], b: Sequence[Fraction],
                 y: Sequence[Fraction]) -> bool:
    """Re-verify a Farkas certificate by direct multiplication."""
    m = len(b)
    if len(y) != m:
        return False
    n = len(a_rows[0]) if m else 0
    for j in range(n):
        if sum(y[i] * a_rows[i][j] for i in range(m)) > 0:
            return False
    return sum(y[i] * b[i] for i in range(m)) > 0


def check_solution(a_rows: Sequence[Sequence[Fraction]], b: Sequence[Fraction],
                   x: Sequence[Fraction]) -> bool:
    """Re-verify a primal solution: A x = b exactly and x >= 0."""
    if any(v < 0 for v in x):
        return False
    for row, target in zip(a_rows, b):
        if sum(c * v for c, v in zip(row, x)) != target:
            return False
    return True


def solve_eq_nonneg(a_rows: Sequence[Sequence[Fraction]],
                    b: Sequence[Fraction]) -> Feasibility:
    """Decide ``{A x = b, x >= 0}`` exactly (revised phase-1 simplex, Bland's rule)."""
    m = len(a_rows)
    n = len(a_rows[0]) if m else 0
    if m == 0:
        return Feasibility(True, x=tuple(Fraction(0) for _ in range(n)))
    sign = [1] * m
    cols: list[list[Fraction]] = [[Fraction(0)] * m for _ in range(n)]
    rhs: list[Fraction] = []
    for i, row in enumerate(a_rows):
        bi = Fraction(b[i])
        if bi < 0:
            sign[i] = -1
            bi = -bi
        rhs.append(bi)
        for j in range(n):
            v = Fraction(row[j])
            cols[j][i] = -v if sign[i] < 0 else v

    # Artificial variable i (column id n+i) starts basic in row i; B^-1 = I.
    binv = [[Fraction(int(i == k)) for k in range(m)] for i in range(m)]
    basis = list(range(n, n + m))
    in_basis = [False] * n
    xb = rhs[:]

    def dual() -> list[Fraction]:
        # y = c_B B^-1 with c_B = 1 exactly on rows still holding an artificial.
        return [sum(binv[k][i] for k in range(m) if basis[k] >= n)
                for i in range(m)]

    while True:
        y = dual()
        enter = -1
        for j in range(n):  # Bland: smallest structural index with negative reduced cost
            if in_basis[j]:
                continue
            if sum(y[i] * cols[j][i] for i in range(m)) > 0:
                enter = j
                break
        if enter < 0:
            break
        d = [sum(binv[i][k] * cols[enter][k] for k in range(m)) for i in range(m)]
        leave = -1
        best: Fraction | None = None
        for i in range(m):
            if d[i] > 0:
                ratio = xb[i] / d[i]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            raise ArithmeticError("phase-1 simplex unbounded; inputs inconsistent")
        piv = d[leave]
        binv[leave] = [v / piv for v in binv[leave]]
        xb[leave] /= piv
        for i in range(m):
            if i != leave and d[i] != 0:
                f = d[i]
                lrow = binv[leave]
                binv[i] = [binv[i][k] - f * lrow[k] for k in range(m)]
                xb[i] -= f * xb[leave]
        if basis[leave] < n:
            in_basis[basis[leave]] = False
        basis[leave] = enter
        in_basis[enter] = True

    residual = sum(xb[i] for i in range(m) if basis[i] >= n)
    if residual == 0:
        x = [Fraction(0)] * n
        for i in range(m):
            if basis[i] < n:
                x[basis[i]] = xb[i]
        return Feasibility(True, x=tuple(x))
    y = dual()
    farkas = tuple(y[i] * sign[i] for i in range(m))
    return Feasibility(False, farkas=farkas)


def solve_eq_nonneg_pruned(a_rows: Sequence[Sequence[Fraction]],
                           b: Sequence[Fraction]) -> Feasibility:
    """``solve_eq_nonneg`` for entrywise-nonnegative A.

    Rows with b_i = 0 force every column they touch to zero, so those columns
    and rows are eliminated before the simplex runs and the certificate is
    lifted back to the full system afterwards.
    """
    m = len(a_rows)
    n = len(a_rows[0]) if m else 0
    for i in range(m):
        if b[i] < 0:
            # nonnegative row can never produce a negative total
            y = [Fraction(0)] * m
            y[i] = Fraction(-1)
            return Feasibility(False, farkas=tuple(y))
    zero_rows = [i for i in range(m) if b[i] == 0]
    zero_set = set(zero_rows)
    dead_cols = [j for j in range(n) if any(a_rows[i][j] != 0 for i in zero_rows)]
    dead_set = set(dead_cols)
    live_rows = [i for i in range(m) if i not in zero_set]
    live_cols = [j for j in range(n) if j not in dead_set]
    if not live_rows:
        return Feasibility(True, x=tuple(Fraction(0) for _ in range(n)))

    sub = [[a_rows[i][j] for j in live_cols] for i in live_rows]
    sub_b = [b[i] for i in live_rows]
    res = solve_eq_nonneg(sub, sub_b)

    if res.feasible:
        x = [Fraction(0)] * n
        for pos, j in enumerate(live_cols):
            x[j] = res.x[pos]
        return Feasibility(True, x=tuple(x))

    y = [Fraction(0)] * m
    for pos, i in enumerate(live_rows):
        y[i] = res.farkas[pos]
    # Dropped columns may still have y^T A_j > 0; push them down through the
    # zero rows they touch (which contribute nothing to y^T b).
    shift = Fraction(0)
    for j in dead_cols:
        t = sum(y[i] * a_rows[i][j] for i in live_rows)
        if t > 0:
            c = sum(a_rows[i][j] for i in zero_rows)
            shift = max(shift, t / c)
    if shift > 0:
        for i in zero_rows:
            y[i] = -shift
    return Feasibility(False, farkas=tuple(y))


def row_reduce(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """In-place Gauss-Jordan; returns (reduced rows, pivot column indices)."""
    pivots: list[int] = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c]
        rows[r] = [v / inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * p for a, p in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def exact_rank(a_rows: Sequence[Sequence[Fraction]]) -> int:
    rows = [[Fraction(v) for v in row] for row in a_rows]
    if not rows:
        return 0
    _, pivots = row_reduce(rows)
    return len(pivots)


def solve_exact(a_rows: Sequence[Sequence[Fraction]],
                b: Sequence[Fraction],
                col_subset: Sequence[int]) -> list[Fraction] | None:
    """Solve A[:, cols] z = b exactly; None if inconsistent or underdetermined."""
    aug = [[Fraction(a_rows[i][j]) for j in col_subset] + [Fraction(b[i])]
           for i in range(len(a_rows))]
    reduced, pivots = row_reduce(aug)
    k = len(col_subset)
    if k in pivots:  # pivot in the RHS column: inconsistent
        return None
    if len(pivots) < k:  # rank-deficient choice of columns
        return None
    z = [Fraction(0)] * k
    for r, c in enumerate(pivots):
        z[c] = reduced[r][k]
    return z


def enumerate_vertices(a_rows: Sequence[Sequence[Fraction]],
                       b: Sequence[Fraction],
                       *,
                       max_vertices: int = 10_000,
                       max_bases: int = 2_000_000) -> list[tuple[Fraction, ...]]:
    """All vertices of ``{x >= 0 : A x = b}`` via basic feasible solutions.

    Raises TooLargeError beyond the documented caps.  Returns [] when the
    polytope is empty.
    """
    m = len(a_rows)
    n = len(a_rows[0]) if m else 0
    aug = [[Fraction(v) for v in row] + [Fraction(b[i])]
           for i, row in enumerate(a_rows)]
    reduced, pivots = row_reduce(aug)
    if n in pivots:
        return []  # inconsistent system
    r = len(pivots)
    if r == 0:
        if any(v != 0 for v in b):
            return []
        return [tuple(Fraction(0) for _ in range(n))]
    # Work on the independent rows of the reduced system.
    rows = [reduced[i][:n] for i in range(r)]
    rhs = [reduced[i][n] for i in range(r)]

    from math import comb
    if comb(n, r) > max_bases:
        raise TooLargeError(f"vertex enumeration over C({n},{r}) bases exceeds {max_bases}")

    seen: set[tuple[Fraction, ...]] = set()
    out: list[tuple[Fraction, ...]] = []
    for cols in combinations(range(n), r):
        z = solve_exact(rows, rhs, cols)
        if z is None or any(v < 0 for v in z):
            continue
        x = [Fraction(0)] * n
        for c, v in zip(cols, z):
            x[c] = v
        tx = tuple(x)
        if tx not in seen:
            seen.add(tx)
            out.append(tx)
            if len(out) > max_vertices:
                raise TooLargeError(f"more than {max_vertices} vertices")
    return out


def hulls_intersect(points_a: Sequence[Sequence[Fraction]],
                    points_b: Sequence[Sequence[Fraction]]) -> bool:
    """Exact test whether conv(points_a) and conv(points_b) share a point."""
    if not points_a or not points_b:
        return False
    dim = len(points_a[0])
    na, nb = len(points_a), len(points_b)
    rows: list[list[Fraction]] = []
    b: list[Fraction] = []
    for k in range(dim):
        rows.append([Fraction(p[k]) for p in points_a]
                    + [-Fraction(p[k]) for p in points_b])
        b.append(Fraction(0))
    rows.append([Fraction(1)] * na + [Fraction(0)] * nb)
    b.append(Fraction(1))
    rows.append([Fraction(0)] * na + [Fraction(1)] * nb)
    b.append(Fraction(1))
    return solve_eq_nonneg(rows, b).feasible


def solve_box_eq(a_rows: Sequence[Sequence[Fraction]],
                 b: Sequence[Fraction],
                 lower: Sequence[Fraction],
                 upper: Sequence[Fraction]) -> list[Fraction] | None:
    """One x with A x = b and lower <= x <= upper, or None if there is none."""
    m = len(a_rows)
    n = len(lower)
    if any(upper[j] < lower[j] for j in range(n)):
        return None
    # substitute x = lower + s, add slack t with s + t = upper - lower
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i in range(m):
        row = [Fraction(a_rows[i][j]) for j in range(n)] + [Fraction(0)] * n
        rows.append(row)
        rhs.append(Fraction(b[i]) - sum(a_rows[i][j] * lower[j] for j in range(n)))
    for j in range(n):
        row = [Fraction(0)] * (2 * n)
        row[j] = Fraction(1)
        row[n + j] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(upper[j]) - Fraction(lower[j]))
    res = solve_eq_nonneg(rows, rhs)
    if not res.feasible:
        return None
    return [Fraction(lower[j]) + res.x[j] for j in range(n)]
