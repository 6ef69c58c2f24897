"""Exact rational linear programming and zero-sum matrix games.

The solver is a dense two-phase tableau simplex over ``Fraction`` with
Bland's rule for entering and leaving variables, so it always terminates.
Every solution carries a certificate (dual point, Farkas vector or
improving ray) that :func:`verify_certificate` re-checks from the problem
data alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .order import FinitePoset, bits, enumerate_opens
from .valuation import SimpleCapacity, SimpleValuation, as_fraction, stochastic_leq

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)
_ONE = Fraction(1)


class PreconditionError(ValueError):
    """An operation was called outside the domain where its guarantee holds."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    op: str
    rhs: Fraction

    def __init__(self, coeffs: Sequence, op: str, rhs):
        if op not in ("<=", ">=", "=="):
            raise ValueError(f"bad constraint operator {op!r}")
        object.__setattr__(self, "coeffs", tuple(as_fraction(c) for c in coeffs))
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "rhs", as_fraction(rhs))

    def lhs(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * v for a, v in zip(self.coeffs, x) if a), _ZERO)

    def holds(self, x: Sequence[Fraction]) -> bool:
        v = self.lhs(x)
        if self.op == "<=":
            return v <= self.rhs
        if self.op == ">=":
            return v >= self.rhs
        return v == self.rhs


@dataclass
class LinearProgram:
    """Optimize ``objective . x`` subject to ``constraints``.

    Variables are non-negative except those listed in ``free``.
    """

    objective: tuple[Fraction, ...]
    constraints: list[Constraint]
    maximize: bool = True
    free: frozenset[int] = frozenset()

    @property
    def nvars(self) -> int:
        return len(self.objective)


@dataclass
class LPSolution:
    """Result of :func:`solve_lp`.

    ``x`` is a primal point (optimal, or merely feasible when unbounded).
    Certificates refer to the maximization form ``max sense * objective``:
    ``dual`` has one entry per constraint, ``farkas`` proves infeasibility
    and ``ray`` is an improving direction for unbounded problems.
    """

    status: str
    x: list[Fraction] | None = None
    value: Fraction | None = None
    dual: list[Fraction] | None = None
    farkas: list[Fraction] | None = None
    ray: list[Fraction] | None = None
    pivots: int = 0
    problem: LinearProgram | None = field(default=None, repr=False)

    def verify(self) -> bool:
        return verify_certificate(self.problem, self)


def _dot(a, b) -> Fraction:
    return sum((u * v for u, v in zip(a, b) if u and v), _ZERO)


def solve_lp(
    objective: Sequence,
    constraints: Sequence[Constraint],
    maximize: bool = True,
    free: Sequence[int] = (),
) -> LPSolution:
    lp = LinearProgram(
        tuple(as_fraction(c) for c in objective), list(constraints), maximize, frozenset(free)
    )
    for con in lp.constraints:
        if len(con.coeffs) != lp.nvars:
            raise ValueError("constraint width does not match objective")
    sol = _Tableau(lp).run()
    sol.problem = lp
    return sol


class _Tableau:
    def __init__(self, lp: LinearProgram):
        self.lp = lp
        sense = 1 if lp.maximize else -1
        # structural columns: (original var, +1/-1)
        cols: list[tuple[int, int]] = []
        for j in range(lp.nvars):
            cols.append((j, 1))
            if j in lp.free:
                cols.append((j, -1))
        self.struct = cols
        ns = len(cols)
        m = len(lp.constraints)
        nslack = sum(1 for c in lp.constraints if c.op != "==")
        self.m = m
        self.sign: list[int] = []
        self.rows: list[list[Fraction]] = []
        self.init_col: list[int] = []
        self.artificial: list[int] = []
        slack_base = ns
        art_base = ns + nslack
        ncols = art_base
        s = 0
        row_specs = []
        for i, con in enumerate(lp.constraints):
            row = [con.coeffs[j] * t for j, t in cols]
            slack_col = None
            e = 0
            if con.op != "==":
                slack_col = slack_base + s
                e = 1 if con.op == "<=" else -1
                s += 1
            sg = -1 if con.rhs < 0 else 1
            row_specs.append((row, slack_col, e, sg, con.rhs * sg))
        for i, (row, slack_col, e, sg, rhs) in enumerate(row_specs):
            if slack_col is not None and e * sg == 1:
                self.init_col.append(slack_col)
            else:
                self.init_col.append(ncols)
                self.artificial.append(ncols)
                ncols += 1
        self.ncols = ncols
        self.is_art = [False] * ncols
        for a in self.artificial:
            self.is_art[a] = True
        for i, (row, slack_col, e, sg, rhs) in enumerate(row_specs):
            full = [_ZERO] * (ncols + 1)
            for k, v in enumerate(row):
                full[k] = v * sg
            if slack_col is not None:
                full[slack_col] = Fraction(e * sg)
            full[self.init_col[i]] = _ONE
            full[ncols] = rhs
            self.rows.append(full)
            self.sign.append(sg)
        self.basis = list(self.init_col)
        cost = [_ZERO] * ncols
        for k, (j, t) in enumerate(cols):
            cost[k] = lp.objective[j] * t * sense
        self.cost2 = cost
        self.cost1 = [(-_ONE if self.is_art[k] else _ZERO) for k in range(ncols)]
        self.pivots = 0

    def _reduced(self, cost: list[Fraction]) -> list[Fraction]:
        z = list(cost)
        for r, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[r]
                for k in range(self.ncols):
                    if row[k]:
                        z[k] -= cb * row[k]
        return z

    def _pivot(self, r: int, col: int, z: list[Fraction]) -> None:
        row = self.rows[r]
        p = row[col]
        if p != 1:
            for k in range(self.ncols + 1):
                if row[k]:
                    row[k] /= p
        nz = [k for k in range(self.ncols + 1) if row[k]]
        for i, other in enumerate(self.rows):
            if i != r:
                f = other[col]
                if f:
                    for k in nz:
                        other[k] -= f * row[k]
        f = z[col]
        if f:
            for k in nz:
                if k < self.ncols:
                    z[k] -= f * row[k]
        self.basis[r] = col
        self.pivots += 1

    def _optimize(self, z: list[Fraction], allowed) -> int | None:
        """Bland-rule simplex; returns an unbounded entering column or ``None`` at optimum."""
        rhs = self.ncols
        while True:
            col = next((k for k in range(self.ncols) if z[k] > 0 and allowed(k)), None)
            if col is None:
                return None
            best = None
            for r, row in enumerate(self.rows):
                a = row[col]
                if a > 0:
                    key = (row[rhs] / a, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return col
            self._pivot(best[1], col, z)

    def _dual(self, cost: list[Fraction]) -> list[Fraction]:
        y = []
        for i in range(self.m):
            c0 = self.init_col[i]
            y.append(sum((cost[b] * self.rows[r][c0] for r, b in enumerate(self.basis) if cost[b]), _ZERO))
        return y

    def _point(self) -> list[Fraction]:
        xs = [_ZERO] * self.ncols
        for r, b in enumerate(self.basis):
            xs[b] = self.rows[r][self.ncols]
        return xs

    def _orig(self, xs: list[Fraction]) -> list[Fraction]:
        x = [_ZERO] * self.lp.nvars
        for k, (j, t) in enumerate(self.struct):
            x[j] += t * xs[k]
        return x

    def run(self) -> LPSolution:
        if self.artificial:
            z = self._reduced(self.cost1)
            self._optimize(z, lambda k: True)
            if any(self.is_art[b] and self.rows[r][self.ncols] > 0 for r, b in enumerate(self.basis)):
                y = self._dual(self.cost1)
                farkas = [s * v for s, v in zip(self.sign, y)]
                return LPSolution(INFEASIBLE, farkas=farkas, pivots=self.pivots)
            # drive zero-level artificials out of the basis where possible
            for r in range(self.m):
                if self.is_art[self.basis[r]]:
                    row = self.rows[r]
                    col = next((k for k in range(self.ncols) if row[k] and not self.is_art[k]), None)
                    if col is not None:
                        self._pivot(r, col, [_ZERO] * self.ncols)
        z = self._reduced(self.cost2)
        col = self._optimize(z, lambda k: not self.is_art[k])
        xs = self._point()
        x = self._orig(xs)
        if col is not None:
            d = [_ZERO] * self.ncols
            d[col] = _ONE
            for r, b in enumerate(self.basis):
                d[b] = -self.rows[r][col]
            return LPSolution(UNBOUNDED, x=x, ray=self._orig(d), pivots=self.pivots)
        y = self._dual(self.cost2)
        dual = [s * v for s, v in zip(self.sign, y)]
        value = _dot(self.lp.objective, x)
        return LPSolution(OPTIMAL, x=x, value=value, dual=dual, pivots=self.pivots)


def verify_certificate(lp: LinearProgram, sol: LPSolution) -> bool:
    """Re-check a solution's certificate by exact substitution into the problem data."""
    sense = 1 if lp.maximize else -1
    c = [sense * v for v in lp.objective]
    cons = lp.constraints

    def primal_ok(x) -> bool:
        return all(con.holds(x) for con in cons) and all(
            x[j] >= 0 for j in range(lp.nvars) if j not in lp.free
        )

    def signs_ok(y) -> bool:
        for con, v in zip(cons, y):
            if con.op == "<=" and v < 0:
                return False
            if con.op == ">=" and v > 0:
                return False
        return True

    def aty(y) -> list[Fraction]:
        return [sum((con.coeffs[j] * v for con, v in zip(cons, y) if v), _ZERO) for j in range(lp.nvars)]

    if sol.status == OPTIMAL:
        x, y = sol.x, sol.dual
        if not primal_ok(x) or not signs_ok(y):
            return False
        col = aty(y)
        for j in range(lp.nvars):
            if j in lp.free:
                if col[j] != c[j]:
                    return False
            elif col[j] < c[j]:
                return False
        gap = _dot([con.rhs for con in cons], y) - _dot(c, x)
        return gap == 0 and sol.value == _dot(lp.objective, x)
    if sol.status == INFEASIBLE:
        y = sol.farkas
        if not signs_ok(y):
            return False
        col = aty(y)
        for j in range(lp.nvars):
            if (j in lp.free and col[j] != 0) or col[j] < 0:
                return False
        return _dot([con.rhs for con in cons], y) < 0
    if sol.status == UNBOUNDED:
        x, d = sol.x, sol.ray
        if not primal_ok(x):
            return False
        for con in cons:
            v = con.lhs(d)
            if (con.op == "<=" and v > 0) or (con.op == ">=" and v < 0) or (con.op == "==" and v != 0):
                return False
        if any(d[j] < 0 for j in range(lp.nvars) if j not in lp.free):
            return False
        return _dot(c, d) > 0
    return False


# ---------------------------------------------------------------- games


@dataclass(frozen=True)
class GameSolution:
    """Value of ``max_beta min_alpha beta^T M alpha`` with optimal mixed strategies.

    The row player (``beta``) maximizes and the column player (``alpha``)
    minimizes.
    """

    value: Fraction
    row: tuple[Fraction, ...]
    col: tuple[Fraction, ...]
    maxmin: Fraction
    minmax: Fraction


def matrix_game(M: Sequence[Sequence]) -> GameSolution:
    """Solve a zero-sum game by two independent LPs and check they meet."""
    M = [[as_fraction(v) for v in row] for row in M]
    n = len(M)
    if n == 0 or not M[0] or any(len(row) != len(M[0]) for row in M):
        raise ValueError("game matrix must be rectangular and non-empty")
    m = len(M[0])

    # row player: max v  s.t.  sum_i beta_i M[i][j] >= v for all j
    cons = [Constraint([M[i][j] for i in range(n)] + [-1], ">=", 0) for j in range(m)]
    cons.append(Constraint([1] * n + [0], "==", 1))
    row_sol = solve_lp([0] * n + [1], cons, maximize=True, free=[n])

    # column player: min w  s.t.  sum_j M[i][j] alpha_j <= w for all i
    cons = [Constraint(list(M[i]) + [-1], "<=", 0) for i in range(n)]
    cons.append(Constraint([1] * m + [0], "==", 1))
    col_sol = solve_lp([0] * m + [1], cons, maximize=False, free=[m])

    if row_sol.status != OPTIMAL or col_sol.status != OPTIMAL:
        raise SolverError("matrix game LP not optimal")
    beta = tuple(row_sol.x[:n])
    alpha = tuple(col_sol.x[:m])
    maxmin = min(sum(beta[i] * M[i][j] for i in range(n)) for j in range(m))
    minmax = max(sum(M[i][j] * alpha[j] for j in range(m)) for i in range(n))
    if not (maxmin == row_sol.value == col_sol.value == minmax):
        raise SolverError(f"minimax mismatch: {maxmin} {row_sol.value} {col_sol.value} {minmax}")
    return GameSolution(maxmin, beta, alpha, row_sol.value, col_sol.value)


# ---------------------------------------------------------------- capacity decomposition


@dataclass(frozen=True)
class StrategySpace:
    """All choice functions picking one element from each term's set.

    ``strategies[k][t]`` is the element chosen for term ``t``; strategies
    are listed in lexicographic order of the (ascending) choices.
    """

    weights: tuple[Fraction, ...]
    sets: tuple[int, ...]
    strategies: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, kappa: SimpleCapacity) -> "StrategySpace":
        weights = tuple(w for w, _ in kappa.terms)
        sets = tuple(B for _, B in kappa.terms)
        strategies = tuple(itertools.product(*(list(bits(B)) for B in sets)))
        return cls(weights, sets, strategies)

    def __len__(self) -> int:
        return len(self.strategies)

    def pure(self, k: int) -> SimpleValuation:
        """``sum_t a_t delta_{f(t)}`` for the ``k``-th strategy ``f``."""
        out: dict[int, Fraction] = {}
        for w, y in zip(self.weights, self.strategies[k]):
            out[y] = out.get(y, 0) + w
        return SimpleValuation(out)

    def mixture(self, beta: Sequence[Fraction]) -> SimpleValuation:
        out: dict[int, Fraction] = {}
        for b, f in zip(beta, self.strategies):
            if b:
                for w, y in zip(self.weights, f):
                    out[y] = out.get(y, 0) + b * w
        return SimpleValuation(out)


@dataclass(frozen=True)
class Decomposition:
    space: StrategySpace
    beta: tuple[Fraction, ...]
    mixture: SimpleValuation


def trace_constraints(space: StrategySpace, nu: SimpleValuation, P: FinitePoset, opens=None):
    """One ``<=`` row per distinct trace ``U & Z`` of an open on the chosen points.

    The mixture only sees ``U & Z``, so for opens with the same trace only
    the smallest right-hand side ``nu(U)`` matters.
    """
    Z = 0
    for B in space.sets:
        Z |= B
    tightest: dict[int, Fraction] = {}
    for U in opens if opens is not None else enumerate_opens(P):
        t = U & Z
        v = nu(U)
        if t not in tightest or v < tightest[t]:
            tightest[t] = v
    rows = []
    for t, bound in sorted(tightest.items()):
        coeffs = [
            sum((w for w, y in zip(space.weights, f) if t >> y & 1), _ZERO) for f in space.strategies
        ]
        if any(coeffs):
            rows.append(Constraint(coeffs, "<=", bound))
    return rows


def decompose_capacity(
    kappa: SimpleCapacity, nu: SimpleValuation, P: FinitePoset, opens=None
) -> Decomposition:
    """Mixed strategy ``beta`` with ``sum_f beta_f sum_t a_t delta_{f(t)} <= nu``.

    Requires ``kappa <= nu``; such a ``beta`` then always exists.
    """
    if opens is None:
        opens = enumerate_opens(P)
    verdict = stochastic_leq(kappa, nu, P, opens)
    if not verdict:
        raise PreconditionError("capacity is not below the valuation", verdict.witness)
    space = StrategySpace.of(kappa)
    k = len(space)
    cons = trace_constraints(space, nu, P, opens)
    cons.append(Constraint([1] * k, "==", 1))
    sol = solve_lp([0] * k, cons)
    if sol.status != OPTIMAL:
        raise SolverError("decomposition LP infeasible although kappa <= nu")
    beta = tuple(sol.x)
    return Decomposition(space, beta, space.mixture(beta))


def domination_game(kappa: SimpleCapacity, nu: SimpleValuation, P: FinitePoset) -> list[list[Fraction]]:
    """Payoff matrix with rows = strategies, columns = opens: ``nu(U) - pure_f(U)``.

    A row strategy guaranteeing a non-negative payoff is exactly a
    decomposition of ``kappa`` below ``nu``.
    """
    space = StrategySpace.of(kappa)
    opens = enumerate_opens(P)
    pures = [space.pure(k) for k in range(len(space))]
    return [[nu(U) - p(U) for U in opens] for p in pures]
