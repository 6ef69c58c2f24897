"""Weak-topology neighbourhoods of simple valuations and their finitary witnesses.

Given a simple valuation ``nu`` inside a basic weak open
``U = [U_1 > r_1] & ... & [U_n > r_n]``, :func:`verify_sandwich` builds a
weak open ``V`` and a finite set ``E`` of simple valuations with
``nu in V``, ``V <= up(E)`` and ``up(E) <= U``, and checks every step
exactly.  Probability valuations on a pointed poset are handled by moving
to subprobability valuations off the bottom element and back
(:func:`lift_minus`, :func:`lift_plus`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .lp import (
    OPTIMAL,
    Constraint,
    PreconditionError,
    SolverError,
    StrategySpace,
    decompose_capacity,
    solve_lp,
)
from .order import (
    FinitePoset,
    NotMember,
    SizeError,
    bits,
    downward_closure,
    enumerate_opens,
    induced,
    interior,
    minimal_elements,
    popcount,
    upward_closure,
)
from .valuation import (
    Flavor,
    FlavorError,
    SimpleCapacity,
    SimpleValuation,
    as_fraction,
    fmt_q,
    round_valuation,
    stochastic_leq,
    way_below,
)

DEFAULT_E_CAP = 200_000


class TheoremViolation(AssertionError):
    """A property that the construction guarantees was found false."""


class Mode(enum.Enum):
    GT = "gt"
    WAY_BELOW = "way_below"


@dataclass(frozen=True)
class SubbasicOpen:
    """``[U > r]`` (mode ``GT``) or ``[r << U]`` (mode ``WAY_BELOW``)."""

    U: int
    r: Fraction
    mode: Mode = Mode.GT

    def contains(self, mu: SimpleValuation) -> bool:
        v = mu(self.U)
        return v > self.r if self.mode is Mode.GT else way_below(self.r, v)


@dataclass(frozen=True)
class WeakOpen:
    conjuncts: tuple[SubbasicOpen, ...]
    flavor: Flavor = Flavor.PLAIN

    def contains(self, mu: SimpleValuation) -> bool:
        return self.flavor.admits(mu.mass) and all(c.contains(mu) for c in self.conjuncts)


def basic_open(conjuncts: Sequence[tuple[int, object]], flavor: Flavor = Flavor.PLAIN) -> WeakOpen:
    return WeakOpen(tuple(SubbasicOpen(U, as_fraction(r)) for U, r in conjuncts), flavor)


def member_weak_open(mu: SimpleValuation, W: WeakOpen) -> bool:
    return W.contains(mu)


def reduce_to_simple(nu: SimpleValuation, W: WeakOpen) -> SimpleValuation:
    """A simple valuation below ``nu`` inside ``W``.

    Every valuation on a finite space is already simple, so this is ``nu``.
    """
    if not W.contains(nu):
        raise NotMember("valuation is not in the weak open")
    return nu


# ---------------------------------------------------------------- constants


def choose_constants(nu: SimpleValuation, conjuncts: Sequence[tuple[int, Fraction]]):
    """Scale ``a`` in (0, 1) and margins ``s_i`` with ``a * nu(U_i) > s_i > r_i``."""
    ratios = []
    for i, (U, r) in enumerate(conjuncts):
        v = nu(U)
        if r <= 0:
            raise PreconditionError(f"conjunct {i}: threshold must be positive, got {r}")
        if v <= r:
            raise PreconditionError(f"conjunct {i}: nu(U)={v} is not above {r}")
        ratios.append(r / v)
    a = (1 + max(ratios, default=Fraction(0))) / 2
    s = [(a * nu(U) + r) / 2 for U, r in conjuncts]
    if not 0 < a < 1:
        raise TheoremViolation(f"a={a} outside (0,1)")
    for (U, r), si in zip(conjuncts, s):
        if not a * nu(U) > si > r:
            raise TheoremViolation(f"margin {si} not strictly between {r} and {a * nu(U)}")
    return a, s


def choose_N(zsize: int, s: Sequence[Fraction], r: Sequence[Fraction]) -> int:
    """Least admissible grid: ``N >= |Z| / (s_i - r_i)`` for every ``i``, and ``N >= 1``."""
    need = [Fraction(zsize) / (si - ri) for si, ri in zip(s, r)]
    return max(1, math.ceil(max(need, default=0)))


# ---------------------------------------------------------------- bundle


@dataclass
class WitnessBundle:
    P: FinitePoset
    nu: SimpleValuation
    U_cal: WeakOpen
    a: Fraction
    s: list[Fraction]
    I: dict[int, frozenset[int]]
    B: dict[int, int]
    V: dict[int, int]
    order: list[int]
    Z: int = 0
    N: int = 1
    V_cal: WeakOpen | None = None
    upsets: list[int] = field(default_factory=list)
    kappa: SimpleCapacity | None = None
    E: list[SimpleValuation] = field(default_factory=list)
    E_beta: list[tuple[Fraction, ...]] = field(default_factory=list)

    @property
    def A(self) -> int:
        return self.nu.support

    @property
    def conjuncts(self) -> list[tuple[int, Fraction]]:
        return [(c.U, c.r) for c in self.U_cal.conjuncts]


def construct_Bx(P: FinitePoset, nu: SimpleValuation, conjuncts: Sequence[tuple[int, Fraction]]):
    """Finite generators ``B_x`` and opens ``V_x = int(up B_x)`` for each support point.

    Points are processed by the number of support points below them, so
    ``V_y`` is known for every ``y < x`` when ``x`` is handled.  ``B_x`` is
    the set of minimal elements of the target open ``S_x``.
    Returns ``(I, B, V, order)``.
    """
    A = nu.support
    order = sorted(bits(A), key=lambda x: (popcount(P.down[x] & A), x))
    I: dict[int, frozenset[int]] = {}
    B: dict[int, int] = {}
    V: dict[int, int] = {}
    for x in order:
        I[x] = frozenset(i for i, (U, _) in enumerate(conjuncts) if U >> x & 1)
        S = P.full
        for i in I[x]:
            S &= conjuncts[i][0]
        S &= ~downward_closure(P, A & ~P.up[x])
        for y in bits(A & P.down[x] & ~(1 << x)):
            S &= V[y]
        if not S >> x & 1:
            raise TheoremViolation(f"{P.names[x]} missing from its target neighbourhood")
        B[x] = minimal_elements(P, S)
        V[x] = interior(P, upward_closure(P, B[x]))
        if V[x] != S:
            raise TheoremViolation("int(up B_x) differs from the target open")
    return I, B, V, order


def lemma_checks(b: WitnessBundle) -> dict[str, bool]:
    """The structural facts about ``B_x`` and ``V_x``, evaluated literally."""
    P, A, B, V = b.P, b.A, b.B, b.V
    pts = list(bits(A))
    upB = {x: upward_closure(P, B[x]) for x in pts}
    nested = all(
        upB[y] & ~V[x] == 0 and V[x] & ~upB[x] == 0
        for x in pts
        for y in pts
        if P.leq(x, y)
    )
    inside = all(
        B[x] & ~U == 0 for x in pts for U, _ in b.conjuncts if U >> x & 1
    )
    separates = all((V[y] >> x & 1) == P.leq(y, x) for x in pts for y in pts)
    own = all(V[x] >> x & 1 for x in pts)
    traces = all(A & v_B(b, Bs) == Bs for Bs in b.upsets) if b.upsets else True
    return {
        "lemma.x_in_Vx": own,
        "lemma.upBy_Vx_upBx": nested,
        "lemma.Bx_in_Ui": inside,
        "lemma.x_in_Vy_iff": separates,
        "lemma.A_cap_VB": traces,
    }


def upsets_within(P: FinitePoset, A: int) -> list[int]:
    """Subsets of ``A`` that are upward closed relative to ``A``."""
    pts = list(bits(A))
    out = []
    for k in range(1 << len(pts)):
        S = 0
        for j, x in enumerate(pts):
            if k >> j & 1:
                S |= 1 << x
        if upward_closure(P, S) & A == S:
            out.append(S)
    return sorted(out)


def v_B(b: WitnessBundle, Bs: int) -> int:
    out = 0
    for x in bits(Bs):
        out |= b.V[x]
    return out


def build_V(b: WitnessBundle, flavor: Flavor) -> WeakOpen:
    """``V = meet over upsets B of A of [s_B << V_B]`` with ``s_B = a * sum_{x in B} a_x``."""
    b.upsets = upsets_within(b.P, b.A)
    conj = []
    for Bs in b.upsets:
        s_B = b.a * sum((b.nu[x] for x in bits(Bs)), Fraction(0))
        conj.append(SubbasicOpen(v_B(b, Bs), s_B, Mode.WAY_BELOW))
    return WeakOpen(tuple(conj), flavor)


def check_capacity_domination(mu: SimpleValuation, kappa: SimpleCapacity, P: FinitePoset, opens=None) -> bool:
    return stochastic_leq(kappa, mu, P, opens).holds


# ---------------------------------------------------------------- E


def _coefficients(space: StrategySpace, zs: list[int]) -> list[list[Fraction]]:
    return [
        [sum((w for w, y in zip(space.weights, f) if y == z), Fraction(0)) for z in zs]
        for f in space.strategies
    ]


def enumerate_E(space: StrategySpace, N: int, cap: int = DEFAULT_E_CAP):
    """All roundings ``floor(N * c) / N`` of mixtures ``c = sum_f beta_f pure_f``.

    A candidate rounding ``g`` is kept iff some ``beta`` in the simplex has
    ``g_z <= c_z(beta) < g_z + 1/N`` for all ``z``; this is decided by
    maximizing the least slack ``t`` and requiring ``t > 0``.  Candidates are
    generated coordinate by coordinate, each coordinate restricted to the
    range the earlier choices still allow, which visits a subset of the full
    grid ``{g : sum g <= total mass}`` containing every member.

    Returns ``(E, betas)`` where ``betas[k]`` witnesses ``E[k]``.
    """
    Z = 0
    for B in space.sets:
        Z |= B
    zs = list(bits(Z))
    k = len(space)
    coef = _coefficients(space, zs)
    cols = [[coef[f][j] for f in range(k)] for j in range(len(zs))]
    simplex = Constraint([1] * k, "==", 1)
    step = Fraction(1, N)
    found: list[tuple[tuple[int, ...], tuple[Fraction, ...]]] = []
    visited = 0

    def bounds(cons: list[Constraint], j: int) -> tuple[Fraction, Fraction]:
        lo = solve_lp(cols[j], cons, maximize=False)
        hi = solve_lp(cols[j], cons, maximize=True)
        if lo.status != OPTIMAL or hi.status != OPTIMAL:
            raise SolverError("range LP over the simplex not optimal")
        return lo.value, hi.value

    def leaf(g: list[int]):
        cons = []
        for j, gz in enumerate(g):
            cons.append(Constraint(cols[j] + [0], ">=", gz * step))
            cons.append(Constraint(cols[j] + [1], "<=", (gz + 1) * step))
        cons.append(Constraint([1] * k + [0], "==", 1))
        sol = solve_lp([0] * k + [1], cons, maximize=True, free=[k])
        if sol.status == OPTIMAL and sol.value > 0:
            return tuple(sol.x[:k])
        return None

    def walk(j: int, cons: list[Constraint], g: list[int]) -> None:
        nonlocal visited
        visited += 1
        if visited > cap:
            raise SizeError(f"E enumeration exceeded {cap} candidates")
        if j == len(zs):
            beta = leaf(g)
            if beta is not None:
                found.append((tuple(g), beta))
            return
        lo, hi = bounds(cons, j)
        for m in range(math.floor(N * lo), math.floor(N * hi) + 1):
            walk(
                j + 1,
                cons + [Constraint(cols[j], ">=", m * step), Constraint(cols[j], "<=", (m + 1) * step)],
                g + [m],
            )

    walk(0, [simplex], [])
    found.sort()
    E = [SimpleValuation({z: m * step for z, m in zip(zs, g)}) for g, _ in found]
    return E, [beta for _, beta in found]


def enumerate_E_bruteforce(space: StrategySpace, N: int) -> list[SimpleValuation]:
    """Same set as :func:`enumerate_E`, testing every grid point with mass at most the total."""
    Z = 0
    for B in space.sets:
        Z |= B
    zs = list(bits(Z))
    k = len(space)
    cols = [[row[j] for row in _coefficients(space, zs)] for j in range(len(zs))]
    total = sum(space.weights, Fraction(0))
    top = math.floor(N * total)
    step = Fraction(1, N)
    out = []
    for g in _grid(len(zs), top):
        cons = []
        for j, gz in enumerate(g):
            cons.append(Constraint(cols[j] + [0], ">=", gz * step))
            cons.append(Constraint(cols[j] + [1], "<=", (gz + 1) * step))
        cons.append(Constraint([1] * k + [0], "==", 1))
        sol = solve_lp([0] * k + [1], cons, maximize=True, free=[k])
        if sol.status == OPTIMAL and sol.value > 0:
            out.append(SimpleValuation({z: m * step for z, m in zip(zs, g)}))
    return out


def _grid(dim: int, total: int) -> Iterator[tuple[int, ...]]:
    """Non-negative integer vectors of length ``dim`` with sum at most ``total``."""
    if dim == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _grid(dim - 1, total - first):
            yield (first, *rest)


def grid_valuations(n: int, grid: int, cap: Fraction) -> Iterator[SimpleValuation]:
    """Valuations on ``range(n)`` with weights in ``(1/grid) N`` and mass at most ``cap``."""
    top = math.floor(cap * grid)
    step = Fraction(1, grid)
    for g in _grid(n, top):
        yield SimpleValuation({x: m * step for x, m in enumerate(g)})


# ---------------------------------------------------------------- sandwich


@dataclass
class SandwichReport:
    bundle: WitnessBundle
    checks: dict[str, bool]
    grid_total: int = 0
    grid_members: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def lines(self) -> list[tuple[str, str]]:
        b = self.bundle
        P = b.P
        out = [("a", fmt_q(b.a))]
        out += [(f"s[{i}]", fmt_q(s)) for i, s in enumerate(b.s)]
        out.append(("N", str(b.N)))
        out.append(("Z", P.format_set(b.Z)))
        out += [(f"B[{P.names[x]}]", P.format_set(b.B[x])) for x in sorted(b.B)]
        out.append(("V.size", str(len(b.V_cal.conjuncts))))
        out.append(("E.size", str(len(b.E))))
        out.append(("grid.total", str(self.grid_total)))
        out.append(("grid.members", str(self.grid_members)))
        out += [(f"check.{k}", _b(v)) for k, v in self.checks.items()]
        return out


def _b(v: bool) -> str:
    return "true" if v else "false"


def prepare_bundle(P: FinitePoset, nu: SimpleValuation, U_cal: WeakOpen) -> WitnessBundle:
    """Run the construction up to, but not including, ``E``."""
    if not U_cal.contains(nu):
        raise PreconditionError("nu is not in the given weak open")
    nu = reduce_to_simple(nu, U_cal)
    conjuncts = [(c.U, c.r) for c in U_cal.conjuncts]
    a, s = choose_constants(nu, conjuncts)
    I, B, V, order = construct_Bx(P, nu, conjuncts)
    b = WitnessBundle(P, nu, U_cal, a, s, I, B, V, order)
    b.V_cal = build_V(b, U_cal.flavor)
    for x in bits(b.A):
        b.Z |= B[x]
    b.N = choose_N(popcount(b.Z), s, [r for _, r in conjuncts])
    b.kappa = SimpleCapacity([(a * nu[x], B[x]) for x in order])
    return b


def estimate_E_size(b: WitnessBundle) -> int:
    """Rough count of grid cells met by the mixtures: one simplex factor per support point.

    Used to size random instances before paying for :func:`enumerate_E`.
    """
    est = 1
    for w, B in b.kappa.terms:
        est *= (math.floor(b.N * w) + 1) ** (popcount(B) - 1)
    return est


def build_bundle(P: FinitePoset, nu: SimpleValuation, U_cal: WeakOpen, e_cap: int = DEFAULT_E_CAP) -> WitnessBundle:
    """Run the construction up to and including ``E``."""
    b = prepare_bundle(P, nu, U_cal)
    if b.kappa.terms:
        b.E, b.E_beta = enumerate_E(StrategySpace.of(b.kappa), b.N, e_cap)
    else:
        b.E, b.E_beta = [SimpleValuation.zero()], [()]
    return b


def verify_sandwich(
    P: FinitePoset,
    nu: SimpleValuation,
    U_cal: WeakOpen,
    grid: int = 4,
    cap: Fraction | None = None,
    e_cap: int = DEFAULT_E_CAP,
) -> SandwichReport:
    """Build the witnesses for ``nu`` in ``U_cal`` and check the three inclusions.

    The inclusion of ``V`` in ``up(E)`` is checked on every valuation whose
    weights are multiples of ``1/grid`` with mass at most ``cap``: each
    member of ``V`` is decomposed against the capacity and the rounded
    mixture must be an element of ``E`` below it.
    """
    if U_cal.flavor is Flavor.PROB:
        raise PreconditionError("probability valuations go through verify_sandwich_prob")
    if grid < 1:
        raise ValueError("grid must be positive")
    b = build_bundle(P, nu, U_cal, e_cap)
    opens = enumerate_opens(P)
    checks = lemma_checks(b)
    failures = [k for k, v in checks.items() if not v]
    checks["nu_in_V"] = b.V_cal.contains(nu)
    checks["V_in_Q.nu"] = check_capacity_domination(nu, b.kappa, P, opens)
    checks["E_in_U"] = all(U_cal.contains(e) for e in b.E)
    checks["E_witnessed"] = all(
        round_valuation(StrategySpace.of(b.kappa).mixture(beta), b.N) == e
        for e, beta in zip(b.E, b.E_beta)
    ) if b.kappa.terms else True

    if cap is None:
        cap = Fraction(1) if U_cal.flavor is Flavor.SUB else Fraction(max(1, math.ceil(nu.mass)))
    E_set = set(b.E)
    bound = Fraction(popcount(b.Z), b.N)
    report = SandwichReport(b, checks)
    covered = dominated = gap_ok = True
    for mu in grid_valuations(P.size, grid, cap):
        report.grid_total += 1
        if not b.V_cal.contains(mu):
            continue
        report.grid_members += 1
        if not check_capacity_domination(mu, b.kappa, P, opens):
            dominated = False
            failures.append(f"V not in Q at {mu.format(P)}")
            continue
        if not b.kappa.terms:
            e = SimpleValuation.zero()
        else:
            mix = decompose_capacity(b.kappa, mu, P, opens).mixture
            e = round_valuation(mix, b.N)
            if any(mix(U) - e(U) > bound for U in opens):
                gap_ok = False
                failures.append(f"rounding gap exceeded at {mu.format(P)}")
        if e not in E_set or not stochastic_leq(e, mu, P, opens):
            covered = False
            failures.append(f"not covered: {mu.format(P)}")
    checks["V_in_Q.grid"] = dominated
    checks["rounding_gap"] = gap_ok
    checks["grid_covered"] = covered
    report.failures = failures
    return report


# ---------------------------------------------------------------- lifting


@dataclass(frozen=True)
class PointedPoset:
    P: FinitePoset
    bottom: int

    def __post_init__(self):
        if self.P.up[self.bottom] != self.P.full:
            raise ValueError(f"{self.P.names[self.bottom]} is not the least element")

    @property
    def rest(self) -> tuple[FinitePoset, list[int]]:
        """The subposet without the bottom (``X minus down(bottom)``) and its index map."""
        return induced(self.P, self.P.full & ~self.P.down[self.bottom])


def lift_minus(pp: PointedPoset, nu: SimpleValuation) -> SimpleValuation:
    """Restrict a probability valuation to the opens avoiding the bottom element."""
    if nu.mass != 1:
        raise FlavorError(f"lift_minus needs a probability valuation, mass is {nu.mass}")
    _, keep = pp.rest
    return SimpleValuation({k: nu[old] for k, old in enumerate(keep)})


def lift_plus(pp: PointedPoset, mu: SimpleValuation) -> SimpleValuation:
    """Extend a subprobability valuation off the bottom by putting the missing mass on it."""
    if mu.mass > 1:
        raise FlavorError(f"lift_plus needs a subprobability valuation, mass is {mu.mass}")
    _, keep = pp.rest
    out = {keep[k]: w for k, w in mu.weights.items()}
    out[pp.bottom] = 1 - mu.mass
    return SimpleValuation(out)


def restrict_open(pp: PointedPoset, U: int) -> int:
    """A proper open of ``P`` as an open of the subposet without the bottom."""
    _, keep = pp.rest
    out = 0
    for k, old in enumerate(keep):
        if U >> old & 1:
            out |= 1 << k
    return out


def extend_open(pp: PointedPoset, U: int) -> int:
    _, keep = pp.rest
    out = 0
    for k in bits(U):
        out |= 1 << keep[k]
    return out


def lift_problem(pp: PointedPoset, nu: SimpleValuation, U_cal: WeakOpen):
    """Move ``nu`` in ``U_cal`` off the bottom: ``(Q, nu_minus, U_minus)``.

    A conjunct over the whole space holds for every probability valuation
    once its threshold is below 1, so it is dropped; the other conjuncts are
    proper opens, which avoid the bottom and transfer unchanged.
    """
    Q, _ = pp.rest
    inner = tuple(
        SubbasicOpen(restrict_open(pp, c.U), c.r, c.mode) for c in U_cal.conjuncts if c.U != pp.P.full
    )
    return Q, lift_minus(pp, nu), WeakOpen(inner, Flavor.SUB)


@dataclass
class ProbSandwichReport:
    inner: SandwichReport
    E_plus: list[SimpleValuation]
    V_plus: WeakOpen
    checks: dict[str, bool]
    grid_total: int = 0
    grid_members: int = 0

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def lines(self) -> list[tuple[str, str]]:
        out = [(k, v) for k, v in self.inner.lines() if not k.startswith("check.") and not k.startswith("grid.")]
        out.append(("grid.total", str(self.grid_total)))
        out.append(("grid.members", str(self.grid_members)))
        out += [(f"check.{k}", _b(v)) for k, v in self.checks.items()]
        return out


def verify_sandwich_prob(
    pp: PointedPoset,
    nu: SimpleValuation,
    U_cal: WeakOpen,
    grid: int = 4,
    e_cap: int = DEFAULT_E_CAP,
) -> ProbSandwichReport:
    """The sandwich for probability valuations, obtained through :func:`lift_problem`.

    The witnesses built off the bottom are lifted back with
    :func:`lift_plus` and rechecked on ``P`` itself, including the grid
    coverage over probability valuations.
    """
    P = pp.P
    if U_cal.flavor is not Flavor.PROB:
        raise PreconditionError("verify_sandwich_prob expects a probability weak open")
    if not U_cal.contains(nu):
        raise PreconditionError("nu is not in the given weak open")
    Q, nu_minus, inner_U = lift_problem(pp, nu, U_cal)
    inner = verify_sandwich(Q, nu_minus, inner_U, grid=grid, cap=Fraction(1), e_cap=e_cap)
    b = inner.bundle
    V_plus = WeakOpen(
        tuple(SubbasicOpen(extend_open(pp, c.U), c.r, c.mode) for c in b.V_cal.conjuncts),
        Flavor.PROB,
    )
    E_plus = [lift_plus(pp, e) for e in b.E]
    opens = enumerate_opens(P)
    checks = dict(inner.checks)
    checks["lift.nu_in_V"] = V_plus.contains(nu)
    checks["lift.E_in_U"] = all(U_cal.contains(e) for e in E_plus)
    report = ProbSandwichReport(inner, E_plus, V_plus, checks)
    covered = True
    for mu in grid_valuations(P.size, grid, Fraction(1)):
        if mu.mass != 1:
            continue
        report.grid_total += 1
        if not V_plus.contains(mu):
            continue
        report.grid_members += 1
        if b.kappa.terms:
            mix = decompose_capacity(b.kappa, lift_minus(pp, mu), Q).mixture
            e = lift_plus(pp, round_valuation(mix, b.N))
        else:
            e = lift_plus(pp, SimpleValuation.zero())
        if e not in E_plus or not stochastic_leq(e, mu, P, opens):
            covered = False
    checks["lift.grid_covered"] = covered
    return report
