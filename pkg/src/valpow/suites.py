"""Seeded property suites.

Each suite draws its own ``random.Random`` from ``(seed, suite name)`` so a
suite's instances do not depend on which other suites ran.  The suites are
what ``valpow selftest`` prints and what the acceptance tests assert on.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .alphanat import (
    AlphaOpen,
    DiscreteValuation,
    counterexample_witness,
    eval_alpha,
    leq_discrete,
    scott_V_member,
    tail_mass,
)
from .lp import StrategySpace, decompose_capacity, matrix_game
from .order import (
    FinitePoset,
    bits,
    build_poset,
    downward_closure,
    enumerate_opens,
    irreducible_closed_sets,
    is_scott_open_direct,
    is_sober,
    maximal_elements,
)
from .powerdomain import (
    PointedPoset,
    SubbasicOpen,
    WeakOpen,
    basic_open,
    estimate_E_size,
    lift_minus,
    lift_plus,
    lift_problem,
    prepare_bundle,
    restrict_open,
    verify_sandwich,
    verify_sandwich_prob,
)
from .valuation import (
    Flavor,
    SimpleCapacity,
    SimpleValuation,
    StepFunction,
    choquet_integral,
    stochastic_leq,
    stochastic_leq_transport,
)

LEMMA_KEYS = (
    "lemma.x_in_Vx",
    "lemma.upBy_Vx_upBx",
    "lemma.Bx_in_Ui",
    "lemma.x_in_Vy_iff",
    "lemma.A_cap_VB",
    "nu_in_V",
    "V_in_Q.nu",
    "V_in_Q.grid",
    "rounding_gap",
)
SANDWICH_KEYS = ("nu_in_V", "E_in_U", "E_witnessed", "grid_covered")
E_BUDGET = 400


@dataclass
class SuiteResult:
    name: str
    total: int = 0
    passed: int = 0
    seconds: float = 0.0
    skipped: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.total > 0 and self.passed == self.total

    def record(self, ok: bool, message: str = "") -> None:
        self.total += 1
        if ok:
            self.passed += 1
        elif len(self.failures) < 10:
            self.failures.append(message)


@dataclass
class SuiteConfig:
    seed: int = 0
    max_poset_size: int = 16
    grid: int = 4

    def cap(self, n: int) -> int:
        return max(1, min(n, self.max_poset_size))


def rng_for(seed: int, name: str) -> random.Random:
    return random.Random(f"{seed}:{name}")


# ---------------------------------------------------------------- generators


def random_poset(rng: random.Random, n: int, density: float | None = None) -> FinitePoset:
    if density is None:
        density = rng.choice([0.0, 0.2, 0.35, 0.5, 0.8])
    names = [f"e{i}" for i in range(n)]
    perm = list(range(n))
    rng.shuffle(perm)
    pairs = [
        (names[perm[i]], names[perm[j]])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < density
    ]
    return build_poset(names, pairs)


def random_pointed(rng: random.Random, n: int) -> PointedPoset:
    """``n``-element poset whose element ``bot`` sits below a random poset on the rest."""
    rest = random_poset(rng, n - 1)
    names = ["bot", *rest.names]
    pairs = [("bot", x) for x in rest.names]
    pairs += [(rest.names[i], rest.names[j]) for i in range(rest.size) for j in range(rest.size) if rest.lt(i, j)]
    return PointedPoset(build_poset(names, pairs), 0)


def random_weight(rng: random.Random, dens=(1, 2, 3, 4, 6), top: int = 4) -> Fraction:
    d = rng.choice(dens)
    return Fraction(rng.randint(1, top * d), d * top)


def random_valuation(rng: random.Random, n: int, support: int, mass_cap: Fraction | None = None) -> SimpleValuation:
    pts = rng.sample(range(n), min(support, n))
    nu = SimpleValuation({x: random_weight(rng) for x in pts})
    if mass_cap is not None and nu.mass > mass_cap:
        nu = nu.scale(mass_cap / nu.mass * Fraction(rng.randint(1, 4), 4))
    return nu


def random_subset(rng: random.Random, n: int, k: int) -> int:
    m = 0
    for x in rng.sample(range(n), k):
        m |= 1 << x
    return m


def random_probability(rng: random.Random, n: int, support: int) -> SimpleValuation:
    nu = random_valuation(rng, n, support)
    return nu.scale(1 / nu.mass)


def timed(fn: Callable[[SuiteConfig], SuiteResult]) -> Callable[[SuiteConfig], SuiteResult]:
    def run(cfg: SuiteConfig, *args, **kwargs) -> SuiteResult:
        t0 = time.perf_counter()
        res = fn(cfg, *args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


# ---------------------------------------------------------------- suites


@timed
def decomposition(cfg: SuiteConfig, count: int = 200) -> SuiteResult:
    """Capacities below a valuation decompose into a mixture below it."""
    rng = rng_for(cfg.seed, "decomposition")
    res = SuiteResult("decomposition")
    for _ in range(count):
        n = rng.randint(1, cfg.cap(6))
        P = random_poset(rng, n)
        terms = [
            (random_weight(rng), random_subset(rng, n, rng.randint(1, min(3, n))))
            for _ in range(rng.randint(1, 3))
        ]
        kappa = SimpleCapacity(terms)
        space = StrategySpace.of(kappa)
        raw = [Fraction(rng.randint(0, 4)) for _ in range(len(space))]
        if not any(raw):
            raw[0] = Fraction(1)
        beta = [b / sum(raw) for b in raw]
        nu = space.mixture(beta) + random_valuation(rng, n, rng.randint(0, n)).scale(Fraction(rng.randint(0, 2), 2))
        opens = enumerate_opens(P)
        dec = decompose_capacity(kappa, nu, P, opens)
        ok = (
            sum(dec.beta) == 1
            and all(b >= 0 for b in dec.beta)
            and bool(stochastic_leq(dec.mixture, nu, P, opens))
            and dec.mixture.mass == sum(w for w, _ in kappa.terms)
        )
        res.record(ok, f"{kappa.format(P)} vs {nu.format(P)}")
    return res


@timed
def minimax(cfg: SuiteConfig, count: int = 200) -> SuiteResult:
    """Max-min and min-max values of random rational games coincide."""
    rng = rng_for(cfg.seed, "minimax")
    res = SuiteResult("minimax")
    for _ in range(count):
        n, m = rng.randint(1, 5), rng.randint(1, 5)
        M = [[Fraction(rng.randint(-12, 12), rng.randint(1, 6)) for _ in range(m)] for _ in range(n)]
        g = matrix_game(M)
        ok = g.maxmin == g.minmax == g.value
        res.record(ok, f"{M}")
    return res


def _sandwich_instance(rng: random.Random, cfg: SuiteConfig, flavor: Flavor, res: SuiteResult | None = None):
    """Random ``(P, nu, U)`` whose set ``E`` is small enough to enumerate.

    Draws whose estimated ``E`` exceeds :data:`E_BUDGET` are redrawn and
    counted in ``res.skipped``.
    """
    while True:
        n = rng.randint(1, cfg.cap(5))
        P = random_poset(rng, n)
        opens = enumerate_opens(P)
        cap = Fraction(1) if flavor is Flavor.SUB else None
        nu = random_valuation(rng, n, rng.randint(1, min(3, n)), cap)
        conj = []
        for _ in range(rng.randint(1, 2)):
            U = rng.choice([U for U in opens if nu(U) > 0])
            conj.append((U, nu(U) * Fraction(rng.randint(1, 3), 4)))
        W = basic_open(conj, flavor)
        if estimate_E_size(prepare_bundle(P, nu, W)) <= E_BUDGET:
            return P, nu, W
        if res is not None:
            res.skipped += 1


@timed
def sandwich(cfg: SuiteConfig, flavor: Flavor = Flavor.PLAIN, count: int = 100) -> SuiteResult:
    """Witness construction: nu in V, E inside U, grid members of V above E."""
    rng = rng_for(cfg.seed, f"sandwich-{flavor.value}")
    res = SuiteResult(f"sandwich-{flavor.value}")
    for _ in range(count):
        P, nu, U = _sandwich_instance(rng, cfg, flavor, res)
        rep = verify_sandwich(P, nu, U, grid=cfg.grid)
        ok = all(rep.checks[k] for k in SANDWICH_KEYS)
        res.record(ok, f"{nu.format(P)}: {rep.failures[:3]}")
    return res


def sandwich_reports(cfg: SuiteConfig, flavor: Flavor, count: int = 100):
    """The same instances as :func:`sandwich`, returning the full reports."""
    rng = rng_for(cfg.seed, f"sandwich-{flavor.value}")
    out = []
    for _ in range(count):
        P, nu, U = _sandwich_instance(rng, cfg, flavor)
        out.append(verify_sandwich(P, nu, U, grid=cfg.grid))
    return out


@timed
def sandwich_prob(cfg: SuiteConfig, count: int = 40) -> SuiteResult:
    """Probability valuations on pointed posets, through the lifting."""
    rng = rng_for(cfg.seed, "sandwich-prob")
    res = SuiteResult("sandwich-prob")
    done = 0
    while done < count:
        n = rng.randint(2, max(2, cfg.cap(5)))
        pp = random_pointed(rng, n)
        P = pp.P
        nu = random_probability(rng, n, rng.randint(1, min(3, n)))
        opens = enumerate_opens(P)
        conj = []
        for _ in range(rng.randint(1, 2)):
            U = rng.choice([U for U in opens if nu(U) > 0])
            conj.append((U, nu(U) * Fraction(rng.randint(1, 3), 4)))
        W = basic_open(conj, Flavor.PROB)
        if estimate_E_size(prepare_bundle(*lift_problem(pp, nu, W))) > E_BUDGET:
            res.skipped += 1
            continue
        done += 1
        rep = verify_sandwich_prob(pp, nu, W, grid=cfg.grid)
        res.record(rep.ok, f"{nu.format(P)}: {[k for k, v in rep.checks.items() if not v]}")
    return res


@timed
def lifting(cfg: SuiteConfig, count: int = 200) -> SuiteResult:
    """Round trips of the lifting maps and transport of subbasic membership."""
    rng = rng_for(cfg.seed, "lifting")
    res = SuiteResult("lifting")
    for _ in range(count):
        n = rng.randint(1, cfg.cap(6))
        pp = random_pointed(rng, n)
        P = pp.P
        Q, _ = pp.rest
        nu = random_probability(rng, n, rng.randint(1, n))
        mu = random_valuation(rng, Q.size, rng.randint(0, Q.size), Fraction(1)) if Q.size else SimpleValuation()
        ok = lift_plus(pp, lift_minus(pp, nu)) == nu and lift_minus(pp, lift_plus(pp, mu)) == mu
        ok = ok and lift_minus(pp, nu).mass <= 1 and lift_plus(pp, mu).mass == 1
        minus = lift_minus(pp, nu)
        for U in enumerate_opens(P):
            if U == P.full:
                continue
            V = restrict_open(pp, U)
            for r in {nu(U), nu(U) / 2, Fraction(1, 3), Fraction(1)}:
                if r <= 0:
                    continue
                a = WeakOpen((SubbasicOpen(U, r),), Flavor.PROB).contains(nu)
                b = WeakOpen((SubbasicOpen(V, r),), Flavor.SUB).contains(minus)
                ok = ok and a == b
        res.record(ok, f"{nu.format(P)}")
    return res


@timed
def counterexample(cfg: SuiteConfig, count: int = 300) -> SuiteResult:
    """No basic weak neighbourhood of delta_inf fits inside {a_inf > 0}."""
    rng = rng_for(cfg.seed, "counterexample")
    res = SuiteResult("counterexample")
    for _ in range(count):
        conj = []
        for _ in range(rng.randint(1, 4)):
            E = rng.sample(range(12), rng.randint(0, 8))
            d = rng.randint(2, 12)
            conj.append((E, Fraction(rng.randint(1, d - 1), d)))
        rep = counterexample_witness(conj)
        used = set().union(*(set(E) for E, _ in conj))
        ok = rep.ok and rep.a_inf == 0 and rep.n not in used and all(k in used for k in range(rep.n))
        res.record(ok, f"{conj}")
    return res


def _push_up(rng: random.Random, P: FinitePoset, mu: SimpleValuation) -> SimpleValuation:
    out: dict[int, Fraction] = {}
    for x, w in mu.weights.items():
        ys = list(bits(P.up[x]))
        y = rng.choice(ys)
        out[y] = out.get(y, 0) + w
    return SimpleValuation(out)


@timed
def oracle_agreement(cfg: SuiteConfig, count: int = 500, alpha_pairs: int = 100, alpha_opens: int = 200) -> SuiteResult:
    """Opens-based and transport-based stochastic order agree; likewise on alpha(N)."""
    rng = rng_for(cfg.seed, "oracle")
    res = SuiteResult("oracle")
    for k in range(count):
        n = rng.randint(1, cfg.cap(7))
        P = random_poset(rng, n)
        mu = random_valuation(rng, n, rng.randint(0, n))
        if k % 2:
            nu = _push_up(rng, P, mu)
            if rng.random() < 0.5:
                nu = nu + random_valuation(rng, n, rng.randint(0, 2))
            if rng.random() < 0.3 and nu.weights:
                x = rng.choice(list(nu.weights))
                nu = SimpleValuation({**nu.weights, x: nu[x] / 2})
        else:
            nu = random_valuation(rng, n, rng.randint(0, n))
        a = stochastic_leq(mu, nu, P).holds
        b = stochastic_leq_transport(mu, nu, P)
        res.record(a == b, f"{mu.format(P)} vs {nu.format(P)}: opens={a} transport={b}")

    opens = []
    for _ in range(alpha_opens):
        pts = rng.sample(range(10), rng.randint(0, 5))
        opens.append(AlphaOpen(frozenset(pts), rng.random() < 0.5))
    for _ in range(alpha_pairs):
        nu = DiscreteValuation({i: random_weight(rng) for i in rng.sample(range(8), rng.randint(0, 3))}, rng.choice([0, Fraction(1, 2), 1]))
        if rng.random() < 0.5:
            mu = DiscreteValuation({i: w + rng.choice([0, Fraction(1, 4)]) for i, w in nu.weights.items()}, nu.a_inf + rng.choice([0, Fraction(1, 3)]))
        else:
            mu = DiscreteValuation({i: random_weight(rng) for i in rng.sample(range(8), rng.randint(0, 3))}, rng.choice([0, Fraction(1, 2), 1]))
        coef = leq_discrete(nu, mu)
        sampled = all(eval_alpha(nu, U) <= eval_alpha(mu, U) for U in opens)
        # an explicit separating open whenever coefficientwise comparison fails
        beyond = max(nu.support_max, mu.support_max) + 1
        separators = [AlphaOpen.finite([i]) for i in nu.weights] + [AlphaOpen.tail(beyond)]
        exact = all(eval_alpha(nu, U) <= eval_alpha(mu, U) for U in separators)
        ok = (not coef or sampled) and coef == exact
        ok = ok and tail_mass(nu) == nu.a_inf and scott_V_member(nu) == (nu.a_inf > 0)
        res.record(ok, f"{nu} vs {mu}")
    return res


def _brute_opens(P: FinitePoset) -> list[int]:
    return [S for S in range(1 << P.size) if P.is_upset(S)]


@timed
def structural(cfg: SuiteConfig, count: int = 60) -> SuiteResult:
    """Sobriety, topology axioms, valuation laws and Choquet integral identities."""
    rng = rng_for(cfg.seed, "structural")
    res = SuiteResult("structural")
    capacity_nonlinear = False
    for k in range(count):
        n = rng.randint(1, cfg.cap(7))
        P = random_poset(rng, n)
        opens = enumerate_opens(P)
        ok = P.check_partial_order() and opens == _brute_opens(P)
        ok = ok and all((U | V) in opens and (U & V) in opens for U in opens for V in opens)
        sober, witness = is_sober(P)
        irr = irreducible_closed_sets(P)
        ok = ok and sober and len(witness) == len(irr)
        ok = ok and all(
            (g := maximal_elements(P, C)) and g & (g - 1) == 0 and downward_closure(P, g) == C for C in irr
        )
        if P.size <= 5 and k % 3 == 0:
            ok = ok and all(is_scott_open_direct(P, S) == P.is_upset(S) for S in range(1 << P.size))

        nu = random_valuation(rng, n, rng.randint(0, n))
        mu = random_valuation(rng, n, rng.randint(0, n))
        kappa = SimpleCapacity(
            [(random_weight(rng), random_subset(rng, n, rng.randint(1, min(3, n)))) for _ in range(rng.randint(1, 3))]
        )
        ok = ok and nu(0) == 0 and kappa(0) == 0
        ok = ok and all(nu(U) + nu(V) == nu(U | V) + nu(U & V) for U in opens for V in opens)
        ok = ok and all(
            g(U) <= g(V) for g in (nu, kappa) for U in opens for V in opens if U & ~V == 0
        )
        c = Fraction(rng.randint(0, 6), rng.randint(1, 3))
        ok = ok and all((nu + mu).scale(c)(U) == c * nu(U) + c * mu(U) for U in opens)

        h1 = _random_monotone(rng, P)
        h2 = _random_monotone(rng, P)
        ok = ok and choquet_integral(h1 + h2, nu) == choquet_integral(h1, nu) + choquet_integral(h2, nu)
        ok = ok and choquet_integral(h1.scale(c), nu) == c * choquet_integral(h1, nu)
        ok = ok and all(choquet_integral(StepFunction.indicator(P, U), nu) == nu(U) for U in opens)
        closed_form = sum(
            (w * min(h1(y) for y in bits(B)) for w, B in kappa.terms), Fraction(0)
        )
        ok = ok and choquet_integral(h1, kappa) == closed_form
        if choquet_integral(h1 + h2, kappa) != choquet_integral(h1, kappa) + choquet_integral(h2, kappa):
            capacity_nonlinear = True
        res.record(bool(ok), f"poset {P.names} {P.up}")

    # a fixed instance on which the capacity integral is not additive
    P = build_poset(["a", "b"])
    u = SimpleCapacity.unanimity(0b11)
    ha, hb = StepFunction(P, {0: 1}), StepFunction(P, {1: 1})
    fixed = choquet_integral(ha + hb, u) != choquet_integral(ha, u) + choquet_integral(hb, u)
    res.record(fixed, "unanimity game on an antichain should not be additive")
    res.record(capacity_nonlinear, "no random capacity broke additivity")
    return res


def _random_monotone(rng: random.Random, P: FinitePoset) -> StepFunction:
    vals: dict[int, Fraction] = {}
    for x in sorted(range(P.size), key=lambda i: bin(P.down[i]).count("1")):
        floor_ = max((vals[y] for y in bits(P.down[x]) if y != x), default=Fraction(0))
        vals[x] = floor_ + Fraction(rng.randint(0, 4), rng.randint(1, 3))
    return StepFunction(P, vals)


def all_suites(cfg: SuiteConfig) -> list[SuiteResult]:
    return [
        decomposition(cfg),
        minimax(cfg),
        sandwich(cfg, Flavor.PLAIN),
        sandwich(cfg, Flavor.SUB),
        sandwich_prob(cfg),
        lifting(cfg),
        counterexample(cfg),
        oracle_agreement(cfg),
        structural(cfg),
    ]
