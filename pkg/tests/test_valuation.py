from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_upsets, posets
from valpow.order import build_poset, enumerate_opens
from valpow.valuation import (
    Flavor,
    NonMonotone,
    SimpleCapacity,
    SimpleValuation,
    StepFunction,
    choquet_integral,
    round_valuation,
    scale_add,
    stochastic_leq,
    stochastic_leq_transport,
    way_below,
)

weights = st.fractions(min_value=0, max_value=3, max_denominator=6)


@st.composite
def poset_and_vals(draw, k=2):
    P = draw(posets(max_n=5))
    vals = [
        SimpleValuation({x: draw(weights) for x in range(P.size) if draw(st.booleans())}) for _ in range(k)
    ]
    return (P, *vals)


@st.composite
def poset_and_step(draw):
    P = draw(posets(max_n=5))
    vals = {}
    for x in sorted(range(P.size), key=lambda x: bin(P.down[x]).count("1")):
        lo = max((vals[y] for y in range(P.size) if P.lt(y, x)), default=F(0))
        vals[x] = lo + draw(st.fractions(min_value=0, max_value=2, max_denominator=4))
    nu = SimpleValuation({x: draw(weights) for x in range(P.size)})
    return P, StepFunction(P, vals), nu


def test_eval_examples(antichain2):
    a, b = 0, 1
    assert SimpleValuation.dirac(a)(0b11) == 1
    assert SimpleValuation.zero()(0b11) == 0
    nu = SimpleValuation({a: F(1, 2), b: F(1, 3)})
    assert nu(0b10) == F(1, 3)


def test_capacity_examples():
    u = SimpleCapacity.unanimity(0b11)
    assert u(0b11) == 1 and u(0b01) == 0
    k = SimpleCapacity([(2, 0b01), (3, 0b10)])
    assert k(0b01) == 2 and k(0) == 0
    with pytest.raises(ValueError):
        SimpleCapacity([(1, 0)])


def test_leq_examples(chain2, antichain2):
    da, db = SimpleValuation.dirac(0), SimpleValuation.dirac(1)
    assert stochastic_leq(da, db, chain2)
    v = stochastic_leq(db, da, chain2)
    assert not v and v.witness == 0b10
    half = SimpleValuation({0: F(1, 2), 1: F(1, 2)})
    u = SimpleCapacity.unanimity(0b11)
    assert stochastic_leq(u, half, antichain2)
    assert all(u(U) <= half(U) for U in brute_upsets(antichain2))
    assert stochastic_leq_transport(half, half, antichain2)
    assert not stochastic_leq_transport(SimpleValuation({0: 2}), half, antichain2)


def test_way_below():
    assert way_below(0, 0)
    assert not way_below(1, 1)
    assert way_below(F(1, 2), F(3, 4))
    with pytest.raises(TypeError):
        way_below(0.5, 1)


def test_choquet_examples(antichain2):
    h = StepFunction(antichain2, {0: 1, 1: 3})
    assert choquet_integral(h, SimpleCapacity.unanimity(0b11)) == 1
    nu = SimpleValuation({0: F(2, 3), 1: F(1, 5)})
    c = StepFunction(antichain2, {0: F(5, 2), 1: F(5, 2)})
    assert choquet_integral(c, nu) == F(5, 2) * nu.mass


def test_step_monotone(chain2):
    with pytest.raises(NonMonotone):
        StepFunction(chain2, {0: 2, 1: 1})


def test_rounding():
    w = SimpleValuation({0: F(2, 3)})
    assert round_valuation(w, 3) == w
    assert round_valuation(w, 2) == SimpleValuation({0: F(1, 2)})
    assert round_valuation(SimpleValuation({0: F(1, 3), 1: F(1, 3)}), 1) == SimpleValuation.zero()


def test_scale_add(antichain2):
    d = SimpleValuation.dirac(0)
    assert scale_add([(F(1, 2), d), (F(1, 2), d)]) == d
    assert scale_add([(0, d)]) == SimpleValuation.zero()


def test_flavor():
    assert Flavor.SUB.admits(F(1)) and not Flavor.SUB.admits(F(3, 2))
    assert Flavor.PROB.admits(F(1)) and not Flavor.PROB.admits(F(1, 2))
    assert Flavor.PLAIN.admits(F(7))


@settings(max_examples=150, deadline=None)
@given(poset_and_vals())
def test_leq_oracles_agree(data):
    P, mu, nu = data
    brute = all(mu(U) <= nu(U) for U in brute_upsets(P))
    assert bool(stochastic_leq(mu, nu, P)) == brute == stochastic_leq_transport(mu, nu, P)


@settings(max_examples=100, deadline=None)
@given(poset_and_vals(k=3), st.fractions(min_value=0, max_value=4, max_denominator=5))
def test_modular_strict_monotone(data, c):
    P, nu, mu, _ = data
    opens = enumerate_opens(P)
    assert nu(0) == 0
    for U in opens:
        for V in opens:
            assert nu(U) + nu(V) == nu(U | V) + nu(U & V)
            if U & V == U:
                assert nu(U) <= nu(V)
        assert (nu + mu).scale(c)(U) == c * nu(U) + c * mu(U)


@settings(max_examples=100, deadline=None)
@given(poset_and_step())
def test_choquet_against_sums(data):
    P, h, nu = data
    assert choquet_integral(h, nu) == sum(nu[x] * h(x) for x in range(P.size))
    for B in range(1, 1 << P.size):
        u = SimpleCapacity.unanimity(B, F(3, 2))
        assert choquet_integral(h, u) == F(3, 2) * min(h(y) for y in range(P.size) if B >> y & 1)
    g = h + h.scale(2)
    assert choquet_integral(g, nu) == 3 * choquet_integral(h, nu)


def test_capacity_not_additive():
    P = build_poset(["a", "b"], [])
    u = SimpleCapacity.unanimity(0b11)
    assert u(0b01) + u(0b10) != u(0b11) + u(0)
    assert stochastic_leq(u, SimpleValuation.dirac(0), P)
