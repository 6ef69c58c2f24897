from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from valpow.alphanat import (
    AlphaOpen,
    DiscreteValuation,
    counterexample_witness,
    eval_alpha,
    in_basic,
    leq_discrete,
    scott_V_member,
    tail_mass,
)
from valpow.lp import PreconditionError

INF = DiscreteValuation.dirac(None)

q = st.fractions(min_value=0, max_value=1, max_denominator=5)
discrete = st.builds(
    DiscreteValuation, st.dictionaries(st.integers(0, 6), q, max_size=4), q
)
opens = st.builds(AlphaOpen, st.frozensets(st.integers(0, 8), max_size=5), st.booleans())


def test_eval_examples():
    assert eval_alpha(INF, AlphaOpen.co([])) == 1
    d3 = DiscreteValuation.dirac(3)
    assert eval_alpha(d3, AlphaOpen.finite([3])) == 1
    assert eval_alpha(d3, AlphaOpen.co([3])) == 0
    nu = DiscreteValuation({2: F(1, 2)}, F(1, 2))
    assert eval_alpha(nu, AlphaOpen.co([2])) == F(1, 2)


def test_leq_examples():
    assert leq_discrete(INF, INF)
    d = DiscreteValuation.dirac(4)
    assert not leq_discrete(d, INF) and not leq_discrete(INF, d)
    assert leq_discrete(DiscreteValuation(a_inf=F(1, 2)), INF)


def test_tail_mass_examples():
    assert tail_mass(INF) == 1
    d5 = DiscreteValuation.dirac(5)
    assert tail_mass(d5) == 0 == eval_alpha(d5, AlphaOpen.tail(6))
    assert tail_mass(DiscreteValuation({0: F(1, 3)}, F(2, 3))) == F(2, 3)


def test_scott_open_examples():
    assert scott_V_member(INF)
    assert not scott_V_member(DiscreteValuation.dirac(7))
    assert scott_V_member(DiscreteValuation({0: F(1, 2)}, F(1, 2)))


def test_counterexample_examples():
    rep = counterexample_witness([({0, 1}, F(1, 2))])
    assert rep.n == 2 and rep.ok and rep.a_inf == 0
    assert counterexample_witness([(set(), F(1, 4)), ({0}, F(3, 4))]).n == 1
    with pytest.raises(PreconditionError):
        counterexample_witness([({0}, 1)])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.frozensets(st.integers(0, 10), max_size=6), st.fractions(min_value=F(1, 100), max_value=F(99, 100), max_denominator=100)), min_size=1, max_size=5))
def test_counterexample_property(conj):
    rep = counterexample_witness(conj)
    assert rep.ok
    assert all(rep.n not in E for E, _ in conj)
    assert in_basic(rep.point, [(AlphaOpen.co(E), r) for E, r in conj])


@settings(max_examples=200, deadline=None)
@given(discrete, discrete, st.lists(opens, max_size=30))
def test_leq_against_opens(nu, mu, sample):
    if leq_discrete(nu, mu):
        assert all(eval_alpha(nu, U) <= eval_alpha(mu, U) for U in sample)
    else:
        bad = [n for n, w in nu.weights.items() if w > mu[n]]
        if bad:
            U = AlphaOpen.finite([bad[0]])
        else:
            U = AlphaOpen.co(set(nu.weights) | set(mu.weights))
        assert eval_alpha(nu, U) > eval_alpha(mu, U)


@settings(max_examples=200, deadline=None)
@given(opens, opens, discrete)
def test_open_algebra(U, V, nu):
    for n in range(12):
        assert (n in U | V) == (n in U or n in V)
        assert (n in U & V) == (n in U and n in V)
    assert eval_alpha(nu, U) + eval_alpha(nu, V) == eval_alpha(nu, U | V) + eval_alpha(nu, U & V)
    assert tail_mass(nu) == nu.a_inf
