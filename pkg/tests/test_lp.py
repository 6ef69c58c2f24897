import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_upsets
from valpow.lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    Constraint,
    PreconditionError,
    StrategySpace,
    decompose_capacity,
    domination_game,
    matrix_game,
    solve_lp,
)
from valpow.order import build_poset
from valpow.valuation import SimpleCapacity, SimpleValuation, stochastic_leq

small = st.fractions(min_value=-4, max_value=4, max_denominator=3)


def test_lp_examples():
    s = solve_lp([1], [Constraint([1], "<=", 1)])
    assert s.status == OPTIMAL and s.x == [1] and s.verify()
    s = solve_lp([1], [Constraint([1], "<=", 1), Constraint([1], ">=", 2)])
    assert s.status == INFEASIBLE and s.verify()
    s = solve_lp([1], [])
    assert s.status == UNBOUNDED and s.verify()


def test_minimize_and_free():
    s = solve_lp([1, 1], [Constraint([1, 2], ">=", 4), Constraint([3, 1], ">=", 6)], maximize=False)
    assert s.status == OPTIMAL and s.value == F(14, 5) and s.x == [F(8, 5), F(6, 5)] and s.verify()
    s = solve_lp([-1], [Constraint([1], ">=", -3)], free=[0])
    assert s.x == [-3] and s.verify()


def _vertex_oracle(c, A, b):
    """max c.x over {x >= 0, A x <= b} in two variables by intersecting constraint lines."""
    rows = [(list(r), v) for r, v in zip(A, b)] + [([1, 0], 0), ([0, 1], 0)]
    best = None
    for (r1, v1), (r2, v2) in itertools.combinations(rows, 2):
        det = r1[0] * r2[1] - r1[1] * r2[0]
        if det == 0:
            continue
        x = [(v1 * r2[1] - r1[1] * v2) / det, (r1[0] * v2 - v1 * r2[0]) / det]
        if min(x) < 0 or any(r[0] * x[0] + r[1] * x[1] > v for r, v in zip(A, b)):
            continue
        val = c[0] * x[0] + c[1] * x[1]
        best = val if best is None or val > best else best
    return best


@settings(max_examples=150, deadline=None)
@given(
    st.lists(small, min_size=2, max_size=2),
    st.lists(st.lists(st.fractions(min_value=0, max_value=4, max_denominator=3), min_size=2, max_size=2), min_size=1, max_size=4),
    st.lists(st.fractions(min_value=0, max_value=5, max_denominator=2), min_size=4, max_size=4),
)
def test_two_variable_lps_against_vertices(c, A, b):
    A = [r for r in A if any(r)] + [[F(1), F(1)]]
    b = b[: len(A) - 1] + [F(10)]
    s = solve_lp(c, [Constraint(r, "<=", v) for r, v in zip(A, b)])
    assert s.status == OPTIMAL and s.verify()
    assert s.value == _vertex_oracle(c, A, b)


@settings(max_examples=100, deadline=None)
@given(
    st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=1, max_size=4)),
    st.lists(small, min_size=4, max_size=4),
    st.lists(st.sampled_from(["<=", ">=", "=="]), min_size=4, max_size=4),
)
def test_certificates_always_verify(A, b, ops):
    c = A[0]
    s = solve_lp(c, [Constraint(r, op, v) for r, op, v in zip(A, ops, b)])
    assert s.verify()


def test_game_examples():
    g = matrix_game([[1, -1], [-1, 1]])
    assert g.value == 0 and tuple(g.row) == (F(1, 2),) * 2
    g = matrix_game([[F(7, 3)]])
    assert g.value == F(7, 3) and tuple(g.row) == (1,) and tuple(g.col) == (1,)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=1, max_size=4)))
def test_minimax(M):
    g = matrix_game(M)
    assert g.maxmin == g.minmax == g.value
    m, n = len(M), len(M[0])
    assert min(sum(g.row[i] * M[i][j] for i in range(m)) for j in range(n)) == g.value
    assert max(sum(g.col[j] * M[i][j] for j in range(n)) for i in range(m)) == g.value


def test_decompose_examples(chain2, antichain2):
    half = SimpleValuation({0: F(1, 2), 1: F(1, 2)})
    d = decompose_capacity(SimpleCapacity.unanimity(0b11), half, antichain2)
    assert d.beta == (F(1, 2), F(1, 2)) and d.mixture == half
    assert all(d.mixture(U) <= half(U) for U in brute_upsets(antichain2))
    d = decompose_capacity(SimpleCapacity.unanimity(0b11), SimpleValuation.dirac(0), chain2)
    assert d.mixture == SimpleValuation.dirac(0)
    d = decompose_capacity(SimpleCapacity([(F(1, 3), 0b10)]), SimpleValuation.dirac(1), chain2)
    assert d.beta == (1,)


def test_decompose_precondition(antichain2):
    with pytest.raises(PreconditionError) as info:
        decompose_capacity(SimpleCapacity.unanimity(0b01), SimpleValuation.dirac(1), antichain2)
    assert info.value.witness == 0b01


def test_strategy_order():
    sp = StrategySpace.of(SimpleCapacity([(1, 0b011), (1, 0b110)]))
    assert sp.strategies == ((0, 1), (0, 2), (1, 1), (1, 2))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_decomposition_and_game_agree(data):
    P = build_poset(["a", "b", "c", "d"], [("a", "c"), ("b", "c"), ("b", "d")])
    terms = []
    for _ in range(data.draw(st.integers(1, 3))):
        terms.append((data.draw(st.fractions(min_value=F(1, 4), max_value=1, max_denominator=4)), data.draw(st.integers(1, 15))))
    kappa = SimpleCapacity(terms)
    nu = SimpleValuation({x: data.draw(st.fractions(min_value=0, max_value=2, max_denominator=4)) for x in range(4)})
    feasible = bool(stochastic_leq(kappa, nu, P))
    g = matrix_game(domination_game(kappa, nu, P))
    assert (g.value >= 0) == feasible
    if feasible:
        d = decompose_capacity(kappa, nu, P)
        assert sum(d.beta) == 1 and min(d.beta) >= 0
        assert all(d.mixture(U) <= nu(U) for U in brute_upsets(P))
