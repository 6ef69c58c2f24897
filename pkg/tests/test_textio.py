from fractions import Fraction as F

import pytest

from valpow.textio import (
    ParseError,
    format_poset,
    parse_alpha_conjuncts,
    parse_capacity,
    parse_conjunct,
    parse_matrix,
    parse_poset,
    parse_problem,
    parse_step_function,
    parse_valuation,
)
from valpow.valuation import Flavor, SimpleValuation

CHAIN = "poset\nelem a\nelem b\nle a b\n"


def test_poset_round_trip():
    P = parse_poset(CHAIN)
    assert P.leq(0, 1)
    assert parse_poset(format_poset(P)) == P


def test_parse_errors_have_lines():
    with pytest.raises(ParseError) as info:
        parse_poset("poset\nelem a\nle a\n")
    assert info.value.line == 3
    with pytest.raises(ParseError):
        parse_poset("elem a\n")
    with pytest.raises(ParseError):
        parse_poset("poset\nelem a\nle a b\n")
    with pytest.raises(ParseError):
        parse_poset("poset\nelem a\nelem b\nle a b\nle b a\n")


def test_valuation_literals():
    P = parse_poset(CHAIN)
    fl, nu = parse_valuation("val sub 1/2 @ a + 1/3 @ b", P)
    assert fl is Flavor.SUB and nu == SimpleValuation({0: F(1, 2), 1: F(1, 3)})
    assert parse_valuation("val 0", P) == (None, SimpleValuation.zero())
    with pytest.raises(ParseError):
        parse_valuation("val prob 1/2 @ a", P)
    with pytest.raises(ParseError):
        parse_valuation("val 0.5 @ a", P)
    with pytest.raises(ParseError):
        parse_valuation("val 1 @ z", P)


def test_other_literals():
    P = parse_poset(CHAIN)
    k = parse_capacity("cap 1/2 @ {a,b} + 1 @ {b}", P)
    assert k(0b10) == 1 and k(0b11) == F(3, 2)
    assert parse_step_function("a=1 b=3", P) == {0: 1, 1: 3}
    assert parse_conjunct("{b} > 1/4", P) == (0b10, F(1, 4))
    with pytest.raises(ParseError):
        parse_conjunct("{a} > 1/4", P)
    assert parse_matrix("2 1\n1\n-1/2\n") == [[1], [F(-1, 2)]]
    with pytest.raises(ParseError):
        parse_matrix("2 2\n1 2 3\n")
    assert parse_alpha_conjuncts("E={0,1} r=1/2 E={} r=1/4") == [
        (frozenset({0, 1}), F(1, 2)),
        (frozenset(), F(1, 4)),
    ]
    with pytest.raises(ParseError):
        parse_alpha_conjuncts("E={x} r=1/2")


def test_directives():
    prob = parse_problem(CHAIN + "nu val 1 @ a # comment\nopen {b} > 0\nopen {a,b} > 1/2\n")
    assert prob.one("nu")[1] == "val 1 @ a"
    assert len(prob.get("open")) == 2
    with pytest.raises(ParseError):
        prob.one("open")
