import itertools

import pytest
from hypothesis import strategies as st

from valpow.order import build_poset


@pytest.fixture
def chain2():
    return build_poset(["a", "b"], [("a", "b")])


@pytest.fixture
def antichain2():
    return build_poset(["a", "b"], [])


@pytest.fixture
def chain3():
    return build_poset(["a", "b", "c"], [("a", "b"), ("b", "c")])


def brute_upsets(P):
    """Every subset, filtered by the definition of an upper set."""
    out = []
    for S in range(1 << P.size):
        if all(not (S >> x & 1) or all(S >> y & 1 for y in range(P.size) if P.leq(x, y)) for x in range(P.size)):
            out.append(S)
    return out


@st.composite
def posets(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    names = [f"p{i}" for i in range(n)]
    pairs = [(names[i], names[j]) for i, j in itertools.combinations(range(n), 2) if draw(st.booleans())]
    return build_poset(names, pairs)
