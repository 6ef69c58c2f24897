"""Simple valuations, simple capacities, the stochastic order and Choquet integrals.

All scalars are :class:`fractions.Fraction`; there is no infinite value.
Valuations and capacities are callables on open sets given as bit masks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import floor, lcm
from typing import Iterable, Mapping, NamedTuple, Union

import networkx as nx

from .order import FinitePoset, bits, enumerate_opens

Rational = Fraction


class NonMonotone(ValueError):
    pass


class FlavorError(ValueError):
    pass


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass an int, str or Fraction")
    return Fraction(value)


class Flavor(enum.Enum):
    PLAIN = "plain"
    SUB = "sub"
    PROB = "prob"

    def admits(self, mass: Fraction) -> bool:
        if self is Flavor.SUB:
            return mass <= 1
        if self is Flavor.PROB:
            return mass == 1
        return True

    def check(self, mass: Fraction) -> None:
        if not self.admits(mass):
            raise FlavorError(f"mass {mass} not allowed for flavor {self.value}")


class SimpleValuation:
    """Finite positive combination of point masses, ``sum a_x delta_x``.

    Zero weights are dropped on construction, so equal valuations compare
    equal and hash alike.
    """

    __slots__ = ("weights", "_key")

    def __init__(self, weights: Mapping[int, object] | None = None):
        clean = {}
        for x, w in (weights or {}).items():
            w = as_fraction(w)
            if w < 0:
                raise ValueError(f"negative weight {w} at {x}")
            if w:
                clean[x] = w
        self.weights: dict[int, Fraction] = dict(sorted(clean.items()))
        self._key = tuple(self.weights.items())

    @classmethod
    def dirac(cls, x: int, weight=1) -> "SimpleValuation":
        return cls({x: weight})

    @classmethod
    def zero(cls) -> "SimpleValuation":
        return cls()

    def __call__(self, U: int) -> Fraction:
        return sum((w for x, w in self._key if U >> x & 1), Fraction(0))

    def __getitem__(self, x: int) -> Fraction:
        return self.weights.get(x, Fraction(0))

    @property
    def mass(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    @property
    def support(self) -> int:
        m = 0
        for x in self.weights:
            m |= 1 << x
        return m

    def __add__(self, other: "SimpleValuation") -> "SimpleValuation":
        out = dict(self.weights)
        for x, w in other.weights.items():
            out[x] = out.get(x, 0) + w
        return SimpleValuation(out)

    def scale(self, c) -> "SimpleValuation":
        c = as_fraction(c)
        if c < 0:
            raise ValueError("negative scale")
        return SimpleValuation({x: c * w for x, w in self.weights.items()})

    __rmul__ = scale

    def __eq__(self, other) -> bool:
        return isinstance(other, SimpleValuation) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        body = " + ".join(f"{w}@{x}" for x, w in self._key) or "0"
        return f"SimpleValuation({body})"

    def format(self, P: FinitePoset) -> str:
        return " + ".join(f"{fmt_q(w)} @ {P.names[x]}" for x, w in self._key) or "0"


@dataclass(frozen=True)
class SimpleCapacity:
    """``sum weight * u_B`` where the unanimity game ``u_B(U)`` is 1 iff ``B <= U``."""

    terms: tuple[tuple[Fraction, int], ...]

    def __init__(self, terms: Iterable[tuple[object, int]]):
        clean = []
        for w, B in terms:
            w = as_fraction(w)
            if w <= 0:
                raise ValueError(f"capacity weights must be positive, got {w}")
            if not B:
                raise ValueError("unanimity game over the empty set")
            clean.append((w, B))
        object.__setattr__(self, "terms", tuple(clean))

    @classmethod
    def unanimity(cls, B: int, weight=1) -> "SimpleCapacity":
        return cls([(weight, B)])

    def __call__(self, U: int) -> Fraction:
        return sum((w for w, B in self.terms if B & ~U == 0), Fraction(0))

    def scale(self, c) -> "SimpleCapacity":
        c = as_fraction(c)
        return SimpleCapacity([(c * w, B) for w, B in self.terms])

    def format(self, P: FinitePoset) -> str:
        return " + ".join(f"{fmt_q(w)} @ {P.format_set(B)}" for w, B in self.terms)


SetFunction = Union[SimpleValuation, SimpleCapacity]


def fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def eval_valuation(nu: SimpleValuation, U: int) -> Fraction:
    return nu(U)


def eval_capacity(kappa: SimpleCapacity, U: int) -> Fraction:
    return kappa(U)


class Verdict(NamedTuple):
    holds: bool
    witness: int | None = None

    def __bool__(self) -> bool:
        return self.holds


def stochastic_leq(mu: SetFunction, nu: SetFunction, P: FinitePoset, opens=None) -> Verdict:
    """``mu(U) <= nu(U)`` for every open ``U``; on failure the first offending open."""
    for U in opens if opens is not None else enumerate_opens(P):
        if mu(U) > nu(U):
            return Verdict(False, U)
    return Verdict(True)


def stochastic_leq_transport(mu: SimpleValuation, nu: SimpleValuation, P: FinitePoset) -> bool:
    """Stochastic order decided as a transport problem.

    ``mu <= nu`` iff mass ``mu[x]`` can be shipped to points ``y >= x``
    without exceeding ``nu[y]`` anywhere.  Weights are scaled to integers and
    the question becomes a max-flow saturation check.
    """
    if mu.mass > nu.mass:
        return False
    if not mu.weights:
        return True
    scale = lcm(*(w.denominator for w in (*mu.weights.values(), *nu.weights.values())))
    G = nx.DiGraph()
    for x, w in mu.weights.items():
        G.add_edge("s", ("src", x), capacity=int(w * scale))
        for y in nu.weights:
            if P.leq(x, y):
                G.add_edge(("src", x), ("dst", y))
    for y, w in nu.weights.items():
        G.add_edge(("dst", y), "t", capacity=int(w * scale))
    if "t" not in G:
        return False
    flow = nx.maximum_flow_value(G, "s", "t")
    return flow == mu.mass * scale


def way_below(r, s) -> bool:
    r, s = as_fraction(r), as_fraction(s)
    return r == 0 or r < s


class StepFunction:
    """Monotone map from elements to non-negative rationals.

    Monotone maps are exactly the lower semicontinuous ones for the
    upper-set topology, so every strict level set ``{h > t}`` is open.
    """

    def __init__(self, P: FinitePoset, values: Mapping[int, object]):
        vals = [as_fraction(values.get(x, 0)) for x in range(P.size)]
        if any(v < 0 for v in vals):
            raise ValueError("step functions take non-negative values")
        for x in range(P.size):
            for y in bits(P.up[x]):
                if vals[x] > vals[y]:
                    raise NonMonotone(f"h({P.names[x]})={vals[x]} > h({P.names[y]})={vals[y]}")
        self.P = P
        self.values = tuple(vals)

    @classmethod
    def indicator(cls, P: FinitePoset, U: int) -> "StepFunction":
        return cls(P, {x: 1 for x in bits(U)})

    def __call__(self, x: int) -> Fraction:
        return self.values[x]

    def __add__(self, other: "StepFunction") -> "StepFunction":
        return StepFunction(self.P, {x: a + b for x, (a, b) in enumerate(zip(self.values, other.values))})

    def scale(self, c) -> "StepFunction":
        c = as_fraction(c)
        return StepFunction(self.P, {x: c * v for x, v in enumerate(self.values)})

    def level(self, t: Fraction) -> int:
        """Mask of ``{x | h(x) >= t}``."""
        m = 0
        for x, v in enumerate(self.values):
            if v >= t:
                m |= 1 << x
        return m


def choquet_integral(h: StepFunction, g: SetFunction) -> Fraction:
    """Integral of ``h`` against ``g`` by exact threshold summation.

    ``t -> g({h > t})`` is constant on each gap between consecutive values
    of ``h``, so the Riemann integral is the finite sum below.
    """
    total = Fraction(0)
    prev = Fraction(0)
    for t in sorted(set(h.values) - {0}):
        total += (t - prev) * g(h.level(t))
        prev = t
    return total


def round_valuation(w: SimpleValuation, N: int) -> SimpleValuation:
    """Round every coefficient down to a multiple of ``1/N``."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    return SimpleValuation({x: Fraction(floor(N * c), N) for x, c in w.weights.items()})


def scale_add(terms: Iterable[tuple[object, SimpleValuation]]) -> SimpleValuation:
    """``sum c_k * nu_k`` for non-negative rationals ``c_k``."""
    out: dict[int, Fraction] = {}
    for c, nu in terms:
        c = as_fraction(c)
        if c < 0:
            raise ValueError("negative coefficient")
        for x, w in nu.weights.items():
            out[x] = out.get(x, 0) + c * w
    return SimpleValuation(out)
