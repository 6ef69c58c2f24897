"""Discrete valuations on the one-point compactification of the naturals.

Only finite and cofinite opens are represented: a finite set of naturals
(never containing infinity) or the complement of one (always containing
infinity).  Valuations have finite support on the naturals plus an atom at
infinity.  On this space the set ``{a_inf > 0}`` is Scott-open but contains
no basic weak neighbourhood of ``delta_inf``; :func:`counterexample_witness`
exhibits the point that escapes any given neighbourhood.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .lp import PreconditionError
from .valuation import Flavor, as_fraction, fmt_q


@dataclass(frozen=True)
class AlphaOpen:
    """``finite(points)`` when ``cofinite`` is false, else the complement of ``points``."""

    points: frozenset[int]
    cofinite: bool = False

    @classmethod
    def finite(cls, points: Iterable[int]) -> "AlphaOpen":
        return cls(frozenset(points), False)

    @classmethod
    def co(cls, excluded: Iterable[int]) -> "AlphaOpen":
        return cls(frozenset(excluded), True)

    @classmethod
    def tail(cls, n: int) -> "AlphaOpen":
        """``{n, n+1, ..., inf}``."""
        return cls(frozenset(range(n)), True)

    def __contains__(self, n: int) -> bool:
        return (n not in self.points) if self.cofinite else (n in self.points)

    @property
    def has_inf(self) -> bool:
        return self.cofinite

    def __or__(self, other: "AlphaOpen") -> "AlphaOpen":
        if self.cofinite and other.cofinite:
            return AlphaOpen(self.points & other.points, True)
        if self.cofinite:
            return AlphaOpen(self.points - other.points, True)
        if other.cofinite:
            return AlphaOpen(other.points - self.points, True)
        return AlphaOpen(self.points | other.points, False)

    def __and__(self, other: "AlphaOpen") -> "AlphaOpen":
        if self.cofinite and other.cofinite:
            return AlphaOpen(self.points | other.points, True)
        if self.cofinite:
            return AlphaOpen(other.points - self.points, False)
        if other.cofinite:
            return AlphaOpen(self.points - other.points, False)
        return AlphaOpen(self.points & other.points, False)

    def __str__(self) -> str:
        body = ",".join(map(str, sorted(self.points)))
        return f"cofinite({{{body}}})" if self.cofinite else f"{{{body}}}"


class DiscreteValuation:
    """``sum_n a_n delta_n + a_inf delta_inf`` with finitely many ``a_n > 0``."""

    __slots__ = ("weights", "a_inf", "_key")

    def __init__(self, weights: Mapping[int, object] | None = None, a_inf=0):
        clean = {}
        for n, w in (weights or {}).items():
            w = as_fraction(w)
            if n < 0:
                raise ValueError("points are natural numbers")
            if w < 0:
                raise ValueError("negative weight")
            if w:
                clean[n] = w
        a_inf = as_fraction(a_inf)
        if a_inf < 0:
            raise ValueError("negative weight at infinity")
        self.weights = dict(sorted(clean.items()))
        self.a_inf = a_inf
        self._key = (tuple(self.weights.items()), a_inf)

    @classmethod
    def dirac(cls, n: int | None) -> "DiscreteValuation":
        """Point mass at ``n``; ``None`` stands for infinity."""
        return cls(a_inf=1) if n is None else cls({n: 1})

    def __getitem__(self, n: int) -> Fraction:
        return self.weights.get(n, Fraction(0))

    @property
    def mass(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0)) + self.a_inf

    @property
    def support_max(self) -> int:
        return max(self.weights, default=-1)

    def __eq__(self, other) -> bool:
        return isinstance(other, DiscreteValuation) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        parts = [f"{fmt_q(w)}@{n}" for n, w in self.weights.items()]
        if self.a_inf:
            parts.append(f"{fmt_q(self.a_inf)}@inf")
        return "DiscreteValuation(" + (" + ".join(parts) or "0") + ")"


def eval_alpha(nu: DiscreteValuation, U: AlphaOpen) -> Fraction:
    total = sum((w for n, w in nu.weights.items() if n in U), Fraction(0))
    return total + nu.a_inf if U.cofinite else total


def leq_discrete(nu: DiscreteValuation, mu: DiscreteValuation) -> bool:
    """Stochastic order, read off coefficientwise including the infinity atom."""
    return nu.a_inf <= mu.a_inf and all(w <= mu[n] for n, w in nu.weights.items())


def tail_mass(nu: DiscreteValuation) -> Fraction:
    """``inf_n nu({n, n+1, ..., inf})``.

    The tails decrease, and once ``n`` passes the support they are constant,
    so the infimum is the value at ``n = max(support) + 1``.
    """
    n = nu.support_max + 1
    value = eval_alpha(nu, AlphaOpen.tail(n))
    if any(eval_alpha(nu, AlphaOpen.tail(k)) < value for k in range(n)):
        raise AssertionError("tail values are not decreasing")
    if value != nu.a_inf:
        raise AssertionError("tail infimum differs from the atom at infinity")
    return value


def scott_V_member(nu: DiscreteValuation) -> bool:
    return nu.a_inf > 0


def in_basic(nu: DiscreteValuation, conjuncts: Sequence[tuple[AlphaOpen, Fraction]], flavor: Flavor = Flavor.SUB) -> bool:
    return flavor.admits(nu.mass) and all(eval_alpha(nu, U) > r for U, r in conjuncts)


@dataclass(frozen=True)
class CounterexampleReport:
    n: int
    point: DiscreteValuation
    inf_in_neighbourhood: bool
    point_in_neighbourhood: bool
    point_in_scott_open: bool
    a_inf: Fraction

    @property
    def ok(self) -> bool:
        return self.inf_in_neighbourhood and self.point_in_neighbourhood and not self.point_in_scott_open

    def lines(self) -> list[tuple[str, str]]:
        b = lambda v: "true" if v else "false"
        return [
            ("n", str(self.n)),
            ("a_inf", fmt_q(self.a_inf)),
            ("check.inf_in_neighbourhood", b(self.inf_in_neighbourhood)),
            ("check.delta_n_in_neighbourhood", b(self.point_in_neighbourhood)),
            ("check.delta_n_outside_scott_open", b(not self.point_in_scott_open)),
        ]


def counterexample_witness(conjuncts: Sequence[tuple[Iterable[int], object]]) -> CounterexampleReport:
    """For ``[alpha(N) - E_i > r_i]``, the point ``delta_n`` that lies inside but has no mass at infinity.

    ``n`` is the least natural outside every ``E_i``.
    """
    opens = []
    for i, (E, r) in enumerate(conjuncts):
        r = as_fraction(r)
        if not 0 < r < 1:
            raise PreconditionError(f"conjunct {i}: threshold {r} must lie strictly between 0 and 1")
        opens.append((AlphaOpen.co(E), r))
    used = set().union(*(U.points for U, _ in opens)) if opens else set()
    n = next(k for k in range(len(used) + 1) if k not in used)
    point = DiscreteValuation.dirac(n)
    top = DiscreteValuation.dirac(None)
    return CounterexampleReport(
        n=n,
        point=point,
        inf_in_neighbourhood=in_basic(top, opens),
        point_in_neighbourhood=in_basic(point, opens),
        point_in_scott_open=scott_V_member(point),
        a_inf=point.a_inf,
    )
