"""Finite posets with their upper-set topology.

Element sets are plain ``int`` bit masks: bit ``i`` set means element ``i``
is a member.  On a finite poset every directed family has a greatest
element, so the Scott-open sets are exactly the upward-closed sets; this
module works with those and :func:`is_scott_open_direct` checks the
equivalence against the definition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence

DEFAULT_MAX_SIZE = 16


class OrderError(ValueError):
    pass


class CycleError(OrderError):
    pass


class DuplicateName(OrderError):
    pass


class NotMember(OrderError):
    pass


class SizeError(OrderError):
    pass


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


@dataclass(frozen=True)
class FinitePoset:
    """A finite partial order on ``range(size)``.

    ``up[i]`` is the mask of all ``j`` with ``i <= j`` and ``down[i]`` the
    mask of all ``j`` with ``j <= i``.  Build instances with
    :func:`build_poset` or :meth:`from_up_masks`.
    """

    names: tuple[str, ...]
    up: tuple[int, ...]
    down: tuple[int, ...] = field(repr=False)

    @classmethod
    def from_up_masks(cls, names: Sequence[str], up: Sequence[int]) -> "FinitePoset":
        n = len(names)
        down = [0] * n
        for i in range(n):
            for j in bits(up[i]):
                down[j] |= 1 << i
        return cls(tuple(names), tuple(up), tuple(down))

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    def leq(self, i: int, j: int) -> bool:
        return bool(self.up[i] >> j & 1)

    def lt(self, i: int, j: int) -> bool:
        return i != j and self.leq(i, j)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise NotMember(f"unknown element {name!r}") from None

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for name in names:
            m |= 1 << self.index(name)
        return m

    def labels(self, mask: int) -> list[str]:
        return [self.names[i] for i in bits(mask)]

    def format_set(self, mask: int) -> str:
        return "{" + ",".join(self.labels(mask)) + "}"

    def is_upset(self, mask: int) -> bool:
        return all(self.up[i] & ~mask == 0 for i in bits(mask))

    def is_downset(self, mask: int) -> bool:
        return all(self.down[i] & ~mask == 0 for i in bits(mask))

    def check_partial_order(self) -> bool:
        """Reflexivity, antisymmetry and transitivity by direct triple loops."""
        n = self.size
        for i in range(n):
            if not self.leq(i, i):
                return False
            for j in range(n):
                if i != j and self.leq(i, j) and self.leq(j, i):
                    return False
                for k in range(n):
                    if self.leq(i, j) and self.leq(j, k) and not self.leq(i, k):
                        return False
        return True


def build_poset(
    names: Sequence[str],
    pairs: Iterable[tuple[str, str]] = (),
    max_size: int = DEFAULT_MAX_SIZE,
) -> FinitePoset:
    """Poset on ``names`` whose order is the reflexive-transitive closure of ``pairs``."""
    if len(set(names)) != len(names):
        seen = set()
        dup = next(x for x in names if x in seen or seen.add(x))
        raise DuplicateName(f"duplicate element name {dup!r}")
    n = len(names)
    if n > max_size:
        raise SizeError(f"poset has {n} elements, limit is {max_size}")
    pos = {name: i for i, name in enumerate(names)}
    up = [1 << i for i in range(n)]
    for lo, hi in pairs:
        for name in (lo, hi):
            if name not in pos:
                raise NotMember(f"unknown element {name!r}")
        up[pos[lo]] |= 1 << pos[hi]
    # Warshall closure on masks
    for k in range(n):
        for i in range(n):
            if up[i] >> k & 1:
                up[i] |= up[k]
    for i in range(n):
        for j in bits(up[i]):
            if j != i and up[j] >> i & 1:
                raise CycleError(f"{names[i]} < {names[j]} < {names[i]}")
    return FinitePoset.from_up_masks(names, up)


def upward_closure(P: FinitePoset, S: int) -> int:
    out = 0
    for i in bits(S):
        out |= P.up[i]
    return out


def downward_closure(P: FinitePoset, S: int) -> int:
    out = 0
    for i in bits(S):
        out |= P.down[i]
    return out


def interior(P: FinitePoset, S: int) -> int:
    """Largest upward-closed subset of ``S``."""
    out = 0
    for i in bits(S):
        if P.up[i] & ~S == 0:
            out |= 1 << i
    return out


def minimal_elements(P: FinitePoset, S: int) -> int:
    out = 0
    for i in bits(S):
        if P.down[i] & S == 1 << i:
            out |= 1 << i
    return out


def maximal_elements(P: FinitePoset, S: int) -> int:
    out = 0
    for i in bits(S):
        if P.up[i] & S == 1 << i:
            out |= 1 << i
    return out


def linear_extension(P: FinitePoset) -> list[int]:
    """Elements ordered so that ``i < j`` in ``P`` implies ``i`` comes first."""
    return sorted(range(P.size), key=lambda i: (popcount(P.down[i]), i))


def enumerate_opens(P: FinitePoset) -> list[int]:
    """All upward-closed subsets of ``P`` as masks, sorted ascending.

    Backtracks over elements from the top down, so the cost is proportional
    to the number of open sets rather than ``2 ** size``.
    """
    order = linear_extension(P)[::-1]
    out: list[int] = []

    def walk(k: int, current: int) -> None:
        if k == len(order):
            out.append(current)
            return
        x = order[k]
        walk(k + 1, current)
        if P.up[x] & ~current == 1 << x:
            walk(k + 1, current | 1 << x)

    walk(0, 0)
    out.sort()
    return out


def enumerate_closed(P: FinitePoset) -> list[int]:
    return sorted(P.full & ~U for U in enumerate_opens(P))


def irreducible_closed_sets(P: FinitePoset) -> list[int]:
    """Non-empty closed sets that are not the union of two proper closed subsets.

    Decided by brute force: ``C`` is irreducible when for all closed
    ``C1, C2`` with ``C <= C1 | C2``, ``C <= C1`` or ``C <= C2``.  It is
    enough to range over closed subsets of ``C`` since ``C & C1`` is closed.
    """
    closed = enumerate_closed(P)
    out = []
    for C in closed:
        if not C:
            continue
        inside = [D for D in closed if D & ~C == 0]
        if all(
            C1 == C or C2 == C
            for C1, C2 in combinations(inside, 2)
            if C1 | C2 == C
        ):
            out.append(C)
    return out


def is_sober(P: FinitePoset) -> tuple[bool, dict[int, int]]:
    """Sobriety verdict plus, for each irreducible closed set, the point it is the closure of."""
    witness: dict[int, int] = {}
    ok = True
    for C in irreducible_closed_sets(P):
        points = [x for x in range(P.size) if P.down[x] == C]
        if points:
            witness[C] = points[0]
        else:
            ok = False
    return ok, witness


def finitary_basis_at(P: FinitePoset, x: int, U: int) -> int:
    """A finite ``E`` with ``x`` in int(up E), up E inside ``U``; canonically min(U)."""
    if not U >> x & 1:
        raise NotMember(f"{P.names[x]} is not in {P.format_set(U)}")
    if not P.is_upset(U):
        raise OrderError(f"{P.format_set(U)} is not open")
    return minimal_elements(P, U)


def directed_subsets(P: FinitePoset) -> Iterator[int]:
    """Non-empty subsets in which any two members have an upper bound inside."""
    for D in range(1, 1 << P.size):
        members = list(bits(D))
        if all(P.up[i] & P.up[j] & D for i, j in combinations(members, 2)):
            yield D


def supremum(P: FinitePoset, S: int) -> int | None:
    """Least upper bound of ``S`` in ``P``, or ``None`` when it does not exist."""
    ub = P.full
    for i in bits(S):
        ub &= P.up[i]
    least = minimal_elements(P, ub)
    if least and least & (least - 1) == 0 and upward_closure(P, least) == ub:
        return least.bit_length() - 1
    return None


def is_scott_open_direct(P: FinitePoset, U: int) -> bool:
    """Scott openness from the definition: upward closed and inaccessible by directed sups."""
    if not P.is_upset(U):
        return False
    for D in directed_subsets(P):
        sup = supremum(P, D)
        if sup is not None and U >> sup & 1 and not D & U:
            return False
    return True


def induced(P: FinitePoset, S: int) -> tuple[FinitePoset, list[int]]:
    """Subposet on the members of ``S`` and the list mapping new indices to old ones."""
    keep = list(bits(S))
    new = {old: k for k, old in enumerate(keep)}
    up = []
    for old in keep:
        m = 0
        for j in bits(P.up[old] & S):
            m |= 1 << new[j]
        up.append(m)
    return FinitePoset.from_up_masks([P.names[i] for i in keep], up), keep
