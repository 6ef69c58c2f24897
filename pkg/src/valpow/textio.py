"""Line-based input formats.

Poset files::

    poset
    elem a
    elem b
    le a b

Problem files are poset files followed by directive lines ``<key> <rest>``
(for instance ``nu val 1/2 @ a + 1/2 @ b`` or ``open {a,b} > 3/4``); the
command that reads the file decides which keys it needs.  ``#`` starts a
comment anywhere on a line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .order import DEFAULT_MAX_SIZE, FinitePoset, OrderError, build_poset
from .valuation import Flavor, SimpleCapacity, SimpleValuation

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_rational(tok: str) -> Fraction:
    tok = tok.strip()
    if not _RATIONAL.match(tok):
        raise ParseError(f"not a rational: {tok!r}")
    q = Fraction(tok)
    return q


@dataclass
class Problem:
    poset: FinitePoset
    directives: dict[str, list[tuple[int, str]]] = field(default_factory=dict)

    def get(self, key: str) -> list[tuple[int, str]]:
        return self.directives.get(key, [])

    def one(self, key: str) -> tuple[int, str]:
        found = self.get(key)
        if len(found) != 1:
            raise ParseError(f"expected exactly one '{key}' line, found {len(found)}")
        return found[0]


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def parse_problem(text: str, max_size: int = DEFAULT_MAX_SIZE) -> Problem:
    names: list[str] = []
    pairs: list[tuple[str, str]] = []
    directives: dict[str, list[tuple[int, str]]] = {}
    started = False
    for no, line in _lines(text):
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if not started:
            if line != "poset":
                raise ParseError("file must start with 'poset'", no)
            started = True
            continue
        if head == "elem":
            if len(rest.split()) != 1:
                raise ParseError("usage: elem <name>", no)
            names.append(rest)
        elif head == "le":
            parts = rest.split()
            if len(parts) != 2:
                raise ParseError("usage: le <name> <name>", no)
            for p in parts:
                if p not in names:
                    raise ParseError(f"unknown element {p!r}", no)
            pairs.append((parts[0], parts[1]))
        else:
            directives.setdefault(head, []).append((no, rest))
    if not started:
        raise ParseError("empty input")
    try:
        P = build_poset(names, pairs, max_size=max_size)
    except OrderError as exc:
        raise ParseError(str(exc)) from exc
    return Problem(P, directives)


def parse_poset(text: str, max_size: int = DEFAULT_MAX_SIZE) -> FinitePoset:
    return parse_problem(text, max_size).poset


def format_poset(P: FinitePoset) -> str:
    out = ["poset"]
    out += [f"elem {n}" for n in P.names]
    for i in range(P.size):
        for j in range(P.size):
            if P.lt(i, j) and not any(P.lt(i, k) and P.lt(k, j) for k in range(P.size)):
                out.append(f"le {P.names[i]} {P.names[j]}")
    return "\n".join(out) + "\n"


def parse_set(text: str, P: FinitePoset) -> int:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ParseError(f"expected {{...}}, got {text!r}")
    body = text[1:-1].strip()
    names = [t.strip() for t in body.split(",")] if body else []
    try:
        return P.mask(names)
    except OrderError as exc:
        raise ParseError(str(exc)) from exc


def parse_valuation(text: str, P: FinitePoset) -> tuple[Flavor | None, SimpleValuation]:
    """``val [plain|sub|prob] q @ e + q @ e ...``; ``val 0`` is the zero valuation."""
    parts = text.split(None, 1)
    if not parts or parts[0] != "val":
        raise ParseError(f"expected a 'val' literal, got {text!r}")
    body = parts[1].strip() if len(parts) > 1 else "0"
    flavor = None
    head, _, tail = body.partition(" ")
    if head in ("plain", "sub", "prob"):
        flavor = Flavor(head)
        body = tail.strip() or "0"
    weights: dict[int, Fraction] = {}
    if body != "0":
        for term in body.split("+"):
            q, at, name = term.partition("@")
            if not at:
                raise ParseError(f"term {term.strip()!r} lacks '@'")
            try:
                x = P.index(name.strip())
            except OrderError as exc:
                raise ParseError(str(exc)) from exc
            w = parse_rational(q)
            if w < 0:
                raise ParseError("weights must be non-negative")
            weights[x] = weights.get(x, 0) + w
    nu = SimpleValuation(weights)
    if flavor is not None and not flavor.admits(nu.mass):
        raise ParseError(f"mass {nu.mass} not allowed for flavor {flavor.value}")
    return flavor, nu


def parse_capacity(text: str, P: FinitePoset) -> SimpleCapacity:
    """``cap q @ {e,...} + q @ {e,...} ...``."""
    parts = text.split(None, 1)
    if not parts or parts[0] != "cap" or len(parts) == 1:
        raise ParseError(f"expected a 'cap' literal, got {text!r}")
    terms = []
    for term in re.findall(r"[^+{}]*@\s*\{[^}]*\}", parts[1]):
        q, _, S = term.partition("@")
        terms.append((parse_rational(q), parse_set(S, P)))
    leftover = re.sub(r"[^+{}]*@\s*\{[^}]*\}", "", parts[1]).replace("+", "").strip()
    if leftover or not terms:
        raise ParseError(f"malformed capacity literal {text!r}")
    try:
        return SimpleCapacity(terms)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def parse_measure(text: str, P: FinitePoset):
    """Either a valuation or a capacity literal."""
    if text.startswith("cap"):
        return parse_capacity(text, P)
    return parse_valuation(text, P)[1]


def parse_step_function(text: str, P: FinitePoset) -> dict[int, Fraction]:
    """``a=1 b=3``; unlisted elements map to 0."""
    out = {}
    for tok in text.split():
        name, eq, q = tok.partition("=")
        if not eq:
            raise ParseError(f"expected name=value, got {tok!r}")
        try:
            out[P.index(name)] = parse_rational(q)
        except OrderError as exc:
            raise ParseError(str(exc)) from exc
    return out


def parse_conjunct(text: str, P: FinitePoset) -> tuple[int, Fraction]:
    """``{a,b} > 3/4`` naming the subbasic open ``[U > r]``."""
    S, gt, r = text.rpartition(">")
    if not gt:
        raise ParseError(f"expected '<set> > <rational>', got {text!r}")
    U = parse_set(S, P)
    if not P.is_upset(U):
        raise ParseError(f"{S.strip()} is not upward closed")
    return U, parse_rational(r)


def parse_matrix(text: str) -> list[list[Fraction]]:
    lines = [line for _, line in _lines(text)]
    if not lines:
        raise ParseError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2 or not all(t.isdigit() for t in head):
        raise ParseError("first line must be '<rows> <cols>'", 1)
    rows, cols = int(head[0]), int(head[1])
    values = [parse_rational(t) for line in lines[1:] for t in line.split()]
    if rows < 1 or cols < 1 or len(values) != rows * cols:
        raise ParseError(f"expected {rows * cols} entries, got {len(values)}")
    return [values[i * cols:(i + 1) * cols] for i in range(rows)]


_ALPHA_TOKEN = re.compile(r"E=\{([^}]*)\}\s+r=(\S+)")


def parse_alpha_conjuncts(text: str) -> list[tuple[frozenset[int], Fraction]]:
    """``E={0,1} r=1/2 E={} r=1/4 ...``."""
    out = []
    pos = 0
    text = text.strip()
    for m in _ALPHA_TOKEN.finditer(text):
        if text[pos:m.start()].strip():
            raise ParseError(f"unexpected text {text[pos:m.start()].strip()!r}")
        body = m.group(1).strip()
        pts = []
        for t in body.split(",") if body else []:
            t = t.strip()
            if not t.isdigit():
                raise ParseError(f"not a natural number: {t!r}")
            pts.append(int(t))
        out.append((frozenset(pts), parse_rational(m.group(2))))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(f"unexpected text {text[pos:].strip()!r}")
    return out
