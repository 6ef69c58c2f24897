"""Command-line interface.

Every command prints ``key=value`` lines (or one JSON object per line with
``--format json-lines``) and exits 0 when every check passes, 1 when a
check fails and 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .alphanat import counterexample_witness
from .lp import PreconditionError, decompose_capacity, matrix_game
from .order import OrderError, enumerate_opens, finitary_basis_at, irreducible_closed_sets, is_sober
from .powerdomain import (
    PointedPoset,
    basic_open,
    verify_sandwich,
    verify_sandwich_prob,
)
from .suites import SuiteConfig, all_suites
from .textio import (
    ParseError,
    parse_alpha_conjuncts,
    parse_capacity,
    parse_conjunct,
    parse_matrix,
    parse_measure,
    parse_problem,
    parse_step_function,
    parse_valuation,
)
from .valuation import (
    Flavor,
    SimpleValuation,
    StepFunction,
    choquet_integral,
    fmt_q,
    stochastic_leq,
    stochastic_leq_transport,
)

MAX_SIZE_LIMIT = 20


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    max_poset_size: int = 16
    grid: int = 4
    format: str = "text"

    def __post_init__(self):
        if self.grid < 1:
            raise UsageError("--grid must be at least 1")
        if not 1 <= self.max_poset_size <= MAX_SIZE_LIMIT:
            raise UsageError(f"--max-size must be between 1 and {MAX_SIZE_LIMIT}")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")


class Report:
    def __init__(self, fmt: str, out=None):
        self.fmt = fmt
        self.out = out or sys.stdout
        self.failed = False

    def emit(self, key: str, value) -> None:
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, Fraction):
            value = fmt_q(value)
        else:
            value = str(value)
        if self.fmt == "json-lines":
            self.out.write(json.dumps({key: value}) + "\n")
        else:
            self.out.write(f"{key}={value}\n")

    def check(self, key: str, ok: bool) -> None:
        self.emit(key, ok)
        if not ok:
            self.failed = True

    def lines(self, pairs) -> None:
        for k, v in pairs:
            self.emit(k, v)
            if k.startswith("check.") and v == "false":
                self.failed = True


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(str(exc)) from exc


def _problem(args):
    return parse_problem(_read(args.input), max_size=args.max_size)


def _valuation_line(prob, key: str):
    no, text = prob.one(key)
    try:
        return parse_valuation(text, prob.poset)
    except ParseError as exc:
        raise ParseError(str(exc), no) from exc


def cmd_order(args, rep: Report) -> None:
    P = _problem(args).poset
    opens = enumerate_opens(P)
    sober, witness = is_sober(P)
    rep.emit("elements", P.size)
    rep.emit("opens", len(opens))
    rep.emit("irreducible", len(irreducible_closed_sets(P)))
    rep.emit("sober", sober)
    for C, x in sorted(witness.items()):
        rep.emit(f"closure[{P.names[x]}]", P.format_set(C))
    for x in range(P.size):
        rep.emit(f"basis[{P.names[x]}]", P.format_set(finitary_basis_at(P, x, P.up[x])))
    rep.failed = not sober


def cmd_leq(args, rep: Report) -> None:
    prob = _problem(args)
    P = prob.poset
    lhs = parse_measure(prob.one("lhs")[1], P)
    _, rhs = _valuation_line(prob, "rhs")
    verdict = stochastic_leq(lhs, rhs, P)
    rep.emit("leq", verdict.holds)
    if not verdict:
        rep.emit("witness", P.format_set(verdict.witness))
        rep.emit("lhs.witness", lhs(verdict.witness))
        rep.emit("rhs.witness", rhs(verdict.witness))
    if isinstance(lhs, SimpleValuation):
        rep.check("check.transport_agrees", stochastic_leq_transport(lhs, rhs, P) == verdict.holds)
    rep.failed = rep.failed or not verdict.holds


def cmd_choquet(args, rep: Report) -> None:
    prob = _problem(args)
    P = prob.poset
    h = StepFunction(P, parse_step_function(prob.one("h")[1], P))
    g = parse_measure(prob.one("measure")[1], P)
    value = choquet_integral(h, g)
    rep.emit("integral", value)
    if not isinstance(g, SimpleValuation):
        closed = sum((w * min(h.values[y] for y in range(P.size) if B >> y & 1) for w, B in g.terms), Fraction(0))
        rep.emit("min_formula", closed)
        rep.check("check.min_formula", closed == value)


def cmd_decompose(args, rep: Report) -> None:
    prob = _problem(args)
    P = prob.poset
    kappa = parse_capacity(prob.one("kappa")[1], P)
    _, nu = _valuation_line(prob, "nu")
    try:
        dec = decompose_capacity(kappa, nu, P)
    except PreconditionError as exc:
        rep.check("check.precondition", False)
        rep.emit("witness", P.format_set(exc.witness))
        rep.emit("kappa.witness", kappa(exc.witness))
        rep.emit("nu.witness", nu(exc.witness))
        return
    rep.check("check.precondition", True)
    rep.emit("strategies", len(dec.space))
    for f, b in zip(dec.space.strategies, dec.beta):
        if b:
            rep.emit("beta[" + ",".join(P.names[y] for y in f) + "]", b)
    rep.emit("mixture", dec.mixture.format(P))
    rep.check("check.mixture_leq_nu", stochastic_leq(dec.mixture, nu, P).holds)
    rep.check("check.mixture_mass", dec.mixture.mass == sum(w for w, _ in kappa.terms))


def cmd_witness(args, rep: Report) -> None:
    prob = _problem(args)
    P = prob.poset
    flavor, nu = _valuation_line(prob, "nu")
    if args.flavor is not None:
        flavor = Flavor(args.flavor)
    flavor = flavor or Flavor.PLAIN
    conj = []
    for no, text in prob.get("open"):
        try:
            conj.append(parse_conjunct(text, P))
        except ParseError as exc:
            raise ParseError(str(exc), no) from exc
    W = basic_open(conj, flavor)
    if flavor is Flavor.PROB:
        bottoms = [x for x in range(P.size) if P.up[x] == P.full]
        if not bottoms:
            raise UsageError("flavor prob needs a pointed poset (a least element)")
        result = verify_sandwich_prob(PointedPoset(P, bottoms[0]), nu, W, grid=args.grid)
        E = result.E_plus
    else:
        result = verify_sandwich(P, nu, W, grid=args.grid)
        E = result.bundle.E
    rep.lines(result.lines())
    if len(E) <= args.list_e:
        for k, e in enumerate(E):
            rep.emit(f"E[{k}]", e.format(P))


def cmd_game(args, rep: Report) -> None:
    M = parse_matrix(_read(args.input))
    g = matrix_game(M)
    rep.emit("value", g.value)
    rep.emit("row", " ".join(fmt_q(v) for v in g.row))
    rep.emit("col", " ".join(fmt_q(v) for v in g.col))
    rep.check("check.minimax", g.maxmin == g.minmax)


def cmd_counterexample(args, rep: Report) -> None:
    conj = parse_alpha_conjuncts(" ".join(args.conjuncts))
    if not conj:
        raise UsageError("give at least one 'E={...} r=q' conjunct")
    result = counterexample_witness(conj)
    rep.lines(result.lines())


def cmd_selftest(args, rep: Report) -> None:
    cfg = RunConfig(args.seed, args.max_size, args.grid, args.format)
    rep.emit("seed", cfg.seed)
    rep.emit("max_size", cfg.max_poset_size)
    rep.emit("grid", cfg.grid)
    results = all_suites(SuiteConfig(cfg.seed, cfg.max_poset_size, cfg.grid))
    for r in results:
        rep.emit(f"suite.{r.name}.passed", r.passed)
        rep.emit(f"suite.{r.name}.total", r.total)
        if r.skipped:
            rep.emit(f"suite.{r.name}.redrawn", r.skipped)
        if args.timing:
            rep.emit(f"suite.{r.name}.seconds", f"{r.seconds:.2f}")
        rep.check(f"suite.{r.name}.ok", r.ok)


COMMANDS = {
    "order": (cmd_order, "upper-set topology summary of a poset file"),
    "leq": (cmd_leq, "stochastic order between 'lhs' and 'rhs'"),
    "choquet": (cmd_choquet, "Choquet integral of 'h' against 'measure'"),
    "decompose": (cmd_decompose, "mixed strategy putting 'kappa' below 'nu'"),
    "witness": (cmd_witness, "finitary witnesses for 'nu' inside the 'open' conjuncts"),
    "game": (cmd_game, "value and optimal strategies of a matrix game file"),
    "counterexample": (cmd_counterexample, "escape point for a basic weak neighbourhood of delta_inf"),
    "selftest": (cmd_selftest, "run every seeded property suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="input file ('-' or omitted: stdin)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", type=int, default=4)
    common.add_argument("--flavor", choices=[f.value for f in Flavor])
    common.add_argument("--format", choices=["text", "json-lines"], default="text")
    common.add_argument("--max-size", type=int, default=16)

    parser = argparse.ArgumentParser(prog="valpow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_)
        if name == "counterexample":
            p.add_argument("conjuncts", nargs="+", help="tokens like E={0,1} r=1/2")
        if name == "witness":
            p.add_argument("--list-e", type=int, default=20, help="print E when it has at most this many elements")
        if name == "selftest":
            p.add_argument("--timing", action="store_true", help="also print wall-clock seconds per suite")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    rep = Report(args.format)
    try:
        RunConfig(args.seed, args.max_size, args.grid, args.format)
        COMMANDS[args.command][0](args, rep)
    except (UsageError, ParseError, OrderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1 if rep.failed else 0


if __name__ == "__main__":
    sys.exit(main())
