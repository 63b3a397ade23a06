"""Command-line interface: ``cfgamb <command> ...``.

Every command writes deterministic output (canonical JSON with sorted keys,
or the grammar text format).  Errors raised by the library are reported as
a JSON object on stderr with exit status 1; usage errors exit with 2.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .datalog import ground, parse_atom, parse_facts, parse_program, provenance_table
from .grammar import GrammarSyntaxError, dumps, grammar_to_json, parse_grammar, render_grammar
from .normalform import Trace, to_semilinear
from .oracle import Budget, camb_table, check_convergence_bound
from .presburger import level_set_formula
from .rational import camb_expr, evaluate, expr_from_json, expr_to_json, letters, to_string
from .semiring import SemiringError, parse_valuation, semiring_from_name
from .unfold import at_most, unfold


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _read_json(path: str):
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _grammar(path: str):
    return parse_grammar(_read(path))


def _start(g, x):
    if x is None:
        if not g.variables:
            raise UsageError("the grammar has no variables")
        return g.variables[0]
    if x not in g.variables:
        raise UsageError(f"unknown start variable {x!r}")
    return x


def _nonneg(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _level(text: str):
    if text.strip().lower() in ("inf", "infinity", "∞"):
        return math.inf
    return _nonneg(text)


# ------------------------------------------------------------------ commands


def cmd_unfold(args) -> str:
    g = _grammar(args.grammar)
    start = _start(g, args.start) if args.start else None
    u = unfold(g, args.k, prune=not args.no_prune, start=start)
    if args.format == "json":
        return dumps(grammar_to_json(u))
    return render_grammar(u)


def cmd_camb(args) -> str:
    g = _grammar(args.grammar)
    x = _start(g, args.start)
    e = camb_expr(g, args.k)[at_most(x, args.k)]
    doc = dumps(expr_to_json(e))
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(doc + "\n")
        return to_string(e)
    if args.format == "text":
        return to_string(e)
    return doc


def cmd_eval(args) -> str:
    e = expr_from_json(_read_json(args.expr))
    S = semiring_from_name(args.semiring)
    if args.valuation:
        val = parse_valuation(_read_json(args.valuation), S, alphabet=sorted(letters(e)))
    elif hasattr(S, "letter"):
        val = {a: S.letter(a) for a in letters(e)}
    else:
        raise UsageError("--valuation is required for this semiring")
    value = S.format(evaluate(e, val, S))
    return value if isinstance(value, str) else dumps(value)


def cmd_normalform(args) -> str:
    e = expr_from_json(_read_json(args.expr))
    trace = Trace() if args.trace else None
    s = to_semilinear(e, args.k, trace)
    doc = s.to_json()
    if trace is not None:
        doc["trace"] = trace.to_json()
    return dumps(doc)


def cmd_presburger(args) -> str:
    g = _grammar(args.grammar)
    x = _start(g, args.start)
    f = level_set_formula(g, x, args.level)
    if args.format == "smt2":
        return f.to_smt2().rstrip("\n")
    if args.format == "text":
        return str(f)
    return dumps(f.to_json())


def cmd_datalog(args) -> str:
    program = parse_program(_read(args.program))
    db = parse_facts(_read(args.facts), program.arities())
    S = semiring_from_name(args.semiring)
    gp = ground(program, db, cap=args.cap)
    query = str(parse_atom(args.query))
    if query not in gp.grammar.variables:
        value, depth, level, exact = S.zero(), 0, 0, True
    else:
        tab = provenance_table(gp, S, k_hint=args.k, start=query)
        value, depth, level, exact = tab.values[query], tab.depth, tab.level, tab.exact
    return dumps(
        {
            "query": query,
            "semiring": S.name,
            "value": S.format(value),
            "depth": depth,
            "level": level,
            "exact": exact,
            "ground": {
                "variables": len(gp.grammar.variables),
                "facts": len(gp.grammar.alphabet),
                "productions": len(gp.grammar.productions),
            },
        }
    )


def cmd_oracle(args) -> str:
    g = _grammar(args.grammar)
    x = _start(g, args.start)
    budget = Budget(max_nodes=args.max_nodes, max_norm=args.max_norm, cap=args.cap)
    if args.check_bound is not None:
        rep = check_convergence_bound(g, x, args.check_bound, budget)
        return dumps(rep.to_json())
    tab = camb_table(g, x, budget, dim_max=args.dim_max)
    return dumps(tab.to_json())


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfgamb", description="Commutative ambiguity of context-free grammars.")
    p.add_argument("--version", action="version", version=f"cfgamb {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("unfold", help="dimension unfolding G^{<=k}")
    s.add_argument("--grammar", required=True)
    s.add_argument("--k", type=_nonneg, required=True)
    s.add_argument("--start")
    s.add_argument("--no-prune", action="store_true")
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.set_defaults(func=cmd_unfold)

    s = sub.add_parser("camb", help="rational expression for camb of X restricted to dimension <= k")
    s.add_argument("--grammar", required=True)
    s.add_argument("--start")
    s.add_argument("--k", type=_nonneg, required=True)
    s.add_argument("--emit", metavar="FILE", help="write the expression JSON here and print it as text")
    s.add_argument("--format", choices=("json", "text"), default="json")
    s.set_defaults(func=cmd_camb)

    s = sub.add_parser("eval", help="evaluate an expression in a semiring")
    s.add_argument("--expr", default="-", help="expression JSON (default: stdin)")
    s.add_argument("--semiring", required=True)
    s.add_argument("--valuation", help="JSON object terminal -> value")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("normalform", help="weighted semilinear set of an expression modulo k = k+1")
    s.add_argument("--expr", default="-")
    s.add_argument("--k", type=_positive, required=True)
    s.add_argument("--trace", action="store_true")
    s.set_defaults(func=cmd_normalform)

    s = sub.add_parser("presburger", help="Presburger formula for {v : camb(v) = level}")
    s.add_argument("--grammar", required=True)
    s.add_argument("--start")
    s.add_argument("--level", type=_level, required=True)
    s.add_argument("--format", choices=("smt2", "json", "text"), default="smt2")
    s.set_defaults(func=cmd_presburger)

    s = sub.add_parser("datalog", help="provenance of a Datalog query")
    s.add_argument("--program", required=True)
    s.add_argument("--facts", required=True)
    s.add_argument("--query", required=True)
    s.add_argument("--semiring", required=True)
    s.add_argument("--k", type=_nonneg, help="unfolding depth for semirings without collapse")
    s.add_argument("--cap", type=_positive, default=100_000, help="maximum number of ground rule instances")
    s.set_defaults(func=cmd_datalog)

    s = sub.add_parser("oracle", help="tree-enumeration counts")
    s.add_argument("--grammar", required=True)
    s.add_argument("--start")
    s.add_argument("--dim-max", type=_nonneg)
    s.add_argument("--max-nodes", type=_positive, default=14)
    s.add_argument("--max-norm", type=_positive, default=7)
    s.add_argument("--cap", type=_positive, default=100_000)
    s.add_argument("--check-bound", type=_nonneg, metavar="K")
    s.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cfgamb {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, SemiringError, GrammarSyntaxError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        err = {"error": type(exc).__name__, "message": str(msg)}
        print(dumps(err), file=sys.stderr)
        return 1
    sys.stdout.write(out.rstrip("\n") + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
