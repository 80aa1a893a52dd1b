"""Command-line front end.

Exit codes: 0 success, 1 relation/property failure, 2 input error,
3 fuel exhaustion.  All randomness flows from --seed; identical inputs
and seeds produce byte-identical output.
"""

from __future__ import annotations

import argparse
import itertools
import random
import sys

from . import bimodule, rewrite
from .coxeter import GraphError, parse_graph
from .expr import (ExprError, LinComb, TypeMismatch, parse_expr, print_expr,
                   print_lincomb, random_expression, typecheck)
from .lightleaves import MoveError, enumerate_FL, is_member_FL
from .measures import stats, stats_lines
from .polyring import poly_str
from .rewrite import FuelExhausted, Trace, check_rule, normalize, registry


class InputError(Exception):
    pass


def _load_graph(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_graph(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read graph file: {exc}") from exc
    except GraphError as exc:
        raise InputError(f"bad graph file: {exc}") from exc


def _load_expr(graph, path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read expression file: {exc}") from exc
    try:
        e = parse_expr(text.strip())
        typecheck(graph, e)
    except (ExprError, TypeMismatch, KeyError) as exc:
        raise InputError(str(exc)) from exc
    return e


def _parse_word(graph, text):
    word = tuple(text.replace(",", " ").split())
    for g in word:
        if g not in graph.generators:
            raise InputError(f"unknown generator {g!r} in word")
    return word


def cmd_check(args) -> int:
    graph = _load_graph(args.graph)
    instances = rewrite.build_instances(graph)
    instances["commutation"] = rewrite.commutation_instances(graph)
    if args.corrupt:
        # test hook: damage one slide instance and make sure the check sees it
        broken = instances["m_slide"][0]
        instances["m_slide"][0] = rewrite.RuleInstance(
            broken.rule, broken.lhs, broken.context, broken.rhs[:-1])
    failures = 0
    for name in sorted(instances):
        for inst in instances[name]:
            ok, witness = check_rule(graph, inst)
            tag = " ".join(str(t) for t in inst.lhs)
            if ok:
                print(f"OK {name} [{tag}]")
            else:
                failures += 1
                print(f"FAIL {name} [{tag}] at basis vector "
                      f"{''.join(map(str, witness)) if witness else '?'}")
    return 1 if failures else 0


def cmd_normalize(args) -> int:
    graph = _load_graph(args.graph)
    e = _load_expr(graph, args.expr)
    if typecheck(graph, e) != ():
        raise InputError("expression must map to the unit object "
                         "(empty codomain)")
    trace = Trace()
    result = normalize(graph, e, trace)
    print(print_lincomb(graph, result))
    if args.trace:
        for line in trace.lines():
            print("step " + line)
    return 0


def cmd_basis(args) -> int:
    graph = _load_graph(args.graph)
    word = _parse_word(graph, args.word)
    leaves = enumerate_FL(graph, word)
    for leaf in leaves:
        print(print_expr(leaf.expression(graph)))
    print(f"count: {len(leaves)}")
    if args.verify_independence:
        maps = [bimodule.eval_expression(graph, leaf.expression(graph))
                for leaf in leaves]
        res = bimodule.independent(graph, maps, seed=args.seed)
        for i, point in enumerate(res.points):
            vals = " ".join(f"y_{g}={point[g]}" for g in graph.generators)
            print(f"specialization {i}: {vals}")
        if res.independent:
            print("independent: yes")
        else:
            print("independent: inconclusive")
            return 1
    return 0


def cmd_eval(args) -> int:
    graph = _load_graph(args.graph)
    e = _load_expr(graph, args.expr)
    m = bimodule.eval_expression(graph, e)
    print("domain: " + (" ".join(m.domain) if m.domain else "-"))
    print("codomain: " + (" ".join(m.codomain) if m.codomain else "-"))
    rows = list(itertools.product((0, 1), repeat=len(m.codomain)))
    cols = list(itertools.product((0, 1), repeat=len(m.domain)))
    zero = "0"
    for row in rows:
        entries = []
        for col in cols:
            p = m.entry(row, col)
            entries.append(poly_str(graph, p) if p is not None else zero)
        print(" | ".join(entries))
    return 0


def cmd_stats(args) -> int:
    graph = _load_graph(args.graph)
    e = _load_expr(graph, args.expr)
    print(stats_lines(stats(graph, e)))
    return 0


def cmd_fuzz(args) -> int:
    graph = _load_graph(args.graph)
    registry(graph)
    rng = random.Random(args.seed)
    failures = 0
    for case in range(args.count):
        length = rng.randint(0, args.max_word)
        word = tuple(rng.choice(graph.generators) for _ in range(length))
        case_seed = rng.randrange(1 << 30)
        e = random_expression(graph, word, max(args.max_len, length),
                              case_seed)
        try:
            result = normalize(graph, e)
            lhs = bimodule.eval_expression(graph, e)
            rhs = bimodule.eval_lincomb(graph, result, domain=word,
                                        codomain=())
            if lhs != rhs:
                raise AssertionError("oracle mismatch")
            for out in result.expressions():
                if not is_member_FL(graph, out):
                    raise AssertionError(f"non-basis output {out}")
        except FuelExhausted:
            raise
        except Exception as exc:  # report and keep the reproducing data
            failures += 1
            print(f"FAIL case {case} seed {case_seed}: {exc}")
            print("  " + print_expr(e))
            continue
    if failures:
        print(f"fuzz: {failures} of {args.count} cases failed")
        return 1
    print(f"fuzz ok: {args.count} cases")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="soergel",
        description="Rewrite diagrammatic bimodule morphisms over "
                    "right-angled Coxeter systems to the canonical basis.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed for all randomized operations (default 0)")
    common.add_argument("--fuel-mult", type=int, default=1,
                        help="scale the per-stage rewrite budgets")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add("check", help="verify every rule against the oracle")
    p.add_argument("graph")
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_check)

    p = add("normalize", help="normalize an expression file")
    p.add_argument("graph")
    p.add_argument("expr")
    p.add_argument("--trace", action="store_true",
                   help="print one line per rewrite step")
    p.set_defaults(func=cmd_normalize)

    p = add("basis", help="enumerate the basis of Hom(word, unit)")
    p.add_argument("graph")
    p.add_argument("word", help="letters, space or comma separated")
    p.add_argument("--verify-independence", action="store_true")
    p.set_defaults(func=cmd_basis)

    p = add("eval", help="print the exact matrix of an expression")
    p.add_argument("graph")
    p.add_argument("expr")
    p.set_defaults(func=cmd_eval)

    p = add("stats", help="print the statistics of an expression")
    p.add_argument("graph")
    p.add_argument("expr")
    p.set_defaults(func=cmd_stats)

    p = add("fuzz", help="random normalize-vs-oracle checks")
    p.add_argument("graph")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-word", type=int, default=6, help=argparse.SUPPRESS)
    p.add_argument("--max-len", type=int, default=8, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rewrite.FUEL_MULTIPLIER = max(1, args.fuel_mult)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ExprError, TypeMismatch, MoveError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FuelExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        for line in exc.trace.lines():
            print("step " + line, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
