"""Command-line entry point.

Subcommands:
  load  <file>                    parse an N-Triples file, report stats
  query <file|inline> --data F    run a query over an N-Triples file
  bench <suite>                   run a built-in benchmark suite

Exit codes: 0 ok, 2 query parse error, 3 unsupported query feature,
4 memory cap exceeded, 1 anything else. The execution memory cap can be
set with the VQUERY_MEMORY_CAP environment variable (bytes).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import bench, ntriples, profiler
from .errors import ParseError, QueryMemoryExceeded, UnsupportedFeature
from .ntriples import NTriplesError, format_term
from .planner import DEFAULT_MEMORY_CAP, SessionConfig, plan_query
from .storage import TripleStore
from .terms import Term

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNSUPPORTED = 3
EXIT_MEMORY = 4

MEMORY_CAP_ENV = "VQUERY_MEMORY_CAP"


def build_store(path: str) -> TripleStore:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    triples = ntriples.parse(text)
    store = TripleStore()
    enc = store.dictionary.encode
    for s, p, o in triples:
        store.insert(enc(s), enc(p), enc(o))
    store.freeze()
    return store


def _render_value(v):
    if v is None:
        return ""
    if isinstance(v, Term):
        return format_term(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _print_results(plan, fmt: str, out):
    names = plan.out_names
    if fmt == "tsv":
        print("\t".join("?" + n for n in names), file=out)
        for row in plan.rows():
            print("\t".join(_render_value(v) for v in row), file=out)
    else:
        objs = []
        for row in plan.rows():
            obj = {}
            for name, v in zip(names, row):
                if v is None:
                    continue
                obj[name] = format_term(v) if isinstance(v, Term) else v
            objs.append(obj)
        json.dump(objs, out, indent=2)
        print(file=out)


def cmd_load(args) -> int:
    t0 = time.perf_counter()
    store = build_store(args.file)
    elapsed = time.perf_counter() - t0
    print(f"loaded {len(store)} triples "
          f"({len(store.dictionary)} terms) in {elapsed:.3f}s")
    return EXIT_OK


def cmd_query(args) -> int:
    if os.path.exists(args.query):
        with open(args.query, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = args.query
    config = SessionConfig(
        engine=args.engine,
        batch_max=args.batch_max,
        adaptive=not args.no_adaptive,
        memory_cap=int(os.environ.get(MEMORY_CAP_ENV, DEFAULT_MEMORY_CAP)),
    )
    store = build_store(args.data) if args.data else _empty_store()
    plan = plan_query(store, text, config, profile=args.profile)
    _print_results(plan, args.output, sys.stdout)
    if args.profile:
        snap = plan.profile_snapshot()
        print(file=sys.stderr)
        print(profiler.render(snap), file=sys.stderr)
    return EXIT_OK


def _empty_store() -> TripleStore:
    store = TripleStore()
    store.freeze()
    return store


def cmd_bench(args) -> int:
    report = bench.run_suite(args.suite, seed=args.seed, scale=args.scale,
                             warmups=args.warmups, runs=args.runs)
    print(bench.format_report(report))
    if args.json:
        print(json.dumps(report, indent=2))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vquery",
                                description="Graph pattern query engine "
                                            "with vectorized execution")
    sub = p.add_subparsers(dest="command", required=True)

    pl = sub.add_parser("load", help="parse an N-Triples file and report")
    pl.add_argument("file")
    pl.set_defaults(func=cmd_load)

    pq = sub.add_parser("query", help="run a query (inline text or a file)")
    pq.add_argument("query", help="query text or path to a query file")
    pq.add_argument("--data", help="N-Triples data file", default=None)
    pq.add_argument("--engine", choices=("auto", "batch", "row"),
                    default="auto")
    pq.add_argument("--profile", action="store_true",
                    help="print the execution profile tree to stderr")
    pq.add_argument("--batch-max", type=int, default=512)
    pq.add_argument("--no-adaptive", action="store_true",
                    help="use fixed-size scan batches")
    pq.add_argument("--output", choices=("tsv", "json"), default="tsv")
    pq.set_defaults(func=cmd_query)

    pb = sub.add_parser("bench", help="run a built-in benchmark suite")
    pb.add_argument("suite", choices=bench.SUITES)
    pb.add_argument("--seed", type=int, default=1)
    pb.add_argument("--scale", type=int, default=0,
                    help="dataset size knob (0 = suite default)")
    pb.add_argument("--warmups", type=int, default=2)
    pb.add_argument("--runs", type=int, default=5)
    pb.add_argument("--json", action="store_true",
                    help="also print the machine-readable report")
    pb.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except NTriplesError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except UnsupportedFeature as e:
        print(f"unsupported: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except QueryMemoryExceeded as e:
        print(f"memory cap exceeded: {e}", file=sys.stderr)
        return EXIT_MEMORY


if __name__ == "__main__":
    sys.exit(main())
