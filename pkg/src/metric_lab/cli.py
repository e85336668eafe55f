"""Command line: gen, build, query, bench."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import emit_csv, emit_markdown, load_dataset_spec, load_plan, run_benchmark
from .indexes import INDEX_KINDS, PIVOT_SELECTORS, build_index
from .query import STRATEGIES
from .serialize import load_index, save_index


def _parse_query(text: str, index):
    if index.dataset.metric.payload_kind == "string":
        return text
    vals = [float(x) for x in text.replace(",", " ").split()]
    if len(vals) != index.dataset.metric.dim:
        raise SystemExit(f"query needs {index.dataset.metric.dim} coordinates, got {len(vals)}")
    return tuple(vals)


def cmd_gen(args) -> int:
    ds = load_dataset_spec(f"synthetic:n={args.n},dim={args.dim},free={args.free}", args.seed)
    fmt = "%d" if ds.metric.discrete else "%.17g"
    out = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8")
    try:
        np.savetxt(out, np.asarray(ds.payloads), fmt=fmt)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_build(args) -> int:
    ds = load_dataset_spec(args.dataset, args.seed)
    index = build_index(args.index, ds, l=args.l, seed=args.seed, pivot_selector=args.pivots,
                        page_size=args.page_size)
    save_index(index, args.out)
    print(f"built {index.kind} over {ds.n} objects: {index.build_distance_count} distance computations,"
          f" {index.pages.pages_used} pages -> {args.out}")
    return 0


def cmd_query(args) -> int:
    index = load_index(args.index)
    q = _parse_query(args.q, index)
    if args.r is not None:
        result, stats = index.range_search(q, args.r, validate=not args.no_validate)
    else:
        result, stats = index.knn_search(q, args.k, strategy=args.strategy)
    for hit in result:
        tag = "" if hit.exact else "  (validated, distance is an upper bound)"
        print(f"{hit.id}\t{hit.distance:g}\t{index.objects[hit.id]!r}{tag}")
    print(f"# results={len(result)} compdists={stats.compdists} pa={stats.page_accesses} "
          f"time_ns={stats.elapsed_ns} rounds={stats.rounds}")
    return 0


def cmd_bench(args) -> int:
    plan = load_plan(args.plan)
    if args.radius_mode:
        plan.radius_mode = args.radius_mode
    rows = run_benchmark(plan)
    emit_csv(rows, args.csv)
    if args.markdown:
        if rows:
            emit_markdown(rows, args.markdown)
        else:
            print("no rows; markdown report skipped", file=sys.stderr)
    failed = sum(1 for r in rows if r.error)
    print(f"{len(rows)} rows ({failed} flagged) -> {args.csv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metric-lab", description="exact metric-space similarity search")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write a synthetic integer-vector dataset")
    g.add_argument("--n", type=int, default=10000)
    g.add_argument("--dim", type=int, default=20)
    g.add_argument("--free", type=int, default=5, help="independent coordinates")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build an index and save it")
    b.add_argument("dataset", help="synthetic:n=..,dim=.. | uniform:n=..,dim=..,kind=L2 | vectors:PATH:DIM[:KIND] "
                                   "| strings:PATH | dna")
    b.add_argument("--index", choices=INDEX_KINDS, required=True)
    b.add_argument("--l", type=int, default=5, help="pivot budget")
    b.add_argument("--pivots", choices=PIVOT_SELECTORS, default="hfi")
    b.add_argument("--page-size", type=int, default=4096)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="run one range or kNN query against a saved index")
    q.add_argument("index")
    q.add_argument("q", help="query string, or comma/space separated coordinates")
    mode = q.add_mutually_exclusive_group(required=True)
    mode.add_argument("--r", type=float)
    mode.add_argument("--k", type=int)
    q.add_argument("--strategy", choices=STRATEGIES, default="dynamic")
    q.add_argument("--no-validate", action="store_true", help="verify every candidate")
    q.set_defaults(func=cmd_query)

    be = sub.add_parser("bench", help="run a benchmark plan")
    be.add_argument("plan")
    be.add_argument("--csv", required=True)
    be.add_argument("--markdown")
    be.add_argument("--radius-mode", choices=("fraction", "max"))
    be.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"metric-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
