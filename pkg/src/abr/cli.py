"""Command-line entry point.

    abr gen --scale-factor 0.01 --seed 42 --out-dir data
    abr load --tbl data/orders.tbl --schema data/orders.schema.json
    abr query q1 --data-dir data --backend compiled --output json
    abr bench q2 --data-dir data --warmup 5 --trials 5
    abr materialize q6 --name jan_orders --data-dir data \
        --then-plan-file filter.json

Datasets are in-memory only: every invocation loads (or generates) its
data, runs, and exits.  Exit code 0 on success, 1 with a one-line
diagnostic on error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import materialize, run_bench, run_query
from .errors import EngineError
from .ingest import (
    GenParams,
    gen_tpch_subset,
    load_dataset,
    load_tbl,
    new_database,
    read_schema,
    write_dataset,
)
from .plan import days_to_iso, plan_from_json
from .queries import builtin
from .result import ResultTable
from .store import ColumnType, Database


def _add_data_source(p: argparse.ArgumentParser):
    p.add_argument("--data-dir", help="directory of .tbl + .schema.json files")
    p.add_argument("--scale-factor", type=float, help="generate data in memory")
    p.add_argument("--seed", type=int, default=42)


def _add_query_source(p: argparse.ArgumentParser):
    p.add_argument("query", nargs="?", help="built-in query id (q1..q6)")
    p.add_argument("--plan-file", help="JSON plan descriptor")


def _load_db(args) -> Database:
    if args.data_dir:
        return load_dataset(args.data_dir)
    if args.scale_factor is not None:
        return gen_tpch_subset(GenParams(args.scale_factor, args.seed))
    raise EngineError("no data source: pass --data-dir or --scale-factor")


def _resolve_query(args, db: Database):
    if args.plan_file:
        with open(args.plan_file) as f:
            descriptor = json.load(f)
        return plan_from_json(descriptor, db.schemas()), args.plan_file
    if args.query:
        return builtin(args.query), args.query
    raise EngineError("no query: pass a built-in id or --plan-file")


def _format_cell(v, ctype: ColumnType) -> str:
    if ctype is ColumnType.DATE32:
        return days_to_iso(v)
    if ctype is ColumnType.STRING:
        return v.decode("utf-8")
    if ctype is ColumnType.FLOAT64:
        return f"{v:.6g}"
    return str(v)


def _print_result(result: ResultTable, output: str, compile_s: float, exec_s: float):
    if output == "json":
        body = result.to_json()
        body["stats"] = {
            "compileMs": compile_s * 1000.0,
            "execMs": exec_s * 1000.0,
            "rows": result.row_count,
        }
        print(json.dumps(body))
        return
    headers = [name for name, _ in result.schema]
    types = [t for _, t in result.schema]
    rows = [
        [_format_cell(v, t) for v, t in zip(row, types)] for row in result.rows()
    ]
    widths = [
        max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
        for i, h in enumerate(headers)
    ]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    for r in rows:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    print(
        f"({result.row_count} rows, compile {compile_s * 1000:.3f} ms, "
        f"exec {exec_s * 1000:.3f} ms)"
    )


def _cmd_gen(args) -> int:
    db = gen_tpch_subset(GenParams(args.scale_factor, args.seed))
    counts = write_dataset(db, args.out_dir)
    for name, n in counts.items():
        print(f"{name}: {n} rows -> {args.out_dir}/{name}.tbl")
    return 0


def _cmd_load(args) -> int:
    schema = read_schema(args.schema)
    db = new_database()
    n = load_tbl(args.tbl, schema, db)
    db.seal()
    print(f"loaded {schema.name}: {n} rows")
    return 0


def _cmd_query(args) -> int:
    db = _load_db(args)
    query, _ = _resolve_query(args, db)
    result, compile_s, exec_s = run_query(query, db, args.backend)
    _print_result(result, args.output, compile_s, exec_s)
    return 0


def _cmd_bench(args) -> int:
    db = _load_db(args)
    query, query_id = _resolve_query(args, db)
    report = run_bench(
        query, db, query_id, args.backend, warmup=args.warmup, trials=args.trials
    )
    if args.output == "json":
        print(json.dumps(report.to_json()))
    else:
        print(report.to_text())
    return 0


def _cmd_materialize(args) -> int:
    db = _load_db(args)
    query, _ = _resolve_query(args, db)
    succ, n = materialize(query, db, args.name, args.backend)
    print(f"materialized {args.name}: {n} rows")
    if args.then_plan_file:
        with open(args.then_plan_file) as f:
            follow = plan_from_json(json.load(f), succ.schemas())
        result, compile_s, exec_s = run_query(follow, succ, args.backend)
        _print_result(result, args.output, compile_s, exec_s)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abr",
        description="In-memory columnar analytical query engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--scale-factor", type=float, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-dir", default="data")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("load", help="validate-load one .tbl file")
    p.add_argument("--tbl", required=True)
    p.add_argument("--schema", required=True, help="schema sidecar JSON")
    p.set_defaults(func=_cmd_load)

    p = sub.add_parser("query", help="run a query and print the result")
    _add_query_source(p)
    _add_data_source(p)
    p.add_argument("--backend", choices=["compiled", "reference"], default="compiled")
    p.add_argument("--output", choices=["table", "json"], default="table")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("bench", help="warmup + measured trials, with CI")
    _add_query_source(p)
    _add_data_source(p)
    p.add_argument("--backend", choices=["compiled", "reference"], default="compiled")
    p.add_argument("--warmup", type=int, default=5)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--output", choices=["table", "json"], default="table")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser(
        "materialize", help="save a query result as a new table, then query it"
    )
    _add_query_source(p)
    _add_data_source(p)
    p.add_argument("--name", required=True, help="name of the materialized table")
    p.add_argument("--backend", choices=["compiled", "reference"], default="compiled")
    p.add_argument("--then-plan-file", help="follow-up plan over the new table")
    p.add_argument("--output", choices=["table", "json"], default="table")
    p.set_defaults(func=_cmd_materialize)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EngineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
