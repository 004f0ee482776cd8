"""Generic row-at-a-time query evaluator.

Correctness oracle and performance baseline for the specialized kernels.
Every value is carried as a (tag, value) pair and every operation
dispatches on the tags at runtime; this inefficiency is the point.  The
implementation shares no predicate, expression, or aggregate code with
the compiled backend.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import EmptyAggregate, EngineError, TypeMismatch
from .plan import (
    AggFunc,
    Bin,
    BinOp,
    CmpOp,
    Col,
    Direction,
    Lit,
    LogicalPlan,
    PlanClass,
    Predicate,
)
from .result import ResultTable
from .store import ColumnType, Database

NESTED_LOOP_MAX_ROWS = 10_000


class DynValue(NamedTuple):
    tag: str  # int | float | date | string
    value: object


def _dyn_from_lit(l: Lit) -> DynValue:
    v = l.value
    if l.kind == "string" and isinstance(v, str):
        v = v.encode("utf-8")
    return DynValue(l.kind, v)


_NUMERIC = ("int", "float")


def dyn_binary(op: BinOp, a: DynValue, b: DynValue) -> DynValue:
    if a.tag not in _NUMERIC or b.tag not in _NUMERIC:
        raise TypeMismatch(f"{op.value} on {a.tag}/{b.tag}")
    if op is BinOp.ADD:
        v = a.value + b.value
    elif op is BinOp.SUB:
        v = a.value - b.value
    else:
        v = a.value * b.value
    tag = "float" if "float" in (a.tag, b.tag) else "int"
    return DynValue(tag, v)


def dyn_compare(op: CmpOp, a: DynValue, b: DynValue) -> bool:
    if a.tag in _NUMERIC and b.tag in _NUMERIC:
        pass
    elif a.tag != b.tag:
        raise TypeMismatch(f"{op.value} on {a.tag}/{b.tag}")
    elif a.tag == "string" and op is not CmpOp.EQ:
        raise TypeMismatch("only EQ is defined on strings")
    if op is CmpOp.EQ:
        return a.value == b.value
    if op is CmpOp.LT:
        return a.value < b.value
    if op is CmpOp.GT:
        return a.value > b.value
    if op is CmpOp.LE:
        return a.value <= b.value
    return a.value >= b.value


class _RowContext:
    """Per-table column accessors; a row is addressed by (table, index)."""

    def __init__(self, db: Database, tables):
        self._cols: dict[tuple[str, str], tuple[str, list]] = {}
        self._db = db
        self._tables = list(tables)

    def _col(self, c: Col):
        key = (c.table, c.name)
        if key not in self._cols:
            ctype = self._db.schema(c.table).column_type(c.name)
            view = self._db.column_view(c.table, c.name)
            if ctype is ColumnType.STRING:
                values = view.to_list()
            else:
                values = view.tolist()
            tag = {
                ColumnType.INT32: "int",
                ColumnType.FLOAT64: "float",
                ColumnType.DATE32: "date",
                ColumnType.STRING: "string",
            }[ctype]
            self._cols[key] = (tag, values)
        return self._cols[key]

    def fetch(self, c: Col, rows: dict[str, int]) -> DynValue:
        tag, values = self._col(c)
        return DynValue(tag, values[rows[c.table]])


def eval_scalar(expr, ctx: _RowContext, rows: dict[str, int]) -> DynValue:
    if isinstance(expr, Col):
        return ctx.fetch(expr, rows)
    if isinstance(expr, Lit):
        return _dyn_from_lit(expr)
    left = eval_scalar(expr.left, ctx, rows)
    right = eval_scalar(expr.right, ctx, rows)
    return dyn_binary(expr.op, left, right)


def eval_predicate(p: Predicate, ctx: _RowContext, rows: dict[str, int]) -> bool:
    lhs = ctx.fetch(p.lhs, rows)
    if p.op is CmpOp.BETWEEN:
        lo = _dyn_from_lit(p.lo)
        hi = _dyn_from_lit(p.hi)
        return dyn_compare(CmpOp.GE, lhs, lo) and dyn_compare(CmpOp.LE, lhs, hi)
    rhs = (
        ctx.fetch(p.rhs, rows)
        if isinstance(p.rhs, Col)
        else _dyn_from_lit(p.rhs)
    )
    return dyn_compare(p.op, lhs, rhs)


class _Accumulator:
    """One row's worth of aggregate state, updated row at a time."""

    def __init__(self, specs):
        self.specs = specs
        self.counts = [0] * len(specs)
        self.sums = [0.0] * len(specs)

    def update(self, ctx, rows):
        for i, a in enumerate(self.specs):
            self.counts[i] += 1
            if a.func is not AggFunc.COUNT:
                v = eval_scalar(a.expr, ctx, rows)
                if v.tag not in _NUMERIC:
                    raise TypeMismatch(f"{a.func.value} over {v.tag}")
                self.sums[i] += float(v.value)

    def results(self):
        out = []
        for i, a in enumerate(self.specs):
            if a.func is AggFunc.COUNT:
                out.append(self.counts[i])
            elif a.func is AggFunc.SUM:
                out.append(self.sums[i])
            else:
                if self.counts[i] == 0:
                    raise EmptyAggregate("AVG over zero rows")
                out.append(self.sums[i] / self.counts[i])
        return out


def _matching_rows(plan: LogicalPlan, ctx: _RowContext, db: Database):
    """Yield row-index maps for every qualifying (joined) row; also
    reports the join mode used."""
    preds_by_table: dict[str, list[Predicate]] = {t: [] for t in plan.sources}
    for p in plan.filters:
        preds_by_table[p.lhs.table].append(p)

    def passes(table, i):
        rows = {table: i}
        return all(eval_predicate(p, ctx, rows) for p in preds_by_table[table])

    if len(plan.sources) == 1:
        t = plan.sources[0]
        for i in range(db.row_count(t)):
            if passes(t, i):
                yield {t: i}
        return

    t0, t1 = plan.sources
    jk0, jk1 = plan.join_key
    n0, n1 = db.row_count(t0), db.row_count(t1)
    if n0 <= NESTED_LOOP_MAX_ROWS and n1 <= NESTED_LOOP_MAX_ROWS:
        ctx.join_mode = "nested-loop"
        for i in range(n0):
            if not passes(t0, i):
                continue
            k0 = ctx.fetch(jk0, {t0: i})
            for j in range(n1):
                if not passes(t1, j):
                    continue
                if dyn_compare(CmpOp.EQ, k0, ctx.fetch(jk1, {t1: j})):
                    yield {t0: i, t1: j}
        return

    # large inputs: plain associative-map join, independent of the
    # compiled backend's open-addressing kernels
    ctx.join_mode = "hash"
    index: dict[object, list[int]] = {}
    for j in range(n1):
        if passes(t1, j):
            index.setdefault(ctx.fetch(jk1, {t1: j}).value, []).append(j)
    for i in range(n0):
        if not passes(t0, i):
            continue
        for j in index.get(ctx.fetch(jk0, {t0: i}).value, ()):
            yield {t0: i, t1: j}


def _sort_and_limit(plan: LogicalPlan, rows: list[tuple]):
    """Full-sort order-by/limit (the oracle counterpart of bounded top-k)."""
    if plan.order_by is None:
        return rows
    aliases = [o.alias for o in plan.output]
    key_idx = aliases.index(plan.order_by[0])
    desc = plan.order_by[1] is Direction.DESC

    def sort_key(row):
        v = row[key_idx]
        rest = tuple(x for i, x in enumerate(row) if i != key_idx)
        return (-v if desc else v, rest)

    return sorted(rows, key=sort_key)[: plan.limit]


def _to_result(plan: LogicalPlan, rows: list[tuple], join_mode=None) -> ResultTable:
    rows = _sort_and_limit(plan, rows)
    cols = []
    for i, o in enumerate(plan.output):
        vals = [r[i] for r in rows]
        if o.ctype is ColumnType.STRING:
            cols.append(vals)
        else:
            cols.append(np.asarray(vals, dtype=o.ctype.dtype))
    stats = {"join_mode": join_mode} if join_mode else {}
    return ResultTable(plan.out_schema, cols, len(rows), stats)


def eval_plan(plan: LogicalPlan, db: Database) -> ResultTable:
    ctx = _RowContext(db, plan.sources)
    ctx.join_mode = None

    if not plan.group_keys and plan.aggregates:
        acc = _Accumulator(plan.aggregates)
        for rows in _matching_rows(plan, ctx, db):
            acc.update(ctx, rows)
        values = acc.results()
        out_row = tuple(values[o.agg_index] for o in plan.output)
        return _to_result(plan, [out_row], ctx.join_mode)

    if plan.group_keys:
        groups: dict[tuple, _Accumulator] = {}
        key_values: dict[tuple, dict] = {}
        for rows in _matching_rows(plan, ctx, db):
            key = tuple(ctx.fetch(k, rows).value for k in plan.group_keys)
            if key not in groups:
                groups[key] = _Accumulator(plan.aggregates)
                key_values[key] = {
                    k: ctx.fetch(k, rows).value for k in plan.group_keys
                }
            groups[key].update(ctx, rows)
        out_rows = []
        for key, acc in groups.items():
            values = acc.results()
            row = []
            for o in plan.output:
                if o.agg_index is not None:
                    row.append(values[o.agg_index])
                else:
                    row.append(key_values[key][o.group_key])
            out_rows.append(tuple(row))
        return _to_result(plan, out_rows, ctx.join_mode)

    # plain projection
    out_rows = []
    for rows in _matching_rows(plan, ctx, db):
        row = []
        for o in plan.output:
            v = eval_scalar(o.expr, ctx, rows)
            row.append(v.value)
        out_rows.append(tuple(row))
    return _to_result(plan, out_rows, ctx.join_mode)
