"""Plan-specialized execution kernels.

``compile_plan`` lowers a LogicalPlan to an ExecutableKernel through one
fixed template per plan class.  All column locations, types, and
operators are resolved at compile time into monomorphized closures over
typed column views plus the compiled join/group kernels; the per-row
inner loops contain no type-tag branching and no operator lookup.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import DatabaseNotSealed, EmptyAggregate, EngineError
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
from .topk import topk_indices

_BIN_FUNCS = {BinOp.ADD: np.add, BinOp.SUB: np.subtract, BinOp.MUL: np.multiply}
_CMP_FUNCS = {
    CmpOp.EQ: np.equal,
    CmpOp.LT: np.less,
    CmpOp.GT: np.greater,
    CmpOp.LE: np.less_equal,
    CmpOp.GE: np.greater_equal,
}


@dataclass
class ExecutableKernel:
    plan_class: PlanClass
    compile_time: float  # seconds
    _run: Callable[[], ResultTable]
    _db: Database


def compile_plan(plan: LogicalPlan, db: Database) -> ExecutableKernel:
    if not db.sealed:
        raise DatabaseNotSealed("cannot compile against an unsealed database")
    t0 = time.perf_counter()
    run = _Compiler(plan, db).build()
    compile_time = time.perf_counter() - t0
    return ExecutableKernel(plan.plan_class, compile_time, run, db)


def execute(kernel: ExecutableKernel, db: Database) -> tuple[ResultTable, float]:
    if db is not kernel._db:
        raise EngineError("kernel was compiled against a different database")
    t0 = time.perf_counter()
    result = kernel._run()
    return result, time.perf_counter() - t0


# ----------------------------------------------------------------- helpers

def _gather(arr, sel):
    return arr if sel is None else arr[sel]


def _encode_keys(arrays, n: int) -> np.ndarray:
    """Fixed-width binary concatenation of the key columns, row-major."""
    width = sum(a.dtype.itemsize for a in arrays)
    kb = np.empty((n, width), dtype=np.uint8)
    off = 0
    for a in arrays:
        w = a.dtype.itemsize
        a = np.ascontiguousarray(a)
        kb[:, off : off + w] = a.view(np.uint8).reshape(n, w)
        off += w
    return kb


class _Compiler:
    def __init__(self, plan: LogicalPlan, db: Database):
        self.plan = plan
        self.db = db
        self._bound: dict[Col, np.ndarray] = {}

    # -------------------------------------------------------- binding
    def bind(self, c: Col) -> np.ndarray:
        if c not in self._bound:
            view = self.db.column_view(c.table, c.name)
            if not isinstance(view, np.ndarray):  # STRING
                arr = np.empty(len(view), dtype=object)
                arr[:] = view.to_list()
                view = arr
            self._bound[c] = view
        return self._bound[c]

    def static_type(self, e) -> ColumnType:
        if isinstance(e, Col):
            return self.db.schema(e.table).column_type(e.name)
        if isinstance(e, Lit):
            return {
                "int": ColumnType.INT32,
                "float": ColumnType.FLOAT64,
                "date": ColumnType.DATE32,
                "string": ColumnType.STRING,
            }[e.kind]
        lt = self.static_type(e.left)
        rt = self.static_type(e.right)
        if lt is ColumnType.FLOAT64 or rt is ColumnType.FLOAT64:
            return ColumnType.FLOAT64
        return ColumnType.INT32

    # --------------------------------------------------- expressions
    def compile_expr(self, e) -> Callable:
        """Closure (selmap) -> numpy array of values for the selected rows
        (or a scalar when the expression is constant)."""
        if isinstance(e, Col):
            arr = self.bind(e)
            table = e.table
            return lambda sel: _gather(arr, sel.get(table))
        if isinstance(e, Lit):
            v = e.value
            if e.kind == "string":
                v = v.encode("utf-8") if isinstance(v, str) else v
            return lambda sel: v
        # binary arithmetic: operator and operand casts fixed here
        op = _BIN_FUNCS[e.op]
        as_float = self.static_type(e) is ColumnType.FLOAT64
        lf = self._cast(self.compile_expr(e.left), as_float)
        rf = self._cast(self.compile_expr(e.right), as_float)
        return lambda sel: op(lf(sel), rf(sel))

    @staticmethod
    def _cast(f: Callable, as_float: bool) -> Callable:
        dtype = np.float64 if as_float else np.int64

        def g(sel):
            v = f(sel)
            if isinstance(v, np.ndarray):
                return v.astype(dtype, copy=False)
            return float(v) if as_float else int(v)

        return g

    def compile_predicate(self, p: Predicate) -> Callable:
        """Closure (selmap) -> boolean mask over the predicate's table."""
        lhs = self.compile_expr(p.lhs)
        if p.op is CmpOp.BETWEEN:
            lo = self.compile_expr(p.lo)
            hi = self.compile_expr(p.hi)
            return lambda sel: (lhs(sel) >= lo(sel)) & (lhs(sel) <= hi(sel))
        cmp = _CMP_FUNCS[p.op]
        rhs = self.compile_expr(p.rhs)
        return lambda sel: cmp(lhs(sel), rhs(sel))

    def table_mask(self, table: str) -> Callable | None:
        """Fused conjunction of this table's filters, or None."""
        preds = [
            self.compile_predicate(p)
            for p in self.plan.filters
            if p.lhs.table == table
        ]
        if not preds:
            return None

        def run(selmap):
            m = preds[0](selmap)
            for p in preds[1:]:
                m = m & p(selmap)
            return m

        return run

    # ---------------------------------------------------- aggregates
    def compile_aggregates(self) -> Callable:
        """Closure (selmap, n_rows) -> list of per-aggregate scalars."""
        parts = []
        for a in self.plan.aggregates:
            if a.func is AggFunc.COUNT:
                parts.append(("count", None))
            else:
                parts.append((a.func.value, self._cast(self.compile_expr(a.expr), True)))

        def run(selmap, n):
            out = []
            for kind, f in parts:
                if kind == "count":
                    out.append(n)
                    continue
                v = f(selmap)
                total = float(np.sum(v)) if isinstance(v, np.ndarray) else v * n
                if kind == "sum":
                    out.append(total)
                else:
                    if n == 0:
                        raise EmptyAggregate("AVG over zero rows")
                    out.append(total / n)
            return out

        return run

    def compile_group_aggregates(self) -> Callable:
        """Closure (selmap, gid, n_rows, n_groups) -> per-aggregate arrays."""
        parts = []
        for a in self.plan.aggregates:
            if a.func is AggFunc.COUNT:
                parts.append(("count", None))
            else:
                parts.append((a.func.value, self._cast(self.compile_expr(a.expr), True)))

        def run(selmap, gid, n, g):
            counts = np.bincount(gid, minlength=g)
            out = []
            for kind, f in parts:
                if kind == "count":
                    out.append(counts)
                    continue
                v = f(selmap)
                if not isinstance(v, np.ndarray):
                    v = np.full(n, v, dtype=np.float64)
                sums = np.bincount(gid, weights=v, minlength=g)
                out.append(sums if kind == "sum" else sums / counts)
            return out

        return run

    # ------------------------------------------------------- outputs
    def _out_array(self, values, ctype: ColumnType):
        if ctype is ColumnType.STRING:
            return list(values)
        return np.asarray(values).astype(ctype.dtype)

    def finalize(self, selmap, agg_values, key_arrays) -> ResultTable:
        """Assemble output columns in declared order, then apply top-k."""
        plan = self.plan
        cols = []
        for o in plan.output:
            if o.agg_index is not None:
                v = agg_values[o.agg_index]
                v = v if isinstance(v, np.ndarray) else np.asarray([v])
                cols.append(self._out_array(v, o.ctype))
            elif o.group_key is not None:
                cols.append(self._out_array(key_arrays[o.group_key], o.ctype))
            else:
                f = self.compile_expr(o.expr)
                v = f(selmap)
                n = _selmap_len(selmap)
                if not isinstance(v, np.ndarray) and o.ctype is not ColumnType.STRING:
                    v = np.full(n, v)
                elif not isinstance(v, np.ndarray):
                    v = [v] * n
                cols.append(self._out_array(v, o.ctype))
        n = len(cols[0]) if cols else 0
        if plan.order_by is not None:
            aliases = [o.alias for o in plan.output]
            key_idx = aliases.index(plan.order_by[0])
            pycols = [c if isinstance(c, list) else c.tolist() for c in cols]
            idx = topk_indices(pycols, key_idx, plan.order_by[1] is Direction.DESC, plan.limit)
            cols = [
                [c[i] for i in idx] if isinstance(c, list) else c[np.asarray(idx, dtype=np.int64)]
                for c in cols
            ]
            cols = [
                c if isinstance(c, list) else c for c in cols
            ]
            n = len(idx)
        return ResultTable([(o.alias, o.ctype) for o in plan.output], cols, n)

    # ------------------------------------------------------ templates
    def build(self) -> Callable[[], ResultTable]:
        pc = self.plan.plan_class
        if pc is PlanClass.FILTER:
            return self._build_filter()
        if pc is PlanClass.JOIN:
            return self._build_join()
        if pc is PlanClass.GROUPBY:
            return self._build_groupby()
        return self._build_join_groupby()

    def _selection(self):
        """(selmap, n_selected) over the single source after filters."""
        table = self.plan.sources[0]
        n = self.db.row_count(table)
        mask_fn = self.table_mask(table)

        def run():
            if mask_fn is None:
                return {table: None}, n
            sel = np.nonzero(mask_fn({table: None}))[0]
            return {table: sel}, len(sel)

        return run

    def _build_filter(self):
        select = self._selection()
        if self.plan.aggregates:
            aggs = self.compile_aggregates()

            def run():
                selmap, n = select()
                return self.finalize(selmap, aggs(selmap, n), {})

        else:

            def run():
                selmap, n = select()
                if selmap[self.plan.sources[0]] is None:
                    # concrete indices so scalar outputs know the length
                    selmap = {self.plan.sources[0]: np.arange(n, dtype=np.int64)}
                return self.finalize(selmap, [], {})

        return run

    def _join_pairs(self):
        """Closure () -> selmap of matched row indices for both sources."""
        t0, t1 = self.plan.sources
        jk0, jk1 = self.plan.join_key
        k0, k1 = self.bind(jk0), self.bind(jk1)
        m0, m1 = self.table_mask(t0), self.table_mask(t1)
        # build over the smaller relation by row count; ties go to the
        # table that appears first in the catalog
        order = self.db.table_names()
        n0, n1 = self.db.row_count(t0), self.db.row_count(t1)
        if n0 != n1:
            build_first = n0 < n1
        else:
            build_first = order.index(t0) <= order.index(t1)

        def run():
            sel0 = None if m0 is None else np.nonzero(m0({t0: None}))[0]
            sel1 = None if m1 is None else np.nonzero(m1({t1: None}))[0]
            keys0, keys1 = _gather(k0, sel0), _gather(k1, sel1)
            if build_first:
                bi, pi = kernels.join_i32(keys0, keys1)
                r0 = bi if sel0 is None else sel0[bi]
                r1 = pi if sel1 is None else sel1[pi]
            else:
                bi, pi = kernels.join_i32(keys1, keys0)
                r1 = bi if sel1 is None else sel1[bi]
                r0 = pi if sel0 is None else sel0[pi]
            return {t0: r0, t1: r1}

        return run

    def _build_join(self):
        pairs = self._join_pairs()
        if self.plan.aggregates:
            aggs = self.compile_aggregates()

            def run():
                selmap = pairs()
                n = len(selmap[self.plan.sources[0]])
                return self.finalize(selmap, aggs(selmap, n), {})

        else:

            def run():
                return self.finalize(pairs(), [], {})

        return run

    def _grouped(self, selmap_fn):
        key_cols = list(self.plan.group_keys)
        key_bound = [self.bind(c) for c in key_cols]
        aggs = self.compile_group_aggregates()

        def run():
            selmap = selmap_fn()
            n = _selmap_len(selmap)
            arrays = []
            for c, arr in zip(key_cols, key_bound):
                a = _gather(arr, selmap.get(c.table))
                if a.dtype == np.float64:
                    a = a + 0.0  # normalize -0.0 so byte keys match value equality
                arrays.append(np.ascontiguousarray(a))
            gid, rep = kernels.group_rows(_encode_keys(arrays, n))
            g = len(rep)
            agg_values = aggs(selmap, gid, n, g)
            key_arrays = {c: a[rep] for c, a in zip(key_cols, arrays)}
            return self.finalize(selmap, agg_values, key_arrays)

        return run

    def _build_groupby(self):
        select = self._selection()

        def selmap_fn():
            selmap, n = select()
            table = self.plan.sources[0]
            if selmap[table] is None:
                selmap = {table: np.arange(n, dtype=np.int64)}
            return selmap

        return self._grouped(selmap_fn)

    def _build_join_groupby(self):
        return self._grouped(self._join_pairs())


def _selmap_len(selmap) -> int:
    for v in selmap.values():
        if v is not None:
            return len(v)
    raise EngineError("selection length unavailable")
