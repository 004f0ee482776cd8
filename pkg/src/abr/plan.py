"""Fluent query builder and the logical plan it lowers to.

A query is assembled by method chaining (select().field(...).from_(...)
.where(...)...), validated against a catalog of table schemas by
``to_plan``, and classified into one of four fixed physical plan classes.
Plans serialize to a stable JSON descriptor used by the CLI's
``--plan-file`` option and the browser boundary.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union

from .errors import (
    EmptyProjection,
    MalformedDate,
    MalformedPlan,
    TypeMismatch,
    UnknownColumn,
    UnknownTable,
    UnsupportedShape,
)
from .store import ColumnType, TableSchema

_EPOCH = datetime.date(1970, 1, 1)


def iso_to_days(text: str) -> int:
    try:
        d = datetime.date.fromisoformat(text)
    except (ValueError, TypeError) as e:
        raise MalformedDate(str(e)) from None
    return (d - _EPOCH).days


def days_to_iso(days: int) -> str:
    return (_EPOCH + datetime.timedelta(days=int(days))).isoformat()


# --------------------------------------------------------------- expressions

class BinOp(Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"


class CmpOp(Enum):
    EQ = "eq"
    LT = "lt"
    GT = "gt"
    LE = "le"
    GE = "ge"
    BETWEEN = "between"


class AggFunc(Enum):
    COUNT = "count"
    SUM = "sum"
    AVG = "avg"


class Direction(Enum):
    ASC = "asc"
    DESC = "desc"


class PlanClass(Enum):
    FILTER = "FILTER"
    JOIN = "JOIN"
    GROUPBY = "GROUPBY"
    JOIN_GROUPBY_TOPK = "JOIN_GROUPBY_TOPK"


@dataclass(frozen=True)
class Col:
    name: str
    table: Optional[str] = None


@dataclass(frozen=True)
class Lit:
    kind: str  # int | float | date | string
    value: Union[int, float, str, bytes]


@dataclass(frozen=True)
class Bin:
    op: BinOp
    left: "Expr"
    right: "Expr"


Expr = Union[Col, Lit, Bin]


def col(name: str, table: str = None) -> Col:
    if "." in name and table is None:
        table, name = name.split(".", 1)
    return Col(name, table)


def lit(value) -> Lit:
    if isinstance(value, Lit):
        return value
    if isinstance(value, bool):
        raise TypeMismatch("boolean literals are not supported")
    if isinstance(value, int):
        return Lit("int", value)
    if isinstance(value, float):
        return Lit("float", value)
    if isinstance(value, str):
        return Lit("string", value)
    if isinstance(value, bytes):
        return Lit("string", value.decode("utf-8"))
    raise TypeMismatch(f"unsupported literal {value!r}")


def date(text: str) -> Lit:
    """Date literal from 'YYYY-MM-DD'; converted to day numbers at plan time."""
    iso_to_days(text)  # validate eagerly
    return Lit("date", text)


def _as_expr(x) -> Expr:
    if isinstance(x, (Col, Lit, Bin)):
        return x
    if isinstance(x, str):
        return col(x)
    return lit(x)


def add(left, right) -> Bin:
    return Bin(BinOp.ADD, _as_expr(left), _as_expr(right))


def sub(left, right) -> Bin:
    return Bin(BinOp.SUB, _as_expr(left), _as_expr(right))


def mul(left, right) -> Bin:
    return Bin(BinOp.MUL, _as_expr(left), _as_expr(right))


# --------------------------------------------------------------- predicates

@dataclass(frozen=True)
class Predicate:
    op: CmpOp
    lhs: Col
    rhs: Optional[Expr] = None          # Lit, or Col for join conditions
    lo: Optional[Lit] = None            # BETWEEN bounds, inclusive
    hi: Optional[Lit] = None


def _as_col(x) -> Col:
    if isinstance(x, Col):
        return x
    if isinstance(x, str):
        return col(x)
    raise TypeMismatch(f"expected a column reference, got {x!r}")


def _cmp(op: CmpOp, lhs, rhs) -> Predicate:
    rhs = rhs if isinstance(rhs, (Col, Lit)) else lit(rhs)
    return Predicate(op, _as_col(lhs), rhs)


def eq(lhs, rhs) -> Predicate:
    return _cmp(CmpOp.EQ, lhs, rhs)


def lt(lhs, rhs) -> Predicate:
    return _cmp(CmpOp.LT, lhs, rhs)


def gt(lhs, rhs) -> Predicate:
    return _cmp(CmpOp.GT, lhs, rhs)


def le(lhs, rhs) -> Predicate:
    return _cmp(CmpOp.LE, lhs, rhs)


def ge(lhs, rhs) -> Predicate:
    return _cmp(CmpOp.GE, lhs, rhs)


def between(lhs, lo, hi) -> Predicate:
    lo = lo if isinstance(lo, Lit) else lit(lo)
    hi = hi if isinstance(hi, Lit) else lit(hi)
    return Predicate(CmpOp.BETWEEN, _as_col(lhs), None, lo, hi)


# --------------------------------------------------------------- aggregates

@dataclass(frozen=True)
class AggSpec:
    func: AggFunc
    expr: Optional[Expr]  # None for COUNT(*)
    alias: str


def count(alias: str = "count") -> AggSpec:
    return AggSpec(AggFunc.COUNT, None, alias)


def sum_(expr, alias: str) -> AggSpec:
    return AggSpec(AggFunc.SUM, _as_expr(expr), alias)


def avg(expr, alias: str) -> AggSpec:
    return AggSpec(AggFunc.AVG, _as_expr(expr), alias)


# ------------------------------------------------------------ logical plan

@dataclass(frozen=True)
class OutputCol:
    alias: str
    ctype: ColumnType
    # exactly one of these is set
    group_key: Optional[Col] = None
    agg_index: Optional[int] = None
    expr: Optional[Expr] = None


@dataclass(frozen=True)
class LogicalPlan:
    sources: tuple[str, ...]
    join_key: Optional[tuple[Col, Col]]  # (column of sources[0], of sources[1])
    filters: tuple[Predicate, ...]       # non-join, lhs tables resolved
    group_keys: tuple[Col, ...]
    aggregates: tuple[AggSpec, ...]
    projections: tuple[tuple[Expr, str], ...]  # raw field list, output order
    order_by: Optional[tuple[str, Direction]]  # output alias
    limit: Optional[int]
    plan_class: PlanClass
    output: tuple[OutputCol, ...]

    @property
    def out_schema(self) -> list[tuple[str, ColumnType]]:
        return [(o.alias, o.ctype) for o in self.output]


# ---------------------------------------------------------------- builder

class QueryBuilder:
    """Accumulates clauses; nothing is validated until to_plan."""

    def __init__(self):
        self._fields: list[tuple[Union[Expr, AggSpec], Optional[str]]] = []
        self._sources: list[str] = []
        self._filters: list[Predicate] = []
        self._group_keys: list[Col] = []
        self._order: Optional[tuple[str, Direction]] = None
        self._limit: Optional[int] = None

    def field(self, item, alias: str = None) -> "QueryBuilder":
        if isinstance(item, AggSpec):
            if alias is not None:
                item = replace(item, alias=alias)
            self._fields.append((item, item.alias))
        else:
            self._fields.append((_as_expr(item), alias))
        return self

    def from_(self, table: str) -> "QueryBuilder":
        self._sources.append(table)
        return self

    def where(self, pred: Predicate) -> "QueryBuilder":
        self._filters.append(pred)
        return self

    def group_by(self, *cols) -> "QueryBuilder":
        self._group_keys.extend(_as_col(c) for c in cols)
        return self

    def order_by(self, key: str, direction: str = "asc") -> "QueryBuilder":
        self._order = (key, Direction(direction.lower()))
        return self

    def limit(self, n: int) -> "QueryBuilder":
        if n < 1:
            raise UnsupportedShape("limit must be positive")
        self._limit = n
        return self

    def to_plan(self, catalog: dict[str, TableSchema]) -> LogicalPlan:
        return _lower(self, catalog)


def select() -> QueryBuilder:
    return QueryBuilder()


# --------------------------------------------------------------- lowering

def _default_alias(e: Expr, i: int) -> str:
    if isinstance(e, Col):
        return e.name
    return f"expr_{i}"


class _Resolver:
    def __init__(self, sources: list[str], catalog: dict[str, TableSchema]):
        self.sources = sources
        self.catalog = catalog

    def resolve(self, c: Col) -> Col:
        """Fill in the owning table; raises on unknown/ambiguous names."""
        if c.table is not None:
            if c.table not in self.catalog or c.table not in self.sources:
                raise UnknownTable(c.table)
            if not self.catalog[c.table].has_column(c.name):
                raise UnknownColumn(f"{c.table}.{c.name}")
            return c
        hits = [t for t in self.sources if self.catalog[t].has_column(c.name)]
        if not hits:
            raise UnknownColumn(c.name)
        if len(hits) > 1:
            raise UnknownColumn(f"{c.name} is ambiguous across {hits}")
        return Col(c.name, hits[0])

    def ctype(self, c: Col) -> ColumnType:
        c = self.resolve(c)
        return self.catalog[c.table].column_type(c.name)


_LIT_TYPE = {
    "int": ColumnType.INT32,
    "float": ColumnType.FLOAT64,
    "date": ColumnType.DATE32,
    "string": ColumnType.STRING,
}


def _expr_type(e: Expr, res: _Resolver) -> ColumnType:
    if isinstance(e, Col):
        return res.ctype(e)
    if isinstance(e, Lit):
        return _LIT_TYPE[e.kind]
    lt_, rt = _expr_type(e.left, res), _expr_type(e.right, res)
    if not (lt_.is_numeric and rt.is_numeric):
        raise TypeMismatch(f"{e.op.value} requires numeric operands, got {lt_.value}/{rt.value}")
    if lt_ is ColumnType.FLOAT64 or rt is ColumnType.FLOAT64:
        return ColumnType.FLOAT64
    return ColumnType.INT32


def _resolve_expr(e: Expr, res: _Resolver) -> Expr:
    """Qualify column refs and convert date literals to day numbers."""
    if isinstance(e, Col):
        return res.resolve(e)
    if isinstance(e, Lit):
        if e.kind == "date" and isinstance(e.value, str):
            return Lit("date", iso_to_days(e.value))
        return e
    return Bin(e.op, _resolve_expr(e.left, res), _resolve_expr(e.right, res))


def _comparable(a: ColumnType, b: ColumnType) -> bool:
    if a.is_numeric and b.is_numeric:
        return True
    return a is b


def _check_predicate(p: Predicate, res: _Resolver) -> Predicate:
    lhs = res.resolve(p.lhs)
    lt_ = res.ctype(lhs)
    if p.op is CmpOp.BETWEEN:
        lo = _resolve_expr(p.lo, res)
        hi = _resolve_expr(p.hi, res)
        for b in (lo, hi):
            if not _comparable(lt_, _LIT_TYPE[b.kind]):
                raise TypeMismatch(f"BETWEEN bound {b.kind} vs column {lt_.value}")
        if lt_ is ColumnType.STRING:
            raise TypeMismatch("BETWEEN is not defined on strings")
        return Predicate(CmpOp.BETWEEN, lhs, None, lo, hi)
    rhs = _resolve_expr(p.rhs, res)
    rt = res.ctype(rhs) if isinstance(rhs, Col) else _LIT_TYPE[rhs.kind]
    if not _comparable(lt_, rt):
        raise TypeMismatch(f"{p.op.value}: {lt_.value} vs {rt.value}")
    if lt_ is ColumnType.STRING and p.op is not CmpOp.EQ:
        raise TypeMismatch("only EQ is defined on strings")
    return Predicate(p.op, lhs, rhs)


def _lower(b: QueryBuilder, catalog: dict[str, TableSchema]) -> LogicalPlan:
    if not b._fields:
        raise EmptyProjection("query has no output fields")
    sources = list(b._sources)
    if not sources:
        raise UnsupportedShape("query has no FROM clause")
    if len(sources) > 2:
        raise UnsupportedShape(f"{len(sources)} sources; at most 2 supported")
    if len(set(sources)) != len(sources):
        raise UnsupportedShape("self-joins are not supported")
    for t in sources:
        if t not in catalog:
            raise UnknownTable(t)
    res = _Resolver(sources, catalog)

    # split WHERE into the join condition and per-row filters
    join_key = None
    filters: list[Predicate] = []
    for p in b._filters:
        if p.op is CmpOp.EQ and isinstance(p.rhs, Col):
            lhs, rhs = res.resolve(p.lhs), res.resolve(p.rhs)
            if lhs.table != rhs.table:
                if len(sources) != 2:
                    raise UnsupportedShape("join condition in a single-table query")
                if join_key is not None:
                    raise UnsupportedShape("more than one join condition")
                if res.ctype(lhs) is not res.ctype(rhs):
                    raise TypeMismatch("join key types differ")
                if res.ctype(lhs) not in (ColumnType.INT32, ColumnType.DATE32):
                    raise UnsupportedShape("join keys must be INT32 or DATE32")
                if lhs.table != sources[0]:
                    lhs, rhs = rhs, lhs
                join_key = (lhs, rhs)
                continue
        filters.append(_check_predicate(p, res))
    if len(sources) == 2 and join_key is None:
        raise UnsupportedShape("two sources but no equi-join condition")

    group_keys = tuple(res.resolve(c) for c in b._group_keys)
    for k in group_keys:
        if res.ctype(k) is ColumnType.STRING:
            raise UnsupportedShape("GROUP BY on STRING columns is not supported")

    # collect aggregates and projections in declared field order
    aggregates: list[AggSpec] = []
    projections: list[tuple[Expr, str]] = []
    output: list[OutputCol] = []
    agg_aliases: dict[str, int] = {}
    for i, (item, alias) in enumerate(b._fields):
        if isinstance(item, AggSpec):
            expr = _resolve_expr(item.expr, res) if item.expr is not None else None
            if item.func is not AggFunc.COUNT:
                et = _expr_type(expr, res)
                if not et.is_numeric:
                    raise TypeMismatch(f"{item.func.value} requires a numeric expression")
            spec = AggSpec(item.func, expr, item.alias)
            agg_aliases[item.alias] = len(aggregates)
            aggregates.append(spec)
            out_t = ColumnType.INT32 if item.func is AggFunc.COUNT else ColumnType.FLOAT64
            projections.append((Col(item.alias), item.alias))
            output.append(OutputCol(item.alias, out_t, agg_index=agg_aliases[item.alias]))
        else:
            name = alias or _default_alias(item, i)
            if isinstance(item, Col) and item.name in agg_aliases and item.table is None:
                idx = agg_aliases[item.name]
                out_t = (ColumnType.INT32 if aggregates[idx].func is AggFunc.COUNT
                         else ColumnType.FLOAT64)
                projections.append((Col(item.name), name))
                output.append(OutputCol(name, out_t, agg_index=idx))
                continue
            expr = _resolve_expr(item, res)
            projections.append((expr, name))
            if group_keys:
                if not (isinstance(expr, Col) and expr in group_keys):
                    raise UnsupportedShape(
                        f"projection {name!r} is neither a group key nor an aggregate"
                    )
                output.append(OutputCol(name, res.ctype(expr), group_key=expr))
            else:
                output.append(OutputCol(name, _expr_type(expr, res), expr=expr))
    if aggregates and not group_keys:
        if any(o.agg_index is None for o in output):
            raise UnsupportedShape("cannot mix aggregates and plain columns without GROUP BY")
    aliases = [o.alias for o in output]
    if len(set(aliases)) != len(aliases):
        raise UnsupportedShape(f"duplicate output aliases: {aliases}")

    # order by / limit
    order = None
    if b._order is not None:
        key, direction = b._order
        if key not in aliases:
            raise UnknownColumn(f"ORDER BY key {key!r} is not an output column")
        if b._limit is None:
            raise UnsupportedShape("ORDER BY requires LIMIT (top-k only)")
        order = (key, direction)

    if len(sources) == 1:
        plan_class = PlanClass.GROUPBY if group_keys else PlanClass.FILTER
    else:
        plan_class = PlanClass.JOIN_GROUPBY_TOPK if group_keys else PlanClass.JOIN

    return LogicalPlan(
        sources=tuple(sources),
        join_key=join_key,
        filters=tuple(filters),
        group_keys=group_keys,
        aggregates=tuple(aggregates),
        projections=tuple(projections),
        order_by=order,
        limit=b._limit,
        plan_class=plan_class,
        output=tuple(output),
    )


# ------------------------------------------------------------- JSON serde

def _expr_to_json(e: Expr):
    if isinstance(e, Col):
        d = {"col": e.name}
        if e.table:
            d["table"] = e.table
        return d
    if isinstance(e, Lit):
        v = days_to_iso(e.value) if e.kind == "date" and isinstance(e.value, int) else e.value
        return {"lit": v, "kind": e.kind}
    return {
        "op": e.op.value,
        "left": _expr_to_json(e.left),
        "right": _expr_to_json(e.right),
    }


def _pred_to_json(p: Predicate):
    d = {"op": p.op.value, "lhs": _expr_to_json(p.lhs)}
    if p.op is CmpOp.BETWEEN:
        d["lo"] = _expr_to_json(p.lo)
        d["hi"] = _expr_to_json(p.hi)
    else:
        d["rhs"] = _expr_to_json(p.rhs)
    return d


def plan_to_json(plan: LogicalPlan) -> dict:
    """Stable descriptor shape shared with the CLI and the browser boundary."""
    return {
        "sources": list(plan.sources),
        "joinKey": (
            [_expr_to_json(plan.join_key[0]), _expr_to_json(plan.join_key[1])]
            if plan.join_key
            else None
        ),
        "filters": [_pred_to_json(p) for p in plan.filters],
        "groupKeys": [_expr_to_json(k) for k in plan.group_keys],
        "aggregates": [
            {
                "func": a.func.value,
                "expr": _expr_to_json(a.expr) if a.expr is not None else None,
                "alias": a.alias,
            }
            for a in plan.aggregates
        ],
        "projections": [
            {"expr": _expr_to_json(e), "alias": alias} for e, alias in plan.projections
        ],
        "orderBy": (
            {"key": plan.order_by[0], "dir": plan.order_by[1].value}
            if plan.order_by
            else None
        ),
        "limit": plan.limit,
    }


def _expr_from_json(d) -> Expr:
    if not isinstance(d, dict):
        raise MalformedPlan(f"bad expression node: {d!r}")
    if "col" in d:
        return Col(d["col"], d.get("table"))
    if "lit" in d:
        kind = d.get("kind")
        if kind == "date":
            return date(d["lit"])
        if kind in ("int", "float", "string"):
            v = d["lit"]
            if kind == "int":
                v = int(v)
            elif kind == "float":
                v = float(v)
            return Lit(kind, v)
        return lit(d["lit"])
    if "op" in d:
        return Bin(BinOp(d["op"]), _expr_from_json(d["left"]), _expr_from_json(d["right"]))
    raise MalformedPlan(f"bad expression node: {d!r}")


def _pred_from_json(d) -> Predicate:
    op = CmpOp(d["op"])
    lhs = _expr_from_json(d["lhs"])
    if not isinstance(lhs, Col):
        raise MalformedPlan("predicate lhs must be a column")
    if op is CmpOp.BETWEEN:
        lo = _expr_from_json(d["lo"])
        hi = _expr_from_json(d["hi"])
        return Predicate(op, lhs, None, lo, hi)
    return Predicate(op, lhs, _expr_from_json(d["rhs"]))


def plan_from_json(d: dict, catalog: dict[str, TableSchema]) -> LogicalPlan:
    """Rebuild and re-validate a plan from its JSON descriptor."""
    try:
        b = QueryBuilder()
        aggs = {
            a["alias"]: AggSpec(
                AggFunc(a["func"]),
                _expr_from_json(a["expr"]) if a.get("expr") is not None else None,
                a["alias"],
            )
            for a in d.get("aggregates", [])
        }
        for p in d.get("projections", []):
            e = _expr_from_json(p["expr"])
            alias = p.get("alias")
            if isinstance(e, Col) and e.table is None and e.name in aggs:
                b.field(aggs.pop(e.name), alias)
            else:
                b.field(e, alias)
        for a in aggs.values():  # aggregates not surfaced in projections
            b.field(a)
        for t in d.get("sources", []):
            b.from_(t)
        jk = d.get("joinKey")
        if jk:
            b.where(Predicate(CmpOp.EQ, _expr_from_json(jk[0]), _expr_from_json(jk[1])))
        for p in d.get("filters", []):
            b.where(_pred_from_json(p))
        for k in d.get("groupKeys", []):
            b.group_by(_expr_from_json(k))
        ob = d.get("orderBy")
        if ob:
            b.order_by(ob["key"], ob["dir"])
        if d.get("limit") is not None:
            b.limit(int(d["limit"]))
    except (KeyError, ValueError) as e:
        raise MalformedPlan(f"bad plan descriptor: {e}") from None
    return b.to_plan(catalog)


def plan_digest(plan: LogicalPlan) -> str:
    """Canonical text rendering; equal plans produce equal digests."""
    body = dict(plan_to_json(plan), planClass=plan.plan_class.value)
    return json.dumps(body, sort_keys=True, separators=(",", ":"))
