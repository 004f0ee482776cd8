"""Built-in benchmark queries q1-q6 over the orders/lineitem subset,
pinned through the fluent builder."""

from __future__ import annotations

from .errors import UnknownQuery
from .plan import (
    QueryBuilder,
    between,
    col,
    count,
    date,
    eq,
    lt,
    mul,
    select,
    sub,
    sum_,
)


def q1() -> QueryBuilder:
    # SELECT count(*) FROM orders WHERE o_totalprice < 1500
    return (
        select()
        .field(count("count"))
        .from_("orders")
        .where(lt("o_totalprice", 1500))
    )


def q2() -> QueryBuilder:
    # SELECT sum(o_totalprice) FROM orders, lineitem WHERE l_orderkey = o_orderkey
    return (
        select()
        .field(sum_("o_totalprice", "sum_totalprice"))
        .from_("orders")
        .from_("lineitem")
        .where(eq("l_orderkey", col("o_orderkey")))
    )


def q3() -> QueryBuilder:
    # SELECT o_orderdate, count(*) FROM orders GROUP BY o_orderdate
    return (
        select()
        .field("o_orderdate")
        .field(count("count"))
        .from_("orders")
        .group_by("o_orderdate")
    )


def q4() -> QueryBuilder:
    # top 10 January-1996 orders by sum(l_extendedprice)
    return (
        select()
        .field("l_orderkey")
        .field(sum_("l_extendedprice", "rev"))
        .field("o_orderdate")
        .field("o_shippriority")
        .from_("orders")
        .from_("lineitem")
        .where(eq("l_orderkey", col("o_orderkey")))
        .where(between("o_orderdate", date("1996-01-01"), date("1996-01-31")))
        .group_by("l_orderkey", "o_orderdate", "o_shippriority")
        .order_by("rev", "desc")
        .limit(10)
    )


def _revenue():
    return sum_(mul(col("l_extendedprice"), sub(1, col("l_discount"))), "revenue")


def q5(day: str = "1996-01-06") -> QueryBuilder:
    # single-day variant of q4 with discounted revenue, ascending
    return (
        select()
        .field("l_orderkey")
        .field(_revenue())
        .field("o_orderdate")
        .field("o_shippriority")
        .from_("orders")
        .from_("lineitem")
        .where(eq("l_orderkey", col("o_orderkey")))
        .where(eq("o_orderdate", date(day)))
        .group_by("l_orderkey", "o_orderdate", "o_shippriority")
        .order_by("revenue", "asc")
        .limit(10)
    )


def q6() -> QueryBuilder:
    # January-1996 revenue per (order, date, priority); no order/limit,
    # intended for materialization
    return (
        select()
        .field("l_orderkey")
        .field(_revenue())
        .field("o_orderdate")
        .field("o_shippriority")
        .from_("orders")
        .from_("lineitem")
        .where(eq("l_orderkey", col("o_orderkey")))
        .where(between("o_orderdate", date("1996-01-01"), date("1996-01-31")))
        .group_by("l_orderkey", "o_orderdate", "o_shippriority")
    )


def filter_on_materialized(table: str, day: str) -> QueryBuilder:
    """Per-day top-10 filter over a materialized q6 result (the
    materialize-then-filter workflow)."""
    return (
        select()
        .field("l_orderkey")
        .field("revenue")
        .field("o_orderdate")
        .field("o_shippriority")
        .from_(table)
        .where(eq("o_orderdate", date(day)))
        .order_by("revenue", "asc")
        .limit(10)
    )


BUILTIN = {"q1": q1, "q2": q2, "q3": q3, "q4": q4, "q5": q5, "q6": q6}


def builtin(query_id: str) -> QueryBuilder:
    try:
        return BUILTIN[query_id]()
    except KeyError:
        raise UnknownQuery(query_id) from None
