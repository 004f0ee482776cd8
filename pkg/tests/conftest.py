"""Shared fixtures and differential-test helpers."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from abr.bench import run_query
from abr.errors import EmptyAggregate
from abr.plan import (
    avg,
    between,
    col,
    count,
    date,
    days_to_iso,
    eq,
    ge,
    gt,
    le,
    lt,
    mul,
    select,
    sum_,
)
from abr.store import ColumnType, Database, TableSchema, new_database

REL_TOL = 1e-9


def make_db(tables: dict) -> Database:
    """tables: name -> (schema_cols, rows); schema_cols: [(name, ColumnType)]."""
    db = new_database()
    for name, (cols, rows) in tables.items():
        schema = TableSchema(name, tuple(cols))
        db.begin_table(schema).add_rows(rows).finish()
    return db.seal()


@pytest.fixture
def tiny_orders_db() -> Database:
    """Five orders rows matching the documented filter-count example."""
    return make_db(
        {
            "orders": (
                [
                    ("o_orderkey", ColumnType.INT32),
                    ("o_orderdate", ColumnType.DATE32),
                    ("o_totalprice", ColumnType.FLOAT64),
                    ("o_shippriority", ColumnType.INT32),
                ],
                [
                    (1, 9496, 100.0, 0),
                    (2, 9497, 2000.0, 0),
                    (3, 9497, 1499.0, 0),
                    (4, 9500, 1500.0, 0),
                    (5, 9500, 3.0, 0),
                ],
            )
        }
    )


@pytest.fixture
def join_fixture_db() -> Database:
    """orders (key, price) = {(1,10),(2,20),(3,30)}; lineitem keys [1,1,3,4]."""
    return make_db(
        {
            "orders": (
                [("o_orderkey", ColumnType.INT32), ("o_totalprice", ColumnType.FLOAT64)],
                [(1, 10.0), (2, 20.0), (3, 30.0)],
            ),
            "lineitem": (
                [("l_orderkey", ColumnType.INT32), ("l_extendedprice", ColumnType.FLOAT64)],
                [(1, 1.0), (1, 2.0), (3, 3.0), (4, 4.0)],
            ),
        }
    )


# ------------------------------------------------------- result comparison

def _value_equal(a, b, ctype: ColumnType) -> bool:
    if ctype is ColumnType.FLOAT64:
        return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=1e-12)
    return a == b


def assert_results_match(res_a, res_b, ordered: bool):
    """Sequence equality when ordered, multiset equality otherwise; exact
    for ints/dates/strings/counts, 1e-9 relative for floats."""
    assert [s for s in res_a.schema] == [s for s in res_b.schema]
    assert res_a.row_count == res_b.row_count
    rows_a, rows_b = res_a.rows(), res_b.rows()
    if not ordered:
        rows_a = sorted(rows_a)
        rows_b = sorted(rows_b)
    types = [t for _, t in res_a.schema]
    for ra, rb in zip(rows_a, rows_b):
        for va, vb, t in zip(ra, rb, types):
            assert _value_equal(va, vb, t), (ra, rb)


def run_both(builder, db):
    """Returns (compiled_result, reference_result); if both raise
    EmptyAggregate that counts as agreement and returns (None, None)."""
    plan = builder.to_plan(db.schemas())
    try:
        rc, _, _ = run_query(plan, db, "compiled")
    except EmptyAggregate:
        with pytest.raises(EmptyAggregate):
            run_query(plan, db, "reference")
        return None, None
    rr, _, _ = run_query(plan, db, "reference")
    return rc, rr


def assert_backends_agree(builder, db):
    plan = builder.to_plan(db.schemas())
    rc, rr = run_both(builder, db)
    if rc is not None:
        assert_results_match(rc, rr, ordered=plan.order_by is not None)


# ------------------------------------------- randomized instance generator

_DAY0 = 9000


def random_two_table_db(rng: random.Random, max_rows: int) -> Database:
    n0 = rng.randint(0, max_rows)
    n1 = rng.randint(0, max_rows)
    vocab = ["red", "green", "blue", ""]
    t0_rows = [
        (
            rng.randint(0, 20),                      # k: join key
            rng.randint(0, 5),                       # g: group key
            _DAY0 + rng.randint(0, 9),               # d
            rng.uniform(-100.0, 100.0),              # x
            rng.choice(vocab),                       # s
        )
        for _ in range(n0)
    ]
    t1_rows = [
        (
            rng.randint(0, 20),                      # k
            rng.randint(0, 5),                       # h
            rng.uniform(0.0, 50.0),                  # y
        )
        for _ in range(n1)
    ]
    return make_db(
        {
            "t0": (
                [
                    ("k", ColumnType.INT32),
                    ("g", ColumnType.INT32),
                    ("d", ColumnType.DATE32),
                    ("x", ColumnType.FLOAT64),
                    ("s", ColumnType.STRING),
                ],
                t0_rows,
            ),
            "t1": (
                [("k", ColumnType.INT32), ("h", ColumnType.INT32), ("y", ColumnType.FLOAT64)],
                t1_rows,
            ),
        }
    )


def _random_filters(rng: random.Random, tables: list[str]):
    pool_t0 = [
        lambda: lt("x", rng.uniform(-50, 50)),
        lambda: ge("x", rng.uniform(-50, 50)),
        lambda: eq("g", rng.randint(0, 5)),
        lambda: between("g", rng.randint(0, 2), rng.randint(3, 5)),
        lambda: between(
            col("d", "t0"), date(days_to_iso(_DAY0 + 2)), date(days_to_iso(_DAY0 + 7))
        ),
        lambda: eq("s", rng.choice(["red", "blue", "nope"])),
        lambda: gt(col("d", "t0"), date(days_to_iso(_DAY0 + rng.randint(0, 9)))),
    ]
    pool_t1 = [
        lambda: le("y", rng.uniform(0, 40)),
        lambda: eq("h", rng.randint(0, 5)),
    ]
    preds = []
    for _ in range(rng.randint(0, 2)):
        preds.append(rng.choice(pool_t0)())
    if "t1" in tables:
        for _ in range(rng.randint(0, 1)):
            preds.append(rng.choice(pool_t1)())
    return preds


def _aggs_for(rng: random.Random, exprs):
    choices = [count("cnt")]
    for i, e in enumerate(exprs):
        choices.append(sum_(e, f"sum{i}"))
        choices.append(avg(e, f"avg{i}"))
    n = rng.randint(1, min(3, len(choices)))
    return rng.sample(choices, n)


def random_plan_builder(rng: random.Random, plan_class: str):
    b = select()
    if plan_class == "FILTER":
        b.from_("t0")
        if rng.random() < 0.5:
            for a in _aggs_for(rng, [col("x"), mul(col("x"), col("g"))]):
                b.field(a)
        else:
            b.field("g").field("x").field("d")
            if rng.random() < 0.5:
                b.field("s")
            if rng.random() < 0.4:
                b.order_by("x", rng.choice(["asc", "desc"]))
                b.limit(rng.randint(1, 8))
        for p in _random_filters(rng, ["t0"]):
            b.where(p)
    elif plan_class == "GROUPBY":
        b.from_("t0")
        keys = ["g"] if rng.random() < 0.6 else ["g", "d"]
        aggs = _aggs_for(rng, [col("x")])
        b.field(keys[0])
        for a in aggs:
            b.field(a)
        for k in keys[1:]:
            b.field(k)
        b.group_by(*keys)
        for p in _random_filters(rng, ["t0"]):
            b.where(p)
        if rng.random() < 0.4:
            b.order_by(aggs[0].alias if aggs[0].func.value != "count" else "cnt",
                       rng.choice(["asc", "desc"]))
            b.limit(rng.randint(1, 5))
    elif plan_class == "JOIN":
        b.from_("t0").from_("t1")
        if rng.random() < 0.5:
            for a in _aggs_for(rng, [col("x"), col("y"), mul(col("x"), col("y"))]):
                b.field(a)
        else:
            b.field("g").field("x").field("y").field("h")
        b.where(eq(col("k", "t0"), col("k", "t1")))
        for p in _random_filters(rng, ["t0", "t1"]):
            b.where(p)
    else:  # JOIN_GROUPBY_TOPK
        b.from_("t0").from_("t1")
        keys = ["g"] if rng.random() < 0.5 else ["g", "h"]
        aggs = _aggs_for(rng, [col("x"), col("y")])
        for k in keys:
            b.field(k)
        for a in aggs:
            b.field(a)
        b.group_by(*keys)
        b.where(eq(col("k", "t0"), col("k", "t1")))
        for p in _random_filters(rng, ["t0", "t1"]):
            b.where(p)
        if rng.random() < 0.5:
            b.order_by(aggs[-1].alias, rng.choice(["asc", "desc"]))
            b.limit(rng.randint(1, 6))
    return b
