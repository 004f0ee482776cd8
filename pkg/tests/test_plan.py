import pytest

from abr.errors import (
    EmptyProjection,
    TypeMismatch,
    UnknownColumn,
    UnknownTable,
    UnsupportedShape,
)
from abr.ingest import LINEITEM_SCHEMA, ORDERS_SCHEMA
from abr.plan import (
    PlanClass,
    col,
    count,
    date,
    eq,
    lt,
    plan_digest,
    plan_from_json,
    plan_to_json,
    select,
    sum_,
)
from abr.queries import BUILTIN, builtin

CATALOG = {"orders": ORDERS_SCHEMA, "lineitem": LINEITEM_SCHEMA}


def test_fluent_chain_accumulates_clauses():
    b = (
        select()
        .field("o_orderkey")
        .field("o_orderdate")
        .from_("orders")
        .where(eq("o_orderdate", date("1996-01-01")))
    )
    plan = b.to_plan(CATALOG)
    assert [alias for _, alias in plan.projections] == ["o_orderkey", "o_orderdate"]
    assert plan.sources == ("orders",)
    assert len(plan.filters) == 1
    assert plan.plan_class is PlanClass.FILTER


def test_empty_projection_rejected_at_plan_time():
    b = select().from_("orders")
    with pytest.raises(EmptyProjection):
        b.to_plan(CATALOG)


def test_clause_order_does_not_matter():
    a = select().field("o_orderkey").from_("orders").where(lt("o_totalprice", 10))
    b = select().from_("orders").where(lt("o_totalprice", 10)).field("o_orderkey")
    assert a.to_plan(CATALOG) == b.to_plan(CATALOG)
    assert plan_digest(a.to_plan(CATALOG)) == plan_digest(b.to_plan(CATALOG))


def test_q2_classifies_as_join():
    plan = builtin("q2").to_plan(CATALOG)
    assert plan.plan_class is PlanClass.JOIN
    assert plan.join_key == (col("o_orderkey", "orders"), col("l_orderkey", "lineitem"))
    assert plan.filters == ()


def test_q1_classifies_as_filter():
    plan = builtin("q1").to_plan(CATALOG)
    assert plan.plan_class is PlanClass.FILTER
    assert len(plan.filters) == 1
    assert plan.aggregates[0].func.value == "count"


def test_q3_groupby_and_q4_join_groupby():
    assert builtin("q3").to_plan(CATALOG).plan_class is PlanClass.GROUPBY
    assert builtin("q4").to_plan(CATALOG).plan_class is PlanClass.JOIN_GROUPBY_TOPK


def test_three_sources_rejected():
    b = select().field("o_orderkey").from_("orders").from_("lineitem").from_("orders")
    with pytest.raises(UnsupportedShape):
        b.to_plan(CATALOG)


def test_two_sources_without_join_condition_rejected():
    b = select().field("o_orderkey").from_("orders").from_("lineitem")
    with pytest.raises(UnsupportedShape):
        b.to_plan(CATALOG)


def test_order_by_without_limit_rejected():
    b = select().field("o_orderkey").from_("orders").order_by("o_orderkey")
    with pytest.raises(UnsupportedShape):
        b.to_plan(CATALOG)


def test_unknown_table_and_column():
    with pytest.raises(UnknownTable):
        select().field("x").from_("nope").to_plan(CATALOG)
    with pytest.raises(UnknownColumn):
        select().field("nope").from_("orders").to_plan(CATALOG)


def test_type_mismatch_in_predicate():
    b = select().field("o_orderkey").from_("orders").where(eq("o_orderdate", 5))
    with pytest.raises(TypeMismatch):
        b.to_plan(CATALOG)


def test_projection_outside_group_keys_rejected():
    b = (
        select()
        .field("o_totalprice")
        .field(count("n"))
        .from_("orders")
        .group_by("o_orderdate")
    )
    with pytest.raises(UnsupportedShape):
        b.to_plan(CATALOG)


def test_mixing_aggregate_and_plain_column_rejected():
    b = select().field("o_orderkey").field(count("n")).from_("orders")
    with pytest.raises(UnsupportedShape):
        b.to_plan(CATALOG)


@pytest.mark.parametrize("qid", sorted(BUILTIN))
def test_all_builtin_queries_lower(qid):
    plan = builtin(qid).to_plan(CATALOG)
    assert plan.plan_class in PlanClass


def test_digest_differs_on_literal():
    a = select().field(count("n")).from_("orders").where(lt("o_totalprice", 1500))
    b = select().field(count("n")).from_("orders").where(lt("o_totalprice", 1501))
    assert plan_digest(a.to_plan(CATALOG)) != plan_digest(b.to_plan(CATALOG))


def test_digest_snapshot_is_stable():
    # frozen rendering; changing it is a format break
    d = plan_digest(builtin("q1").to_plan(CATALOG))
    assert d == (
        '{"aggregates":[{"alias":"count","expr":null,"func":"count"}],'
        '"filters":[{"lhs":{"col":"o_totalprice","table":"orders"},'
        '"op":"lt","rhs":{"kind":"int","lit":1500}}],'
        '"groupKeys":[],"joinKey":null,"limit":null,"orderBy":null,'
        '"planClass":"FILTER",'
        '"projections":[{"alias":"count","expr":{"col":"count"}}],'
        '"sources":["orders"]}'
    )


@pytest.mark.parametrize("qid", sorted(BUILTIN))
def test_plan_json_round_trip(qid):
    plan = builtin(qid).to_plan(CATALOG)
    descriptor = plan_to_json(plan)
    assert set(descriptor) == {
        "sources",
        "joinKey",
        "filters",
        "groupKeys",
        "aggregates",
        "projections",
        "orderBy",
        "limit",
    }
    rebuilt = plan_from_json(descriptor, CATALOG)
    assert plan_digest(rebuilt) == plan_digest(plan)


def test_sum_over_string_rejected():
    b = select().field(sum_("o_orderdate", "s")).from_("orders")
    with pytest.raises(TypeMismatch):
        b.to_plan(CATALOG)
