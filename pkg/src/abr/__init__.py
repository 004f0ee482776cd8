"""In-memory columnar analytical query engine with per-query specialized
execution kernels."""

from .bench import BenchReport, materialize, run_bench, run_query
from .compiled import ExecutableKernel, compile_plan, execute
from .ingest import (
    GenParams,
    gen_tpch_subset,
    load_dataset,
    load_tbl,
    parse_date,
    write_dataset,
)
from .plan import (
    LogicalPlan,
    QueryBuilder,
    add,
    avg,
    between,
    col,
    count,
    date,
    eq,
    ge,
    gt,
    le,
    lit,
    lt,
    mul,
    plan_digest,
    plan_from_json,
    plan_to_json,
    select,
    sub,
    sum_,
)
from .reference import eval_plan
from .result import ResultTable
from .store import ColumnType, Database, TableSchema, new_database

__version__ = "0.1.0"
