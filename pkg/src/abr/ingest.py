"""Flat-file ingest and seeded synthetic data.

``.tbl`` files are pipe-delimited UTF-8 text with one trailing '|' per
line, as produced by standard TPC-H tooling.  A JSON sidecar describes
the schema (name plus ordered column names/types).

The synthetic generator produces the orders/lineitem subset at a
fractional scale factor.  PRNG: numpy PCG64 seeded with the given
64-bit seed; the stream layout is part of the format and must not
change without a major version bump.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConversionError, FieldCountMismatch, MalformedDate
from .plan import days_to_iso, iso_to_days
from .store import ColumnType, Database, TableSchema, new_database

ORDERS_BASE_ROWS = 1_500_000  # scale factor 1

ORDERS_SCHEMA = TableSchema(
    "orders",
    (
        ("o_orderkey", ColumnType.INT32),
        ("o_orderdate", ColumnType.DATE32),
        ("o_totalprice", ColumnType.FLOAT64),
        ("o_shippriority", ColumnType.INT32),
    ),
)
LINEITEM_SCHEMA = TableSchema(
    "lineitem",
    (
        ("l_orderkey", ColumnType.INT32),
        ("l_extendedprice", ColumnType.FLOAT64),
        ("l_discount", ColumnType.FLOAT64),
    ),
)

_DATE_LO = iso_to_days("1992-01-01")
_DATE_HI = iso_to_days("1998-08-02")


def parse_date(text: str) -> int:
    """'YYYY-MM-DD' -> days since 1970-01-01 (proleptic Gregorian)."""
    if len(text) != 10 or text[4] != "-" or text[7] != "-":
        raise MalformedDate(f"expected YYYY-MM-DD, got {text!r}")
    return iso_to_days(text)


@dataclass(frozen=True)
class GenParams:
    scale_factor: float
    seed: int

    def __post_init__(self):
        if self.scale_factor <= 0:
            raise ValueError("scale_factor must be positive")


def gen_tpch_subset(params: GenParams) -> Database:
    """Sealed database with generated orders and lineitem tables.

    Deterministic per (scale_factor, seed); every l_orderkey references
    an existing o_orderkey.
    """
    rng = np.random.Generator(np.random.PCG64(params.seed))
    n_orders = round(ORDERS_BASE_ROWS * params.scale_factor)

    o_orderkey = np.arange(1, n_orders + 1, dtype=np.int32)
    o_orderdate = rng.integers(_DATE_LO, _DATE_HI + 1, size=n_orders, dtype=np.int32)
    o_totalprice = rng.uniform(850.0, 555000.0, size=n_orders)
    o_shippriority = np.zeros(n_orders, dtype=np.int32)

    lines_per_order = rng.integers(1, 8, size=n_orders)
    l_orderkey = np.repeat(o_orderkey, lines_per_order)
    n_lines = len(l_orderkey)
    l_extendedprice = rng.uniform(900.0, 105000.0, size=n_lines)
    l_discount = rng.integers(0, 11, size=n_lines) / 100.0

    db = new_database()
    db.begin_table(ORDERS_SCHEMA).add_columns(
        o_orderkey, o_orderdate, o_totalprice, o_shippriority
    ).finish()
    db.begin_table(LINEITEM_SCHEMA).add_columns(
        l_orderkey, l_extendedprice, l_discount
    ).finish()
    return db.seal()


# ----------------------------------------------------------------- tbl I/O

def _convert(field: str, ctype: ColumnType, line_no: int, col_name: str):
    try:
        if ctype is ColumnType.INT32:
            return int(field)
        if ctype is ColumnType.FLOAT64:
            return float(field)
        if ctype is ColumnType.DATE32:
            return parse_date(field)
        return field.encode("utf-8")
    except (ValueError, MalformedDate) as e:
        raise ConversionError(line_no, col_name, str(e)) from None


def load_tbl(path, schema: TableSchema, db: Database) -> int:
    """Append one '.tbl' file as a table; returns the row count."""
    builder = db.begin_table(schema)
    n_cols = len(schema.columns)
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("|")
            if fields and fields[-1] == "":  # one trailing delimiter tolerated
                fields.pop()
            if len(fields) != n_cols:
                builder.abandon()
                raise FieldCountMismatch(line_no, n_cols, len(fields))
            try:
                builder.add_row(
                    _convert(v, t, line_no, name)
                    for v, (name, t) in zip(fields, schema.columns)
                )
            except ConversionError:
                builder.abandon()
                raise
    return builder.finish()


def _format_value(v, ctype: ColumnType) -> str:
    if ctype is ColumnType.DATE32:
        return days_to_iso(v)
    if ctype is ColumnType.FLOAT64:
        return repr(v)  # shortest round-trip decimal
    if ctype is ColumnType.STRING:
        return v.decode("utf-8")
    return str(v)


def emit_tbl(db: Database, table: str, path) -> int:
    """Write one table back out as '.tbl' text; returns the row count."""
    schema = db.schema(table)
    views = [db.column_view(table, name) for name, _ in schema.columns]
    types = [t for _, t in schema.columns]
    n = db.row_count(table)
    cols = [
        v.to_list() if t is ColumnType.STRING else v.tolist()
        for v, t in zip(views, types)
    ]
    with open(path, "w", encoding="utf-8") as f:
        for i in range(n):
            f.write(
                "|".join(_format_value(c[i], t) for c, t in zip(cols, types))
            )
            f.write("|\n")
    return n


# ------------------------------------------------------------ schema JSON

def schema_to_json(schema: TableSchema) -> dict:
    return {
        "name": schema.name,
        "columns": [{"name": n, "type": t.value} for n, t in schema.columns],
    }


def schema_from_json(d: dict) -> TableSchema:
    return TableSchema(
        d["name"],
        tuple((c["name"], ColumnType(c["type"])) for c in d["columns"]),
    )


def write_schema(schema: TableSchema, path):
    Path(path).write_text(json.dumps(schema_to_json(schema), indent=2) + "\n")


def read_schema(path) -> TableSchema:
    return schema_from_json(json.loads(Path(path).read_text()))


def write_dataset(db: Database, out_dir) -> dict[str, int]:
    """Emit every table as table.tbl plus table.schema.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    counts = {}
    for name in db.table_names():
        counts[name] = emit_tbl(db, name, out / f"{name}.tbl")
        write_schema(db.schema(name), out / f"{name}.schema.json")
    return counts


def load_dataset(data_dir) -> Database:
    """Load every *.schema.json / *.tbl pair in a directory, sealed."""
    db = new_database()
    for sidecar in sorted(Path(data_dir).glob("*.schema.json")):
        schema = read_schema(sidecar)
        tbl = sidecar.with_name(sidecar.name.replace(".schema.json", ".tbl"))
        load_tbl(tbl, schema, db)
    return db.seal()
