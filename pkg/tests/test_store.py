import random

import numpy as np
import pytest

from abr.errors import (
    DatabaseNotSealed,
    DatabaseSealed,
    DuplicateTable,
    OpenBuilder,
    RowOutOfRange,
    TypeMismatch,
    UnknownColumn,
    UnknownTable,
)
from abr.store import ColumnType, TableSchema, new_database


def _schema(name, *cols):
    return TableSchema(name, tuple(cols))


def test_new_database_is_empty():
    db = new_database()
    assert db.table_names() == []
    assert db.arena_len() == 0
    assert not db.sealed


def test_empty_sealed_database_rejects_queries():
    db = new_database().seal()
    with pytest.raises(UnknownTable):
        db.column_view("orders", "o_orderkey")


def test_databases_are_independent():
    a, b = new_database(), new_database()
    a.begin_table(_schema("t", ("x", ColumnType.INT32))).add_rows([(1,), (2,)]).finish()
    a.seal()
    assert b.arena_len() == 0 and b.table_names() == []


def test_int_column_round_trip():
    db = new_database()
    db.begin_table(_schema("t", ("k", ColumnType.INT32))).add_rows([(7,), (9,)]).finish()
    db.seal()
    assert db.column_view("t", "k").tolist() == [7, 9]


def test_float_column_aligned_after_int_column():
    db = new_database()
    db.begin_table(
        _schema("t", ("k", ColumnType.INT32), ("p", ColumnType.FLOAT64))
    ).add_rows([(1, 1.5)]).finish()
    db.seal()
    meta = db.column_meta("t", "p")
    assert meta.arena_offset % 8 == 0
    assert db.column_view("t", "p").tolist() == [1.5]


def test_duplicate_table_rejected():
    db = new_database()
    db.begin_table(_schema("orders", ("k", ColumnType.INT32))).finish()
    with pytest.raises(DuplicateTable):
        db.begin_table(_schema("orders", ("k", ColumnType.INT32)))


def test_seal_then_begin_table_errors():
    db = new_database().seal()
    with pytest.raises(DatabaseSealed):
        db.begin_table(_schema("t", ("k", ColumnType.INT32)))


def test_seal_with_open_builder_errors():
    db = new_database()
    db.begin_table(_schema("t", ("k", ColumnType.INT32)))
    with pytest.raises(OpenBuilder):
        db.seal()


def test_seal_is_idempotent():
    db = new_database()
    db.begin_table(_schema("t", ("k", ColumnType.INT32))).add_row((1,)).finish()
    db.seal()
    h = db.arena_hash()
    db.seal()
    assert db.sealed and db.arena_hash() == h


def test_read_before_seal_errors():
    db = new_database()
    db.begin_table(_schema("t", ("k", ColumnType.INT32))).add_row((1,)).finish()
    with pytest.raises(DatabaseNotSealed):
        db.column_view("t", "k")


def test_date_column_stores_day_numbers():
    from abr.ingest import parse_date

    db = new_database()
    db.begin_table(_schema("t", ("d", ColumnType.DATE32))).add_row(
        (parse_date("1996-01-01"),)
    ).finish()
    db.seal()
    assert db.column_view("t", "d")[0] == 9496


def test_unknown_column_errors():
    db = new_database()
    db.begin_table(_schema("t", ("k", ColumnType.INT32))).finish()
    db.seal()
    with pytest.raises(UnknownColumn):
        db.column_view("t", "nope")


def test_string_round_trip_and_fenceposts():
    db = new_database()
    db.begin_table(_schema("t", ("s", ColumnType.STRING))).add_rows(
        [("a",), ("bc",), ("",)]
    ).finish()
    db.seal()
    assert db.string_at("t", "s", 0) == b"a"
    assert db.string_at("t", "s", 1) == b"bc"
    assert db.string_at("t", "s", 2) == b""
    with pytest.raises(RowOutOfRange):
        db.string_at("t", "s", 3)


def test_string_at_on_non_string_column():
    db = new_database()
    db.begin_table(_schema("t", ("k", ColumnType.INT32))).add_row((1,)).finish()
    db.seal()
    with pytest.raises(TypeMismatch):
        db.string_at("t", "k", 0)


def test_string_with_nul_byte_rejected():
    db = new_database()
    b = db.begin_table(_schema("t", ("s", ColumnType.STRING)))
    with pytest.raises(TypeMismatch):
        b.add_row((b"a\x00b",))


def test_unequal_column_lengths_rejected():
    db = new_database()
    b = db.begin_table(_schema("t", ("a", ColumnType.INT32), ("b", ColumnType.INT32)))
    with pytest.raises(TypeMismatch):
        b.add_columns(np.asarray([1, 2]), np.asarray([1]))


def test_views_are_read_only():
    db = new_database()
    db.begin_table(_schema("t", ("k", ColumnType.INT32))).add_row((1,)).finish()
    db.seal()
    v = db.column_view("t", "k")
    with pytest.raises(ValueError):
        v[0] = 5


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_table_round_trip(seed):
    rng = random.Random(seed)
    n = rng.randint(0, 500)
    rows = [
        (
            rng.randint(-(2**31), 2**31 - 1),
            rng.uniform(-1e12, 1e12),
            rng.randint(-100_000, 100_000),
            bytes(rng.choice(b"abcdefgh \xc3") for _ in range(rng.randint(0, 12))).replace(
                b"\xc3", b"~"
            ),
        )
        for _ in range(n)
    ]
    db = new_database()
    db.begin_table(
        _schema(
            "t",
            ("i", ColumnType.INT32),
            ("f", ColumnType.FLOAT64),
            ("d", ColumnType.DATE32),
            ("s", ColumnType.STRING),
        )
    ).add_rows(rows).finish()
    db.seal()
    got = list(
        zip(
            db.column_view("t", "i").tolist(),
            db.column_view("t", "f").tolist(),
            db.column_view("t", "d").tolist(),
            db.column_view("t", "s"),
        )
    )
    assert got == rows


def test_alignment_invariant_all_columns():
    db = new_database()
    db.begin_table(
        _schema(
            "t",
            ("s", ColumnType.STRING),
            ("f", ColumnType.FLOAT64),
            ("i", ColumnType.INT32),
            ("g", ColumnType.FLOAT64),
        )
    ).add_rows([("abc", 1.0, 2, 3.0)]).finish()
    db.seal()
    for name, ctype in db.schema("t").columns:
        width = 4 if ctype is ColumnType.STRING else ctype.width
        assert db.column_meta("t", name).arena_offset % width == 0


def test_copy_for_append_leaves_original_untouched():
    db = new_database()
    db.begin_table(_schema("t", ("k", ColumnType.INT32))).add_row((1,)).finish()
    db.seal()
    h = db.arena_hash()
    succ = db.copy_for_append()
    succ.begin_table(_schema("u", ("k", ColumnType.INT32))).add_row((2,)).finish()
    succ.seal()
    assert db.arena_hash() == h
    assert db.table_names() == ["t"]
    assert succ.column_view("u", "k").tolist() == [2]
    assert succ.column_view("t", "k").tolist() == [1]
