"""Columnar in-memory storage.

Every column of every table is packed end-to-end in one contiguous byte
arena.  Fixed-width columns (INT32, FLOAT64, DATE32) are raw element
arrays read through numpy views; STRING columns are a fencepost header of
uint32 start offsets followed by the string bytes back-to-back.

A database is built through table builders, then sealed.  After sealing
the arena is immutable and may be read concurrently without locking.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DatabaseNotSealed,
    DatabaseSealed,
    DuplicateTable,
    OpenBuilder,
    RowOutOfRange,
    TypeMismatch,
    UnknownColumn,
    UnknownTable,
)


class ColumnType(Enum):
    INT32 = "INT32"
    FLOAT64 = "FLOAT64"
    DATE32 = "DATE32"  # days since 1970-01-01, proleptic Gregorian
    STRING = "STRING"

    @property
    def width(self) -> int:
        """Element width in bytes; for STRING, the width of one header slot."""
        return 8 if self is ColumnType.FLOAT64 else 4

    @property
    def dtype(self):
        if self is ColumnType.FLOAT64:
            return np.dtype("<f8")
        if self is ColumnType.STRING:
            return np.dtype("<u4")
        return np.dtype("<i4")

    @property
    def is_numeric(self) -> bool:
        return self in (ColumnType.INT32, ColumnType.FLOAT64)


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple[tuple[str, ColumnType], ...]

    def __post_init__(self):
        names = [n for n, _ in self.columns]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate column names in table {self.name!r}")

    def column_type(self, name: str) -> ColumnType:
        for n, t in self.columns:
            if n == name:
                return t
        raise UnknownColumn(f"{self.name}.{name}")

    def has_column(self, name: str) -> bool:
        return any(n == name for n, _ in self.columns)


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    ctype: ColumnType
    arena_offset: int
    row_count: int


@dataclass
class _Table:
    schema: TableSchema
    metas: dict[str, ColumnMeta]
    row_count: int


class StringView:
    """Read context over one STRING column: header of uint32 fenceposts
    followed by the pooled string bytes."""

    def __init__(self, arena, offset: int, row_count: int):
        self._offsets = np.frombuffer(
            arena, dtype="<u4", count=row_count + 1, offset=offset
        )
        self._base = offset + 4 * (row_count + 1)
        self._arena = arena
        self._n = row_count

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, i: int) -> bytes:
        if not 0 <= i < self._n:
            raise RowOutOfRange(f"row {i} of {self._n}")
        lo = self._base + int(self._offsets[i])
        hi = self._base + int(self._offsets[i + 1])
        return bytes(self._arena[lo:hi])

    def __iter__(self):
        for i in range(self._n):
            yield self[i]

    def to_list(self) -> list[bytes]:
        return list(self)


class Database:
    """Catalog of immutable columnar tables over a single byte arena."""

    def __init__(self):
        self._arena = bytearray()
        self._tables: dict[str, _Table] = {}
        self._sealed = False
        self._open_builders = 0

    # ------------------------------------------------------------- ingest
    @property
    def sealed(self) -> bool:
        return self._sealed

    def begin_table(self, schema: TableSchema) -> "TableBuilder":
        if self._sealed:
            raise DatabaseSealed(f"cannot add table {schema.name!r}: database is sealed")
        if schema.name in self._tables:
            raise DuplicateTable(schema.name)
        self._open_builders += 1
        return TableBuilder(self, schema)

    def seal(self) -> "Database":
        if self._sealed:
            return self
        if self._open_builders:
            raise OpenBuilder(f"{self._open_builders} builder(s) still open")
        # freeze and shrink to fit; bytes-backed numpy views are read-only
        self._arena = bytes(self._arena)
        self._sealed = True
        return self

    # -------------------------------------------------------------- reads
    def _require_sealed(self):
        if not self._sealed:
            raise DatabaseNotSealed("database must be sealed before reading")

    def _table(self, name: str) -> _Table:
        try:
            return self._tables[name]
        except KeyError:
            raise UnknownTable(name) from None

    def table_names(self) -> list[str]:
        return list(self._tables)

    def schema(self, table: str) -> TableSchema:
        return self._table(table).schema

    def schemas(self) -> dict[str, TableSchema]:
        return {name: t.schema for name, t in self._tables.items()}

    def row_count(self, table: str) -> int:
        return self._table(table).row_count

    def column_meta(self, table: str, column: str) -> ColumnMeta:
        t = self._table(table)
        try:
            return t.metas[column]
        except KeyError:
            raise UnknownColumn(f"{table}.{column}") from None

    def column_view(self, table: str, column: str):
        """Typed view over one column: a read-only numpy array for
        fixed-width types, a StringView for STRING."""
        self._require_sealed()
        meta = self.column_meta(table, column)
        if meta.ctype is ColumnType.STRING:
            return StringView(self._arena, meta.arena_offset, meta.row_count)
        return np.frombuffer(
            self._arena,
            dtype=meta.ctype.dtype,
            count=meta.row_count,
            offset=meta.arena_offset,
        )

    def string_at(self, table: str, column: str, row: int) -> bytes:
        self._require_sealed()
        meta = self.column_meta(table, column)
        if meta.ctype is not ColumnType.STRING:
            raise TypeMismatch(f"{table}.{column} is {meta.ctype.value}, not STRING")
        return StringView(self._arena, meta.arena_offset, meta.row_count)[row]

    def arena_len(self) -> int:
        return len(self._arena)

    def arena_hash(self) -> str:
        return hashlib.sha256(bytes(self._arena)).hexdigest()

    # ------------------------------------------------------- materialize
    def copy_for_append(self) -> "Database":
        """Unsealed successor holding a copy of this database's arena and
        catalog; the original stays untouched."""
        succ = Database()
        succ._arena = bytearray(self._arena)
        succ._tables = {
            name: _Table(t.schema, dict(t.metas), t.row_count)
            for name, t in self._tables.items()
        }
        return succ


def new_database() -> Database:
    return Database()


class TableBuilder:
    """Accumulates rows for one table, then packs them into the arena."""

    def __init__(self, db: Database, schema: TableSchema):
        self._db = db
        self._schema = schema
        self._cols: list[list] = [[] for _ in schema.columns]
        self._arrays: list[list] = [[] for _ in schema.columns]  # bulk numpy chunks
        self._finished = False

    def add_row(self, values) -> "TableBuilder":
        values = tuple(values)
        if len(values) != len(self._schema.columns):
            raise TypeMismatch(
                f"row has {len(values)} values, schema has {len(self._schema.columns)}"
            )
        for acc, v, (name, ctype) in zip(self._cols, values, self._schema.columns):
            acc.append(self._check(v, name, ctype))
        return self

    def add_rows(self, rows) -> "TableBuilder":
        for r in rows:
            self.add_row(r)
        return self

    def add_columns(self, *columns) -> "TableBuilder":
        """Bulk append: one array (or list of bytes for STRING) per column."""
        if len(columns) != len(self._schema.columns):
            raise TypeMismatch("column count does not match schema")
        n = len(columns[0])
        for i, (chunk, (name, ctype)) in enumerate(zip(columns, self._schema.columns)):
            if len(chunk) != n:
                raise TypeMismatch("bulk columns have unequal lengths")
            if ctype is ColumnType.STRING:
                self._cols[i].extend(self._check(v, name, ctype) for v in chunk)
            else:
                self._arrays[i].append(np.asarray(chunk, dtype=ctype.dtype))
        return self

    @staticmethod
    def _check(v, name: str, ctype: ColumnType):
        if ctype is ColumnType.STRING:
            if isinstance(v, str):
                v = v.encode("utf-8")
            if not isinstance(v, (bytes, bytearray)):
                raise TypeMismatch(f"column {name}: expected bytes/str")
            if b"\x00" in v:
                raise TypeMismatch(f"column {name}: string contains NUL byte")
            return bytes(v)
        if ctype is ColumnType.FLOAT64:
            if not isinstance(v, (int, float, np.integer, np.floating)):
                raise TypeMismatch(f"column {name}: expected number")
            return float(v)
        if not isinstance(v, (int, np.integer)):
            raise TypeMismatch(f"column {name}: expected int")
        v = int(v)
        if not -(2**31) <= v < 2**31:
            raise TypeMismatch(f"column {name}: {v} out of int32 range")
        return v

    def abandon(self):
        """Drop accumulated rows without registering the table."""
        if not self._finished:
            self._db._open_builders -= 1
            self._finished = True

    def _column_values(self, idx: int, ctype: ColumnType):
        if ctype is ColumnType.STRING:
            return self._cols[idx]
        parts = []
        if self._cols[idx]:
            parts.append(np.asarray(self._cols[idx], dtype=ctype.dtype))
        parts.extend(self._arrays[idx])
        if not parts:
            return np.empty(0, dtype=ctype.dtype)
        return parts[0] if len(parts) == 1 else np.concatenate(parts)

    def finish(self) -> int:
        """Pack accumulated rows into the arena and register the table.
        Returns the row count."""
        if self._finished:
            return self._db.row_count(self._schema.name)
        arena = self._db._arena
        metas: dict[str, ColumnMeta] = {}
        lengths = set()
        packed = []
        for idx, (name, ctype) in enumerate(self._schema.columns):
            vals = self._column_values(idx, ctype)
            lengths.add(len(vals))
            packed.append((name, ctype, vals))
        if len(lengths) > 1:
            raise TypeMismatch("columns have unequal row counts")
        n = lengths.pop() if lengths else 0

        for name, ctype, vals in packed:
            align = ctype.width if ctype is not ColumnType.STRING else 4
            pad = (-len(arena)) % align
            arena.extend(b"\x00" * pad)
            offset = len(arena)
            if ctype is ColumnType.STRING:
                fence = np.zeros(n + 1, dtype="<u4")
                if n:
                    sizes = np.fromiter((len(s) for s in vals), dtype=np.int64, count=n)
                    fence[1:] = np.cumsum(sizes)
                arena.extend(fence.tobytes())
                arena.extend(b"".join(vals))
            else:
                arena.extend(vals.tobytes())
            metas[name] = ColumnMeta(name, ctype, offset, n)

        self._db._tables[self._schema.name] = _Table(self._schema, metas, n)
        self._db._open_builders -= 1
        self._finished = True
        return n
