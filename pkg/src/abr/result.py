"""Columnar query output, re-ingestible as a new table."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .plan import days_to_iso
from .store import ColumnType, Database, TableSchema


@dataclass
class ResultTable:
    schema: list[tuple[str, ColumnType]]
    columns: list  # numpy array per column; list[bytes] for STRING
    row_count: int
    stats: dict = field(default_factory=dict)

    def rows(self):
        """Row tuples with plain Python values."""
        cols = [
            c if isinstance(c, list) else c.tolist() for c in self.columns
        ]
        return list(zip(*cols)) if self.row_count else []

    def column(self, alias: str):
        for (name, _), c in zip(self.schema, self.columns):
            if name == alias:
                return c
        raise KeyError(alias)

    def to_json(self) -> dict:
        cols = []
        for (name, ctype), data in zip(self.schema, self.columns):
            if ctype is ColumnType.DATE32:
                values = [days_to_iso(v) for v in np.asarray(data).tolist()]
            elif ctype is ColumnType.STRING:
                values = [b.decode("utf-8") for b in data]
            else:
                values = np.asarray(data).tolist()
            cols.append({"name": name, "type": ctype.value, "values": values})
        return {"columns": cols, "rows": self.row_count}

    def ingest_into(self, db: Database, table_name: str) -> int:
        """Append this result as a new table (materialization path)."""
        schema = TableSchema(table_name, tuple((n, t) for n, t in self.schema))
        builder = db.begin_table(schema)
        cols = []
        for (name, ctype), data in zip(self.schema, self.columns):
            if ctype is ColumnType.STRING:
                cols.append(list(data))
            else:
                cols.append(np.asarray(data, dtype=ctype.dtype))
        builder.add_columns(*cols)
        return builder.finish()
