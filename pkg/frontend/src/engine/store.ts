/** In-memory columnar tables over JS typed arrays. */

import { isoToDays, parseTblRows } from "./tbl.js";
import {
  ColumnTypeName,
  EngineError,
  SchemaJson,
  UnknownColumn,
  UnknownTable,
} from "./types.js";

export type ColumnData = Int32Array | Float64Array | string[];

export interface Table {
  schema: SchemaJson;
  columns: Map<string, ColumnData>;
  rowCount: number;
}

export class Store {
  /** Insertion order doubles as the catalog order (join tie-break). */
  private tables = new Map<string, Table>();

  tableNames(): string[] {
    return [...this.tables.keys()];
  }

  has(name: string): boolean {
    return this.tables.has(name);
  }

  table(name: string): Table {
    const t = this.tables.get(name);
    if (!t) throw new UnknownTable(`unknown table ${name}`);
    return t;
  }

  columnType(table: string, column: string): ColumnTypeName {
    const c = this.table(table).schema.columns.find((c) => c.name === column);
    if (!c) throw new UnknownColumn(`${table}.${column}`);
    return c.type;
  }

  column(table: string, column: string): ColumnData {
    const t = this.table(table);
    const c = t.columns.get(column);
    if (!c) throw new UnknownColumn(`${table}.${column}`);
    return c;
  }

  addTable(schema: SchemaJson, columns: Map<string, ColumnData>, rowCount: number) {
    if (this.tables.has(schema.name)) {
      throw new EngineError(`duplicate table ${schema.name}`);
    }
    this.tables.set(schema.name, { schema, columns, rowCount });
  }

  /** Parse one `.tbl` payload against its schema sidecar and register it. */
  loadTbl(schema: SchemaJson, tblText: string): number {
    const cols = schema.columns;
    const rows = parseTblRows(tblText, cols.length);
    const n = rows.length;
    const columns = new Map<string, ColumnData>();
    cols.forEach((c, j) => {
      if (c.type === "STRING") {
        columns.set(c.name, rows.map((r) => r[j]));
        return;
      }
      const arr = c.type === "FLOAT64" ? new Float64Array(n) : new Int32Array(n);
      for (let i = 0; i < n; i++) {
        const field = rows[i][j];
        let v: number;
        if (c.type === "DATE32") {
          v = isoToDays(field);
        } else {
          v = Number(field);
          if (!Number.isFinite(v)) {
            throw new EngineError(`line ${i + 1}, column ${c.name}: bad value ${field}`);
          }
          if (c.type === "INT32" && !Number.isInteger(v)) {
            throw new EngineError(`line ${i + 1}, column ${c.name}: not an integer`);
          }
        }
        arr[i] = v;
      }
      columns.set(c.name, arr);
    });
    this.addTable(schema, columns, n);
    return n;
  }
}
