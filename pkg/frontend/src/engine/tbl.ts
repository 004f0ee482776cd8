/** `.tbl` parsing and date handling.
 *
 * Format: pipe-delimited rows with one trailing pipe; DATE32 fields are
 * ISO `YYYY-MM-DD`, stored as days since 1970-01-01.
 */

import { EngineError } from "./types.js";

const MS_PER_DAY = 86_400_000;

export function isoToDays(text: string): number {
  const m = /^(\d{4})-(\d{2})-(\d{2})$/.exec(text);
  if (!m) throw new EngineError(`malformed date: ${text}`);
  const [y, mo, d] = [Number(m[1]), Number(m[2]), Number(m[3])];
  const ms = Date.UTC(y, mo - 1, d);
  const dt = new Date(ms);
  if (
    dt.getUTCFullYear() !== y ||
    dt.getUTCMonth() !== mo - 1 ||
    dt.getUTCDate() !== d
  ) {
    throw new EngineError(`malformed date: ${text}`);
  }
  return ms / MS_PER_DAY;
}

export function daysToIso(days: number): string {
  const dt = new Date(days * MS_PER_DAY);
  const y = dt.getUTCFullYear().toString().padStart(4, "0");
  const mo = (dt.getUTCMonth() + 1).toString().padStart(2, "0");
  const d = dt.getUTCDate().toString().padStart(2, "0");
  return `${y}-${mo}-${d}`;
}

/** Split one `.tbl` payload into rows of string fields. */
export function parseTblRows(text: string, fieldCount: number): string[][] {
  const rows: string[][] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (line === "") continue;
    const fields = line.split("|");
    // one trailing delimiter produces a final empty field
    if (fields.length === fieldCount + 1 && fields[fields.length - 1] === "") {
      fields.pop();
    }
    if (fields.length !== fieldCount) {
      throw new EngineError(
        `line ${i + 1}: expected ${fieldCount} fields, got ${fields.length}`,
      );
    }
    rows.push(fields);
  }
  return rows;
}
