/** Boundary helpers: everything that crosses between the backend's
 * external interfaces (files, descriptors, result JSON) and the
 * client-side engine.
 */

import { Store } from "./store.js";
import { PlanDescriptor, ResultJson, SchemaJson } from "./types.js";

export interface DatasetFile {
  schema: SchemaJson;
  tblText: string;
}

/** Build a store from schema sidecar + .tbl payload pairs, in order. */
export function loadDataset(files: DatasetFile[]): Store {
  const store = new Store();
  for (const f of files) {
    store.loadTbl(f.schema, f.tblText);
  }
  return store;
}

export function parsePlanDescriptor(json: string): PlanDescriptor {
  const d = JSON.parse(json);
  return {
    sources: d.sources ?? [],
    joinKey: d.joinKey ?? null,
    filters: d.filters ?? [],
    groupKeys: d.groupKeys ?? [],
    aggregates: d.aggregates ?? [],
    projections: d.projections ?? [],
    orderBy: d.orderBy ?? null,
    limit: d.limit ?? null,
  };
}

/** Compare two result payloads: exact for INT32/DATE32/STRING values,
 * relative tolerance for FLOAT64 (matches the backend's pinned 1e-9). */
export function resultsMatch(
  a: ResultJson,
  b: ResultJson,
  relTol = 1e-9,
): boolean {
  if (a.rows !== b.rows || a.columns.length !== b.columns.length) return false;
  for (let j = 0; j < a.columns.length; j++) {
    const ca = a.columns[j];
    const cb = b.columns[j];
    if (ca.name !== cb.name || ca.type !== cb.type) return false;
    for (let i = 0; i < ca.values.length; i++) {
      const va = ca.values[i];
      const vb = cb.values[i];
      if (ca.type === "FLOAT64") {
        const x = va as number;
        const y = vb as number;
        const tol = Math.max(Math.abs(x), Math.abs(y)) * relTol + 1e-12;
        if (Math.abs(x - y) > tol) return false;
      } else if (va !== vb) {
        return false;
      }
    }
  }
  return true;
}
