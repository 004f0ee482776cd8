/** Interactive console: load a dataset, assemble a plan with the guided
 * builder, run it client-side, inspect results, materialize, repeat.
 */

import { loadDataset, parsePlanDescriptor } from "../engine/boundary.js";
import { executePlan, materializeResult } from "../engine/exec.js";
import { Store } from "../engine/store.js";
import {
  ColRef,
  EngineError,
  PlanDescriptor,
  PredicateNode,
  ResultJson,
  SchemaJson,
} from "../engine/types.js";

const PAGE_SIZE = 100;

let store = new Store();
let lastResult: ResultJson | null = null;
let page = 0;
const latencies: number[] = [];

const $ = <T extends HTMLElement>(id: string) =>
  document.getElementById(id) as T;

// ------------------------------------------------------------ data load

async function onLoadFiles() {
  const input = $<HTMLInputElement>("file-input");
  const files = [...(input.files ?? [])];
  const schemas = new Map<string, SchemaJson>();
  const tbls = new Map<string, string>();
  for (const f of files) {
    const text = await f.text();
    if (f.name.endsWith(".schema.json")) {
      const s = JSON.parse(text) as SchemaJson;
      schemas.set(s.name, s);
    } else if (f.name.endsWith(".tbl")) {
      tbls.set(f.name.replace(/\.tbl$/, ""), text);
    }
  }
  const pairs = [...schemas.keys()]
    .sort()
    .filter((n) => tbls.has(n))
    .map((n) => ({ schema: schemas.get(n)!, tblText: tbls.get(n)! }));
  store = loadDataset(pairs);
  latencies.length = 0;
  setStatus(
    store
      .tableNames()
      .map((t) => `${t}: ${store.table(t).rowCount} rows`)
      .join("  |  ") || "no tables loaded",
  );
  refreshBuilder();
}

// ------------------------------------------------------- guided builder

function tableOptions(select: HTMLSelectElement, withBlank = false) {
  select.innerHTML = "";
  if (withBlank) select.add(new Option("(none)", ""));
  for (const t of store.tableNames()) select.add(new Option(t, t));
}

function columnsOf(table: string): string[] {
  if (!table || !store.has(table)) return [];
  return store.table(table).schema.columns.map((c) => c.name);
}

function refreshBuilder() {
  tableOptions($<HTMLSelectElement>("b-table"));
  tableOptions($<HTMLSelectElement>("b-join-table"), true);
  refreshColumns();
}

function refreshColumns() {
  const t0 = $<HTMLSelectElement>("b-table").value;
  const t1 = $<HTMLSelectElement>("b-join-table").value;
  const cols = [...columnsOf(t0), ...columnsOf(t1)];
  for (const id of ["b-proj", "b-group", "b-agg-col", "b-filter-col", "b-jk0", "b-jk1"]) {
    const el = $<HTMLSelectElement>(id);
    const multi = el.multiple;
    el.innerHTML = "";
    if (!multi) el.add(new Option("(none)", ""));
    const source = id === "b-jk0" ? columnsOf(t0) : id === "b-jk1" ? columnsOf(t1) : cols;
    for (const c of source) el.add(new Option(c, c));
  }
}

function buildDescriptor(): PlanDescriptor {
  const t0 = $<HTMLSelectElement>("b-table").value;
  const t1 = $<HTMLSelectElement>("b-join-table").value;
  const sources = t1 ? [t0, t1] : [t0];
  const ref = (name: string): ColRef => ({ col: name });

  const projections: { expr: ColRef; alias: string }[] = [];
  for (const o of $<HTMLSelectElement>("b-proj").selectedOptions) {
    projections.push({ expr: ref(o.value), alias: o.value });
  }
  const aggregates = [];
  const aggFunc = $<HTMLSelectElement>("b-agg").value;
  if (aggFunc) {
    const aggCol = $<HTMLSelectElement>("b-agg-col").value;
    const alias = aggFunc === "count" ? "count" : `${aggFunc}_${aggCol}`;
    aggregates.push({
      func: aggFunc as "count" | "sum" | "avg",
      expr: aggFunc === "count" ? null : ref(aggCol),
      alias,
    });
    projections.push({ expr: ref(alias), alias });
  }
  const filters: PredicateNode[] = [];
  const fCol = $<HTMLSelectElement>("b-filter-col").value;
  const fVal = $<HTMLInputElement>("b-filter-val").value;
  if (fCol && fVal !== "") {
    const kind = /^\d{4}-\d{2}-\d{2}$/.test(fVal)
      ? "date"
      : /^-?\d+$/.test(fVal)
        ? "int"
        : /^-?\d*\.\d+$/.test(fVal)
          ? "float"
          : "string";
    const num = kind === "int" || kind === "float";
    filters.push({
      op: $<HTMLSelectElement>("b-filter-op").value as PredicateNode["op"],
      lhs: ref(fCol),
      rhs: { lit: num ? Number(fVal) : fVal, kind },
    });
  }
  const groupKeys = [...$<HTMLSelectElement>("b-group").selectedOptions].map(
    (o) => ref(o.value),
  );
  const jk0 = $<HTMLSelectElement>("b-jk0").value;
  const jk1 = $<HTMLSelectElement>("b-jk1").value;
  const orderKey = $<HTMLSelectElement>("b-order").value;
  const limit = Number($<HTMLInputElement>("b-limit").value) || null;
  return {
    sources,
    joinKey:
      t1 && jk0 && jk1
        ? [
            { col: jk0, table: t0 },
            { col: jk1, table: t1 },
          ]
        : null,
    filters,
    groupKeys,
    aggregates,
    projections,
    orderBy:
      orderKey && limit
        ? { key: orderKey, dir: $<HTMLSelectElement>("b-order-dir").value as "asc" | "desc" }
        : null,
    limit,
  };
}

// ------------------------------------------------------------ execution

function runDescriptor(plan: PlanDescriptor) {
  try {
    const { result, planClass, execMs } = executePlan(plan, store);
    lastResult = result;
    page = 0;
    latencies.push(execMs);
    setStatus(
      `${planClass}: ${result.rows} rows in ${execMs.toFixed(2)} ms`,
    );
    renderGrid();
    renderSparkline();
  } catch (e) {
    setStatus(e instanceof EngineError ? `error: ${e.message}` : String(e));
  }
}

function onRun() {
  runDescriptor(buildDescriptor());
  refreshOrderOptions();
}

function onRunJson() {
  const text = $<HTMLTextAreaElement>("plan-json").value;
  try {
    runDescriptor(parsePlanDescriptor(text));
  } catch (e) {
    setStatus(`bad descriptor: ${e}`);
  }
}

function onMaterialize() {
  if (!lastResult) return;
  const name = $<HTMLInputElement>("mat-name").value.trim();
  if (!name) {
    setStatus("give the materialized table a name first");
    return;
  }
  try {
    const n = materializeResult(store, name, lastResult);
    setStatus(`materialized ${name}: ${n} rows`);
    refreshBuilder();
  } catch (e) {
    setStatus(String(e));
  }
}

function refreshOrderOptions() {
  const el = $<HTMLSelectElement>("b-order");
  const prev = el.value;
  el.innerHTML = "";
  el.add(new Option("(none)", ""));
  if (lastResult) {
    for (const c of lastResult.columns) el.add(new Option(c.name, c.name));
  }
  el.value = prev;
}

// ------------------------------------------------------------ rendering

function setStatus(text: string) {
  $("status").textContent = text;
}

function renderGrid() {
  const grid = $("grid");
  grid.innerHTML = "";
  if (!lastResult) return;
  const table = document.createElement("table");
  const head = table.insertRow();
  for (const c of lastResult.columns) {
    const th = document.createElement("th");
    th.textContent = `${c.name} (${c.type})`;
    head.appendChild(th);
  }
  const start = page * PAGE_SIZE;
  const end = Math.min(start + PAGE_SIZE, lastResult.rows);
  for (let i = start; i < end; i++) {
    const tr = table.insertRow();
    for (const c of lastResult.columns) {
      const v = c.values[i];
      tr.insertCell().textContent =
        c.type === "FLOAT64" ? (v as number).toPrecision(8) : String(v);
    }
  }
  grid.appendChild(table);
  $("pager").textContent =
    lastResult.rows > 0
      ? `rows ${start + 1}-${end} of ${lastResult.rows}`
      : "empty result";
}

function renderSparkline() {
  const canvas = $<HTMLCanvasElement>("spark");
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const recent = latencies.slice(-40);
  if (!recent.length) return;
  const max = Math.max(...recent, 1e-6);
  ctx.strokeStyle = "#2a6";
  ctx.beginPath();
  recent.forEach((v, i) => {
    const x = (i / Math.max(recent.length - 1, 1)) * (canvas.width - 4) + 2;
    const y = canvas.height - 2 - (v / max) * (canvas.height - 6);
    i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  });
  ctx.stroke();
}

// -------------------------------------------------------------- wiring

export function init() {
  $("load-btn").addEventListener("click", onLoadFiles);
  $("run-btn").addEventListener("click", onRun);
  $("run-json-btn").addEventListener("click", onRunJson);
  $("mat-btn").addEventListener("click", onMaterialize);
  $<HTMLSelectElement>("b-table").addEventListener("change", refreshColumns);
  $<HTMLSelectElement>("b-join-table").addEventListener("change", refreshColumns);
  $("prev-btn").addEventListener("click", () => {
    if (page > 0) {
      page--;
      renderGrid();
    }
  });
  $("next-btn").addEventListener("click", () => {
    if (lastResult && (page + 1) * PAGE_SIZE < lastResult.rows) {
      page++;
      renderGrid();
    }
  });
  setStatus("load .tbl + .schema.json files to begin");
}

if (typeof document !== "undefined" && document.getElementById("load-btn")) {
  init();
}
