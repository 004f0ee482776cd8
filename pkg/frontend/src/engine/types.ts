/** Shared types for the client-side engine.
 *
 * The engine consumes only the external interfaces of the backend:
 * `.tbl` files with `.schema.json` sidecars, plan-descriptor JSON, and
 * the CLI's result-JSON shape.
 */

export type ColumnTypeName = "INT32" | "FLOAT64" | "DATE32" | "STRING";

export interface SchemaJson {
  name: string;
  columns: { name: string; type: ColumnTypeName }[];
}

// ------------------------------------------------- plan descriptor JSON

export interface ColRef {
  col: string;
  table?: string;
}

export interface LitNode {
  lit: number | string;
  kind: "int" | "float" | "date" | "string";
}

export interface BinNode {
  op: "add" | "sub" | "mul";
  left: ExprNode;
  right: ExprNode;
}

export type ExprNode = ColRef | LitNode | BinNode;

export type CmpOpName = "eq" | "lt" | "gt" | "le" | "ge" | "between";

export interface PredicateNode {
  op: CmpOpName;
  lhs: ColRef;
  rhs?: ExprNode;
  lo?: ExprNode;
  hi?: ExprNode;
}

export interface AggregateNode {
  func: "count" | "sum" | "avg";
  expr: ExprNode | null;
  alias: string;
}

export interface PlanDescriptor {
  sources: string[];
  joinKey: [ColRef, ColRef] | null;
  filters: PredicateNode[];
  groupKeys: ColRef[];
  aggregates: AggregateNode[];
  projections: { expr: ExprNode; alias: string }[];
  orderBy: { key: string; dir: "asc" | "desc" } | null;
  limit: number | null;
}

// ------------------------------------------------------ result shape

/** Mirrors the CLI's `--output json` column block. */
export interface ResultColumn {
  name: string;
  type: ColumnTypeName;
  values: (number | string)[];
}

export interface ResultJson {
  columns: ResultColumn[];
  rows: number;
}

export function isColRef(e: ExprNode): e is ColRef {
  return (e as ColRef).col !== undefined;
}

export function isLitNode(e: ExprNode): e is LitNode {
  return (e as LitNode).lit !== undefined;
}

export class EngineError extends Error {}
export class EmptyAggregate extends EngineError {}
export class TypeMismatch extends EngineError {}
export class UnknownColumn extends EngineError {}
export class UnknownTable extends EngineError {}
export class UnsupportedShape extends EngineError {}
