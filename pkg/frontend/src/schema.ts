/**
 * Documented CSV schemas of the experiment outputs, one per figure
 * kind.  Validation happens before any geometry is computed so a
 * mismatched file fails with the missing column's name, not with a
 * blank plot.
 */

import { Table } from "./csv.js";

export class SchemaError extends Error {}

export type FigureKind =
  | "convergence"
  | "overlay"
  | "paths"
  | "distance-hist";

export const FIGURE_KINDS: readonly FigureKind[] = [
  "convergence",
  "overlay",
  "paths",
  "distance-hist",
];

const REQUIRED: Record<FigureKind, string[]> = {
  // m is the mass ladder, value the statistic; stderr is optional but
  // drawn as error bars whenever present
  convergence: ["m", "value"],
  // x plus at least one named series; a column called "stderr" is
  // treated as error bars for the series right before it
  overlay: ["x"],
  paths: ["path", "t", "x1"],
  "distance-hist": ["m", "distance"],
};

export function validateTable(kind: FigureKind, table: Table): void {
  const missing = REQUIRED[kind].filter((c) => !table.header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `${table.name}: ${kind} input is missing column(s) ` +
        missing.map((c) => `"${c}"`).join(", "),
    );
  }
  if (kind === "overlay" && table.header.length < 2) {
    throw new SchemaError(
      `${table.name}: overlay input needs at least one series column besides "x"`,
    );
  }
  if (table.rows.length === 0) {
    throw new SchemaError(`${table.name}: no data rows`);
  }
}
