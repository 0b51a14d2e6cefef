/**
 * Figure spec: what to read, which kind of figure, where to write it.
 * Loaded from JSON for `render --spec`, or assembled by the per-kind
 * CLI flags.
 */

import { FIGURE_KINDS, FigureKind, SchemaError } from "./schema.js";

export type AxisScale = "linear" | "log";

export interface FigureSpec {
  kind: FigureKind;
  /** One CSV, or several for kinds that overlay multiple files. */
  input: string[];
  output: string;
  xscale?: AxisScale;
  yscale?: AxisScale;
  title?: string;
}

export function loadSpec(jsonText: string, name: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(jsonText);
  } catch (e) {
    throw new SchemaError(`${name}: not valid JSON: ${(e as Error).message}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new SchemaError(`${name}: spec must be a JSON object`);
  }
  const obj = raw as Record<string, unknown>;

  const kind = obj.kind;
  if (typeof kind !== "string" || !FIGURE_KINDS.includes(kind as FigureKind)) {
    throw new SchemaError(
      `${name}: "kind" must be one of ${FIGURE_KINDS.join(", ")}`,
    );
  }
  const input = typeof obj.input === "string" ? [obj.input] : obj.input;
  if (!Array.isArray(input) || input.length === 0 || input.some((p) => typeof p !== "string")) {
    throw new SchemaError(`${name}: "input" must be a CSV path or a list of paths`);
  }
  if (typeof obj.output !== "string" || obj.output.length === 0) {
    throw new SchemaError(`${name}: "output" must be the SVG path to write`);
  }
  for (const axis of ["xscale", "yscale"] as const) {
    const v = obj[axis];
    if (v !== undefined && v !== "linear" && v !== "log") {
      throw new SchemaError(`${name}: "${axis}" must be "linear" or "log"`);
    }
  }
  if (obj.title !== undefined && typeof obj.title !== "string") {
    throw new SchemaError(`${name}: "title" must be a string`);
  }
  const known = new Set(["kind", "input", "output", "xscale", "yscale", "title"]);
  const extra = Object.keys(obj).filter((k) => !known.has(k));
  if (extra.length > 0) {
    throw new SchemaError(`${name}: unknown spec field(s): ${extra.join(", ")}`);
  }
  return {
    kind: kind as FigureKind,
    input: input as string[],
    output: obj.output,
    xscale: obj.xscale as AxisScale | undefined,
    yscale: obj.yscale as AxisScale | undefined,
    title: obj.title as string | undefined,
  };
}
