/**
 * Render dispatch: validate inputs against the figure kind's schema,
 * then hand the parsed tables to the kind's renderer.  All file IO is
 * here; the figure modules are pure string builders.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import { parseCsv, Table } from "./csv.js";
import { renderConvergence } from "./figures/convergence.js";
import { renderDistanceHist } from "./figures/distanceHist.js";
import { renderOverlay } from "./figures/overlay.js";
import { renderPaths } from "./figures/paths.js";
import { FigureKind, SchemaError, validateTable } from "./schema.js";
import { FigureSpec } from "./spec.js";

const WIDTH = 640;
const HEIGHT = 440;

/** Default axis scales per kind; explicit spec values win. */
const DEFAULT_XLOG: Record<FigureKind, boolean> = {
  convergence: true,
  overlay: false,
  paths: false,
  "distance-hist": false,
};

export function renderTables(spec: FigureSpec, tables: Table[]): string {
  for (const t of tables) {
    validateTable(spec.kind, t);
  }
  const xlog = spec.xscale ? spec.xscale === "log" : DEFAULT_XLOG[spec.kind];
  const ylog = spec.yscale === "log";
  const common = { title: spec.title, width: WIDTH, height: HEIGHT };

  switch (spec.kind) {
    case "convergence":
      return renderConvergence(tables, { ...common, xlog, ylog });
    case "overlay":
      if (tables.length !== 1) {
        throw new SchemaError("overlay renders exactly one CSV");
      }
      return renderOverlay(tables[0]!, { ...common, xlog, ylog });
    case "paths":
      if (tables.length !== 1) {
        throw new SchemaError("paths renders exactly one CSV");
      }
      return renderPaths(tables[0]!, common);
    case "distance-hist":
      if (tables.length !== 1) {
        throw new SchemaError("distance-hist renders exactly one CSV");
      }
      return renderDistanceHist(tables[0]!, { ...common, xlog, bins: 24 });
  }
}

/** Read the listed inputs, render, write the SVG; returns the SVG text. */
export function render(spec: FigureSpec): string {
  const tables = spec.input.map((p) =>
    parseCsv(readFileSync(p, "utf-8"), basename(p)),
  );
  const svg = renderTables(spec, tables);
  writeFileSync(spec.output, svg);
  return svg;
}
