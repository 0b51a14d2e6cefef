export { DataError, Table, column, parseCsv } from "./csv.js";
export { FIGURE_KINDS, FigureKind, SchemaError, validateTable } from "./schema.js";
export { AxisScale, FigureSpec, loadSpec } from "./spec.js";
export { render, renderTables } from "./render.js";
