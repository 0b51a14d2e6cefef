/**
 * Sample-path portraits.  The CSV stores step-function vertices (the
 * position after each jump, plus the endpoint row); the renderer
 * reconstructs the holds, so jumps appear as vertical segments.  For
 * multi-dimensional paths the first component is drawn.
 */

import { Table, column } from "../csv.js";
import {
  MARGIN,
  Scale,
  axes,
  color,
  extent,
  pad,
  polyline,
  svgDocument,
} from "../svg.js";

export interface PathsOptions {
  title?: string;
  width: number;
  height: number;
}

export function renderPaths(table: Table, opts: PathsOptions): string {
  const ids = column(table, "path");
  const t = column(table, "t");
  const v = column(table, "x1");

  const byPath = new Map<number, Array<[number, number]>>();
  ids.forEach((id, k) => {
    if (!byPath.has(id)) byPath.set(id, []);
    byPath.get(id)!.push([t[k]!, v[k]!]);
  });

  const xs = new Scale(pad(extent(t), false), [MARGIN.left, opts.width - MARGIN.right], false);
  const ys = new Scale(pad(extent(v), false), [opts.height - MARGIN.bottom, MARGIN.top], false);

  const body: string[] = [axes(xs, ys, { x: "t", y: "X(t)", title: opts.title })];
  let i = 0;
  for (const [, vertices] of [...byPath.entries()].sort((a, b) => a[0] - b[0])) {
    const pts: Array<[number, number]> = [];
    vertices.forEach(([tv, xv], k) => {
      if (k > 0) pts.push([xs.apply(tv), ys.apply(vertices[k - 1]![1])]); // hold
      pts.push([xs.apply(tv), ys.apply(xv)]);
    });
    body.push(polyline(pts, color(i++), 1.2));
  }
  return svgDocument(opts.width, opts.height, body.join(""));
}
