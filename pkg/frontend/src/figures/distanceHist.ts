/**
 * Coupling-distance distributions: one histogram outline per mass on
 * shared bins, so the leftward drift of the whole distribution as the
 * mass shrinks is visible directly.  Binning is presentation, not
 * statistics: bin count and edges are fixed functions of the data.
 */

import { Table, column } from "../csv.js";
import {
  MARGIN,
  Scale,
  axes,
  color,
  extent,
  legend,
  pad,
  polyline,
  svgDocument,
} from "../svg.js";

export interface DistanceHistOptions {
  xlog: boolean;
  title?: string;
  width: number;
  height: number;
  bins: number;
}

export function renderDistanceHist(
  table: Table,
  opts: DistanceHistOptions,
): string {
  const masses = column(table, "m");
  const dist = column(table, "distance");

  const [lo, hi] = extent(dist);
  if (opts.xlog && lo <= 0) {
    throw new Error(`${table.name}: log bins need positive distances`);
  }
  const edges: number[] = [];
  for (let k = 0; k <= opts.bins; k++) {
    edges.push(
      opts.xlog
        ? lo * Math.pow(hi / lo, k / opts.bins)
        : lo + ((hi - lo) * k) / opts.bins,
    );
  }
  const binOf = (v: number): number => {
    const t = opts.xlog
      ? Math.log(v / lo) / Math.log(hi / lo)
      : (v - lo) / (hi - lo);
    return Math.min(opts.bins - 1, Math.max(0, Math.floor(t * opts.bins)));
  };

  const ladder = [...new Set(masses)]; // file order = ladder order
  const counts = new Map<number, number[]>(ladder.map((m) => [m, new Array(opts.bins).fill(0)]));
  masses.forEach((m, k) => {
    const row = counts.get(m)!;
    const b = binOf(dist[k]!);
    row[b] = (row[b] ?? 0) + 1;
  });

  const maxCount = Math.max(...ladder.map((m) => Math.max(...counts.get(m)!)));
  const xs = new Scale(pad([lo, hi], opts.xlog), [MARGIN.left, opts.width - MARGIN.right], opts.xlog);
  const ys = new Scale([0, maxCount * 1.05], [opts.height - MARGIN.bottom, MARGIN.top], false);

  const body: string[] = [
    axes(xs, ys, { x: "sup distance", y: "pairs per bin", title: opts.title }),
  ];
  ladder.forEach((m, i) => {
    const c = counts.get(m)!;
    const pts: Array<[number, number]> = [[xs.apply(edges[0]!), ys.apply(0)]];
    for (let k = 0; k < opts.bins; k++) {
      pts.push([xs.apply(edges[k]!), ys.apply(c[k]!)]);
      pts.push([xs.apply(edges[k + 1]!), ys.apply(c[k]!)]);
    }
    pts.push([xs.apply(edges[opts.bins]!), ys.apply(0)]);
    body.push(polyline(pts, color(i), 1.3));
  });
  body.push(
    legend(ladder.map((m, i) => ({ label: `m = ${m}`, color: color(i) })), opts.width - MARGIN.right - 90, MARGIN.top + 12),
  );
  return svgDocument(opts.width, opts.height, body.join(""));
}
