/**
 * Convergence curves: statistic vs mass, one curve per input file,
 * error bars wherever a stderr column exists.  The x axis is the mass
 * ladder and defaults to log scale, since the ladders are geometric.
 */

import { Table, column } from "../csv.js";
import {
  MARGIN,
  Scale,
  axes,
  color,
  errorBar,
  extent,
  legend,
  marker,
  pad,
  polyline,
  svgDocument,
} from "../svg.js";

export interface ConvergenceOptions {
  xlog: boolean;
  ylog: boolean;
  title?: string;
  width: number;
  height: number;
}

interface Series {
  label: string;
  m: number[];
  value: number[];
  stderr?: number[];
}

function seriesOf(table: Table): Series {
  const label = table.name.replace(/\.csv$/, "");
  const s: Series = { label, m: column(table, "m"), value: column(table, "value") };
  if (table.header.includes("stderr")) {
    s.stderr = column(table, "stderr");
  }
  return s;
}

export function renderConvergence(
  tables: Table[],
  opts: ConvergenceOptions,
): string {
  const series = tables.map(seriesOf);
  const allM = series.flatMap((s) => s.m);
  const allV = series.flatMap((s, i) =>
    s.stderr
      ? s.value.flatMap((v, k) => [v - s.stderr![k]!, v + s.stderr![k]!])
      : s.value,
  );
  const xs = new Scale(pad(extent(allM), opts.xlog), [MARGIN.left, opts.width - MARGIN.right], opts.xlog);
  const ys = new Scale(
    pad(extent(allV), opts.ylog),
    [opts.height - MARGIN.bottom, MARGIN.top],
    opts.ylog,
  );

  const body: string[] = [
    axes(xs, ys, { x: "mass m", y: "value", title: opts.title }),
  ];
  series.forEach((s, i) => {
    const c = color(i);
    // plot in ladder order so the polyline follows the mass ladder
    const pts = s.m.map((m, k): [number, number] => [xs.apply(m), ys.apply(s.value[k]!)]);
    if (s.stderr) {
      s.m.forEach((m, k) => {
        body.push(
          errorBar(
            xs.apply(m),
            ys.apply(s.value[k]! - s.stderr![k]!),
            ys.apply(s.value[k]! + s.stderr![k]!),
            c,
          ),
        );
      });
    }
    body.push(polyline(pts, c));
    pts.forEach(([px, py]) => body.push(marker(px, py, c)));
  });
  if (series.length > 1) {
    body.push(legend(series.map((s, i) => ({ label: s.label, color: color(i) })), MARGIN.left + 8, MARGIN.top + 12));
  }
  return svgDocument(opts.width, opts.height, body.join(""));
}
