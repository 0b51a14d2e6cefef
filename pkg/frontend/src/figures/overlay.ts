/**
 * Overlay figure: every named series against the common x column in a
 * main panel, plus a residual subpanel showing each later series minus
 * the first one (the first series is the reference curve, typically
 * the closed form or the oracle).
 *
 * A column named "stderr" is not a series: it attaches error bars to
 * the series immediately before it in the header.
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
  pad,
  polyline,
  svgDocument,
} from "../svg.js";

export interface OverlayOptions {
  xlog: boolean;
  ylog: boolean;
  title?: string;
  width: number;
  height: number;
}

interface Series {
  label: string;
  values: number[];
  stderr?: number[];
}

function splitSeries(table: Table): Series[] {
  const out: Series[] = [];
  for (const name of table.header) {
    if (name === "x") continue;
    if (name === "stderr") {
      if (out.length === 0) continue;
      out[out.length - 1]!.stderr = column(table, name);
      continue;
    }
    out.push({ label: name, values: column(table, name) });
  }
  return out;
}

export function renderOverlay(table: Table, opts: OverlayOptions): string {
  const x = column(table, "x");
  const series = splitSeries(table);
  const ref = series[0]!;

  const mainH = series.length > 1 ? Math.round(opts.height * 0.62) : opts.height;
  const xRange: [number, number] = [MARGIN.left, opts.width - MARGIN.right];
  const xsDomain = pad(extent(x), opts.xlog);
  const xs = new Scale(xsDomain, xRange, opts.xlog);

  const mainVals = series.flatMap((s) =>
    s.stderr ? s.values.flatMap((v, k) => [v - s.stderr![k]!, v + s.stderr![k]!]) : s.values,
  );
  const ys = new Scale(pad(extent(mainVals), opts.ylog), [mainH - MARGIN.bottom, MARGIN.top], opts.ylog);

  const body: string[] = [axes(xs, ys, { y: "value", title: opts.title, x: series.length > 1 ? undefined : "x" })];
  series.forEach((s, i) => {
    const c = color(i);
    if (s.stderr) {
      x.forEach((xv, k) => {
        body.push(
          errorBar(xs.apply(xv), ys.apply(s.values[k]! - s.stderr![k]!), ys.apply(s.values[k]! + s.stderr![k]!), c),
        );
      });
    }
    body.push(polyline(x.map((xv, k) => [xs.apply(xv), ys.apply(s.values[k]!)]), c));
  });
  body.push(legend(series.map((s, i) => ({ label: s.label, color: color(i) })), MARGIN.left + 8, MARGIN.top + 12));

  if (series.length > 1) {
    // residual subpanel, linear y: differences are signed
    const residuals = series.slice(1).map((s) => s.values.map((v, k) => v - ref.values[k]!));
    const rVals = residuals.flat().concat([0]);
    const rs = new Scale(pad(extent(rVals), false), [opts.height - MARGIN.bottom, mainH + 8], false);
    const xs2 = new Scale(xsDomain, xRange, opts.xlog);
    body.push(axes(xs2, rs, { x: "x", y: `minus ${ref.label}` }));
    body.push(
      polyline(
        [
          [xRange[0], rs.apply(0)],
          [xRange[1], rs.apply(0)],
        ],
        "#aaaaaa",
        0.8,
      ),
    );
    residuals.forEach((r, i) => {
      body.push(polyline(x.map((xv, k) => [xs2.apply(xv), rs.apply(r[k]!)]), color(i + 1)));
    });
  }
  return svgDocument(opts.width, opts.height, body.join(""));
}
