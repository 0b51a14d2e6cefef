/**
 * Deterministic SVG assembly: fixed styles, fixed tick policy, all
 * coordinates through one formatter.  Identical inputs give identical
 * bytes, which the tests pin.
 */

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const MARGIN: Margin = { top: 36, right: 16, bottom: 44, left: 60 };

/** Colorblind-safe cycle (Okabe-Ito, without yellow on white). */
export const PALETTE = [
  "#0072b2",
  "#d55e00",
  "#009e73",
  "#cc79a7",
  "#56b4e9",
  "#e69f00",
  "#000000",
] as const;

export function color(i: number): string {
  return PALETTE[i % PALETTE.length]!;
}

/** Fixed-precision coordinate/label formatter. */
export function fmt(v: number): string {
  if (v === 0) return "0";
  const s = v.toPrecision(6);
  // strip trailing zeros without touching exponents
  return s.includes("e") ? s : s.replace(/\.?0+$/, "");
}

export class Scale {
  readonly lo: number;
  readonly hi: number;

  constructor(
    domain: [number, number],
    readonly range: [number, number],
    readonly log: boolean,
  ) {
    let [lo, hi] = domain;
    if (log && lo <= 0) {
      throw new Error(`log scale needs a positive domain, got [${lo}, ${hi}]`);
    }
    if (lo === hi) {
      // degenerate data: widen symmetrically so points still land inside
      lo = log ? lo / 2 : lo - 1;
      hi = log ? hi * 2 : hi + 1;
    }
    this.lo = lo;
    this.hi = hi;
  }

  apply(v: number): number {
    const t = this.log
      ? (Math.log(v) - Math.log(this.lo)) / (Math.log(this.hi) - Math.log(this.lo))
      : (v - this.lo) / (this.hi - this.lo);
    return this.range[0] + t * (this.range[1] - this.range[0]);
  }

  ticks(): number[] {
    if (this.log) {
      const out: number[] = [];
      const eLo = Math.ceil(Math.log10(this.lo) - 1e-9);
      const eHi = Math.floor(Math.log10(this.hi) + 1e-9);
      for (let e = eLo; e <= eHi; e++) out.push(Math.pow(10, e));
      if (out.length >= 2) return out;
      // fewer than two decades: fall back to linear ticks
    }
    const span = this.hi - this.lo;
    const raw = span / 5;
    const mag = Math.pow(10, Math.floor(Math.log10(raw)));
    const step = [1, 2, 5, 10].map((k) => k * mag).find((s) => span / s <= 6)!;
    const out: number[] = [];
    for (let v = Math.ceil(this.lo / step) * step; v <= this.hi + step * 1e-9; v += step) {
      out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
    }
    return out;
  }
}

export function pad(domain: [number, number], log: boolean): [number, number] {
  const [lo, hi] = domain;
  if (log) return [lo / 1.25, hi * 1.25];
  const span = hi - lo || 1;
  return [lo - 0.05 * span, hi + 0.05 * span];
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(lo <= hi)) throw new Error("extent of an empty value list");
  return [lo, hi];
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  body = "",
): string {
  const parts = Object.keys(attrs)
    .sort()
    .map((k) => ` ${k}="${typeof attrs[k] === "number" ? fmt(attrs[k] as number) : esc(String(attrs[k]))}"`)
    .join("");
  return body === "" ? `<${tag}${parts}/>` : `<${tag}${parts}>${body}</${tag}>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  anchor: "start" | "middle" | "end" = "start",
  size = 11,
): string {
  return el(
    "text",
    {
      x,
      y,
      "text-anchor": anchor,
      "font-family": "sans-serif",
      "font-size": size,
      fill: "#333333",
    },
    esc(content),
  );
}

export function polyline(
  pts: Array<[number, number]>,
  stroke: string,
  width = 1.5,
): string {
  const d = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return el("polyline", {
    points: d,
    fill: "none",
    stroke,
    "stroke-width": width,
  });
}

export function marker(x: number, y: number, stroke: string): string {
  return el("circle", { class: "pt", cx: x, cy: y, r: 2.6, fill: stroke, stroke: "none" });
}

/** Vertical error bar with serif caps, the classic style. */
export function errorBar(
  x: number,
  yLo: number,
  yHi: number,
  stroke: string,
): string {
  const cap = 3.5;
  return [
    el("line", { class: "err", x1: x, y1: yLo, x2: x, y2: yHi, stroke, "stroke-width": 1 }),
    el("line", { x1: x - cap, y1: yLo, x2: x + cap, y2: yLo, stroke, "stroke-width": 1 }),
    el("line", { x1: x - cap, y1: yHi, x2: x + cap, y2: yHi, stroke, "stroke-width": 1 }),
  ].join("");
}

export interface AxisLabels {
  x?: string;
  y?: string;
  title?: string;
}

/** Frame, ticks, grid lines and labels for one panel. */
export function axes(
  xs: Scale,
  ys: Scale,
  labels: AxisLabels,
): string {
  const [x0, x1] = xs.range;
  const [y0, y1] = ys.range; // y0 is the bottom (larger pixel value)
  const parts: string[] = [
    el("rect", {
      x: Math.min(x0, x1),
      y: Math.min(y0, y1),
      width: Math.abs(x1 - x0),
      height: Math.abs(y0 - y1),
      fill: "none",
      stroke: "#888888",
      "stroke-width": 1,
    }),
  ];
  for (const v of xs.ticks()) {
    const px = xs.apply(v);
    parts.push(
      el("line", { x1: px, y1: y0, x2: px, y2: y1, stroke: "#dddddd", "stroke-width": 0.6 }),
      el("line", { x1: px, y1: y0, x2: px, y2: y0 + 4, stroke: "#888888", "stroke-width": 1 }),
      text(px, y0 + 16, fmt(v), "middle", 10),
    );
  }
  for (const v of ys.ticks()) {
    const py = ys.apply(v);
    parts.push(
      el("line", { x1: x0, y1: py, x2: x1, y2: py, stroke: "#dddddd", "stroke-width": 0.6 }),
      el("line", { x1: x0 - 4, y1: py, x2: x0, y2: py, stroke: "#888888", "stroke-width": 1 }),
      text(x0 - 7, py + 3.5, fmt(v), "end", 10),
    );
  }
  if (labels.x) parts.push(text((x0 + x1) / 2, y0 + 34, labels.x, "middle"));
  if (labels.y) {
    const cx = x0 - 44;
    const cy = (y0 + y1) / 2;
    parts.push(
      el(
        "g",
        { transform: `rotate(-90 ${fmt(cx)} ${fmt(cy)})` },
        text(cx, cy, labels.y, "middle"),
      ),
    );
  }
  if (labels.title) parts.push(text((x0 + x1) / 2, Math.min(y0, y1) - 10, labels.title, "middle", 13));
  return parts.join("");
}

export function legend(
  entries: Array<{ label: string; color: string }>,
  x: number,
  y: number,
): string {
  return entries
    .map((e, i) =>
      [
        el("line", {
          x1: x,
          y1: y + 15 * i,
          x2: x + 18,
          y2: y + 15 * i,
          stroke: e.color,
          "stroke-width": 2,
        }),
        text(x + 23, y + 15 * i + 3.5, e.label, "start", 10),
      ].join(""),
    )
    .join("");
}

export function svgDocument(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">` +
    el("rect", { x: 0, y: 0, width, height, fill: "#ffffff" }) +
    body +
    "</svg>\n"
  );
}
