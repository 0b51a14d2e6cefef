import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { parseCsv } from "../src/csv.js";
import { render, renderTables } from "../src/render.js";
import { FigureSpec } from "../src/spec.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture(name: string) {
  return parseCsv(readFileSync(join(FIXTURES, name), "utf-8"), name);
}

function spec(kind: FigureSpec["kind"], inputs: string[], extra: Partial<FigureSpec> = {}): FigureSpec {
  return {
    kind,
    input: inputs.map((n) => join(FIXTURES, n)),
    output: join(mkdtempSync(join(tmpdir(), "plots-")), "out.svg"),
    ...extra,
  };
}

/** Marker y-positions in document order, for monotonicity checks. */
function markerYs(svg: string): number[] {
  return [...svg.matchAll(/<circle class="pt" cx="[^"]*" cy="([^"]*)"/g)].map(
    (m) => Number(m[1]),
  );
}

describe("every experiment CSV family renders", () => {
  const cases: Array<[FigureSpec["kind"], string]> = [
    ["convergence", "ks_convergence.csv"],
    ["convergence", "sup_convergence.csv"],
    ["convergence", "l2_convergence.csv"],
    ["convergence", "medians.csv"],
    ["overlay", "kernel_overlay_m1.csv"],
    ["overlay", "fk_overlay_m1.csv"],
    ["overlay", "cdf_overlay.csv"],
    ["paths", "paths.csv"],
    ["distance-hist", "distances.csv"],
  ];
  for (const [kind, file] of cases) {
    it(`${kind} <- ${file}`, () => {
      const s = spec(kind, [file]);
      const svg = render(s);
      expect(svg.startsWith("<svg")).toBe(true);
      expect(readFileSync(s.output, "utf-8")).toBe(svg);
    });
  }
});

describe("determinism", () => {
  it("identical inputs produce identical bytes", () => {
    const tables = [fixture("ks_convergence.csv")];
    const s: FigureSpec = {
      kind: "convergence",
      input: [],
      output: "",
      title: "endpoint distance",
    };
    expect(renderTables(s, tables)).toBe(renderTables(s, tables));
  });
});

describe("convergence figures", () => {
  it("draws error bars from the stderr column", () => {
    const svg = renderTables(
      { kind: "convergence", input: [], output: "" },
      [fixture("ks_convergence.csv")],
    );
    const bars = svg.match(/class="err"/g) ?? [];
    expect(bars.length).toBe(4); // one per ladder mass
  });

  it("shows the monotone trend: markers descend as mass shrinks", () => {
    // the mass ladder runs right-to-left on a log axis, and the
    // statistic decreases, so marker pixel y must increase in file
    // order (SVG y points down)
    for (const file of ["ks_convergence.csv", "sup_convergence.csv"]) {
      const svg = renderTables(
        { kind: "convergence", input: [], output: "" },
        [fixture(file)],
      );
      const ys = markerYs(svg);
      expect(ys.length).toBeGreaterThanOrEqual(3);
      for (let i = 1; i < ys.length; i++) {
        expect(ys[i]!).toBeGreaterThan(ys[i - 1]!);
      }
    }
  });

  it("overlays several ladders with a legend", () => {
    const svg = renderTables(
      { kind: "convergence", input: [], output: "" },
      [fixture("sup_convergence.csv"), fixture("l2_convergence.csv")],
    );
    expect(svg).toContain("sup_convergence");
    expect(svg).toContain("l2_convergence");
  });
});

describe("overlay figures", () => {
  it("adds a residual subpanel against the first series", () => {
    const svg = renderTables(
      { kind: "overlay", input: [], output: "" },
      [fixture("kernel_overlay_m1.csv")],
    );
    expect(svg).toContain("minus closed_form");
  });

  it("single-series overlays skip the subpanel", () => {
    const one = parseCsv("x,only\n0,1\n1,2\n", "one.csv");
    const svg = renderTables({ kind: "overlay", input: [], output: "" }, [one]);
    expect(svg).not.toContain("minus");
  });
});

describe("failure modes", () => {
  it("empty CSV fails loudly instead of rendering", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const empty = join(dir, "empty.csv");
    writeFileSync(empty, "");
    expect(() =>
      render({ kind: "convergence", input: [empty], output: join(dir, "o.svg") }),
    ).toThrow(/empty/);
  });

  it("schema mismatch names the missing column", () => {
    const wrong = parseCsv("m,ks\n1,0.1\n", "wrong.csv");
    expect(() =>
      renderTables({ kind: "convergence", input: [], output: "" }, [wrong]),
    ).toThrow(/"value"/);
  });
});
