import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { parseFigureCsv } from "../src/csv.js";
import { renderFigure } from "../src/render.js";

function golden(name: string) {
  return parseFigureCsv(
    readFileSync(new URL(`./golden/${name}`, import.meta.url), "utf8"),
  );
}

function panelChunk(svg: string, metric: string): string {
  const open = svg.indexOf(`data-metric="${metric}"`);
  expect(open).toBeGreaterThan(-1);
  return svg.slice(open, svg.indexOf("</g>", open));
}

function seriesPoints(chunk: string, regime: string): Array<[number, number]> {
  const match = chunk.match(
    new RegExp(`data-regime="${regime}" points="([^"]*)"`),
  );
  expect(match).not.toBeNull();
  return match![1]!.split(" ").map((pair) => {
    const [x, y] = pair.split(",");
    return [Number(x), Number(y)];
  });
}

describe("renderFigure", () => {
  it("renders one curve per regime on both panels", () => {
    const svg = renderFigure(golden("figure2.csv"), "both");
    for (const metric of ["objective", "benefit"]) {
      const chunk = panelChunk(svg, metric);
      for (const regime of ["WorstCase", "Comonotonic", "IID"]) {
        expect(seriesPoints(chunk, regime)).toHaveLength(99);
      }
    }
    for (const regime of ["WorstCase", "Comonotonic", "IID"]) {
      expect(svg).toContain(`>${regime}</text>`);
    }
  });

  it("is deterministic for the same csv", () => {
    const a = renderFigure(golden("figure3.csv"), "both");
    const b = renderFigure(golden("figure3.csv"), "both");
    expect(a).toBe(b);
  });

  it("renders single panels on a narrower canvas", () => {
    const both = renderFigure(golden("figure2.csv"), "both");
    const one = renderFigure(golden("figure2.csv"), "objective");
    expect(one).toContain('data-metric="objective"');
    expect(one).not.toContain('data-metric="benefit"');
    const widthOf = (svg: string) => Number(svg.match(/width="(\d+)"/)![1]);
    expect(widthOf(one)).toBeLessThan(widthOf(both));
  });

  it("draws blank axes for an empty figure", () => {
    const svg = renderFigure({ rows: [], regimes: [] }, "both");
    expect(svg).toContain("<rect");
    expect(svg).toContain('data-metric="objective"');
    expect(svg).not.toContain("<polyline");
    expect(svg).not.toContain('class="legend"');
  });

  it("pins the no-trade region of the benefit panel to the zero line", () => {
    // past the point where the pooled level covers every own level, the
    // producer reports exactly zero benefit for the two additive regimes;
    // those samples must collapse onto the zero gridline
    const data = golden("figure2.csv");
    const chunk = panelChunk(renderFigure(data, "both"), "benefit");
    const sweeps = [...new Set(data.rows.map((r) => r.sweep))].sort((a, b) => a - b);
    const flatCount = sweeps.filter((s) => s >= 0.9).length;
    expect(flatCount).toBeGreaterThan(10);
    for (const regime of ["WorstCase", "Comonotonic"]) {
      const points = seriesPoints(chunk, regime);
      const tail = points.slice(points.length - flatCount);
      const ys = new Set(tail.map(([, y]) => y.toFixed(2)));
      expect(ys.size).toBe(1);
      const zeroLine = [...ys][0]!;
      expect(chunk).toContain(`class="grid" x1="58" y1="${zeroLine}"`);
    }
  });

  it("escapes markup in regime names", () => {
    const svg = renderFigure(
      {
        rows: [
          { sweep: 0, regime: "a<b", objective: 1, benefit: 0 },
          { sweep: 1, regime: "a<b", objective: 2, benefit: 1 },
        ],
        regimes: ["a<b"],
      },
      "objective",
    );
    expect(svg).toContain("a&lt;b");
    expect(svg).not.toContain('data-regime="a<b"');
  });
});
