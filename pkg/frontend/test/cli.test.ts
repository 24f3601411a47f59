import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { fileURLToPath } from "node:url";
import { join } from "node:path";
import { afterEach, describe, expect, it, vi } from "vitest";

import { EXIT_CONFIG, EXIT_OK, main } from "../src/cli.js";

const GOLDEN2 = fileURLToPath(new URL("./golden/figure2.csv", import.meta.url));
const GOLDEN3 = fileURLToPath(new URL("./golden/figure3.csv", import.meta.url));

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

describe("cedeopt-plots render", () => {
  afterEach(() => {
    vi.restoreAllMocks();
  });

  it("renders both golden figures byte-identically across runs", () => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    const dir = tmp();
    for (const csv of [GOLDEN2, GOLDEN3]) {
      const first = join(dir, "first.svg");
      const second = join(dir, "second.svg");
      expect(main(["render", "--csv", csv, "--panel", "both", "--out", first])).toBe(EXIT_OK);
      expect(main(["render", "--csv", csv, "--panel", "both", "--out", second])).toBe(EXIT_OK);
      const a = readFileSync(first);
      expect(a.equals(readFileSync(second))).toBe(true);
      expect(a.toString("utf8")).toContain("<svg");
    }
  });

  it("honors the panel flag and defaults to both", () => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    const dir = tmp();
    const out = join(dir, "one.svg");
    expect(main(["render", "--csv", GOLDEN2, "--panel", "benefit", "--out", out])).toBe(EXIT_OK);
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain('data-metric="benefit"');
    expect(svg).not.toContain('data-metric="objective"');

    const both = join(dir, "default.svg");
    expect(main(["render", "--csv", GOLDEN2, "--out", both])).toBe(EXIT_OK);
    expect(readFileSync(both, "utf8")).toContain('data-metric="objective"');
  });

  it("accepts an empty-but-valid csv and draws blank axes", () => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    const dir = tmp();
    const csv = join(dir, "empty.csv");
    writeFileSync(csv, "sweep_value,regime,objective,benefit\n");
    const out = join(dir, "empty.svg");
    expect(main(["render", "--csv", csv, "--out", out])).toBe(EXIT_OK);
    expect(readFileSync(out, "utf8")).not.toContain("<polyline");
  });

  it("fails fast on a schema mismatch", () => {
    const errors = vi.spyOn(console, "error").mockImplementation(() => {});
    const dir = tmp();
    const csv = join(dir, "bad.csv");
    writeFileSync(csv, "sweep_value,regime,objective\n0.5,IID,1\n");
    expect(main(["render", "--csv", csv, "--out", join(dir, "x.svg")])).toBe(EXIT_CONFIG);
    expect(errors.mock.calls[0]?.[0]).toMatch(/missing columns: benefit/);
  });

  it("rejects bad usage", () => {
    vi.spyOn(console, "error").mockImplementation(() => {});
    const dir = tmp();
    expect(main([])).toBe(EXIT_CONFIG);
    expect(main(["draw"])).toBe(EXIT_CONFIG);
    expect(main(["render", "--csv", GOLDEN2])).toBe(EXIT_CONFIG);
    expect(main(["render", "--csv", GOLDEN2, "--panel", "all", "--out", "x"])).toBe(EXIT_CONFIG);
    expect(main(["render", "--csv", GOLDEN2, "--out"])).toBe(EXIT_CONFIG);
    expect(
      main(["render", "--csv", GOLDEN2, "--format", "png", "--out", "x.png"]),
    ).toBe(EXIT_CONFIG);
    expect(
      main(["render", "--csv", join(dir, "missing.csv"), "--out", join(dir, "x.svg")]),
    ).toBe(EXIT_CONFIG);
  });
});
