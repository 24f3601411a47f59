// cedeopt-plots render --csv PATH --panel objective|benefit|both --out PATH
//
// Exit codes mirror the producer CLI: 0 on success, 2 for usage errors,
// unreadable input, or a CSV that does not match the figure schema.

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseFigureCsv, SchemaError } from "./csv.js";
import { Panel, PANEL_CHOICES, renderFigure } from "./render.js";

const USAGE =
  "usage: cedeopt-plots render --csv PATH --panel objective|benefit|both --out PATH [--format svg]";

export const EXIT_OK = 0;
export const EXIT_CONFIG = 2;

interface Args {
  csv: string;
  panel: Panel;
  out: string;
}

class UsageError extends Error {}

function parseArgs(argv: string[]): Args {
  if (argv[0] !== "render") {
    throw new UsageError(argv.length === 0 ? "missing command" : `unknown command: ${argv[0]}`);
  }
  const flags = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const name = argv[i]!;
    const value = argv[i + 1];
    if (!name.startsWith("--") || value === undefined) {
      throw new UsageError(`malformed flag: ${name}`);
    }
    if (flags.has(name)) {
      throw new UsageError(`repeated flag: ${name}`);
    }
    flags.set(name, value);
  }
  for (const name of flags.keys()) {
    if (!["--csv", "--panel", "--out", "--format"].includes(name)) {
      throw new UsageError(`unknown flag: ${name}`);
    }
  }
  const csv = flags.get("--csv");
  const out = flags.get("--out");
  if (csv === undefined || out === undefined) {
    throw new UsageError("--csv and --out are required");
  }
  const panel = (flags.get("--panel") ?? "both") as Panel;
  if (!PANEL_CHOICES.includes(panel)) {
    throw new UsageError(`--panel must be one of ${PANEL_CHOICES.join("|")}`);
  }
  const format = flags.get("--format") ?? "svg";
  if (format !== "svg") {
    // keep the door labeled: png needs a rasterizer this tool stays free of
    throw new UsageError(`--format ${format} is not supported; svg only`);
  }
  return { csv, panel, out };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (error) {
    if (error instanceof UsageError) {
      console.error(`error: ${error.message}\n${USAGE}`);
      return EXIT_CONFIG;
    }
    throw error;
  }

  let text: string;
  try {
    text = readFileSync(args.csv, "utf8");
  } catch (error) {
    console.error(`error: cannot read ${args.csv}: ${(error as Error).message}`);
    return EXIT_CONFIG;
  }

  try {
    const svg = renderFigure(parseFigureCsv(text), args.panel);
    writeFileSync(args.out, svg);
  } catch (error) {
    if (error instanceof SchemaError) {
      console.error(`error: ${args.csv}: ${error.message}`);
      return EXIT_CONFIG;
    }
    throw error;
  }
  console.log(`wrote ${args.out}`);
  return EXIT_OK;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
