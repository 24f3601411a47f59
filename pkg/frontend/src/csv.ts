// Reader for the figure sweep CSVs written by the cedeopt CLI.
//
// The producer never quotes cells (it refuses to write commas inside a
// cell), so splitting on commas is exact here; anything fancier would be
// parsing files this tool is not meant to consume.

export interface FigureRow {
  sweep: number;
  regime: string;
  objective: number;
  benefit: number;
}

export interface FigureData {
  rows: FigureRow[];
  /** distinct regimes in first-appearance order */
  regimes: string[];
}

export class SchemaError extends Error {}

const REQUIRED = ["sweep_value", "regime", "objective", "benefit"] as const;

function parseNumber(cell: string, column: string, line: number): number {
  const value = Number(cell);
  if (cell.trim() === "" || !Number.isFinite(value)) {
    throw new SchemaError(`line ${line}: ${column} is not a finite number: ${JSON.stringify(cell)}`);
  }
  return value;
}

export function parseFigureCsv(text: string): FigureData {
  const lines = text.split("\n");
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new SchemaError("empty file, expected a figure CSV header");
  }

  const header = (lines[0] ?? "").split(",");
  const where = new Map(header.map((name, i) => [name, i]));
  const missing = REQUIRED.filter((name) => !where.has(name));
  if (missing.length > 0) {
    throw new SchemaError(`missing columns: ${missing.join(", ")}`);
  }
  const col = (name: string) => where.get(name)!;

  const rows: FigureRow[] = [];
  const regimes: string[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = (lines[i] ?? "").split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(`line ${i + 1}: expected ${header.length} cells, got ${cells.length}`);
    }
    const regime = cells[col("regime")] ?? "";
    if (regime === "") {
      throw new SchemaError(`line ${i + 1}: empty regime`);
    }
    rows.push({
      sweep: parseNumber(cells[col("sweep_value")] ?? "", "sweep_value", i + 1),
      regime,
      objective: parseNumber(cells[col("objective")] ?? "", "objective", i + 1),
      benefit: parseNumber(cells[col("benefit")] ?? "", "benefit", i + 1),
    });
    if (!regimes.includes(regime)) {
      regimes.push(regime);
    }
  }
  return { rows, regimes };
}
