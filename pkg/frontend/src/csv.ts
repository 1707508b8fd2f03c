/**
 * Minimal CSV handling for the simulator's output files.
 *
 * The files are machine-written with a fixed column schema, no quoting and
 * no embedded separators, so a split-based parser is exact. Schema
 * validation is strict: the header must match the producing tool's column
 * list bit-exactly, and the first offending column is reported by name.
 */

export class SchemaError extends Error {
  constructor(message: string, readonly column?: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface Table {
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty file: no header row");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `row ${i + 2} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    return cells;
  });
  return { columns, rows };
}

/** Enforce an exact header match; names the first offending column. */
export function requireSchema(table: Table, expected: string[]): void {
  for (let i = 0; i < expected.length; i++) {
    if (table.columns[i] !== expected[i]) {
      const offending = table.columns[i] ?? `(missing ${expected[i]})`;
      throw new SchemaError(
        `schema mismatch at column ${i + 1}: expected '${expected[i]}', ` +
          `found '${table.columns[i] ?? ""}'`,
        offending,
      );
    }
  }
  if (table.columns.length > expected.length) {
    const extra = table.columns[expected.length];
    throw new SchemaError(
      `schema mismatch: unexpected column '${extra}'`,
      extra,
    );
  }
}

export function requireRows(table: Table, what: string): void {
  if (table.rows.length === 0) {
    throw new SchemaError(`${what} contains no data rows`);
  }
}

export function column(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column '${name}'`, name);
  }
  return table.rows.map((r) => r[idx]);
}

/** Numeric column; blank cells become NaN (the writer's "absent" marker). */
export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map((cell) => (cell === "" ? NaN : Number(cell)));
}
