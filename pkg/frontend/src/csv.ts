/**
 * Minimal CSV reader for the experiment output files.
 *
 * The producer writes plain ASCII, comma separated, one header row,
 * floats via repr() — no quoting, no escapes.  Anything else is a
 * malformed input and should fail loudly rather than render garbage.
 */

export class DataError extends Error {}

export interface Table {
  /** File name or label, used in error messages and legends. */
  name: string;
  header: string[];
  /** Row-major numeric cells, same width as the header. */
  rows: number[][];
}

export function parseCsv(text: string, name: string): Table {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new DataError(`${name}: file is empty`);
  }
  const header = lines[0]!.split(",").map((h) => h.trim());
  if (header.some((h) => h.length === 0)) {
    throw new DataError(`${name}: blank column name in header`);
  }
  if (lines.length === 1) {
    throw new DataError(`${name}: no data rows`);
  }
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i]!.split(",");
    if (cells.length !== header.length) {
      throw new DataError(
        `${name}: row ${i} has ${cells.length} cells, header has ${header.length}`,
      );
    }
    const row = cells.map((c, j) => {
      const v = Number(c);
      if (!Number.isFinite(v)) {
        throw new DataError(
          `${name}: row ${i}, column "${header[j]}": not a finite number: "${c}"`,
        );
      }
      return v;
    });
    rows.push(row);
  }
  return { name, header, rows };
}

/** Column values by header name; throws if the column is absent. */
export function column(table: Table, name: string): number[] {
  const j = table.header.indexOf(name);
  if (j < 0) {
    throw new DataError(`${table.name}: missing column "${name}"`);
  }
  return table.rows.map((r) => r[j]!);
}
