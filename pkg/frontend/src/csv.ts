import { readFileSync } from "fs";

export interface Table {
  columns: string[];
  rows: number[][];
}

/** Parse numeric CSV text with a header line. */
export function parseCsv(text: string, source = "<string>"): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.trim() !== "");
  const header = lines[0];
  if (header === undefined) {
    throw new Error(`no rows in ${source}`);
  }
  const columns = header.split(",").map((name) => name.trim());
  const rows: number[][] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `row width ${cells.length} does not match ${columns.length} columns in ${source}`,
      );
    }
    rows.push(cells.map(Number));
  }
  if (rows.length === 0) {
    throw new Error(`no rows in ${source}`);
  }
  return { columns, rows };
}

export function readTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"), path);
}

/** Column values by name; the error names the missing column. */
export function column(table: Table, name: string): number[] {
  const index = table.columns.indexOf(name);
  if (index < 0) {
    throw new Error(
      `missing column ${name} (have: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((row) => row[index]!);
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    column(table, name);
  }
}
