import { readFileSync } from "node:fs";

export interface Table {
  columns: string[];
  rows: string[][];
  /** leading '#' comment lines, stripped of the marker */
  comments: string[];
}

export class SchemaError extends Error {}

/** Parse one of the harness CSV files: LF lines, optional leading '#'
 *  comments, one header row, no quoting (the writers never emit commas
 *  inside fields). */
export function parseCsv(text: string): Table {
  const lines = text.split("\n");
  const comments: string[] = [];
  let i = 0;
  while (i < lines.length && lines[i].startsWith("#")) {
    comments.push(lines[i].slice(1).trim());
    i++;
  }
  if (i >= lines.length || lines[i].trim() === "") {
    throw new SchemaError("csv has no header row");
  }
  const columns = lines[i].split(",");
  const rows: string[][] = [];
  for (i++; i < lines.length; i++) {
    if (lines[i] === "") continue; // trailing newline
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new SchemaError(
        `row ${rows.length + 1} has ${parts.length} fields, expected ${columns.length}`,
      );
    }
    rows.push(parts);
  }
  return { columns, rows, comments };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

/** Column accessor that names the file in its failure message. */
export function columnIndex(table: Table, name: string, file: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `${file}: missing column '${name}' (found: ${table.columns.join(", ")})`,
    );
  }
  return idx;
}

export function requireColumns(table: Table, names: string[], file: string): void {
  for (const name of names) columnIndex(table, name, file);
}
