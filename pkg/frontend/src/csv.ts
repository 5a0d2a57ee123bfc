import { readFileSync } from "node:fs";
import Papa from "papaparse";

export type Row = Record<string, string>;

export class SchemaError extends Error {}

export interface Table {
    columns: string[];
    rows: Row[];
}

export function loadCsv(path: string): Table {
    const text = readFileSync(path, "utf-8");
    const parsed = Papa.parse<Row>(text.trim(), { header: true, skipEmptyLines: true });
    if (parsed.errors.length > 0) {
        throw new SchemaError(`cannot parse ${path}: ${parsed.errors[0].message}`);
    }
    const columns = parsed.meta.fields ?? [];
    return { columns, rows: parsed.data };
}

export function requireColumns(table: Table, needed: string[]): void {
    for (const column of needed) {
        if (!table.columns.includes(column)) {
            throw new SchemaError(`missing column: ${column}`);
        }
    }
}

export function num(row: Row, column: string): number {
    const raw = row[column];
    // the harness writes IEEE sentinels as inf/-inf/nan
    if (raw === "inf") return Infinity;
    if (raw === "-inf") return -Infinity;
    if (raw === "nan") return NaN;
    const value = Number(raw);
    if (Number.isNaN(value) || raw === "" || raw === undefined) {
        throw new SchemaError(`column ${column} holds non-numeric value ${JSON.stringify(raw)}`);
    }
    return value;
}

/** Distinct values of a column, in first-seen order. */
export function distinct(rows: Row[], column: string): string[] {
    const seen: string[] = [];
    for (const row of rows) {
        if (!seen.includes(row[column])) seen.push(row[column]);
    }
    return seen;
}
