import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { loadCsv, requireColumns, SchemaError } from "../src/csv.js";
import { FIGURES } from "../src/figures.js";
import { main } from "../src/cli.js";
import { renderSvg } from "../src/svg.js";

const FIXTURES = join(__dirname, "..", "fixtures");
const IDS = Object.keys(FIGURES);

describe("figure builders", () => {
    for (const id of IDS) {
        it(`renders ${id} from its harness CSV`, () => {
            const table = loadCsv(join(FIXTURES, `${id}.csv`));
            const spec = FIGURES[id](table);
            const svg = renderSvg(spec);
            expect(svg).toContain("<svg");
            expect(svg).toContain("</svg>");
            // provenance embedded in both the title and the metadata block
            expect(spec.title).toContain(id);
            expect(spec.title).toContain("seed");
            expect(svg).toContain(`"experiment":"${id}"`);
            expect(svg).toContain(`"seed"`);
            expect(spec.series.length).toBeGreaterThan(0);
            for (const series of spec.series) {
                expect(series.points.length).toBeGreaterThan(0);
            }
        });
    }

    it("names the missing column on schema mismatch", () => {
        const table = loadCsv(join(FIXTURES, "ne-sweep.csv"));
        expect(() => requireColumns(table, ["n_e_star", "not_a_column"]))
            .toThrowError(/missing column: not_a_column/);
    });

    it("rejects a CSV from the wrong experiment", () => {
        const table = loadCsv(join(FIXTURES, "sca-convergence.csv"));
        expect(() => FIGURES["blind-rate"](table)).toThrowError(SchemaError);
    });
});

describe("cli", () => {
    it("renders a figure end to end", () => {
        const dir = mkdtempSync(join(tmpdir(), "fig-"));
        const out = join(dir, "fig.svg");
        const code = main(["render", "--fig", "limit-check",
            "--in", join(FIXTURES, "limit-check.csv"), "--out", out]);
        expect(code).toBe(0);
        const svg = readFileSync(out, "utf-8");
        expect(svg).toContain("<metadata>");
        expect(svg).toContain("limit-check");
    });

    it("exits nonzero with the column name on schema mismatch", () => {
        const dir = mkdtempSync(join(tmpdir(), "fig-"));
        const bad = join(dir, "bad.csv");
        writeFileSync(bad, "experiment,n_e,seed\nlimit-check,8,0\n");
        const out = join(dir, "fig.svg");
        const code = main(["render", "--fig", "limit-check", "--in", bad, "--out", out]);
        expect(code).toBe(2);
    });

    it("exits nonzero on unknown figure id", () => {
        expect(main(["render", "--fig", "nope", "--in", "x.csv", "--out", "y.svg"])).toBe(1);
    });

    it("exits nonzero on bad usage", () => {
        expect(main(["render", "--fig", "limit-check"])).toBe(1);
    });
});

describe("rendering is read-only over the CSV", () => {
    it("asymptotic line uses only the reference rows", () => {
        const table = loadCsv(join(FIXTURES, "concentration.csv"));
        const spec = FIGURES["concentration"](table);
        const asymSeries = spec.series.filter((s) => s.label.startsWith("asymptotic"));
        const refRows = table.rows.filter((r) => r.kind === "asymptotic");
        const plotted = asymSeries.reduce((n, s) => n + s.points.length, 0);
        expect(plotted).toBe(refRows.length);
        const values = new Set(refRows.map((r) => Number(r.value)));
        for (const series of asymSeries) {
            for (const [, y] of series.points) {
                expect(values.has(y)).toBe(true);
            }
        }
    });
});
