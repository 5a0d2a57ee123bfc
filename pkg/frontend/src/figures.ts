/**
 * One builder per figure id. Builders only reshape CSV rows into series;
 * all science lives upstream in the simulator.
 */

import { distinct, num, requireColumns, Row, SchemaError, Table } from "./csv.js";
import { FigureSpec, PALETTE, Series } from "./svg.js";

export type Builder = (table: Table) => FigureSpec;

function provenance(rows: Row[], experiment: string): Record<string, string> {
    const seeds = distinct(rows, "seed");
    return { experiment, seed: seeds.join("/") };
}

function titleWithProvenance(base: string, meta: Record<string, string>): string {
    return `${base}  [${meta.experiment}, seed ${meta.seed}]`;
}

function sortedBy(rows: Row[], column: string): Row[] {
    return [...rows].sort((a, b) => num(a, column) - num(b, column));
}

function buildConcentration(table: Table): FigureSpec {
    requireColumns(table, ["experiment", "kind", "n_e", "p_db", "value", "seed"]);
    const meta = provenance(table.rows, "concentration");
    const series: Series[] = [];
    distinct(table.rows, "n_e").forEach((ne, i) => {
        const group = table.rows.filter((r) => r.n_e === ne);
        const mc = group.filter((r) => r.kind === "mc");
        const asym = sortedBy(group.filter((r) => r.kind === "asymptotic"), "p_db");
        series.push({
            label: `exact draws, n_e=${ne}`,
            color: PALETTE[(2 * i + 1) % PALETTE.length],
            kind: "scatter",
            points: mc.map((r) => [num(r, "p_db"), num(r, "value")]),
        });
        series.push({
            label: `asymptotic, n_e=${ne}`,
            color: PALETTE[(2 * i) % PALETTE.length],
            kind: "line",
            points: asym.map((r) => [num(r, "p_db"), num(r, "value")]),
        });
    });
    return {
        title: titleWithProvenance("Eve rate per antenna: draws vs asymptote", meta),
        metadata: meta,
        xLabel: "transmit power (dB)",
        yLabel: "rate / n_e (bits)",
        series,
    };
}

function buildNeSweep(table: Table): FigureSpec {
    requireColumns(table, ["experiment", "metric", "n_a", "n_e_star", "seed"]);
    const meta = provenance(table.rows, "ne-sweep");
    const series: Series[] = distinct(table.rows, "metric").map((metric, i) => ({
        label: metric === "optimized" ? "optimized allocation" : "fixed allocation",
        color: PALETTE[i % PALETTE.length],
        kind: "line" as const,
        points: sortedBy(table.rows.filter((r) => r.metric === metric), "n_a")
            .map((r) => [num(r, "n_a"), num(r, "n_e_star")]),
    }));
    return {
        title: titleWithProvenance("Max tolerable Eve antennas vs n_a", meta),
        metadata: meta,
        xLabel: "n_a (with n_b = n_a/2)",
        yLabel: "max tolerable n_e",
        series,
    };
}

function buildScaConvergence(table: Table): FigureSpec {
    requireColumns(table, ["experiment", "kind", "n_a", "mean", "ci_lo", "ci_hi", "seed"]);
    const meta = provenance(table.rows, "sca-convergence");
    const summary = sortedBy(table.rows.filter((r) => r.kind === "summary"), "n_a");
    if (summary.length === 0) {
        throw new SchemaError("missing column: mean (no summary rows)");
    }
    return {
        title: titleWithProvenance("Iterations to converge (mean, 95% CI)", meta),
        metadata: meta,
        xLabel: "n_a",
        yLabel: "iterations",
        band: {
            color: PALETTE[1],
            points: summary.map((r) => [num(r, "n_a"), num(r, "ci_lo"), num(r, "ci_hi")]),
        },
        series: [{
            label: "mean iterations",
            color: PALETTE[1],
            kind: "line",
            points: summary.map((r) => [num(r, "n_a"), num(r, "mean")]),
        }],
    };
}

function buildLimitCheck(table: Table): FigureSpec {
    requireColumns(table, ["experiment", "n_e", "rate_eve_asymptotic", "rate_eve_limit", "seed"]);
    const meta = provenance(table.rows, "limit-check");
    const rows = sortedBy(table.rows, "n_e");
    return {
        title: titleWithProvenance("Eve rate: asymptotic vs large-antenna limit", meta),
        metadata: meta,
        xLabel: "n_e",
        yLabel: "rate (bits)",
        xLog2: true,
        series: [
            {
                label: "asymptotic rate",
                color: PALETTE[0],
                kind: "line",
                points: rows.map((r) => [num(r, "n_e"), num(r, "rate_eve_asymptotic")]),
            },
            {
                label: "limit",
                color: PALETTE[1],
                kind: "dashed",
                points: rows.map((r) => [num(r, "n_e"), num(r, "rate_eve_limit")]),
            },
        ],
    };
}

function buildBlindRate(table: Table): FigureSpec {
    requireColumns(table, ["experiment", "n_a", "k2", "r_ae2", "r_ae_known_csi", "seed"]);
    const meta = provenance(table.rows, "blind-rate");
    const rows = sortedBy(table.rows, "k2");
    const ratio = (r: Row) => num(r, "k2") / num(r, "n_a");
    return {
        title: titleWithProvenance("Eve's blind vs informed rate", meta),
        metadata: meta,
        xLabel: "k2 / n_a",
        yLabel: "rate (bits/sample)",
        series: [
            {
                label: "blind detection",
                color: PALETTE[0],
                kind: "line",
                points: rows.map((r) => [ratio(r), num(r, "r_ae2")]),
            },
            {
                label: "known CSI",
                color: PALETTE[1],
                kind: "dashed",
                points: rows.map((r) => [ratio(r), num(r, "r_ae_known_csi")]),
            },
        ],
    };
}

function buildBlindSecrecy(table: Table): FigureSpec {
    requireColumns(table, ["experiment", "n_e", "secrecy_blind", "secrecy_known", "seed"]);
    const meta = provenance(table.rows, "blind-secrecy");
    const rows = sortedBy(table.rows, "n_e");
    return {
        title: titleWithProvenance("Secrecy vs Eve antennas (blind vs informed Eve)", meta),
        metadata: meta,
        xLabel: "n_e",
        yLabel: "secrecy rate (bits)",
        series: [
            {
                label: "Eve blind (after ANECE)",
                color: PALETTE[0],
                kind: "line",
                points: rows.map((r) => [num(r, "n_e"), num(r, "secrecy_blind")]),
            },
            {
                label: "Eve knows CSI",
                color: PALETTE[1],
                kind: "dashed",
                points: rows.map((r) => [num(r, "n_e"), num(r, "secrecy_known")]),
            },
        ],
    };
}

export const FIGURES: Record<string, Builder> = {
    concentration: buildConcentration,
    "ne-sweep": buildNeSweep,
    "sca-convergence": buildScaConvergence,
    "limit-check": buildLimitCheck,
    "blind-rate": buildBlindRate,
    "blind-secrecy": buildBlindSecrecy,
};
