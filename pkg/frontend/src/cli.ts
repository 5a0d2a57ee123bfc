#!/usr/bin/env node
/**
 * render --fig <id> --in <csv> --out <file>
 *
 * Exit codes: 0 rendered, 1 bad invocation, 2 schema mismatch or IO error.
 */

import { writeFileSync } from "node:fs";
import { loadCsv, SchemaError } from "./csv.js";
import { FIGURES } from "./figures.js";
import { renderSvg } from "./svg.js";

function parseArgs(argv: string[]): { fig: string; input: string; out: string } | null {
    if (argv[0] !== "render") return null;
    const opts: Record<string, string> = {};
    for (let i = 1; i < argv.length; i += 2) {
        const key = argv[i];
        const value = argv[i + 1];
        if (!key?.startsWith("--") || value === undefined) return null;
        opts[key.slice(2)] = value;
    }
    if (!opts.fig || !opts.in || !opts.out) return null;
    return { fig: opts.fig, input: opts.in, out: opts.out };
}

export function main(argv: string[]): number {
    const args = parseArgs(argv);
    if (!args) {
        console.error("usage: render --fig <id> --in <csv> --out <file>");
        console.error(`figure ids: ${Object.keys(FIGURES).join(", ")}`);
        return 1;
    }
    const builder = FIGURES[args.fig];
    if (!builder) {
        console.error(`unknown figure id: ${args.fig} (have: ${Object.keys(FIGURES).join(", ")})`);
        return 1;
    }
    try {
        const table = loadCsv(args.input);
        const svg = renderSvg(builder(table));
        writeFileSync(args.out, svg);
    } catch (err) {
        if (err instanceof SchemaError) {
            console.error(`schema error: ${err.message}`);
        } else {
            console.error(String(err));
        }
        return 2;
    }
    console.log(args.out);
    return 0;
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js") || process.argv[1]?.endsWith("cli.ts");
if (invokedDirectly) {
    process.exit(main(process.argv.slice(2)));
}
