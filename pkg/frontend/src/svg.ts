/**
 * Minimal deterministic SVG plotting: linear/log2 scales, axes with ticks,
 * polylines, scatter marks and a shaded band. No DOM, just strings.
 */

export interface Extent {
    min: number;
    max: number;
}

export function extend(values: number[], pad = 0.05): Extent {
    let min = Math.min(...values);
    let max = Math.max(...values);
    if (min === max) {
        min -= 0.5;
        max += 0.5;
    }
    const span = max - min;
    return { min: min - pad * span, max: max + pad * span };
}

export class Scale {
    constructor(
        readonly domain: Extent,
        readonly range: Extent,
        readonly log2 = false,
    ) {}

    at(x: number): number {
        const t = this.log2 ? Math.log2(x) : x;
        const d0 = this.log2 ? Math.log2(this.domain.min) : this.domain.min;
        const d1 = this.log2 ? Math.log2(this.domain.max) : this.domain.max;
        return this.range.min + ((t - d0) / (d1 - d0)) * (this.range.max - this.range.min);
    }

    ticks(count = 6): number[] {
        if (this.log2) {
            const lo = Math.ceil(Math.log2(this.domain.min));
            const hi = Math.floor(Math.log2(this.domain.max));
            const out: number[] = [];
            for (let e = lo; e <= hi; e++) out.push(2 ** e);
            return out;
        }
        const span = this.domain.max - this.domain.min;
        const step = niceStep(span / count);
        const out: number[] = [];
        for (let v = Math.ceil(this.domain.min / step) * step; v <= this.domain.max + 1e-12; v += step) {
            out.push(Number(v.toPrecision(12)));
        }
        return out;
    }
}

function niceStep(raw: number): number {
    const mag = 10 ** Math.floor(Math.log10(raw));
    const unit = raw / mag;
    if (unit <= 1) return mag;
    if (unit <= 2) return 2 * mag;
    if (unit <= 5) return 5 * mag;
    return 10 * mag;
}

const WIDTH = 640;
const HEIGHT = 440;
const MARGIN = { left: 70, right: 20, top: 50, bottom: 55 };

export const PALETTE = ["#c0392b", "#2c3e50", "#2980b9", "#27ae60", "#8e44ad", "#d35400"];

export interface Series {
    label: string;
    color: string;
    points: Array<[number, number]>;
    kind: "line" | "scatter" | "dashed";
}

export interface Band {
    points: Array<[number, number, number]>; // x, low, high
    color: string;
}

export interface FigureSpec {
    title: string;
    metadata: Record<string, string>;
    xLabel: string;
    yLabel: string;
    series: Series[];
    band?: Band;
    xLog2?: boolean;
}

function esc(text: string): string {
    return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderSvg(spec: FigureSpec): string {
    const xs = spec.series.flatMap((s) => s.points.map((p) => p[0]));
    const ys = spec.series.flatMap((s) => s.points.map((p) => p[1]));
    if (spec.band) {
        xs.push(...spec.band.points.map((p) => p[0]));
        ys.push(...spec.band.points.map((p) => p[1]), ...spec.band.points.map((p) => p[2]));
    }
    const finiteYs = ys.filter(Number.isFinite);
    const x = new Scale(
        spec.xLog2 ? { min: Math.min(...xs), max: Math.max(...xs) } : extend(xs),
        { min: MARGIN.left, max: WIDTH - MARGIN.right },
        spec.xLog2 ?? false,
    );
    const y = new Scale(extend(finiteYs), { min: HEIGHT - MARGIN.bottom, max: MARGIN.top });

    const parts: string[] = [];
    parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`);
    parts.push(`<metadata>${esc(JSON.stringify(spec.metadata))}</metadata>`);
    parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
    parts.push(`<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">${esc(spec.title)}</text>`);

    // axes
    const x0 = MARGIN.left;
    const y0 = HEIGHT - MARGIN.bottom;
    parts.push(`<line x1="${x0}" y1="${y0}" x2="${WIDTH - MARGIN.right}" y2="${y0}" stroke="black"/>`);
    parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${MARGIN.top}" stroke="black"/>`);
    for (const t of x.ticks()) {
        const px = x.at(t);
        parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="black"/>`);
        parts.push(`<text x="${px}" y="${y0 + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${t}</text>`);
    }
    for (const t of y.ticks()) {
        const py = y.at(t);
        parts.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`);
        parts.push(`<text x="${x0 - 9}" y="${py + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${t}</text>`);
    }
    parts.push(`<text x="${(x0 + WIDTH - MARGIN.right) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">${esc(spec.xLabel)}</text>`);
    parts.push(`<text x="18" y="${(MARGIN.top + y0) / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${(MARGIN.top + y0) / 2})">${esc(spec.yLabel)}</text>`);

    if (spec.band) {
        const fwd = spec.band.points.map(([bx, lo]) => `${x.at(bx)},${y.at(lo)}`);
        const back = [...spec.band.points].reverse().map(([bx, , hi]) => `${x.at(bx)},${y.at(hi)}`);
        parts.push(`<polygon points="${[...fwd, ...back].join(" ")}" fill="${spec.band.color}" opacity="0.25"/>`);
    }

    for (const series of spec.series) {
        const pts = series.points.filter((p) => Number.isFinite(p[1]));
        if (series.kind === "scatter") {
            for (const [sx, sy] of pts) {
                parts.push(`<circle cx="${x.at(sx)}" cy="${y.at(sy)}" r="2.4" fill="${series.color}" opacity="0.45"/>`);
            }
        } else {
            const path = pts.map(([sx, sy]) => `${x.at(sx)},${y.at(sy)}`).join(" ");
            const dash = series.kind === "dashed" ? ` stroke-dasharray="7 4"` : "";
            parts.push(`<polyline points="${path}" fill="none" stroke="${series.color}" stroke-width="2"${dash}/>`);
            for (const [sx, sy] of pts) {
                parts.push(`<circle cx="${x.at(sx)}" cy="${y.at(sy)}" r="2.6" fill="${series.color}"/>`);
            }
        }
    }

    // legend
    let ly = MARGIN.top + 8;
    for (const series of spec.series) {
        const lx = WIDTH - MARGIN.right - 190;
        parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" stroke="${series.color}" stroke-width="2"${series.kind === "dashed" ? ` stroke-dasharray="7 4"` : ""}/>`);
        parts.push(`<text x="${lx + 32}" y="${ly + 4}" font-family="sans-serif" font-size="12">${esc(series.label)}</text>`);
        ly += 18;
    }

    parts.push("</svg>");
    return parts.join("\n");
}
