/**
 * Deterministic SVG assembly: fixed-precision coordinates, no timestamps,
 * no randomness, so the same figure spec always yields the same bytes.
 */

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const DEFAULT_MARGIN: Margin = { top: 36, right: 24, bottom: 44, left: 58 };

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class LinearScale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {}

  at(value: number): number {
    if (this.d1 === this.d0) return (this.r0 + this.r1) / 2;
    return this.r0 + ((value - this.d0) / (this.d1 - this.d0)) * (this.r1 - this.r0);
  }

  /** Deterministic "nice" tick positions covering the domain. */
  ticks(count = 6): number[] {
    const span = this.d1 - this.d0;
    if (span <= 0) return [this.d0];
    const rawStep = span / Math.max(1, count);
    const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
    let step = mag;
    for (const m of [1, 2, 5, 10]) {
      if (m * mag >= rawStep) {
        step = m * mag;
        break;
      }
    }
    const start = Math.ceil(this.d0 / step) * step;
    const out: number[] = [];
    for (let v = start; v <= this.d1 + step * 1e-9; v += step) {
      out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
    }
    return out;
  }
}

export function extent(values: number[], pad = 0.05): [number, number] {
  const finite = values.filter(Number.isFinite);
  if (finite.length === 0) return [0, 1];
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}

export class Svg {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  line(x1: number, y1: number, x2: number, y2: number, style: string): void {
    this.raw(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${style}/>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, style: string): void {
    this.raw(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ${style}/>`,
    );
  }

  polyline(points: Array<[number, number]>, style: string): void {
    const coords = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.raw(`<polyline points="${coords}" fill="none" ${style}/>`);
  }

  path(d: string, style: string): void {
    this.raw(`<path d="${d}" ${style}/>`);
  }

  text(x: number, y: number, content: string, style = ""): void {
    this.raw(`<text x="${fmt(x)}" y="${fmt(y)}" ${style}>${esc(content)}</text>`);
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}" ` +
      `font-family="Helvetica, Arial, sans-serif" font-size="12">\n` +
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export interface Frame {
  x: LinearScale;
  y: LinearScale;
}

/** Axes, ticks, labels and a plot frame for a panel region. */
export function drawFrame(
  svg: Svg,
  region: { x0: number; y0: number; x1: number; y1: number },
  xDomain: [number, number],
  yDomain: [number, number],
  opts: { title?: string; xLabel?: string; yLabel?: string } = {},
): Frame {
  const x = new LinearScale(xDomain[0], xDomain[1], region.x0, region.x1);
  const y = new LinearScale(yDomain[0], yDomain[1], region.y1, region.y0);
  const axisStyle = 'stroke="#333" stroke-width="1"';

  svg.line(region.x0, region.y1, region.x1, region.y1, axisStyle);
  svg.line(region.x0, region.y0, region.x0, region.y1, axisStyle);

  for (const t of x.ticks()) {
    const px = x.at(t);
    svg.line(px, region.y1, px, region.y1 + 4, axisStyle);
    svg.text(px, region.y1 + 16, trimTick(t), 'text-anchor="middle" fill="#333"');
  }
  for (const t of y.ticks()) {
    const py = y.at(t);
    svg.line(region.x0 - 4, py, region.x0, py, axisStyle);
    svg.text(region.x0 - 7, py + 4, trimTick(t), 'text-anchor="end" fill="#333"');
  }
  if (opts.title) {
    svg.text(
      (region.x0 + region.x1) / 2,
      region.y0 - 8,
      opts.title,
      'text-anchor="middle" font-weight="bold" fill="#111"',
    );
  }
  if (opts.xLabel) {
    svg.text(
      (region.x0 + region.x1) / 2,
      region.y1 + 34,
      opts.xLabel,
      'text-anchor="middle" fill="#333"',
    );
  }
  if (opts.yLabel) {
    const cx = region.x0 - 42;
    const cy = (region.y0 + region.y1) / 2;
    svg.raw(
      `<text x="${fmt(cx)}" y="${fmt(cy)}" text-anchor="middle" fill="#333" ` +
        `transform="rotate(-90 ${fmt(cx)} ${fmt(cy)})">${opts.yLabel}</text>`,
    );
  }
  return { x, y };
}

function trimTick(t: number): string {
  const rounded = Math.round(t * 1e6) / 1e6;
  if (Number.isInteger(rounded)) return String(rounded);
  return String(rounded);
}
