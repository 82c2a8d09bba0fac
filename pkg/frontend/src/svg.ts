/**
 * Minimal deterministic SVG scene builder.
 *
 * Coordinates are always emitted with fixed decimal formatting so identical
 * inputs produce byte-identical files; nothing here depends on time, locale,
 * or object iteration order.
 */

export interface Scale {
  (value: number): number;
  ticks: number[];
}

export function linearScale(
  lo: number, hi: number, outLo: number, outHi: number, tickCount = 5,
): Scale {
  const span = hi - lo || 1;
  const fn = ((value: number) =>
    outLo + ((value - lo) / span) * (outHi - outLo)) as Scale;
  fn.ticks = niceTicks(lo, hi, tickCount);
  return fn;
}

export function log10Scale(
  lo: number, hi: number, outLo: number, outHi: number,
): Scale {
  const logLo = Math.log10(lo);
  const logHi = Math.log10(hi);
  const span = logHi - logLo || 1;
  const fn = ((value: number) =>
    outLo + ((Math.log10(value) - logLo) / span) * (outHi - outLo)) as Scale;
  const ticks: number[] = [];
  for (let p = Math.ceil(logLo); p <= Math.floor(logHi); p++) {
    ticks.push(Math.pow(10, p));
  }
  fn.ticks = ticks.length >= 2 ? ticks : [lo, hi];
  return fn;
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const nice = mult * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / nice) * nice; v <= hi + nice / 2; v += nice) {
    ticks.push(Math.abs(v) < nice * 1e-9 ? 0 : v);
  }
  return ticks;
}

const fmt = (x: number): string => x.toFixed(2);

export function fmtTick(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 0.01 && abs < 10_000) {
    return String(Number(value.toPrecision(4)));
  }
  return value.toExponential(1);
}

export class SvgScene {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5,
           dash?: string): void {
    if (points.length === 0) return;
    const attr = dash ? ` stroke-dasharray="${dash}"` : "";
    const coords = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline fill="none" stroke="${stroke}" stroke-width="${width}"${attr} points="${coords}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string,
       width = 1, dash?: string): void {
    const attr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${attr}/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(
      `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${fill}"/>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, fill: string,
       opacity = 1): void {
    const attr = opacity !== 1 ? ` fill-opacity="${opacity}"` : "";
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"${attr}/>`,
    );
  }

  text(x: number, y: number, content: string, size = 11,
       anchor: "start" | "middle" | "end" = "start", fill = "#333"): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="monospace" font-size="${size}" text-anchor="${anchor}" fill="${fill}">${escapeXml(content)}</text>`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}
