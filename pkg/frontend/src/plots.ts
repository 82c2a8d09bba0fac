/**
 * Report renderers: time-series panels and the amplitude phase strip.
 *
 * Series output: norms.svg (sup/L2/mean norms on a log axis, with the exact
 * damped-mean curve overlaid and its residual annotated), phi.svg (mixing
 * ratio with an optional flagging threshold line), max.svg (running density
 * maximum; when a kernel constant c0 is supplied the admissible-slope region
 * from the growth bound -m + c0 m^2 is shaded).
 */

import { SeriesTable, SweepRow } from "./series.js";
import { SvgScene, Scale, fmtTick, linearScale, log10Scale } from "./svg.js";

const W = 720;
const H = 400;
const M = { left: 70, right: 120, top: 30, bottom: 45 };

const COLORS: Record<string, string> = {
  linf: "#c0392b",
  l2: "#2980b9",
  mean: "#27ae60",
  overlay: "#111111",
  phi: "#8e44ad",
  threshold: "#c0392b",
  max: "#c0392b",
  bound: "#f1c40f",
};

const CLASS_COLORS: Record<string, string> = {
  "resolved-horizon": "#27ae60",
  "blowup-suspected": "#c0392b",
  "under-resolved": "#e67e22",
  "nan-abort": "#7f8c8d",
  error: "#34495e",
};

export interface SeriesPlotOptions {
  phiThreshold?: number;
  c0?: number;
}

function frame(scene: SvgScene, x: Scale, y: Scale, xLabel: string,
               yLabel: string, logY: boolean): void {
  scene.line(M.left, H - M.bottom, W - M.right, H - M.bottom, "#333");
  scene.line(M.left, M.top, M.left, H - M.bottom, "#333");
  for (const tick of x.ticks) {
    const px = x(tick);
    scene.line(px, H - M.bottom, px, H - M.bottom + 4, "#333");
    scene.text(px, H - M.bottom + 16, fmtTick(tick), 10, "middle");
  }
  for (const tick of y.ticks) {
    const py = y(tick);
    scene.line(M.left - 4, py, M.left, py, "#333");
    scene.line(M.left, py, W - M.right, py, "#eee");
    scene.text(M.left - 7, py + 3, fmtTick(tick), 10, "end");
  }
  scene.text((M.left + W - M.right) / 2, H - 8, xLabel, 11, "middle");
  scene.text(12, M.top - 10, logY ? `${yLabel} (log)` : yLabel, 11, "start");
}

function positive(values: number[]): number[] {
  return values.filter((v) => Number.isFinite(v) && v > 0);
}

function lineOf(scene: SvgScene, t: number[], values: number[], x: Scale,
                y: Scale, color: string, logY: boolean, dash?: string): void {
  const pts: Array<[number, number]> = [];
  for (let i = 0; i < t.length; i++) {
    const v = values[i];
    if (!Number.isFinite(v) || (logY && v <= 0)) continue;
    pts.push([x(t[i]), y(v)]);
  }
  scene.polyline(pts, color, 1.5, dash);
}

function legend(scene: SvgScene, entries: Array<[string, string]>): void {
  let yPos = M.top + 8;
  for (const [label, color] of entries) {
    scene.line(W - M.right + 10, yPos - 3, W - M.right + 28, yPos - 3, color, 2);
    scene.text(W - M.right + 33, yPos, label, 10);
    yPos += 16;
  }
}

export function renderNorms(table: SeriesTable): string {
  const scene = new SvgScene(W, H);
  const t = table.t;
  const overlay = t.map((ti) => table.mean[0] * Math.exp(-ti));
  const all = positive([
    ...table.linf, ...table.l2, ...table.mean, ...overlay,
  ]);
  if (all.length === 0) throw new Error("norms plot: no positive samples");
  const lo = Math.min(...all);
  const hi = Math.max(...all);
  const x = linearScale(t[0], t[t.length - 1], M.left, W - M.right);
  const y = log10Scale(lo, hi * 1.05, H - M.bottom, M.top);
  frame(scene, x, y, "t", "norm", true);
  lineOf(scene, t, table.linf, x, y, COLORS.linf, true);
  lineOf(scene, t, table.l2, x, y, COLORS.l2, true);
  lineOf(scene, t, table.mean, x, y, COLORS.mean, true);
  lineOf(scene, t, overlay, x, y, COLORS.overlay, true, "4 3");
  let residual = 0;
  for (let i = 0; i < t.length; i++) {
    residual = Math.max(residual, Math.abs(table.mean[i] - overlay[i]));
  }
  legend(scene, [
    ["sup norm", COLORS.linf],
    ["L2 norm", COLORS.l2],
    ["mean", COLORS.mean],
    ["exp(-t)*mean0", COLORS.overlay],
  ]);
  scene.text(W - M.right + 10, H - M.bottom - 8,
             `mean residual ${residual.toExponential(2)}`, 10);
  return scene.render();
}

export function renderPhi(table: SeriesTable, threshold?: number): string {
  const scene = new SvgScene(W, H);
  const t = table.t;
  const x = linearScale(t[0], t[t.length - 1], M.left, W - M.right);
  const y = linearScale(0, 1.05, H - M.bottom, M.top);
  frame(scene, x, y, "t", "mixing ratio", false);
  lineOf(scene, t, table.phi, x, y, COLORS.phi, false);
  const entries: Array<[string, string]> = [["phi", COLORS.phi]];
  if (threshold !== undefined) {
    scene.line(M.left, y(threshold), W - M.right, y(threshold),
               COLORS.threshold, 1.5, "6 4");
    entries.push([`threshold ${fmtTick(threshold)}`, COLORS.threshold]);
  }
  legend(scene, entries);
  return scene.render();
}

export function renderMax(table: SeriesTable, c0?: number): string {
  const scene = new SvgScene(W, H);
  const t = table.t;
  const x = linearScale(t[0], t[t.length - 1], M.left, W - M.right);
  const hi = Math.max(...table.linf) * 1.1;
  const y = linearScale(0, hi, H - M.bottom, M.top);
  frame(scene, x, y, "t", "running max", false);
  if (c0 !== undefined) {
    // shade, per interval, the band the growth bound -m + c0 m^2 admits
    for (let i = 0; i + 1 < t.length; i++) {
      const h = t[i + 1] - t[i];
      const m = table.linf[i];
      const allowed = m + h * (-m + c0 * m * m);
      const top = Math.min(Math.max(allowed, 0), hi);
      scene.rect(x(t[i]), y(top), x(t[i + 1]) - x(t[i]),
                 Math.max(y(0) - y(top), 0), COLORS.bound, 0.35);
    }
  }
  lineOf(scene, t, table.linf, x, y, COLORS.max, false);
  const entries: Array<[string, string]> = [["max density", COLORS.max]];
  if (c0 !== undefined) entries.push([`slope bound c0=${fmtTick(c0)}`, COLORS.bound]);
  legend(scene, entries);
  return scene.render();
}

export function renderSweep(rows: SweepRow[]): string {
  if (rows.length === 0) throw new Error("sweep plot: no rows");
  const scene = new SvgScene(W, H);
  const positiveA = rows.map((r) => r.A).filter((a) => a > 0);
  const minPos = positiveA.length ? Math.min(...positiveA) : 1;
  const maxPos = positiveA.length ? Math.max(...positiveA) : 10;
  // A = 0 sits on a dedicated slot left of the log ticks
  const zeroSlot = M.left + 20;
  const logStart = M.left + 60;
  const x = log10Scale(minPos, maxPos, logStart, W - M.right);
  const yPhiVals = rows.map((r) => r.mean_phi).filter(Number.isFinite);
  const phiHi = yPhiVals.length ? Math.max(...yPhiVals, 0.01) : 1;
  const y = linearScale(0, phiHi * 1.15, H - M.bottom, M.top);

  scene.line(M.left, H - M.bottom, W - M.right, H - M.bottom, "#333");
  scene.line(M.left, M.top, M.left, H - M.bottom, "#333");
  for (const tick of x.ticks) {
    const px = x(tick);
    scene.line(px, H - M.bottom, px, H - M.bottom + 4, "#333");
    scene.text(px, H - M.bottom + 16, fmtTick(tick), 10, "middle");
  }
  if (rows.some((r) => r.A === 0)) {
    scene.text(zeroSlot, H - M.bottom + 16, "0", 10, "middle");
  }
  for (const tick of y.ticks) {
    const py = y(tick);
    scene.line(M.left - 4, py, M.left, py, "#333");
    scene.text(M.left - 7, py + 3, fmtTick(tick), 10, "end");
  }
  scene.text((M.left + W - M.right) / 2, H - 8, "advection amplitude A (log)", 11, "middle");
  scene.text(12, M.top - 10, "mean mixing ratio", 11);

  const pos = (A: number) => (A === 0 ? zeroSlot : x(A));
  const phiPts: Array<[number, number]> = [];
  for (const row of rows) {
    if (Number.isFinite(row.mean_phi)) {
      phiPts.push([pos(row.A), y(row.mean_phi)]);
    }
  }
  scene.polyline(phiPts, COLORS.phi, 1.5, "4 3");
  for (const row of rows) {
    const color = CLASS_COLORS[row.classification] ?? "#000";
    const py = Number.isFinite(row.mean_phi) ? y(row.mean_phi) : H - M.bottom - 10;
    scene.circle(pos(row.A), py, 6, color);
  }
  const seen = new Set<string>();
  const entries: Array<[string, string]> = [];
  for (const row of rows) {
    if (!seen.has(row.classification)) {
      seen.add(row.classification);
      entries.push([row.classification, CLASS_COLORS[row.classification] ?? "#000"]);
    }
  }
  entries.push(["mean phi", COLORS.phi]);
  legend(scene, entries);
  return scene.render();
}

export function renderSeriesPlots(
  table: SeriesTable, options: SeriesPlotOptions = {},
): Record<string, string> {
  return {
    "norms.svg": renderNorms(table),
    "phi.svg": renderPhi(table, options.phiThreshold),
    "max.svg": renderMax(table, options.c0),
  };
}
