/**
 * Deterministic figure scene + SVG writer.
 *
 * A scene is a plain data model (axes, series, cells, labels); the SVG output
 * is a pure function of it, with fixed float formatting and no timestamps, so
 * re-rendering identical inputs yields byte-identical files.
 */

export type Scale = "linear" | "log";

export interface Series {
  label: string;
  points: { x: number; y: number }[];
  color: string;
  marker?: boolean;
  dashed?: boolean;
  errors?: number[]; // symmetric y error bars, same length as points
}

export interface Cell {
  x: number;
  y: number;
  value: number; // mapped through the scene's color ramp
}

export interface Scene {
  title: string;
  subtitle?: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
  series: Series[];
  cells?: { data: Cell[]; xs: number[]; ys: number[]; low: number; high: number };
  hLines?: { y: number; label: string; color: string }[];
  annotations: string[];
}

export const WIDTH = 720;
export const HEIGHT = 480;
const MARGIN = { left: 72, right: 24, top: 56, bottom: 56 };

export const PALETTE = ["#2b6cb0", "#c05621", "#2f855a", "#805ad5", "#c53030"];

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  if (x === 0) return "0";
  const a = Math.abs(x);
  const out =
    a >= 1e4 || a < 1e-3 ? x.toExponential(3) : x.toPrecision(5);
  return out
    .replace(/(\.\d*?)0+(?=(e|$))/, "$1")
    .replace(/\.(?=(e|$))/, "");
}

function transform(v: number, scale: Scale, lo: number, hi: number): number {
  if (scale === "log") {
    return (Math.log(v) - Math.log(lo)) / (Math.log(hi) - Math.log(lo));
  }
  return (v - lo) / (hi - lo);
}

export function niceTicks(lo: number, hi: number, scale: Scale): number[] {
  if (scale === "log") {
    const ticks: number[] = [];
    const eLo = Math.floor(Math.log10(lo) - 1e-9);
    const eHi = Math.ceil(Math.log10(hi) + 1e-9);
    const every = Math.max(1, Math.floor((eHi - eLo) / 8));
    for (let e = eLo; e <= eHi; e += every) {
      const v = Math.pow(10, e);
      if (v >= lo * 0.999 && v <= hi * 1.001) ticks.push(v);
    }
    if (ticks.length < 2) return [lo, hi];
    return ticks;
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / 4)));
  const mult = span / step > 20 ? 5 : span / step > 8 ? 2 : 1;
  const s = step * mult;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function esc(t: string): string {
  return t.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
  xLo: number;
  xHi: number;
  yLo: number;
  yHi: number;
  px(x: number): number;
  py(y: number): number;
}

export function frameOf(scene: Scene): Frame {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of scene.series) {
    for (const p of s.points) {
      xs.push(p.x);
      ys.push(p.y);
    }
  }
  if (scene.cells) {
    xs.push(...scene.cells.xs);
    ys.push(...scene.cells.ys);
  }
  for (const h of scene.hLines ?? []) ys.push(h.y);
  if (xs.length === 0 || ys.length === 0) {
    throw new Error("no data: scene has no drawable points");
  }
  const pad = (lo: number, hi: number, scale: Scale): [number, number] => {
    if (scale === "log") {
      return [lo / 1.35, hi * 1.35];
    }
    const span = hi - lo || Math.abs(hi) || 1;
    return [lo - 0.08 * span, hi + 0.08 * span];
  };
  const [xLo, xHi] = pad(Math.min(...xs), Math.max(...xs), scene.xScale);
  const [yLo, yHi] = pad(Math.min(...ys), Math.max(...ys), scene.yScale);
  const w = WIDTH - MARGIN.left - MARGIN.right;
  const h = HEIGHT - MARGIN.top - MARGIN.bottom;
  return {
    x0: MARGIN.left,
    y0: MARGIN.top,
    w,
    h,
    xLo,
    xHi,
    yLo,
    yHi,
    px: (x) => MARGIN.left + w * transform(x, scene.xScale, xLo, xHi),
    py: (y) => MARGIN.top + h * (1 - transform(y, scene.yScale, yLo, yHi)),
  };
}

export function colorRamp(v: number): string {
  // diverging blue -> white -> red on [-1, 1]
  const t = Math.max(-1, Math.min(1, v));
  const lerp = (a: number, b: number, u: number) => Math.round(a + (b - a) * u);
  const channel = (neg: number, pos: number) =>
    t < 0 ? lerp(255, neg, -t) : lerp(255, pos, t);
  const r = channel(43, 197);
  const g = channel(108, 48);
  const b = channel(176, 48);
  return `rgb(${r},${g},${b})`;
}

export function renderSvg(scene: Scene): string {
  const f = frameOf(scene);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-family="monospace" font-size="15" fill="#111">${esc(scene.title)}</text>`,
  );
  if (scene.subtitle) {
    parts.push(
      `<text x="${WIDTH / 2}" y="42" text-anchor="middle" font-family="monospace" font-size="11" fill="#555">${esc(scene.subtitle)}</text>`,
    );
  }

  // heatmap cells under everything else
  if (scene.cells) {
    const { data, xs, ys } = scene.cells;
    const xsSorted = [...new Set(xs)].sort((a, b) => a - b);
    const ysSorted = [...new Set(ys)].sort((a, b) => a - b);
    const cw = f.w / xsSorted.length;
    const ch = f.h / ysSorted.length;
    for (const cell of data) {
      const ix = xsSorted.indexOf(cell.x);
      const iy = ysSorted.indexOf(cell.y);
      const x = f.x0 + ix * cw;
      const y = f.y0 + f.h - (iy + 1) * ch;
      parts.push(
        `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(cw)}" height="${fmt(ch)}" fill="${colorRamp(cell.value)}" stroke="#ffffff" stroke-width="1"/>`,
      );
    }
  }

  // axes + ticks
  parts.push(
    `<rect x="${f.x0}" y="${f.y0}" width="${f.w}" height="${f.h}" fill="none" stroke="#333" stroke-width="1"/>`,
  );
  if (!scene.cells) {
    for (const tx of niceTicks(f.xLo, f.xHi, scene.xScale)) {
      const x = f.px(tx);
      parts.push(
        `<line x1="${fmt(x)}" y1="${f.y0 + f.h}" x2="${fmt(x)}" y2="${f.y0 + f.h + 5}" stroke="#333"/>`,
        `<text x="${fmt(x)}" y="${f.y0 + f.h + 18}" text-anchor="middle" font-family="monospace" font-size="10" fill="#333">${fmt(tx)}</text>`,
        `<line x1="${fmt(x)}" y1="${f.y0}" x2="${fmt(x)}" y2="${f.y0 + f.h}" stroke="#eee"/>`,
      );
    }
    for (const ty of niceTicks(f.yLo, f.yHi, scene.yScale)) {
      const y = f.py(ty);
      parts.push(
        `<line x1="${f.x0 - 5}" y1="${fmt(y)}" x2="${f.x0}" y2="${fmt(y)}" stroke="#333"/>`,
        `<text x="${f.x0 - 8}" y="${fmt(y + 3)}" text-anchor="end" font-family="monospace" font-size="10" fill="#333">${fmt(ty)}</text>`,
        `<line x1="${f.x0}" y1="${fmt(y)}" x2="${f.x0 + f.w}" y2="${fmt(y)}" stroke="#eee"/>`,
      );
    }
  } else {
    const { xs, ys } = scene.cells;
    const xsSorted = [...new Set(xs)].sort((a, b) => a - b);
    const ysSorted = [...new Set(ys)].sort((a, b) => a - b);
    xsSorted.forEach((v, i) => {
      const x = f.x0 + (i + 0.5) * (f.w / xsSorted.length);
      parts.push(
        `<text x="${fmt(x)}" y="${f.y0 + f.h + 18}" text-anchor="middle" font-family="monospace" font-size="10" fill="#333">${fmt(v)}</text>`,
      );
    });
    ysSorted.forEach((v, i) => {
      const y = f.y0 + f.h - (i + 0.5) * (f.h / ysSorted.length);
      parts.push(
        `<text x="${f.x0 - 8}" y="${fmt(y + 3)}" text-anchor="end" font-family="monospace" font-size="10" fill="#333">${fmt(v)}</text>`,
      );
    });
  }
  parts.push(
    `<text x="${f.x0 + f.w / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-family="monospace" font-size="12" fill="#111">${esc(scene.xLabel)}</text>`,
    `<text x="20" y="${f.y0 + f.h / 2}" text-anchor="middle" font-family="monospace" font-size="12" fill="#111" transform="rotate(-90 20 ${f.y0 + f.h / 2})">${esc(scene.yLabel)}</text>`,
  );

  for (const h of scene.hLines ?? []) {
    const y = f.py(h.y);
    parts.push(
      `<line x1="${f.x0}" y1="${fmt(y)}" x2="${f.x0 + f.w}" y2="${fmt(y)}" stroke="${h.color}" stroke-dasharray="6,3"/>`,
      `<text x="${f.x0 + f.w - 4}" y="${fmt(y - 4)}" text-anchor="end" font-family="monospace" font-size="10" fill="${h.color}">${esc(h.label)}</text>`,
    );
  }

  scene.series.forEach((s, idx) => {
    const pts = s.points.map((p) => `${fmt(f.px(p.x))},${fmt(f.py(p.y))}`);
    if (pts.length > 1) {
      parts.push(
        `<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="1.6"${s.dashed ? ' stroke-dasharray="5,4"' : ""}/>`,
      );
    }
    if (s.marker ?? true) {
      s.points.forEach((p, j) => {
        parts.push(
          `<circle cx="${fmt(f.px(p.x))}" cy="${fmt(f.py(p.y))}" r="3" fill="${s.color}"/>`,
        );
        if (s.errors && Number.isFinite(s.errors[j]) && s.errors[j] > 0) {
          const yl = f.py(p.y - s.errors[j]);
          const yh = f.py(p.y + s.errors[j]);
          const x = f.px(p.x);
          parts.push(
            `<line x1="${fmt(x)}" y1="${fmt(yl)}" x2="${fmt(x)}" y2="${fmt(yh)}" stroke="${s.color}" stroke-width="1"/>`,
          );
        }
      });
    }
    parts.push(
      `<text x="${f.x0 + 8}" y="${f.y0 + 16 + 14 * idx}" font-family="monospace" font-size="11" fill="${s.color}">${esc(s.label)}</text>`,
    );
  });

  scene.annotations.forEach((a, i) => {
    parts.push(
      `<text x="${f.x0 + f.w - 6}" y="${f.y0 + f.h - 8 - 13 * i}" text-anchor="end" font-family="monospace" font-size="11" fill="#444">${esc(a)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
