/**
 * Minimal deterministic PNG rasterizer for the same scene model.
 *
 * The raster twin carries the full plot geometry (axes, grid, cells, series,
 * reference lines, error bars) plus numeric tick labels from a small built-in
 * 5x7 digit font; prose annotations live in the canonical SVG.  Encoding is
 * plain 8-bit RGB with filter 0 rows deflated by node's zlib.
 */

import { deflateSync } from "zlib";

import {
  Frame,
  Scene,
  WIDTH,
  HEIGHT,
  colorRamp,
  fmt,
  frameOf,
  niceTicks,
} from "./scene.js";

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(data.length, 0);
  head.write(type, 4, "ascii");
  const body = Buffer.concat([Buffer.from(type, "ascii"), Buffer.from(data)]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(body), 0);
  return Buffer.concat([head, Buffer.from(data), crc]);
}

// 5x7 glyphs for numeric tick labels; columns left->right, bit 0 = top row
const DIGIT_FONT: Record<string, number[]> = {
  "0": [0x3e, 0x51, 0x49, 0x45, 0x3e],
  "1": [0x00, 0x42, 0x7f, 0x40, 0x00],
  "2": [0x42, 0x61, 0x51, 0x49, 0x46],
  "3": [0x21, 0x41, 0x45, 0x4b, 0x31],
  "4": [0x18, 0x14, 0x12, 0x7f, 0x10],
  "5": [0x27, 0x45, 0x45, 0x45, 0x39],
  "6": [0x3c, 0x4a, 0x49, 0x49, 0x30],
  "7": [0x01, 0x71, 0x09, 0x05, 0x03],
  "8": [0x36, 0x49, 0x49, 0x49, 0x36],
  "9": [0x06, 0x49, 0x49, 0x29, 0x1e],
  "-": [0x08, 0x08, 0x08, 0x08, 0x08],
  "+": [0x08, 0x08, 0x3e, 0x08, 0x08],
  ".": [0x00, 0x60, 0x60, 0x00, 0x00],
  e: [0x38, 0x54, 0x54, 0x54, 0x18],
  E: [0x7f, 0x49, 0x49, 0x49, 0x41],
};

export class Canvas {
  readonly w: number;
  readonly h: number;
  readonly pix: Uint8Array;

  constructor(w: number, h: number) {
    this.w = w;
    this.h = h;
    this.pix = new Uint8Array(w * h * 3).fill(255);
  }

  set(x: number, y: number, rgb: [number, number, number]) {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.w || yi >= this.h) return;
    const o = (yi * this.w + xi) * 3;
    this.pix[o] = rgb[0];
    this.pix[o + 1] = rgb[1];
    this.pix[o + 2] = rgb[2];
  }

  line(x0: number, y0: number, x1: number, y1: number, rgb: [number, number, number]) {
    let xa = Math.round(x0);
    let ya = Math.round(y0);
    const xb = Math.round(x1);
    const yb = Math.round(y1);
    const dx = Math.abs(xb - xa);
    const dy = -Math.abs(yb - ya);
    const sx = xa < xb ? 1 : -1;
    const sy = ya < yb ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(xa, ya, rgb);
      if (xa === xb && ya === yb) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        xa += sx;
      }
      if (e2 <= dx) {
        err += dx;
        ya += sy;
      }
    }
  }

  rect(x: number, y: number, w: number, h: number, rgb: [number, number, number]) {
    for (let yy = Math.round(y); yy < Math.round(y + h); yy++) {
      for (let xx = Math.round(x); xx < Math.round(x + w); xx++) {
        this.set(xx, yy, rgb);
      }
    }
  }

  disc(x: number, y: number, r: number, rgb: [number, number, number]) {
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        if (dx * dx + dy * dy <= r * r) this.set(x + dx, y + dy, rgb);
      }
    }
  }

  text(x: number, y: number, s: string, rgb: [number, number, number]) {
    let cx = Math.round(x);
    for (const ch of s) {
      const glyph = DIGIT_FONT[ch];
      if (glyph) {
        for (let col = 0; col < 5; col++) {
          for (let row = 0; row < 7; row++) {
            if ((glyph[col] >> row) & 1) this.set(cx + col, y + row, rgb);
          }
        }
      }
      cx += 6;
    }
  }

  encode(): Buffer {
    const raw = Buffer.alloc((this.w * 3 + 1) * this.h);
    for (let y = 0; y < this.h; y++) {
      raw[y * (this.w * 3 + 1)] = 0; // filter: none
      Buffer.from(
        this.pix.buffer,
        this.pix.byteOffset + y * this.w * 3,
        this.w * 3,
      ).copy(raw, y * (this.w * 3 + 1) + 1);
    }
    const ihdr = Buffer.alloc(13);
    ihdr.writeUInt32BE(this.w, 0);
    ihdr.writeUInt32BE(this.h, 4);
    ihdr[8] = 8; // bit depth
    ihdr[9] = 2; // color type: truecolor
    return Buffer.concat([
      Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
      chunk("IHDR", ihdr),
      chunk("IDAT", deflateSync(raw, { level: 9 })),
      chunk("IEND", new Uint8Array(0)),
    ]);
  }
}

function hexToRgb(color: string): [number, number, number] {
  if (color.startsWith("rgb(")) {
    const [r, g, b] = color
      .slice(4, -1)
      .split(",")
      .map((v) => parseInt(v, 10));
    return [r, g, b];
  }
  const hex = color.replace("#", "");
  const full =
    hex.length === 3 ? hex.split("").map((c) => c + c).join("") : hex;
  return [
    parseInt(full.slice(0, 2), 16),
    parseInt(full.slice(2, 4), 16),
    parseInt(full.slice(4, 6), 16),
  ];
}

export function renderPng(scene: Scene): Buffer {
  const f: Frame = frameOf(scene);
  const c = new Canvas(WIDTH, HEIGHT);
  const axis: [number, number, number] = [51, 51, 51];
  const grid: [number, number, number] = [238, 238, 238];

  if (scene.cells) {
    const { data, xs, ys } = scene.cells;
    const xsSorted = [...new Set(xs)].sort((a, b) => a - b);
    const ysSorted = [...new Set(ys)].sort((a, b) => a - b);
    const cw = f.w / xsSorted.length;
    const ch = f.h / ysSorted.length;
    for (const cell of data) {
      const ix = xsSorted.indexOf(cell.x);
      const iy = ysSorted.indexOf(cell.y);
      c.rect(
        f.x0 + ix * cw,
        f.y0 + f.h - (iy + 1) * ch,
        cw,
        ch,
        hexToRgb(colorRamp(cell.value)),
      );
    }
  } else {
    for (const tx of niceTicks(f.xLo, f.xHi, scene.xScale)) {
      const x = f.px(tx);
      c.line(x, f.y0, x, f.y0 + f.h, grid);
      c.text(x - 3 * fmt(tx).length, f.y0 + f.h + 8, fmt(tx), axis);
    }
    for (const ty of niceTicks(f.yLo, f.yHi, scene.yScale)) {
      const y = f.py(ty);
      c.line(f.x0, y, f.x0 + f.w, y, grid);
      c.text(f.x0 - 6 * fmt(ty).length - 8, y - 3, fmt(ty), axis);
    }
  }

  c.line(f.x0, f.y0, f.x0 + f.w, f.y0, axis);
  c.line(f.x0, f.y0 + f.h, f.x0 + f.w, f.y0 + f.h, axis);
  c.line(f.x0, f.y0, f.x0, f.y0 + f.h, axis);
  c.line(f.x0 + f.w, f.y0, f.x0 + f.w, f.y0 + f.h, axis);

  for (const hl of scene.hLines ?? []) {
    const y = f.py(hl.y);
    const rgb = hexToRgb(hl.color);
    for (let x = f.x0; x < f.x0 + f.w; x += 8) {
      c.line(x, y, Math.min(x + 4, f.x0 + f.w), y, rgb);
    }
  }

  for (const s of scene.series) {
    const rgb = hexToRgb(s.color);
    const pts = s.points.map((p) => [f.px(p.x), f.py(p.y)] as const);
    if (s.dashed) {
      for (let i = 1; i < pts.length; i++) {
        const [xa, ya] = pts[i - 1];
        const [xb, yb] = pts[i];
        const segs = 12;
        for (let k = 0; k < segs; k += 2) {
          c.line(
            xa + ((xb - xa) * k) / segs,
            ya + ((yb - ya) * k) / segs,
            xa + ((xb - xa) * (k + 1)) / segs,
            ya + ((yb - ya) * (k + 1)) / segs,
            rgb,
          );
        }
      }
    } else {
      for (let i = 1; i < pts.length; i++) {
        c.line(pts[i - 1][0], pts[i - 1][1], pts[i][0], pts[i][1], rgb);
      }
    }
    if (s.marker ?? true) {
      s.points.forEach((p, j) => {
        c.disc(Math.round(f.px(p.x)), Math.round(f.py(p.y)), 3, rgb);
        if (s.errors && Number.isFinite(s.errors[j]) && s.errors[j] > 0) {
          c.line(
            f.px(p.x),
            f.py(p.y - s.errors[j]),
            f.px(p.x),
            f.py(p.y + s.errors[j]),
            rgb,
          );
        }
      });
    }
  }
  return c.encode();
}
