/**
 * Batch figure renderer for szego-lab experiment outputs.
 *
 * Usage:
 *   render --spec plot.json            one figure from an explicit PlotSpec
 *   render --run-dir runs [--out figs] default figures for every CSV found
 *
 * Each figure is written as both vector (.svg, byte-deterministic) and raster
 * (.png).  Exit codes: 0 on success, 1 on missing/invalid inputs (the message
 * names the offending column or file).
 */

import { mkdirSync, readdirSync, readFileSync, writeFileSync } from "fs";
import path from "path";

import { DataError, loadRun } from "./csv.js";
import { PlotSpec, buildScene, defaultPlots } from "./plots.js";
import { renderPng } from "./png.js";
import { renderSvg } from "./scene.js";

export function renderOne(spec: PlotSpec): string[] {
  const { rows, manifest } = loadRun(spec.input);
  const scene = buildScene(spec, rows, manifest);
  const svgPath = spec.output.endsWith(".svg")
    ? spec.output
    : `${spec.output}.svg`;
  const pngPath = svgPath.replace(/\.svg$/, ".png");
  mkdirSync(path.dirname(svgPath), { recursive: true });
  writeFileSync(svgPath, renderSvg(scene));
  writeFileSync(pngPath, renderPng(scene));
  return [svgPath, pngPath];
}

export function renderRunDir(runDir: string, outDir: string): string[] {
  const written: string[] = [];
  const entries = readdirSync(runDir).filter((f) => f.endsWith(".csv"));
  if (entries.length === 0) {
    throw new DataError(`no experiment CSVs under ${runDir}`);
  }
  for (const csv of entries.sort()) {
    const name = csv.replace(/\.csv$/, "");
    for (const spec of defaultPlots(name, path.join(runDir, csv), outDir)) {
      try {
        written.push(...renderOne(spec));
      } catch (err) {
        if (err instanceof DataError && /degenerate/.test(String(err))) {
          // s = 3/4 transition runs carry no signed rows; skip that panel
          continue;
        }
        throw err;
      }
    }
  }
  return written;
}

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    if (argv[i].startsWith("--")) {
      out.set(argv[i].slice(2), argv[i + 1] ?? "");
      i++;
    } else {
      out.set(`_${i}`, argv[i]);
    }
  }
  return out;
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  if (args.get("_0") !== "render") {
    console.error("usage: render --spec <plot.json> | render --run-dir <dir> [--out <dir>]");
    return 1;
  }
  try {
    if (args.has("spec")) {
      const spec = JSON.parse(
        readFileSync(args.get("spec")!, "utf-8"),
      ) as PlotSpec;
      for (const f of renderOne(spec)) console.log(`wrote ${f}`);
      return 0;
    }
    if (args.has("run-dir")) {
      const outDir = args.get("out") ?? "figures";
      for (const f of renderRunDir(args.get("run-dir")!, outDir)) {
        console.log(`wrote ${f}`);
      }
      return 0;
    }
    console.error("render needs --spec or --run-dir");
    return 1;
  } catch (err) {
    if (err instanceof DataError || (err as NodeJS.ErrnoException)?.code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("main.js")) {
  process.exit(main(process.argv.slice(2)));
}
