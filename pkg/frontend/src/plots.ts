/**
 * Plot kinds over the experiment CSVs.
 *
 * Every number drawn comes from the CSV rows or the manifest (fits, spec,
 * checks); the renderer never recomputes the science.  Reference slopes are
 * taken from the manifest fits where declared, falling back to the standard
 * exponent numerology in the run's s.
 */

import { Manifest, Row, byQuantity, DataError } from "./csv.js";
import { PALETTE, Scene, Series, fmt } from "./scene.js";

export type PlotKind =
  | "loglog-scaling"
  | "convergence-ratio"
  | "sign-map"
  | "taylor-residual";

export interface PlotSpec {
  input: string;
  kind: PlotKind;
  output: string;
  quantity?: string;
  xField?: "N" | "t" | "sample";
  referenceSlope?: number;
}

function aggregateRows(rows: Row[], quantity: string): Row[] {
  const agg = byQuantity(rows, quantity).filter((r) => r.sample < 0);
  return agg.length > 0 ? agg : byQuantity(rows, quantity);
}

function xOf(r: Row, field: "N" | "t" | "sample"): number {
  return field === "N" ? r.n : field === "t" ? r.t : r.sample;
}

function fitFor(manifest: Manifest, quantity: string) {
  return manifest.fits.find((f) => f.quantity === quantity);
}

export function loglogScaling(
  rows: Row[],
  manifest: Manifest,
  quantity: string,
  xField: "N" | "t" = "N",
  referenceSlope?: number,
): Scene {
  const data = aggregateRows(rows, quantity);
  if (data.length === 0) {
    throw new DataError(`no rows for quantity ${quantity}`);
  }
  const pts = data
    .map((r) => ({ x: xOf(r, xField), y: r.value }))
    .filter((p) => p.x > 0 && p.y > 0)
    .sort((a, b) => a.x - b.x);
  if (pts.length === 0) {
    throw new DataError(`no positive data to draw for ${quantity}`);
  }
  const series: Series[] = [
    { label: quantity, points: pts, color: PALETTE[0] },
  ];
  const annotations: string[] = [];
  const fit = manifest.fits[0];
  const anchor = pts[Math.floor(pts.length / 2)];
  if (fit) {
    annotations.push(
      `fitted exponent ${fmt(fit.exponent)} CI [${fmt(fit.ci[0])}, ${fmt(fit.ci[1])}]`,
    );
    series.push({
      label: `fit slope ${fmt(fit.exponent)}`,
      points: pts.map((p) => ({
        x: p.x,
        y: anchor.y * Math.pow(p.x / anchor.x, fit.exponent),
      })),
      color: PALETTE[2],
      marker: false,
    });
  }
  const ref = referenceSlope ?? fit?.reference;
  if (ref !== undefined && ref !== null) {
    series.push({
      label: `reference slope ${fmt(ref)}`,
      points: pts.map((p) => ({
        x: p.x,
        y: anchor.y * Math.pow(p.x / anchor.x, ref),
      })),
      color: PALETTE[1],
      marker: false,
      dashed: true,
    });
    annotations.push(`reference exponent ${fmt(ref)}`);
  }
  return {
    title: `${manifest.name}: ${quantity} vs ${xField}`,
    subtitle: `s = ${fmt(manifest.spec.s)}, seed ${manifest.spec.seed}, ${manifest.spec.sample_count} samples`,
    xLabel: xField,
    yLabel: quantity,
    xScale: "log",
    yScale: "log",
    series,
    annotations,
  };
}

export function convergenceRatio(
  rows: Row[],
  manifest: Manifest,
  quantity: string,
  xField: "N" | "t" | "sample" = "N",
): Scene {
  const data = aggregateRows(rows, quantity);
  if (data.length === 0) {
    throw new DataError(`no rows for quantity ${quantity}`);
  }
  const seQuantity = `${quantity}_se`;
  const ses = new Map(
    byQuantity(rows, seQuantity)
      .filter((r) => r.sample < 0)
      .map((r) => [xOf(r, xField), r.value]),
  );
  let pts = data
    .map((r) => ({ x: xOf(r, xField), y: r.value }))
    .sort((a, b) => a.x - b.x);
  if (pts.length > 512) {
    // presentation-only deterministic subsample of large scatters
    const stride = Math.ceil(pts.length / 512);
    pts = pts.filter((_, i) => i % stride === 0);
  }
  const series: Series[] = [
    {
      label: quantity,
      points: pts,
      color: PALETTE[0],
      errors: pts.map((p) => ses.get(p.x) ?? NaN),
    },
  ];
  return {
    title: `${manifest.name}: ${quantity}`,
    subtitle: `s = ${fmt(manifest.spec.s)}, seed ${manifest.spec.seed}`,
    xLabel: xField,
    yLabel: quantity,
    xScale: pts.every((p) => p.x > 0) && xField === "N" ? "log" : "linear",
    yScale: "linear",
    series,
    hLines: [{ y: 1.0, label: "target 1", color: PALETTE[1] }],
    annotations: manifest.checks
      .filter((c) => c.name.includes("ratio") || c.name.includes("stable"))
      .slice(0, 3)
      .map((c) => `${c.name}: ${c.passed ? "pass" : "fail"} (${fmt(c.observed)})`),
  };
}

export function signMap(rows: Row[], manifest: Manifest): Scene {
  const signed = byQuantity(rows, "h_N_over_4s3").filter((r) => r.sample >= 0);
  if (signed.length === 0) {
    throw new DataError("no h_N_over_4s3 rows (degenerate s = 3/4 run?)");
  }
  const ns = [...new Set(signed.map((r) => r.n))].sort((a, b) => a - b);
  const ts = [...new Set(signed.map((r) => r.t))].sort((a, b) => a - b);
  const cells = [];
  for (const n of ns) {
    for (const t of ts) {
      const here = signed.filter((r) => r.n === n && r.t === t);
      if (here.length === 0) continue;
      const frac = here.filter((r) => r.value > 0).length / here.length;
      cells.push({ x: n, y: t, value: 2 * frac - 1 });
    }
  }
  return {
    title: `${manifest.name}: sign of h_N(t)/(4s-3) over (N, t)`,
    subtitle: `s = ${fmt(manifest.spec.s)}; red = positive fraction 1, blue = 0`,
    xLabel: "N",
    yLabel: "t",
    xScale: "linear",
    yScale: "linear",
    series: [],
    cells: { data: cells, xs: ns, ys: ts, low: -1, high: 1 },
    annotations: [],
  };
}

export function taylorResidual(rows: Row[], manifest: Manifest): Scene {
  const ratios = byQuantity(rows, "residual_over_gn_term").filter(
    (r) => r.sample >= 0,
  );
  if (ratios.length === 0) {
    throw new DataError("no residual_over_gn_term rows");
  }
  const pts = ratios
    .map((r) => ({ x: r.sample, y: r.value }))
    .sort((a, b) => a.x - b.x);
  const med = byQuantity(rows, "median_residual_ratio").find(
    (r) => r.sample < 0,
  );
  return {
    title: `${manifest.name}: |h_N - t F_N - (t^2/2) G_N| / ((t^2/2)|G_N|)`,
    subtitle: `s = ${fmt(manifest.spec.s)}, largest N = ${Math.max(...ratios.map((r) => r.n))}`,
    xLabel: "sample",
    yLabel: "residual ratio",
    xScale: "linear",
    yScale: "linear",
    series: [
      { label: "per-sample residual ratio", points: pts, color: PALETTE[0] },
    ],
    hLines: [
      { y: 0.3, label: "threshold 0.3", color: PALETTE[4] },
      ...(med ? [{ y: med.value, label: `median ${fmt(med.value)}`, color: PALETTE[2] }] : []),
    ],
    annotations: [],
  };
}

export function buildScene(spec: PlotSpec, rows: Row[], manifest: Manifest): Scene {
  switch (spec.kind) {
    case "loglog-scaling":
      return loglogScaling(
        rows,
        manifest,
        spec.quantity ?? defaultQuantity(manifest.name),
        (spec.xField as "N" | "t") ?? "N",
        spec.referenceSlope,
      );
    case "convergence-ratio":
      return convergenceRatio(
        rows,
        manifest,
        spec.quantity ?? defaultQuantity(manifest.name),
        spec.xField ?? "N",
      );
    case "sign-map":
      return signMap(rows, manifest);
    case "taylor-residual":
      return taylorResidual(rows, manifest);
    default:
      throw new DataError(`unknown plot kind ${(spec as PlotSpec).kind}`);
  }
}

function defaultQuantity(name: string): string {
  const table: Record<string, string> = {
    "fn-scaling": "F_N_var",
    "gn-limit": "ratio_mean",
    "q-integrability": "Qpi_sq_mean",
    "paradec-scaling": "v_N_norm_mean",
    "density-lp": "lp_density_estimate",
    conservation: "rk4_mass_drift",
    liouville: "density",
    transition: "h_N",
  };
  return table[name] ?? "value";
}

/** Default figure set for one experiment run (one figure per headline CSV
 * quantity, per the batch-rendering contract). */
export function defaultPlots(name: string, csvPath: string, outDir: string): PlotSpec[] {
  const out = (suffix: string) => `${outDir}/${name}-${suffix}`;
  switch (name) {
    case "fn-scaling":
      return [
        { input: csvPath, kind: "loglog-scaling", output: out("variance"), quantity: "F_N_var" },
      ];
    case "q-integrability":
      return [
        { input: csvPath, kind: "loglog-scaling", output: out("growth"), quantity: "Qpi_sq_mean" },
      ];
    case "paradec-scaling":
      return [
        { input: csvPath, kind: "loglog-scaling", output: out("remainder"), quantity: "v_N_norm_mean" },
      ];
    case "conservation":
      return [
        { input: csvPath, kind: "loglog-scaling", output: out("rk4-order"), quantity: "rk4_mass_drift", xField: "t" },
      ];
    case "gn-limit":
      return [
        { input: csvPath, kind: "convergence-ratio", output: out("ratio"), quantity: "ratio_mean" },
      ];
    case "density-lp":
      return [
        { input: csvPath, kind: "convergence-ratio", output: out("estimate"), quantity: "lp_density_estimate" },
      ];
    case "liouville":
      return [
        { input: csvPath, kind: "convergence-ratio", output: out("density-mean"), quantity: "density", xField: "sample" },
      ];
    case "transition":
      return [
        { input: csvPath, kind: "sign-map", output: out("sign-map") },
        { input: csvPath, kind: "taylor-residual", output: out("residual") },
      ];
    default:
      return [
        { input: csvPath, kind: "convergence-ratio", output: out("overview") },
      ];
  }
}
