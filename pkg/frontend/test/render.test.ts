import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import path from "path";
import { describe, expect, it } from "vitest";

import { DataError, loadRun, parseCsv, quantities } from "../src/csv.js";
import { buildScene, defaultPlots } from "../src/plots.js";
import { renderPng } from "../src/png.js";
import { renderSvg } from "../src/scene.js";
import { main, renderOne, renderRunDir } from "../src/main.js";

const FIX = path.join(__dirname, "fixtures");

function tmp(): string {
  return mkdtempSync(path.join(tmpdir(), "szplot-"));
}

describe("csv parsing", () => {
  it("parses the fixture rows", () => {
    const { rows, manifest } = loadRun(path.join(FIX, "fn-scaling.csv"));
    expect(rows.length).toBeGreaterThan(10);
    expect(manifest.name).toBe("fn-scaling");
    expect(quantities(rows)).toContain("F_N_var");
  });

  it("rejects an empty-row CSV with a 'no data' error", () => {
    expect(() => parseCsv("sample,N,t,quantity,value\n")).toThrow(/no data/);
    expect(() => parseCsv("")).toThrow(/empty CSV/);
  });

  it("names missing columns", () => {
    expect(() => parseCsv("sample,N,t,value\n1,2,3,4\n")).toThrow(/quantity/);
  });

  it("rejects malformed numeric fields", () => {
    expect(() =>
      parseCsv("sample,N,t,quantity,value\n0,8,oops,F_N,1.0\n"),
    ).toThrow(/non-numeric/);
  });
});

describe("scenes", () => {
  it("builds a loglog scene with fitted and reference slopes annotated", () => {
    const { rows, manifest } = loadRun(path.join(FIX, "fn-scaling.csv"));
    const scene = buildScene(
      { input: "", kind: "loglog-scaling", output: "", quantity: "F_N_var" },
      rows,
      manifest,
    );
    expect(scene.xScale).toBe("log");
    const svg = renderSvg(scene);
    expect(svg).toContain("fitted exponent");
    expect(svg).toContain("reference");
  });

  it("builds a sign map over the (N, t-factor) grid", () => {
    const { rows, manifest } = loadRun(path.join(FIX, "transition.csv"));
    const scene = buildScene(
      { input: "", kind: "sign-map", output: "" },
      rows,
      manifest,
    );
    expect(scene.cells).toBeDefined();
    expect(scene.cells!.data.length).toBe(2 * 3); // two N, three t-factors
  });

  it("builds the taylor-residual panel with the 0.3 threshold line", () => {
    const { rows, manifest } = loadRun(path.join(FIX, "transition.csv"));
    const scene = buildScene(
      { input: "", kind: "taylor-residual", output: "" },
      rows,
      manifest,
    );
    const svg = renderSvg(scene);
    expect(svg).toContain("threshold 0.3");
  });

  it("errors on an unknown quantity", () => {
    const { rows, manifest } = loadRun(path.join(FIX, "fn-scaling.csv"));
    expect(() =>
      buildScene(
        { input: "", kind: "loglog-scaling", output: "", quantity: "nope" },
        rows,
        manifest,
      ),
    ).toThrow(DataError);
  });
});

describe("rendering", () => {
  it("re-rendering identical CSVs yields byte-identical vector output", () => {
    const dir = tmp();
    const spec = {
      input: path.join(FIX, "fn-scaling.csv"),
      kind: "loglog-scaling" as const,
      output: path.join(dir, "a.svg"),
      quantity: "F_N_var",
    };
    renderOne(spec);
    const first = readFileSync(path.join(dir, "a.svg"));
    renderOne({ ...spec, output: path.join(dir, "b.svg") });
    const second = readFileSync(path.join(dir, "b.svg"));
    expect(first.equals(second)).toBe(true);
  });

  it("writes a valid PNG next to every SVG", () => {
    const dir = tmp();
    const files = renderOne({
      input: path.join(FIX, "q-integrability.csv"),
      kind: "loglog-scaling",
      output: path.join(dir, "q.svg"),
      quantity: "Qpi_sq_mean",
    });
    expect(files).toHaveLength(2);
    const png = readFileSync(files[1]);
    expect([...png.subarray(0, 8)]).toEqual([137, 80, 78, 71, 13, 10, 26, 10]);
    expect(png.readUInt32BE(16)).toBe(720); // IHDR width
    expect(png.readUInt32BE(20)).toBe(480);
  });

  it("renders default figures for every fixture CSV without error", () => {
    const dir = tmp();
    const written = renderRunDir(FIX, dir);
    // four fixtures; transition contributes two panels
    expect(written.length).toBe(2 * 5);
    for (const f of written) {
      expect(readFileSync(f).length).toBeGreaterThan(500);
    }
  });

  it("CLI returns 1 with a named column on broken input", () => {
    const dir = tmp();
    writeFileSync(
      path.join(dir, "broken.csv"),
      "sample,N,quantity,value\n0,1,x,2\n",
    );
    writeFileSync(
      path.join(dir, "broken.manifest.json"),
      JSON.stringify({ csv_schema: "sample,N,t,quantity,value" }),
    );
    const code = main([
      "render",
      "--spec",
      "definitely-missing.json",
    ]);
    expect(code).toBe(1);
  });

  it("CLI renders a spec file", () => {
    const dir = tmp();
    const specPath = path.join(dir, "spec.json");
    writeFileSync(
      specPath,
      JSON.stringify({
        input: path.join(FIX, "conservation.csv"),
        kind: "loglog-scaling",
        output: path.join(dir, "cons.svg"),
        quantity: "rk4_mass_drift",
        xField: "t",
      }),
    );
    expect(main(["render", "--spec", specPath])).toBe(0);
    expect(readFileSync(path.join(dir, "cons.svg"), "utf-8")).toContain(
      "rk4_mass_drift",
    );
  });
});
