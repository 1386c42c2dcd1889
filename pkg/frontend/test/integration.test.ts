/**
 * Acceptance: drive the real UI against the real analysis service.
 *
 * A live server is started on the two-motif mixture fixture; the explorer
 * boots inside jsdom (the headless DOM stands in for a browser, which this
 * environment cannot install); clicks are dispatched as DOM events.
 *
 *  - clicking 10 randomly chosen grid cells highlights exactly the
 *    /subpopulation member set of each cell,
 *  - excluding one scatter point and re-including it restores the original
 *    grid JSON byte-for-byte.
 */

import { spawn, execFileSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createInterface } from "node:readline";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ControlsPanel } from "../src/controls.js";
import { GridView } from "../src/gridView.js";
import { ScatterView } from "../src/scatterView.js";
import { ExplorerStore } from "../src/state.js";

const PYTHON = process.env.PYTHON ?? "python3";

let workdir: string;
let server: ChildProcess;
let baseUrl: string;
let api: ApiClient;
let store: ExplorerStore;

function makeFixture(path: string): void {
  execFileSync(PYTHON, [
    "-c",
    [
      "from mca.sde import SamplingPlan, activation_model, inhibition_model, make_mixture, simulate",
      "a = simulate(activation_model(), SamplingPlan(samples=200, seed=1))",
      "b = simulate(inhibition_model(), SamplingPlan(samples=200, seed=2))",
      "mix = make_mixture(a, b, labels=('activation', 'inhibition'))",
      `open(${JSON.stringify(path)}, 'w').write(mix.to_csv())`,
    ].join("\n"),
  ]);
}

async function startServer(dataPath: string): Promise<string> {
  server = spawn(PYTHON, ["-m", "mca", "serve", "--port", "0", "--data", dataPath], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  const lines = createInterface({ input: server.stdout! });
  for await (const line of lines) {
    const match = /serving on (http:\/\/[\d.]+:\d+)/.exec(line);
    if (match) return match[1] as string;
  }
  throw new Error("service did not announce its address");
}

async function waitFor(predicate: () => boolean, what: string, timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, 20));
  }
  throw new Error(`timed out waiting for ${what}`);
}

function click(node: Element): void {
  node.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

function highlightedIndices(): number[] {
  return [...document.querySelectorAll("#scatter circle.highlighted")]
    .map((node) => Number(node.getAttribute("data-index")))
    .sort((a, b) => a - b);
}

/** Deterministic little PRNG so the 10 sampled cells are reproducible. */
function lcg(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state * 1664525 + 1013904223) >>> 0;
    return state / 2 ** 32;
  };
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "mca-ui-"));
  const fixture = join(workdir, "mixture.csv");
  makeFixture(fixture);
  baseUrl = await startServer(fixture);
  api = new ApiClient(baseUrl);

  document.body.innerHTML =
    '<div id="controls"></div><section id="grid"></section><section id="scatter"></section>';
  store = new ExplorerStore(api);
  new ControlsPanel(document.getElementById("controls")!, store);
  new GridView(document.getElementById("grid")!, store);
  new ScatterView(document.getElementById("scatter")!, store);
  const datasets = await api.listDatasets();
  await store.loadDataset(datasets[0]!);
  await waitFor(
    () => document.querySelectorAll("#grid circle.grid-cell").length > 0,
    "grid markers"
  );
});

afterAll(() => {
  server?.kill("SIGINT");
  rmSync(workdir, { recursive: true, force: true });
});

describe("explorer against the live service", () => {
  it("renders one marker per non-omitted cell", () => {
    const state = store.snapshot();
    const drawn = document.querySelectorAll("#grid circle.grid-cell").length;
    expect(drawn).toBe(state.grid.filter((c) => !c.omitted).length);
    expect(state.scatter).toHaveLength(400);
  });

  it("clicking any grid cell highlights exactly the /subpopulation member set", async () => {
    const markers = [...document.querySelectorAll("#grid circle.grid-cell")];
    expect(markers.length).toBeGreaterThan(10);
    const random = lcg(20240907);
    const picked = new Set<number>();
    while (picked.size < 10) {
      picked.add(Math.floor(random() * markers.length));
    }
    for (const markerIndex of picked) {
      const marker = markers[markerIndex]!;
      const alpha = Number(marker.getAttribute("data-alpha"));
      const beta = Number(marker.getAttribute("data-beta"));
      click(marker);
      // independent request for the expected membership
      const expected = await api.subpopulation(
        store.snapshot().datasetId!,
        store.snapshot().sort,
        alpha,
        beta
      );
      await waitFor(
        () =>
          store.snapshot().selectedCell?.alpha === alpha &&
          store.snapshot().selectedCell?.beta === beta &&
          store.snapshot().highlight.size === expected.indices.length,
        `highlight for cell (${alpha}, ${beta})`
      );
      expect(highlightedIndices()).toEqual(expected.indices);
      expect([...store.snapshot().highlight].sort((a, b) => a - b)).toEqual(expected.indices);
    }
  });

  it("excluding then re-including a point restores the grid JSON byte-for-byte", async () => {
    store.clearSelection();
    await store.refresh();
    const original = store.snapshot().gridRaw;
    expect(original.length).toBeGreaterThan(0);

    const point = document.querySelector('#scatter circle[data-index="42"]');
    expect(point).not.toBeNull();
    click(point!);
    await waitFor(() => store.snapshot().excluded.has(42), "exclusion applied");
    await waitFor(() => !store.snapshot().busy, "grid refetched");
    const excludedGrid = store.snapshot().gridRaw;
    expect(excludedGrid).not.toBe(original);
    expect(store.snapshot().scatter.some((p) => p.index === 42)).toBe(false);

    const chip = document.querySelector('#controls button.chip[data-index="42"]');
    expect(chip).not.toBeNull();
    click(chip!);
    await waitFor(() => !store.snapshot().excluded.has(42), "re-inclusion applied");
    await waitFor(() => !store.snapshot().busy, "grid refetched again");
    expect(store.snapshot().gridRaw).toBe(original);
  });

  it("control changes refetch the grid with the new parameters", async () => {
    const resolution = document.getElementById("resolution") as HTMLInputElement;
    resolution.value = "7";
    resolution.dispatchEvent(new Event("change"));
    await waitFor(() => store.snapshot().resolution === 7, "resolution applied");
    await waitFor(() => !store.snapshot().busy, "grid loaded");
    // 12 lattice cells + appended full-population cell
    expect(store.snapshot().grid).toHaveLength(13);

    resolution.value = "1"; // invalid: inline validation, no request
    resolution.dispatchEvent(new Event("change"));
    const validation = document.querySelector("#controls .validation")!;
    expect(validation.textContent).toContain("R must be");
    expect(store.snapshot().resolution).toBe(7);
  });
});
