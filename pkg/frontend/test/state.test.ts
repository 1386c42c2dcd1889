import { describe, expect, it } from "vitest";

import type { CellRecord, GridParams } from "../src/api.js";
import { ExplorerStore } from "../src/state.js";

function cell(alpha: number, beta: number, n: number, r: number): CellRecord {
  return {
    alpha,
    beta,
    n,
    median_s: 0,
    r,
    p: 0.01,
    significant: true,
    omitted: false,
  };
}

interface FakeOptions {
  gridDelayMs?: (call: number) => number;
}

/** In-memory stand-in for ApiClient with a controllable session store. */
function fakeApi(options: FakeOptions = {}) {
  const gridFor = (excluded: number[], params: GridParams): CellRecord[] => [
    cell(0.25, 0.25, 5 - excluded.length, 0.9),
    cell(0.5, 0.5, 10 - excluded.length, params.method === "pearson" ? 0.5 : -0.5),
  ];
  const sessions = new Map<string, number[]>();
  let gridCalls = 0;
  const calls: string[] = [];
  return {
    calls,
    sessions,
    async gridRaw(_dataset: string, params: GridParams): Promise<string> {
      const call = ++gridCalls;
      calls.push(`grid:${params.session ?? "-"}`);
      const delay = options.gridDelayMs?.(call) ?? 0;
      if (delay) await new Promise((resolve) => setTimeout(resolve, delay));
      const excluded = params.session ? sessions.get(params.session) ?? [] : [];
      return JSON.stringify(gridFor(excluded, params));
    },
    async scatter(_dataset: string, _x: string, _y: string, session?: string) {
      const excluded = new Set(session ? sessions.get(session) ?? [] : []);
      const points = [0, 1, 2, 3, 4]
        .filter((index) => !excluded.has(index))
        .map((index) => ({ index, x: index, y: index * 2 }));
      return { points, n: points.length };
    },
    async subpopulation(_dataset: string, _sort: string, alpha: number, beta: number, session?: string) {
      calls.push(`sub:${alpha},${beta}`);
      const excluded = new Set(session ? sessions.get(session) ?? [] : []);
      const indices = (beta === 0.5 ? [0, 1, 2, 3, 4] : [0, 1]).filter(
        (index) => !excluded.has(index)
      );
      return { indices, median_s: 0, n: indices.length };
    },
    async createSession(_dataset: string, excluded: number[]) {
      const id = `s${sessions.size + 1}`;
      sessions.set(id, excluded);
      return { session_id: id, excluded };
    },
    async updateSession(_dataset: string, id: string, excluded: number[]) {
      if (!sessions.has(id)) throw new Error("unknown session");
      sessions.set(id, excluded);
      return { session_id: id, excluded };
    },
    async listDatasets() {
      return [];
    },
  };
}

const DATASET = {
  dataset_id: "d1",
  variables: ["s", "x", "y"],
  n_observations: 10,
};

describe("ExplorerStore", () => {
  it("loads a dataset and fetches the grid", async () => {
    const store = new ExplorerStore(fakeApi() as never);
    await store.loadDataset(DATASET);
    const state = store.snapshot();
    expect(state.grid).toHaveLength(2);
    expect(state.scatter).toHaveLength(5);
    expect(state.sort).toBe("s");
    expect(state.error).toBeNull();
  });

  it("ignores cells that are not part of the last grid", async () => {
    const store = new ExplorerStore(fakeApi() as never);
    await store.loadDataset(DATASET);
    await store.selectCell(0.33, 0.33);
    expect(store.snapshot().selectedCell).toBeNull();
    await store.selectCell(0.25, 0.25);
    expect(store.snapshot().selectedCell).toEqual({ alpha: 0.25, beta: 0.25 });
    expect([...store.snapshot().highlight]).toEqual([0, 1]);
  });

  it("discards stale grid responses (request token)", async () => {
    // first refresh resolves after the second: its token is stale
    const api = fakeApi({ gridDelayMs: (call) => (call === 2 ? 40 : 0) });
    const store = new ExplorerStore(api as never);
    await store.loadDataset(DATASET);
    const slow = store.refresh(); // call 2: slow
    store.setParams({ method: "spearman" }); // call 3: fast, newer
    await slow;
    await new Promise((resolve) => setTimeout(resolve, 60));
    const top = store.snapshot().grid.find((c) => c.beta === 0.5);
    expect(top?.r).toBe(-0.5); // spearman grid won, slow pearson discarded
  });

  it("mirrors the acknowledged exclusion set and keeps involution", async () => {
    const api = fakeApi();
    const store = new ExplorerStore(api as never);
    await store.loadDataset(DATASET);
    const before = store.snapshot().gridRaw;

    await store.toggleExclusion(3);
    expect(store.snapshot().sessionId).toBe("s1");
    expect([...store.snapshot().excluded]).toEqual([3]);
    expect(api.sessions.get("s1")).toEqual([3]);
    expect(store.snapshot().gridRaw).not.toBe(before);
    expect(store.snapshot().scatter.map((p) => p.index)).toEqual([0, 1, 2, 4]);

    await store.toggleExclusion(3); // involution
    expect([...store.snapshot().excluded]).toEqual([]);
    expect(api.sessions.get("s1")).toEqual([]);
    expect(store.snapshot().gridRaw).toBe(before);
  });

  it("preserves the stale view and reports fetch failures", async () => {
    const api = fakeApi();
    const store = new ExplorerStore(api as never);
    await store.loadDataset(DATASET);
    const grid = store.snapshot().grid;
    api.gridRaw = async () => {
      throw new Error("boom");
    };
    await store.refresh();
    const state = store.snapshot();
    expect(state.error).toContain("boom");
    expect(state.grid).toBe(grid); // stale view kept
  });

  it("clears the selection when parameters change", async () => {
    const store = new ExplorerStore(fakeApi() as never);
    await store.loadDataset(DATASET);
    await store.selectCell(0.5, 0.5);
    expect(store.snapshot().highlight.size).toBe(5);
    store.setParams({ resolution: 4 });
    expect(store.snapshot().selectedCell).toBeNull();
    expect(store.snapshot().highlight.size).toBe(0);
  });
});
