/**
 * Bootstrap: connect to the analysis service (same origin by default,
 * ?api=http://host:port to override), load the first dataset, wire the
 * three panels together.
 */

import { ApiClient } from "./api.js";
import { ControlsPanel } from "./controls.js";
import { GridView } from "./gridView.js";
import { ScatterView } from "./scatterView.js";
import { ExplorerStore } from "./state.js";

export async function boot(root: Document = document): Promise<ExplorerStore> {
  const params = new URLSearchParams(root.defaultView?.location.search ?? "");
  const api = new ApiClient(params.get("api") ?? "");
  const store = new ExplorerStore(api);

  const controls = root.getElementById("controls");
  const grid = root.getElementById("grid");
  const scatter = root.getElementById("scatter");
  if (!controls || !grid || !scatter) {
    throw new Error("missing #controls/#grid/#scatter containers");
  }
  new ControlsPanel(controls, store);
  new GridView(grid, store);
  new ScatterView(scatter, store);

  const datasets = await api.listDatasets();
  if (!datasets.length) {
    throw new Error("service has no datasets; start it with --data file.csv");
  }
  await store.loadDataset(datasets[0] as NonNullable<(typeof datasets)[0]>);
  return store;
}

if (typeof window !== "undefined" && document.getElementById("grid")) {
  void boot().catch((err) => {
    const status = document.createElement("pre");
    status.className = "boot-error";
    status.textContent = String(err);
    document.body.prepend(status);
  });
}
