/**
 * Parameter panel: sorting/pair selects, resolution and p threshold inputs,
 * estimator choice.  Every accepted change refetches the grid; an invalid
 * resolution shows inline validation and sends nothing.
 */

import { ExplorerStore, ViewState } from "./state.js";

export class ControlsPanel {
  private readonly sortSelect = document.createElement("select");
  private readonly xSelect = document.createElement("select");
  private readonly ySelect = document.createElement("select");
  private readonly resolutionInput = document.createElement("input");
  private readonly pInput = document.createElement("input");
  private readonly methodSelect = document.createElement("select");
  private readonly validation = document.createElement("span");
  private readonly status = document.createElement("span");
  private readonly excludedChips = document.createElement("span");

  constructor(container: HTMLElement, private readonly store: ExplorerStore) {
    this.resolutionInput.type = "number";
    this.resolutionInput.min = "2";
    this.resolutionInput.id = "resolution";
    this.pInput.type = "number";
    this.pInput.step = "0.01";
    this.pInput.min = "0";
    this.pInput.max = "1";
    this.pInput.id = "p-threshold";
    for (const method of ["pearson", "spearman"]) {
      const option = document.createElement("option");
      option.value = method;
      option.textContent = method;
      this.methodSelect.appendChild(option);
    }
    this.validation.className = "validation";
    this.status.className = "status";
    this.excludedChips.className = "excluded-chips";

    container.append(
      this.labeled("sort", this.sortSelect),
      this.labeled("x", this.xSelect),
      this.labeled("y", this.ySelect),
      this.labeled("R", this.resolutionInput),
      this.labeled("p", this.pInput),
      this.labeled("method", this.methodSelect),
      this.validation,
      this.status,
      this.excludedChips
    );

    this.sortSelect.addEventListener("change", () => this.apply());
    this.xSelect.addEventListener("change", () => this.apply());
    this.ySelect.addEventListener("change", () => this.apply());
    this.resolutionInput.addEventListener("change", () => this.apply());
    this.pInput.addEventListener("change", () => this.apply());
    this.methodSelect.addEventListener("change", () => this.apply());
    store.subscribe((state) => this.render(state));
  }

  private labeled(text: string, control: HTMLElement): HTMLLabelElement {
    const label = document.createElement("label");
    label.append(text, control);
    return label;
  }

  private fillVariables(select: HTMLSelectElement, variables: string[], value: string): void {
    select.replaceChildren();
    for (const name of variables) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      select.appendChild(option);
    }
    select.value = value;
  }

  private render(state: ViewState): void {
    this.fillVariables(this.sortSelect, state.variables, state.sort);
    this.fillVariables(this.xSelect, state.variables, state.x);
    this.fillVariables(this.ySelect, state.variables, state.y);
    if (document.activeElement !== this.resolutionInput) {
      this.resolutionInput.value = String(state.resolution);
    }
    if (document.activeElement !== this.pInput) {
      this.pInput.value = String(state.pThreshold);
    }
    this.methodSelect.value = state.method;
    this.status.textContent = state.error
      ? `error: ${state.error}`
      : state.busy
        ? "loading..."
        : `${state.nObservations - state.excluded.size} active / ${state.nObservations} rows` +
          (state.excluded.size ? `, ${state.excluded.size} excluded` : "");
    this.status.classList.toggle("error", state.error !== null);
    this.excludedChips.replaceChildren();
    for (const index of [...state.excluded].sort((a, b) => a - b)) {
      const chip = document.createElement("button");
      chip.type = "button";
      chip.className = "chip";
      chip.dataset.index = String(index);
      chip.textContent = `#${index} ✕`;
      chip.title = "re-include this observation";
      chip.addEventListener("click", () => void this.store.toggleExclusion(index));
      this.excludedChips.appendChild(chip);
    }
  }

  /** Validate locally, then push the new parameters into the store. */
  apply(): void {
    const state = this.store.snapshot();
    const resolution = Number(this.resolutionInput.value);
    const active = state.nObservations - state.excluded.size;
    if (!Number.isInteger(resolution) || resolution < 2 || resolution > active) {
      this.validation.textContent = `R must be an integer in [2, ${active}]`;
      return;
    }
    const p = Number(this.pInput.value);
    if (!(p > 0 && p <= 1)) {
      this.validation.textContent = "p must lie in (0, 1]";
      return;
    }
    const names = [this.sortSelect.value, this.xSelect.value, this.ySelect.value];
    if (new Set(names).size !== 3) {
      this.validation.textContent = "sort, x and y must be three different variables";
      return;
    }
    this.validation.textContent = "";
    this.store.setParams({
      sort: this.sortSelect.value,
      x: this.xSelect.value,
      y: this.ySelect.value,
      resolution,
      pThreshold: p,
      method: this.methodSelect.value as "pearson" | "spearman",
    });
  }
}
