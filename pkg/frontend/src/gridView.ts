/**
 * Interactive triangle plot: one marker per non-omitted cell, colored with
 * the shared diverging map, white when not significant.  Hover shows the
 * cell's numbers, click selects it (the linked scatter highlights its
 * window).
 */

import { CellRecord } from "./api.js";
import { cellFill } from "./colors.js";
import { ExplorerStore, ViewState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const WIDTH = 520;
const HEIGHT = 430;
const MARGIN = { left: 48, right: 16, top: 14, bottom: 40 };

export class GridView {
  private readonly svg: SVGSVGElement;
  private readonly tooltip: HTMLDivElement;

  constructor(private readonly container: HTMLElement, private readonly store: ExplorerStore) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.svg.setAttribute("class", "grid-view");
    container.appendChild(this.svg);
    this.tooltip = document.createElement("div");
    this.tooltip.className = "tooltip";
    this.tooltip.hidden = true;
    container.appendChild(this.tooltip);
    store.subscribe((state) => this.render(state));
  }

  private sx(alpha: number): number {
    return MARGIN.left + alpha * (WIDTH - MARGIN.left - MARGIN.right);
  }

  private sy(fraction: number): number {
    return HEIGHT - MARGIN.bottom - fraction * (HEIGHT - MARGIN.top - MARGIN.bottom);
  }

  private render(state: ViewState): void {
    this.svg.replaceChildren();
    this.axes(state);
    if (!state.grid.length) return;
    const total = Math.max(...state.grid.map((c) => c.n));
    const group = document.createElementNS(SVG_NS, "g");
    for (const cell of state.grid) {
      if (cell.omitted) continue;
      group.appendChild(this.marker(cell, total, state));
    }
    this.svg.appendChild(group);
  }

  private marker(cell: CellRecord, total: number, state: ViewState): SVGCircleElement {
    const node = document.createElementNS(SVG_NS, "circle");
    node.setAttribute("cx", this.sx(cell.alpha).toFixed(2));
    node.setAttribute("cy", this.sy(cell.n / total).toFixed(2));
    const selected =
      state.selectedCell &&
      state.selectedCell.alpha === cell.alpha &&
      state.selectedCell.beta === cell.beta;
    node.setAttribute("r", selected ? "7" : "5");
    node.setAttribute("fill", cellFill(cell.r, cell.significant));
    node.setAttribute("stroke", selected ? "#111111" : "#999999");
    node.setAttribute("stroke-width", selected ? "2" : "0.5");
    node.setAttribute("data-alpha", String(cell.alpha));
    node.setAttribute("data-beta", String(cell.beta));
    node.classList.add("grid-cell");
    node.addEventListener("click", () => void this.store.selectCell(cell.alpha, cell.beta));
    node.addEventListener("mouseenter", (event) => this.showTooltip(cell, event));
    node.addEventListener("mouseleave", () => {
      this.tooltip.hidden = true;
    });
    return node;
  }

  private showTooltip(cell: CellRecord, event: Event): void {
    const r = cell.r === null ? "undefined" : cell.r.toPrecision(4);
    const p = cell.p === null ? "undefined" : cell.p.toExponential(2);
    this.tooltip.textContent =
      `alpha=${cell.alpha.toPrecision(4)} beta=${cell.beta.toPrecision(4)} ` +
      `n=${cell.n} r=${r} p=${p}${cell.significant ? "" : " (not significant)"}`;
    this.tooltip.hidden = false;
    const mouse = event as MouseEvent;
    this.tooltip.style.left = `${mouse.pageX + 12}px`;
    this.tooltip.style.top = `${mouse.pageY + 12}px`;
  }

  private axes(state: ViewState): void {
    const frame = document.createElementNS(SVG_NS, "rect");
    frame.setAttribute("x", String(MARGIN.left));
    frame.setAttribute("y", String(MARGIN.top));
    frame.setAttribute("width", String(WIDTH - MARGIN.left - MARGIN.right));
    frame.setAttribute("height", String(HEIGHT - MARGIN.top - MARGIN.bottom));
    frame.setAttribute("fill", "none");
    frame.setAttribute("stroke", "#333333");
    this.svg.appendChild(frame);
    for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
      this.svg.appendChild(this.text(this.sx(tick), HEIGHT - MARGIN.bottom + 16, String(tick), "middle"));
      this.svg.appendChild(this.text(MARGIN.left - 6, this.sy(tick) + 4, String(tick), "end"));
    }
    this.svg.appendChild(
      this.text(
        (MARGIN.left + WIDTH - MARGIN.right) / 2,
        HEIGHT - 8,
        state.sort ? `${state.sort} quantile` : "sorting variable quantile",
        "middle"
      )
    );
    const label = this.text(14, (MARGIN.top + HEIGHT - MARGIN.bottom) / 2, "fraction of population", "middle");
    label.setAttribute(
      "transform",
      `rotate(-90 14 ${(MARGIN.top + HEIGHT - MARGIN.bottom) / 2})`
    );
    this.svg.appendChild(label);
  }

  private text(x: number, y: number, content: string, anchor: string): SVGTextElement {
    const node = document.createElementNS(SVG_NS, "text");
    node.setAttribute("x", x.toFixed(1));
    node.setAttribute("y", y.toFixed(1));
    node.setAttribute("text-anchor", anchor);
    node.setAttribute("font-size", "11");
    node.textContent = content;
    return node;
  }
}
