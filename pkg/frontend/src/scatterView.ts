/**
 * Linked scatter panel: every active observation as an outline circle,
 * members of the selected window filled, excluded rows absent (the server
 * never returns them).  Clicking a point toggles its exclusion through the
 * session, which refetches the grid - the what-if loop.
 */

import { ScatterPoint } from "./api.js";
import { POSITIVE_END } from "./colors.js";
import { ExplorerStore, ViewState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const WIDTH = 520;
const HEIGHT = 430;
const MARGIN = { left: 52, right: 14, top: 14, bottom: 40 };

const HIGHLIGHT_FILL = `rgb(${POSITIVE_END.join(",")})`;

export class ScatterView {
  private readonly svg: SVGSVGElement;

  constructor(container: HTMLElement, private readonly store: ExplorerStore) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.svg.setAttribute("class", "scatter-view");
    container.appendChild(this.svg);
    store.subscribe((state) => this.render(state));
  }

  private render(state: ViewState): void {
    this.svg.replaceChildren();
    if (!state.scatter.length) return;
    const xs = state.scatter.map((p) => p.x);
    const ys = state.scatter.map((p) => p.y);
    const scaleX = this.scale(Math.min(...xs), Math.max(...xs), MARGIN.left, WIDTH - MARGIN.right);
    const scaleY = this.scale(Math.min(...ys), Math.max(...ys), HEIGHT - MARGIN.bottom, MARGIN.top);
    this.axes(state);
    const group = document.createElementNS(SVG_NS, "g");
    for (const point of state.scatter) {
      group.appendChild(this.marker(point, scaleX(point.x), scaleY(point.y), state));
    }
    this.svg.appendChild(group);
  }

  private scale(lo: number, hi: number, outLo: number, outHi: number): (v: number) => number {
    const span = hi === lo ? 1 : hi - lo;
    const pad = 0.04 * span;
    const a = (outHi - outLo) / (span + 2 * pad);
    return (v: number) => outLo + (v - (lo - pad)) * a;
  }

  private marker(point: ScatterPoint, cx: number, cy: number, state: ViewState): SVGCircleElement {
    const node = document.createElementNS(SVG_NS, "circle");
    node.setAttribute("cx", cx.toFixed(2));
    node.setAttribute("cy", cy.toFixed(2));
    node.setAttribute("r", "4");
    node.setAttribute("data-index", String(point.index));
    node.classList.add("scatter-point");
    if (state.highlight.has(point.index)) {
      node.classList.add("highlighted");
      node.setAttribute("fill", HIGHLIGHT_FILL);
      node.setAttribute("stroke", HIGHLIGHT_FILL);
    } else {
      node.setAttribute("fill", "none");
      node.setAttribute("stroke", "#666666");
    }
    node.addEventListener("click", () => void this.store.toggleExclusion(point.index));
    return node;
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
    const xLabel = document.createElementNS(SVG_NS, "text");
    xLabel.setAttribute("x", String((MARGIN.left + WIDTH - MARGIN.right) / 2));
    xLabel.setAttribute("y", String(HEIGHT - 8));
    xLabel.setAttribute("text-anchor", "middle");
    xLabel.setAttribute("font-size", "11");
    xLabel.textContent = state.x;
    this.svg.appendChild(xLabel);
    const yLabel = document.createElementNS(SVG_NS, "text");
    const ym = (MARGIN.top + HEIGHT - MARGIN.bottom) / 2;
    yLabel.setAttribute("x", "14");
    yLabel.setAttribute("y", String(ym));
    yLabel.setAttribute("text-anchor", "middle");
    yLabel.setAttribute("font-size", "11");
    yLabel.setAttribute("transform", `rotate(-90 14 ${ym})`);
    yLabel.textContent = state.y;
    this.svg.appendChild(yLabel);
  }
}
