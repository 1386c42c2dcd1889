"""Deterministic SVG rendering of correlation grids and scatter views.

Output is a pure function of its inputs: identical grid and options produce
byte-identical documents.  Cell-derived floats are quantized to the shared
12-significant-digit export precision before layout, so a grid rendered
directly and one round-tripped through its CSV export draw the same bytes.
Each grid marker carries machine-readable data-alpha / data-beta / data-n /
data-r / data-p attributes for hit-testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import FLOAT_FORMAT, DataMatrix, round12
from .engine import MCAGrid

__all__ = ["DivergingColormap", "RenderOptions", "render_mca", "render_scatter", "parse_color"]


def parse_color(text: str) -> tuple[int, int, int]:
    t = text.strip().lstrip("#")
    if len(t) != 6:
        raise ValueError(f"expected #rrggbb color, got {text!r}")
    return tuple(int(t[k : k + 2], 16) for k in (0, 2, 4))


def _hex(rgb: tuple[int, int, int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


@dataclass(frozen=True)
class DivergingColormap:
    """Linear two-sided map: midpoint at r = 0, one endpoint per sign.

    Channels interpolate linearly between midpoint and endpoint, so each is
    monotone in |r| and the map is mirror-symmetric under endpoint swap.
    """

    negative: tuple[int, int, int] = (178, 24, 43)   # r = -1
    positive: tuple[int, int, int] = (33, 102, 172)  # r = +1
    midpoint: tuple[int, int, int] = (255, 255, 255)

    def color_for(self, r: float) -> str:
        t = min(1.0, abs(r))
        end = self.positive if r >= 0 else self.negative
        return _hex(
            tuple(round(m + (e - m) * t) for m, e in zip(self.midpoint, end))
        )


@dataclass(frozen=True)
class RenderOptions:
    width: int = 640
    height: int = 480
    colormap: DivergingColormap = field(default_factory=DivergingColormap)
    insignificant_color: str = "#ffffff"
    abscissa_mode: str = "quantile"  # or "median_value"
    marker_size: float = 4.0
    x_label: str | None = None
    y_label: str | None = None

    def __post_init__(self):
        if self.abscissa_mode not in ("quantile", "median_value"):
            raise ValueError(f"unknown abscissa mode {self.abscissa_mode!r}")
        parse_color(self.insignificant_color)


def _f(v: float) -> str:
    # Pixel coordinate formatting; fixed decimals keep the bytes stable.
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _g(v: float) -> str:
    return FLOAT_FORMAT.format(v)


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    span = hi - lo
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(round12(t))
        t += step
    return ticks


class _Svg:
    def __init__(self, width: int, height: int):
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n'
        ]

    def add(self, line: str) -> None:
        self.parts.append(line + "\n")

    def text(self, x, y, content, size=11, anchor="middle", extra=""):
        self.add(
            f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}"{extra}>'
            f"{content}</text>"
        )

    def finish(self) -> str:
        self.parts.append("</svg>\n")
        return "".join(self.parts)


_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 62, 96, 22, 48


def _axes(svg: _Svg, width, height, xlo, xhi, xticks, ylo, yhi, yticks, x_label, y_label):
    px0, px1 = _MARGIN_L, width - _MARGIN_R
    py0, py1 = height - _MARGIN_B, _MARGIN_T

    def sx(v):
        return px0 + (v - xlo) / (xhi - xlo) * (px1 - px0)

    def sy(v):
        return py0 + (v - ylo) / (yhi - ylo) * (py1 - py0)

    svg.add(
        f'<rect x="{_f(px0)}" y="{_f(py1)}" width="{_f(px1 - px0)}" height="{_f(py0 - py1)}" '
        'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    for t in xticks:
        x = sx(t)
        svg.add(f'<line x1="{_f(x)}" y1="{_f(py0)}" x2="{_f(x)}" y2="{_f(py0 + 4)}" stroke="#333333"/>')
        svg.text(x, py0 + 16, _g(t), size=10)
    for t in yticks:
        y = sy(t)
        svg.add(f'<line x1="{_f(px0 - 4)}" y1="{_f(y)}" x2="{_f(px0)}" y2="{_f(y)}" stroke="#333333"/>')
        svg.text(px0 - 7, y + 3.5, _g(t), size=10, anchor="end")
    svg.text((px0 + px1) / 2, height - 12, x_label, size=12)
    ymid = (py0 + py1) / 2
    svg.text(
        16, ymid, y_label, size=12,
        extra=f' transform="rotate(-90 {_f(16)} {_f(ymid)})"',
    )
    return sx, sy


def _legend(svg: _Svg, width, colormap: DivergingColormap):
    x = width - _MARGIN_R + 30
    top, bottom = _MARGIN_T + 8, _MARGIN_T + 168
    steps = 64
    h = (bottom - top) / steps
    for k in range(steps):
        # r runs from +1 at the top to -1 at the bottom
        r = 1.0 - 2.0 * (k + 0.5) / steps
        svg.add(
            f'<rect x="{_f(x)}" y="{_f(top + k * h)}" width="14" height="{_f(h + 0.5)}" '
            f'fill="{colormap.color_for(r)}" stroke="none"/>'
        )
    svg.add(
        f'<rect x="{_f(x)}" y="{_f(top)}" width="14" height="{_f(bottom - top)}" '
        'fill="none" stroke="#333333" stroke-width="0.5"/>'
    )
    svg.text(x + 20, top + 4, "+1", size=10, anchor="start")
    svg.text(x + 20, (top + bottom) / 2 + 4, "0", size=10, anchor="start")
    svg.text(x + 20, bottom + 4, "-1", size=10, anchor="start")
    svg.text(x + 7, top - 10, "r", size=11)


def render_mca(grid: MCAGrid, opts: RenderOptions | None = None) -> str:
    """MCA plot: one marker per non-omitted cell, ordinate n/M, abscissa the
    window center (quantile mode) or its median sorting value."""
    opts = opts or RenderOptions()
    drawn = [c for c in grid.cells if not c.omitted]
    if not drawn:
        raise ValueError("every cell is omitted; nothing to render")
    m = grid.total_observations
    quantile_mode = opts.abscissa_mode == "quantile"
    xs = [round12(c.alpha if quantile_mode else c.median_sorting_value) for c in drawn]
    if quantile_mode:
        xlo, xhi = 0.0, 1.0
        xticks = [0.0, 0.25, 0.5, 0.75, 1.0]
    else:
        vlo, vhi = min(xs), max(xs)
        if vlo == vhi:
            vlo, vhi = vlo - 1.0, vhi + 1.0
        pad = 0.05 * (vhi - vlo)
        xlo, xhi = vlo - pad, vhi + pad
        xticks = _nice_ticks(xlo, xhi)
    x_label = opts.x_label or (
        "sorting variable quantile" if quantile_mode else "sorting variable median"
    )
    y_label = opts.y_label or "fraction of population"

    svg = _Svg(opts.width, opts.height)
    svg.add(f'<rect x="0" y="0" width="{opts.width}" height="{opts.height}" fill="#ffffff"/>')
    sx, sy = _axes(
        svg, opts.width, opts.height, xlo, xhi, xticks, 0.0, 1.0,
        [0.0, 0.25, 0.5, 0.75, 1.0], x_label, y_label,
    )
    svg.add('<g stroke="#888888" stroke-width="0.4">')
    for cell, x in zip(drawn, xs):
        frac = cell.n / m
        r12 = None if cell.r is None else round12(cell.r)
        fill = (
            opts.colormap.color_for(r12)
            if cell.significant and r12 is not None
            else opts.insignificant_color
        )
        attrs = (
            f' data-alpha="{_g(cell.alpha)}" data-beta="{_g(cell.beta)}" data-n="{cell.n}"'
            f' data-r="{"nan" if r12 is None else _g(r12)}"'
            f' data-p="{"nan" if cell.p_value is None else _g(round12(cell.p_value))}"'
        )
        svg.add(
            f'<circle cx="{_f(sx(x))}" cy="{_f(sy(frac))}" r="{_f(opts.marker_size)}" '
            f'fill="{fill}"{attrs}/>'
        )
    svg.add("</g>")
    _legend(svg, opts.width, opts.colormap)
    return svg.finish()


def render_scatter(
    d: DataMatrix, i: str, j: str, highlight=(), opts: RenderOptions | None = None
) -> str:
    """Scatter of columns i and j; highlighted rows are drawn filled, the
    rest as outlines.  Rows missing either coordinate are skipped."""
    opts = opts or RenderOptions()
    xi = d.column(i)
    yj = d.column(j)
    keep = np.isfinite(xi) & np.isfinite(yj)
    if not keep.any():
        raise ValueError("no complete observation pairs to draw")
    hset = {int(k) for k in highlight}
    out_of_range = hset - set(range(d.n_observations))
    if out_of_range:
        raise ValueError(f"highlight indices out of range: {sorted(out_of_range)}")

    def _range(v):
        vlo, vhi = float(v[keep].min()), float(v[keep].max())
        if vlo == vhi:
            vlo, vhi = vlo - 1.0, vhi + 1.0
        pad = 0.05 * (vhi - vlo)
        return vlo - pad, vhi + pad

    xlo, xhi = _range(xi)
    ylo, yhi = _range(yj)
    svg = _Svg(opts.width, opts.height)
    svg.add(f'<rect x="0" y="0" width="{opts.width}" height="{opts.height}" fill="#ffffff"/>')
    sx, sy = _axes(
        svg, opts.width, opts.height, xlo, xhi, _nice_ticks(xlo, xhi),
        ylo, yhi, _nice_ticks(ylo, yhi), opts.x_label or i, opts.y_label or j,
    )
    base = opts.colormap.positive
    svg.add("<g>")
    for p in range(d.n_observations):
        if not keep[p]:
            continue
        cx, cy = sx(round12(float(xi[p]))), sy(round12(float(yj[p])))
        if p in hset:
            style = f'fill="{_hex(base)}" stroke="{_hex(base)}" stroke-width="1"'
        else:
            style = 'fill="none" stroke="#666666" stroke-width="1"'
        svg.add(
            f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(opts.marker_size)}" {style} '
            f'data-index="{p}"/>'
        )
    svg.add("</g>")
    return svg.finish()
