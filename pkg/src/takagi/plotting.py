"""Figures: a dependency-free SVG of one instance, and matplotlib report plots.

The SVG writer emits only ``rect``, ``path`` and ``circle`` elements inside
the ``svg`` document element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .region import ConvexRegion

PANEL = 480.0
PAD_FRACTION = 0.05
INSET_RATIO = 50.0

REGION_FILL = "#4c72b0"
HULL_STROKE = "#222222"
G_ROOT_STROKE = "#c44e52"
H_ZERO_FILL = "#55a868"


@dataclass
class Layer:
    kind: str  # "region" | "hull" | "g_roots" | "h_zeros"
    region: ConvexRegion | None = None
    points: tuple[complex, ...] = ()


@dataclass
class PlotSpec:
    layers: list[Layer] = field(default_factory=list)
    viewport: tuple[float, float, float, float] | None = None  # xmin, xmax, ymin, ymax
    output: str | None = None


def instance_plot_spec(ti, output: str | None = None) -> PlotSpec:
    layers = []
    if ti.region is not None and not ti.region.is_empty():
        layers.append(Layer("region", region=ti.region))
    if ti.hull is not None and not ti.hull.is_empty():
        layers.append(Layer("hull", region=ti.hull))
    if ti.g_roots is not None:
        layers.append(Layer("g_roots", points=tuple(ti.g_roots.roots)))
    if ti.h_zeros is not None:
        layers.append(Layer("h_zeros", points=tuple(ti.h_zeros.roots)))
    return PlotSpec(layers=layers, output=output)


def _layer_points(layer: Layer) -> list[complex]:
    if layer.region is not None:
        return list(layer.region.vertices)
    return list(layer.points)


def auto_viewport(points: Sequence[complex]) -> tuple[float, float, float, float]:
    """Square bounds containing ``points`` with 5% padding on every side."""
    if not points:
        return (-1.0, 1.0, -1.0, 1.0)
    xs = [p.real for p in points]
    ys = [p.imag for p in points]
    cx, cy = (min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2
    half = max(max(xs) - min(xs), max(ys) - min(ys)) / 2
    if half == 0:
        half = max(1.0, abs(cx), abs(cy)) * 0.1
    half *= 1 + 2 * PAD_FRACTION
    return (cx - half, cx + half, cy - half, cy + half)


class _Panel:
    def __init__(self, viewport, x0: float, y0: float, size: float):
        self.xmin, self.xmax, self.ymin, self.ymax = viewport
        self.x0, self.y0, self.size = x0, y0, size
        self.sx = size / (self.xmax - self.xmin)
        self.sy = size / (self.ymax - self.ymin)

    def map(self, z: complex) -> tuple[float, float]:
        return (
            self.x0 + (z.real - self.xmin) * self.sx,
            self.y0 + (self.ymax - z.imag) * self.sy,
        )

    def visible(self, z: complex) -> bool:
        return self.xmin <= z.real <= self.xmax and self.ymin <= z.imag <= self.ymax


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _clip(v: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, v))


def _panel_elements(panel: _Panel, spec: PlotSpec) -> list[str]:
    out = [
        f'<rect x="{_fmt(panel.x0)}" y="{_fmt(panel.y0)}" width="{_fmt(panel.size)}" '
        f'height="{_fmt(panel.size)}" fill="white" stroke="#999999" stroke-width="1"/>'
    ]
    lo_x, hi_x = panel.x0 - panel.size, panel.x0 + 2 * panel.size
    lo_y, hi_y = panel.y0 - panel.size, panel.y0 + 2 * panel.size
    for layer in spec.layers:
        if layer.kind in ("region", "hull") and layer.region is not None and not layer.region.is_empty():
            r = layer.region
            if r.kind == "point":
                x, y = panel.map(r.vertices[0])
                if layer.kind == "region":
                    out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="6" fill="{REGION_FILL}" fill-opacity="0.3"/>')
                continue
            # far-off vertices are clamped so renderers do not choke on huge coordinates
            pts = [panel.map(v) for v in r.vertices]
            pts = [(_clip(x, lo_x, hi_x), _clip(y, lo_y, hi_y)) for x, y in pts]
            d = "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in pts)
            if r.kind == "polygon":
                d += " Z"
            if layer.kind == "region":
                if r.kind == "polygon":
                    out.append(f'<path d="{d}" fill="{REGION_FILL}" fill-opacity="0.25" stroke="{REGION_FILL}" stroke-width="1"/>')
                else:
                    out.append(f'<path d="{d}" fill="none" stroke="{REGION_FILL}" stroke-opacity="0.45" stroke-width="8" stroke-linecap="round"/>')
            else:
                out.append(f'<path d="{d}" fill="none" stroke="{HULL_STROKE}" stroke-width="1.5"/>')
        elif layer.kind == "g_roots":
            for z in layer.points:
                if panel.visible(z):
                    x, y = panel.map(z)
                    out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="5" fill="none" stroke="{G_ROOT_STROKE}" stroke-width="1.5"/>')
        elif layer.kind == "h_zeros":
            for z in layer.points:
                if panel.visible(z):
                    x, y = panel.map(z)
                    out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.5" fill="{H_ZERO_FILL}"/>')
    return out


def render_svg(spec: PlotSpec) -> str:
    """Render ``spec`` as an SVG document string.

    When the region is more than 50 times wider than the hull ``K``, a second
    panel zoomed on ``K`` is placed to the right of the main one.
    """
    geometry = [p for layer in spec.layers for p in _layer_points(layer)]
    viewport = spec.viewport or auto_viewport(geometry)
    margin = 10.0
    panels = [_Panel(viewport, margin, margin, PANEL)]
    region = next((l.region for l in spec.layers if l.kind == "region"), None)
    hull = next((l.region for l in spec.layers if l.kind == "hull"), None)
    if region is not None and hull is not None and not hull.is_empty():
        rd, hd = region.diameter(), hull.diameter()
        if rd > INSET_RATIO * max(hd, 1e-300):
            near = list(hull.vertices)
            for l in spec.layers:
                if l.kind in ("g_roots", "h_zeros"):
                    near += [z for z in l.points if abs(z - hull.centroid()) <= 3 * max(hd, 1e-12) + hd]
            panels.append(_Panel(auto_viewport(near), 2 * margin + PANEL, margin, PANEL))
    width = margin + len(panels) * (PANEL + margin)
    height = PANEL + 2 * margin
    body = []
    for panel in panels:
        body.extend(_panel_elements(panel, spec))
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    return "\n".join([head, *("  " + b for b in body), "</svg>"]) + "\n"


def write_svg(spec: PlotSpec, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(render_svg(spec))
    return path


# ------------------------------------------------------------- matplotlib


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def instance_figure(ti, path: str | Path):
    """Raster/vector figure of one instance via matplotlib (png, pdf, ...)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    if ti.region is not None and not ti.region.is_empty():
        vs = list(ti.region.vertices)
        if ti.region.kind == "polygon":
            ax.fill([v.real for v in vs], [v.imag for v in vs], color=REGION_FILL, alpha=0.25, label="region")
        else:
            ax.plot([v.real for v in vs], [v.imag for v in vs], color=REGION_FILL, alpha=0.45, lw=6, label="region")
    if ti.hull is not None and ti.hull.kind in ("segment", "polygon"):
        vs = list(ti.hull.vertices) + ([ti.hull.vertices[0]] if ti.hull.kind == "polygon" else [])
        ax.plot([v.real for v in vs], [v.imag for v in vs], color=HULL_STROKE, lw=1.2, label="hull K")
    if ti.g_roots is not None:
        zs = ti.g_roots.roots
        ax.scatter([z.real for z in zs], [z.imag for z in zs], facecolors="none", edgecolors=G_ROOT_STROKE, label="zeros of g")
    if ti.h_zeros is not None:
        zs = ti.h_zeros.roots
        ax.scatter([z.real for z in zs], [z.imag for z in zs], color=H_ZERO_FILL, s=14, label="zeros of h")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def sweep_figure(result, path: str | Path):
    """Log-log plot of far-zero magnitude and near-zero displacement against |alpha|."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 4))
    mags = [abs(r.alpha) for r in result.records]
    far = [max((abs(z) for z in r.far), default=math.nan) for r in result.records]
    near = [max(r.near_displacement, default=math.nan) for r in result.records]
    ax.loglog(mags, far, "o-", label=f"max |far zero| (slope {_slope(result.fit.far_slope)})")
    ax.loglog(mags, near, "s--", label=f"max near displacement (slope {_slope(result.fit.near_slope)})")
    ax.set_xlabel("|alpha|")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def _slope(s):
    return "n/a" if s is None else f"{s:.3f}"


def margin_histogram_figure(report, path: str | Path):
    """Bar chart of normalised containment margins across an ensemble."""
    plt = _pyplot()
    hist = report.margin_histogram
    fig, ax = plt.subplots(figsize=(6.5, 3.5))
    labels = list(hist)
    ax.bar(range(len(labels)), [hist[k] for k in labels], color=REGION_FILL)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=35, ha="right", fontsize=7)
    ax.set_ylabel("zeros")
    ax.set_title(f"margin / (diam + max|z|); {report.failed_count} failing instance(s)", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)
