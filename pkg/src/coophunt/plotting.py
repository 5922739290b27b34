"""Deterministic SVG figures: phase portraits, bifurcation diagrams, fate maps.

Everything is emitted as plain SVG 1.1 text with numbers at 9 significant
digits and no timestamps, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .bifurcation import BifurcationDiagram, CriticalKind, FateMap
from .equilibria import PoleError, admissible_interval, v_from_u
from .integrate import Fate, IntegratorConfig, simulate
from .model import ModelParams, ParameterError, field_grid
from .stability import classify_all


def fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass(frozen=True)
class PhasePortraitSpec:
    u_range: tuple[float, float] = (0.0, 1.1)
    v_range: tuple[float, float] = (0.0, 2.6)
    arrows: int = 18
    nullcline_samples: int = 241
    seeds: tuple[tuple[float, float], ...] = ((0.5, 0.5), (0.9, 2.4), (0.2, 1.5))
    width: int = 640
    height: int = 480
    trajectory_t_end: float = 80.0

    def __post_init__(self):
        for name in ("u_range", "v_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
                raise ParameterError(f"{name} must have positive length, got {(lo, hi)!r}")
        if self.arrows < 2 or self.nullcline_samples < 2:
            raise ParameterError("grid densities must be at least 2")
        if self.width < 16 or self.height < 16:
            raise ParameterError("image must be at least 16x16 pixels")


@dataclass
class Canvas:
    width: int
    height: int
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    margin: tuple[int, int, int, int] = (20, 20, 50, 60)  # top, right, bottom, left
    body: list[str] = field(default_factory=list)

    def px(self, x: float) -> float:
        top, right, bottom, left = self.margin
        x0, x1 = self.x_range
        return left + (x - x0) / (x1 - x0) * (self.width - left - right)

    def py(self, y: float) -> float:
        top, right, bottom, left = self.margin
        y0, y1 = self.y_range
        return self.height - bottom - (y - y0) / (y1 - y0) * (self.height - top - bottom)

    def add(self, element: str):
        self.body.append(element)

    def polyline(self, xs, ys, stroke, width=1.5, dash=None, css=None):
        pts = " ".join(f"{fmt(self.px(x))},{fmt(self.py(y))}" for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        cls = f' class="{css}"' if css else ""
        self.add(f'<polyline{cls} points="{pts}" fill="none" stroke="{stroke}" '
                 f'stroke-width="{fmt(width)}"{extra}/>')

    def segments(self, segs, stroke, width=1.5, css=None):
        if not segs:
            return
        d = " ".join(
            f"M{fmt(self.px(x0))} {fmt(self.py(y0))}L{fmt(self.px(x1))} {fmt(self.py(y1))}"
            for x0, y0, x1, y1 in segs
        )
        cls = f' class="{css}"' if css else ""
        self.add(f'<path{cls} d="{d}" fill="none" stroke="{stroke}" stroke-width="{fmt(width)}"/>')

    def marker(self, x, y, filled, color="black", r=5.0, title=None):
        fill = color if filled else "white"
        tip = f"<title>{escape(title)}</title>" if title else ""
        self.add(f'<circle cx="{fmt(self.px(x))}" cy="{fmt(self.py(y))}" r="{fmt(r)}" '
                 f'fill="{fill}" stroke="{color}" stroke-width="1.5">{tip}</circle>')

    def text(self, x_px, y_px, s, anchor="middle", size=12, rotate=None):
        rot = f' transform="rotate({fmt(rotate)} {fmt(x_px)} {fmt(y_px)})"' if rotate is not None else ""
        self.add(f'<text x="{fmt(x_px)}" y="{fmt(y_px)}" font-family="sans-serif" '
                 f'font-size="{size}" text-anchor="{anchor}"{rot}>{escape(s)}</text>')

    def axes(self, xlabel, ylabel, ticks=5):
        x0, x1 = self.x_range
        y0, y1 = self.y_range
        self.polyline([x0, x1, x1, x0, x0], [y0, y0, y1, y1, y0], "black", 1.0)
        for k in range(ticks + 1):
            xv = x0 + (x1 - x0) * k / ticks
            yv = y0 + (y1 - y0) * k / ticks
            self.text(self.px(xv), self.py(y0) + 16, f"{xv:.3g}", size=10)
            self.text(self.px(x0) - 6, self.py(yv) + 4, f"{yv:.3g}", anchor="end", size=10)
        self.text(0.5 * (self.px(x0) + self.px(x1)), self.height - 12, xlabel)
        self.text(16, 0.5 * (self.py(y0) + self.py(y1)), ylabel, rotate=-90)

    def defs(self, content):
        self.body.insert(0, f"<defs>{content}</defs>")

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>\n'
        )
        return head + "\n".join(self.body) + "\n</svg>\n"


def marching_squares(xs, ys, z) -> list[tuple[float, float, float, float]]:
    """Zero-contour segments of ``z[iy, ix]`` sampled on the grid ``xs x ys``.

    Corners are split by ``z > 0``; crossings are placed by linear
    interpolation.  Ambiguous saddle cells are resolved with the cell mean.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    z = np.asarray(z, dtype=float)
    segs = []

    def cross(p0, p1, z0, z1):
        t = 0.5 if z0 == z1 else z0 / (z0 - z1)
        return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))

    for iy in range(len(ys) - 1):
        for ix in range(len(xs) - 1):
            corners = [(xs[ix], ys[iy]), (xs[ix + 1], ys[iy]), (xs[ix + 1], ys[iy + 1]), (xs[ix], ys[iy + 1])]
            vals = [z[iy, ix], z[iy, ix + 1], z[iy + 1, ix + 1], z[iy + 1, ix]]
            inside = [v > 0 for v in vals]
            if all(inside) or not any(inside):
                continue
            pts = []
            for k in range(4):
                k2 = (k + 1) % 4
                if inside[k] != inside[k2]:
                    pts.append(cross(corners[k], corners[k2], vals[k], vals[k2]))
            if len(pts) == 2:
                segs.append((*pts[0], *pts[1]))
            elif len(pts) == 4:
                # centre on corner 0's side isolates corners 1 and 3
                if (sum(vals) / 4 > 0) == inside[0]:
                    segs.append((*pts[0], *pts[1]))
                    segs.append((*pts[2], *pts[3]))
                else:
                    segs.append((*pts[0], *pts[3]))
                    segs.append((*pts[1], *pts[2]))
    return segs


def _clip_to_range(xs, ys, x_range, y_range):
    out_x, out_y = [], []
    for x, y in zip(xs, ys):
        if x_range[0] <= x <= x_range[1] and y_range[0] <= y <= y_range[1]:
            out_x.append(x)
            out_y.append(y)
    return out_x, out_y


def phase_portrait_svg(params: ModelParams, spec: PhasePortraitSpec | None = None,
                       cfg: IntegratorConfig | None = None) -> str:
    """Nullclines, direction arrows, seeded trajectories and equilibria.

    Equilibria are filled when stable and open otherwise.
    """
    spec = spec or PhasePortraitSpec()
    canvas = Canvas(spec.width, spec.height, spec.u_range, spec.v_range)
    canvas.defs(
        '<marker id="arrowhead" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto">'
        '<path d="M0,0 L6,3 L0,6 z" fill="#888888"/></marker>'
    )
    (u0, u1), (v0, v1) = spec.u_range, spec.v_range

    us = np.linspace(u0, u1, spec.arrows)
    vs = np.linspace(v0, v1, spec.arrows)
    uu, vv = np.meshgrid(us, vs)
    du, dv = field_grid(uu, vv, params)
    cell = min(canvas.px(us[1]) - canvas.px(us[0]), canvas.py(vs[0]) - canvas.py(vs[1]))
    for iy in range(spec.arrows):
        for ix in range(spec.arrows):
            # direction in pixel space
            dx = du[iy, ix] * (canvas.px(u1) - canvas.px(u0)) / (u1 - u0)
            dy = -dv[iy, ix] * (canvas.py(v0) - canvas.py(v1)) / (v1 - v0)
            norm = math.hypot(dx, dy)
            if norm == 0.0:
                continue
            x, y = canvas.px(us[ix]), canvas.py(vs[iy])
            L = 0.4 * cell
            canvas.add(f'<line x1="{fmt(x)}" y1="{fmt(y)}" x2="{fmt(x + L * dx / norm)}" '
                       f'y2="{fmt(y + L * dy / norm)}" stroke="#888888" stroke-width="1" '
                       f'marker-end="url(#arrowhead)"/>')

    ns = spec.nullcline_samples
    us = np.linspace(u0, u1, ns)
    vs = np.linspace(v0, v1, ns)
    uu, vv = np.meshgrid(us, vs)
    du, dv = field_grid(uu, vv, params)
    canvas.segments(marching_squares(us, vs, du), "#1f77b4", 2.0, css="prey-nullcline")
    canvas.segments(marching_squares(us, vs, dv), "#d62728", 2.0, css="predator-nullcline")

    lo, hi = admissible_interval(params)
    if hi > lo:
        xs, ys = [], []
        for u in np.linspace(max(lo, u0), min(hi, u1), 400)[1:-1]:
            try:
                v = v_from_u(float(u), params)
            except PoleError:
                continue
            xs.append(float(u))
            ys.append(v)
        xs, ys = _clip_to_range(xs, ys, spec.u_range, spec.v_range)
        if len(xs) > 1:
            canvas.polyline(xs, ys, "#000000", 1.0, dash="4 3", css="predator-nullcline-formula")

    cfg = cfg or IntegratorConfig(t_end=spec.trajectory_t_end)
    for seed in spec.seeds:
        traj = simulate(seed, params, cfg)
        xs, ys = _clip_to_range(traj.states[:, 0], traj.states[:, 1], spec.u_range, spec.v_range)
        if len(xs) > 1:
            canvas.polyline(xs, ys, "#2ca02c", 1.2, css="trajectory")

    for ce in classify_all(params, empirical_origin=True):
        e = ce.equilibrium
        if not (u0 <= e.u <= u1 and v0 <= e.v <= v1):
            continue
        stable = ce.stability.stable or ce.empirical == "attracting"
        label = ce.empirical or ce.stability.label.value
        canvas.marker(e.u, e.v, stable, title=f"{e.kind.value} ({fmt(e.u)}, {fmt(e.v)}) {label}")

    canvas.axes("prey u", "predator v")
    return canvas.render()


def diagram_svg(diag: BifurcationDiagram, width: int = 640, height: int = 480) -> str:
    """Interior prey levels against the swept parameter; critical values dashed."""
    us = [ce.equilibrium.u for p in diag.points for ce in p.interior]
    top = max(us + [1.0])
    canvas = Canvas(width, height, (diag.grid[0], diag.grid[-1]), (0.0, 1.05 * top))
    for c in diag.critical_points:
        color = "#d62728" if c.kind is CriticalKind.STABILITY_SWITCH else "#1f77b4"
        canvas.polyline([c.value, c.value], [0.0, 1.05 * top], color, 1.0, dash="5 4",
                        css=c.kind.value)
    for p in diag.points:
        for ce in p.interior:
            canvas.marker(p.value, ce.equilibrium.u, ce.stability.stable, r=3.0)
    canvas.axes(diag.target, "interior prey u")
    return canvas.render()


FATE_COLORS = {
    Fate.COEXISTENCE: "#2ca02c",
    Fate.PREY_ONLY: "#1f77b4",
    Fate.EXTINCTION: "#d62728",
    Fate.OSCILLATORY: "#ff7f0e",
    Fate.UNDETERMINED: "#bbbbbb",
}


def fate_map_svg(fm: FateMap, width: int = 640, height: int = 480) -> str:
    xs, ys = fm.x_axis.grid(), fm.y_axis.grid()
    hx = (xs[1] - xs[0]) / 2
    hy = (ys[1] - ys[0]) / 2
    canvas = Canvas(width, height, (xs[0] - hx, xs[-1] + hx), (ys[0] - hy, ys[-1] + hy))
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            x0, x1 = canvas.px(x - hx), canvas.px(x + hx)
            y0, y1 = canvas.py(y + hy), canvas.py(y - hy)
            fate = fm.fates[iy][ix]
            canvas.add(f'<rect x="{fmt(x0)}" y="{fmt(y0)}" width="{fmt(x1 - x0)}" '
                       f'height="{fmt(y1 - y0)}" fill="{FATE_COLORS[fate]}"><title>{fate.value}</title></rect>')
    canvas.axes(fm.x_axis.target, fm.y_axis.target)
    return canvas.render()
