"""Parameter sweeps, stability-switch and fold localization, fate maps.

Sweep points and fate-map cells are independent pure computations.  They may
be evaluated in worker processes; results are always assembled in grid order,
so the output does not depend on the number of workers.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .equilibria import interior_equilibria
from .integrate import Fate, IntegratorConfig, classify_fate, simulate
from .model import PARAM_NAMES, ModelParams, ParameterError
from .stability import (
    DEFAULT_TOL,
    BoundaryStabilityReport,
    ClassifiedEquilibrium,
    boundary_stability_closed_form,
    classify_equilibrium,
)

FOLD_TOL = 1e-6
INITIAL_STATE_AXES = ("u0", "v0")


class CriticalKind(enum.Enum):
    STABILITY_SWITCH = "StabilitySwitch"
    COUNT_CHANGE = "CountChange"


class NoSignChangeError(ValueError):
    """The tracked equilibrium has the same stability sign at both ends."""


class EquilibriumLostError(ArithmeticError):
    """The tracked equilibrium disappears inside the bracket.

    ``fold_estimate`` locates where it was lost.
    """

    def __init__(self, message, fold_estimate):
        super().__init__(message)
        self.fold_estimate = fold_estimate


@dataclass(frozen=True)
class SweepSpec:
    target: str
    lo: float
    hi: float
    steps: int
    base: ModelParams = ModelParams()

    def __post_init__(self):
        if self.target not in PARAM_NAMES:
            raise ParameterError(f"sweep target must be one of {PARAM_NAMES}, got {self.target!r}")
        _check_range(self.lo, self.hi, self.steps)
        for x in (self.lo, self.hi):
            self.base.with_value(self.target, x)

    def grid(self) -> tuple[float, ...]:
        return _grid(self.lo, self.hi, self.steps)

    def params_at(self, value: float) -> ModelParams:
        return self.base.with_value(self.target, value)


@dataclass(frozen=True)
class Axis:
    """One axis of a fate map: a model parameter or ``u0`` / ``v0``.

    ``steps=1`` with ``lo == hi`` gives a single-value axis.
    """

    target: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.target not in PARAM_NAMES + INITIAL_STATE_AXES:
            raise ParameterError(
                f"axis target must be one of {PARAM_NAMES + INITIAL_STATE_AXES}, got {self.target!r}")
        if self.steps == 1 and self.lo == self.hi and math.isfinite(self.lo):
            return
        _check_range(self.lo, self.hi, self.steps)

    def grid(self) -> tuple[float, ...]:
        return _grid(self.lo, self.hi, self.steps)


def _check_range(lo, hi, steps):
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ParameterError(f"range must satisfy lo < hi, got [{lo!r}, {hi!r}]")
    if not (isinstance(steps, int) and steps >= 2):
        raise ParameterError(f"steps must be an integer >= 2, got {steps!r}")


def _grid(lo, hi, steps):
    if steps == 1:
        return (float(lo),)
    return tuple(float(x) for x in np.linspace(lo, hi, steps))


@dataclass(frozen=True)
class CriticalPoint:
    """A detected bifurcation value, bracketed by adjacent grid values."""

    value: float
    kind: CriticalKind
    lo: float
    hi: float
    branch: Optional[int] = None


@dataclass(frozen=True)
class SweepPoint:
    value: float
    params: ModelParams
    interior: tuple[ClassifiedEquilibrium, ...]
    branches: tuple[int, ...]
    boundary: BoundaryStabilityReport

    @property
    def count(self) -> int:
        return len(self.interior)


@dataclass(frozen=True)
class BifurcationDiagram:
    target: str
    grid: tuple[float, ...]
    points: tuple[SweepPoint, ...]
    critical_points: tuple[CriticalPoint, ...]

    def counts(self) -> list[int]:
        return [p.count for p in self.points]


@dataclass(frozen=True)
class FateMap:
    x_axis: Axis
    y_axis: Axis
    init: tuple[float, float]
    base: ModelParams
    fates: tuple[tuple[Fate, ...], ...]  # indexed [iy][ix]


def _pool_map(fn, items, workers):
    if workers is None or workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _max_re(ce: ClassifiedEquilibrium) -> float:
    return ce.eigen.max_real_part


def _sign(x: float, tol: float = DEFAULT_TOL) -> int:
    if x > tol:
        return 1
    if x < -tol:
        return -1
    return 0


def _analyse(params: ModelParams) -> tuple[tuple[ClassifiedEquilibrium, ...], BoundaryStabilityReport]:
    interior = tuple(classify_equilibrium(e, params) for e in interior_equilibria(params))
    return interior, boundary_stability_closed_form(params)


def _analyse_task(args):
    spec, value = args
    return _analyse(spec.params_at(value))


def _match(prev: Sequence[tuple[float, float]], drift: Sequence[Optional[float]],
           curr: Sequence[tuple[float, float]]) -> list[Optional[int]]:
    """Greedy one-to-one nearest pairing of ``curr`` to ``prev``.

    A pair is accepted when its distance is within 10x the previous branch
    displacement; a branch without history accepts its first partner.
    Returns, for each current equilibrium, the index of its predecessor.
    """
    pairs = sorted(
        (math.dist(p, c), i, j) for i, p in enumerate(prev) for j, c in enumerate(curr)
    )
    out: list[Optional[int]] = [None] * len(curr)
    used = set()
    for dist, i, j in pairs:
        if i in used or out[j] is not None:
            continue
        if drift[i] is not None and dist > 10.0 * drift[i] and dist > 1e-6:
            continue
        out[j] = i
        used.add(i)
    return out


def _refine_count_change(spec: SweepSpec, lo: float, hi: float, c_lo: int, tol: float = FOLD_TOL) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if len(interior_equilibria(spec.params_at(mid))) != c_lo:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def sweep(spec: SweepSpec, workers: int | None = None, refine: bool = True) -> BifurcationDiagram:
    """Equilibria, stability and critical values along a one-parameter grid.

    ``CountChange`` values are refined by bisection on the interior count and
    ``StabilitySwitch`` values by bisection on the tracked branch.
    """
    grid = spec.grid()
    results = _pool_map(_analyse_task, [(spec, x) for x in grid], workers)

    points: list[SweepPoint] = []
    critical: list[CriticalPoint] = []
    next_branch = 0
    prev_pts: list[tuple[float, float]] = []
    prev_drift: list[Optional[float]] = []
    prev_ids: list[int] = []
    prev_ce: tuple[ClassifiedEquilibrium, ...] = ()
    for k, (value, (interior, boundary)) in enumerate(zip(grid, results)):
        pts = [ce.equilibrium.point for ce in interior]
        match = _match(prev_pts, prev_drift, pts) if k else [None] * len(pts)
        ids, drift = [], []
        for j, m in enumerate(match):
            if m is None:
                ids.append(next_branch)
                next_branch += 1
                drift.append(None)
                continue
            ids.append(prev_ids[m])
            drift.append(math.dist(prev_pts[m], pts[j]))
            s0, s1 = _sign(_max_re(prev_ce[m])), _sign(_max_re(interior[j]))
            if s0 * s1 < 0:
                lo_v = grid[k - 1]
                est = 0.5 * (lo_v + value)
                if refine:
                    try:
                        br = critical_bracket(spec.base, lo_v, value, FOLD_TOL, target=spec.target,
                                              track=prev_pts[m])
                        est = 0.5 * (br.lo + br.hi)
                    except (NoSignChangeError, EquilibriumLostError):
                        pass
                critical.append(CriticalPoint(est, CriticalKind.STABILITY_SWITCH, lo_v, value, ids[-1]))
        if k and len(interior) != len(prev_ce):
            lo_v = grid[k - 1]
            est = _refine_count_change(spec, lo_v, value, len(prev_ce)) if refine else 0.5 * (lo_v + value)
            critical.append(CriticalPoint(est, CriticalKind.COUNT_CHANGE, lo_v, value))
        points.append(SweepPoint(value, spec.params_at(value), interior, tuple(ids), boundary))
        prev_pts, prev_drift, prev_ids, prev_ce = pts, drift, ids, interior

    critical.sort(key=lambda c: (c.lo, c.kind.value))
    return BifurcationDiagram(spec.target, grid, tuple(points), tuple(critical))


@dataclass(frozen=True)
class CriticalBracket:
    lo: float
    hi: float
    iterations: int
    state: tuple[float, float]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


def _nearest(params: ModelParams, ref: tuple[float, float]):
    eqs = interior_equilibria(params)
    if not eqs:
        return None
    return min(eqs, key=lambda e: math.dist(e.point, ref))


def _lost(base, target, lo, hi, ref, tol):
    """Bisect on existence of interior equilibria to estimate where the branch ends."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _nearest(base.with_value(target, mid), ref) is None:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def critical_bracket(base: ModelParams, lo: float, hi: float, tol: float, target: str = "alpha",
                     track: tuple[float, float] | None = None, pretrack: int = 8) -> CriticalBracket:
    """Bisection on the sign of the tracked equilibrium's largest real part.

    The tracked equilibrium starts as the interior point nearest ``track`` at
    ``lo`` (default: the largest-prey interior point) and is followed to ``hi``
    through ``pretrack`` intermediate values before bisection begins.

    Raises
    ------
    NoSignChangeError
        If the signs at ``lo`` and ``hi`` are not opposite.
    EquilibriumLostError
        If the tracked equilibrium vanishes inside the bracket.
    """
    if not lo < hi:
        raise ParameterError(f"bracket must satisfy lo < hi, got [{lo!r}, {hi!r}]")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}")
    p_lo = base.with_value(target, lo)
    eqs = interior_equilibria(p_lo)
    if not eqs:
        raise EquilibriumLostError(f"no interior equilibrium at {target}={lo!r}", lo)
    e_lo = max(eqs, key=lambda e: e.u) if track is None else min(eqs, key=lambda e: math.dist(e.point, track))

    ref = e_lo.point
    e_hi = e_lo
    for x in np.linspace(lo, hi, pretrack + 2)[1:]:
        nxt = _nearest(base.with_value(target, float(x)), ref)
        if nxt is None:
            raise EquilibriumLostError(f"tracked equilibrium lost before {target}={x!r}",
                                       _lost(base, target, lo, float(x), ref, tol))
        e_hi = nxt
        ref = e_hi.point

    s_lo = _sign(_max_re(classify_equilibrium(e_lo, p_lo)))
    s_hi = _sign(_max_re(classify_equilibrium(e_hi, base.with_value(target, hi))))
    if s_lo * s_hi >= 0:
        raise NoSignChangeError(
            f"largest real part has no sign change on [{lo!r}, {hi!r}] (signs {s_lo}, {s_hi})")

    x_lo, x_hi = lo, hi
    pt_lo, pt_hi = e_lo.point, e_hi.point
    iterations = 0
    while x_hi - x_lo > tol:
        mid = 0.5 * (x_lo + x_hi)
        guess = (0.5 * (pt_lo[0] + pt_hi[0]), 0.5 * (pt_lo[1] + pt_hi[1]))
        p_mid = base.with_value(target, mid)
        e_mid = _nearest(p_mid, guess)
        if e_mid is None:
            raise EquilibriumLostError(f"tracked equilibrium lost near {target}={mid!r}",
                                       _lost(base, target, x_lo, mid, pt_lo, min(tol, FOLD_TOL)))
        s_mid = _sign(_max_re(classify_equilibrium(e_mid, p_mid)))
        iterations += 1
        if s_mid == s_lo:
            x_lo, pt_lo = mid, e_mid.point
        else:
            x_hi, pt_hi = mid, e_mid.point
    return CriticalBracket(x_lo, x_hi, iterations, pt_hi)


def find_critical_alpha(base: ModelParams, lo: float, hi: float, tol: float = 1e-4,
                        track: tuple[float, float] | None = None) -> float:
    """Hunting-cooperation value where the tracked coexistence point changes stability."""
    return critical_bracket(base, lo, hi, tol, target="alpha", track=track).midpoint


def _fate_cell(args) -> Fate:
    base, init, assignments, cfg = args
    u0, v0 = init
    values = dict(assignments)
    u0 = values.pop("u0", u0)
    v0 = values.pop("v0", v0)
    try:
        params = ModelParams(**{**base.as_dict(), **values})
        traj = simulate((u0, v0), params, cfg)
        return classify_fate(traj, cfg)
    except (ArithmeticError, ValueError):
        return Fate.UNDETERMINED


def fate_map(x_axis: Axis, y_axis: Axis, init=(0.5, 0.5), base: ModelParams | None = None,
             cfg: IntegratorConfig | None = None, workers: int | None = None) -> FateMap:
    """Simulated long-run fate on a two-axis grid.

    Cells whose parameters are invalid or whose integration fails are
    ``Undetermined``.
    """
    base = base or ModelParams()
    cfg = cfg or IntegratorConfig()
    nx, ny = x_axis.steps, y_axis.steps
    if nx * ny > 10**6:
        raise ParameterError(f"fate map has {nx * ny} cells; the limit is 10**6")
    init = (float(init[0]), float(init[1]))
    tasks = [
        (base, init, ((x_axis.target, xv), (y_axis.target, yv)), cfg)
        for yv in y_axis.grid() for xv in x_axis.grid()
    ]
    flat = _pool_map(_fate_cell, tasks, workers)
    rows = tuple(tuple(flat[iy * nx:(iy + 1) * nx]) for iy in range(ny))
    return FateMap(x_axis, y_axis, init, base, rows)
