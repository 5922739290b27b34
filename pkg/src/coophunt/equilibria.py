"""Boundary and interior equilibria.

Interior equilibria are found through a one-dimensional reduction.  The
predator condition gives

    v = u (c - d) / (d - alpha u (c - d)),

and substituting it into the prey condition leaves the cubic

    (a c / d) (u - b)(1 - u)(d - alpha u (c - d)) - (c - d) = 0.

Roots are bracketed on a grid, refined by safeguarded Newton, and every
candidate ``(u, v)`` is then polished against the full two-dimensional system
and kept only if its residual is small.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .model import (
    DomainError,
    ModelParams,
    SingularPointError,
    State,
    derivatives,
    jacobian_analytic,
)

logger = logging.getLogger(__name__)

SCAN_POINTS = 2048
RESIDUAL_TOL = 1e-10
MERGE_TOL = 1e-8
POLE_EPS = 1e-14
ORIGIN_SEPARATION = 1e-9


class PoleError(ArithmeticError):
    """Raised when the predator level is requested at the pole of its formula."""


class EquilibriumKind(enum.Enum):
    ORIGIN = "Origin"
    PREY_ONLY_CARRYING = "PreyOnlyCarrying"
    PREY_ONLY_ALLEE = "PreyOnlyAllee"
    INTERIOR = "Interior"


@dataclass(frozen=True)
class Equilibrium:
    """A located fixed point.

    ``u`` may be negative only for the Allee point ``(b, 0)`` with ``b < 0``,
    which is then flagged ``out_of_quadrant``.  ``coincident`` marks the
    origin when it coincides with ``(b, 0)`` at ``b = 0``; ``tangency`` marks
    an interior point produced by merging two nearly equal roots.
    """

    u: float
    v: float
    kind: EquilibriumKind
    residual: float
    out_of_quadrant: bool = False
    coincident: bool = False
    tangency: bool = False

    @property
    def state(self) -> State:
        return State(self.u, self.v)

    @property
    def point(self) -> tuple[float, float]:
        return (self.u, self.v)


@dataclass(frozen=True)
class InteriorCandidateSet:
    roots: tuple[float, ...]
    admissible_interval: tuple[float, float]
    tangent: tuple[bool, ...] = ()


def residual(point, params: ModelParams) -> float:
    """Max-norm of the vector field at ``point``."""
    du, dv = derivatives(point, params)
    return max(abs(du), abs(dv))


def boundary_equilibria(params: ModelParams) -> list[Equilibrium]:
    """The origin, the carrying capacity ``(1, 0)`` and the Allee point ``(b, 0)``.

    At ``b = 0`` the Allee point is the origin; only two points are returned
    and the origin carries ``coincident=True``.
    """
    b = params.b
    origin = Equilibrium(0.0, 0.0, EquilibriumKind.ORIGIN, 0.0, coincident=(b == 0.0))
    carrying = Equilibrium(1.0, 0.0, EquilibriumKind.PREY_ONLY_CARRYING, residual((1.0, 0.0), params))
    out = [origin, carrying]
    if b != 0.0:
        out.append(
            Equilibrium(b, 0.0, EquilibriumKind.PREY_ONLY_ALLEE, residual((b, 0.0), params),
                        out_of_quadrant=b < 0)
        )
    return out


def v_from_u(u: float, params: ModelParams) -> float:
    """Predator level on the interior predator nullcline at prey level ``u``."""
    if not u > 0:
        raise DomainError(f"u must be positive, got {u!r}")
    gain = params.c - params.d
    den = params.d - params.alpha * u * gain
    if abs(den) < POLE_EPS:
        raise PoleError(f"predator nullcline has a pole at u={u!r}")
    return u * gain / den


def interior_cubic(params: ModelParams) -> Polynomial:
    """Cubic in ``u`` whose admissible roots are interior prey levels."""
    p = params
    gain = p.c - p.d
    allee = Polynomial([-p.b, 1.0 + p.b, -1.0])  # (u - b)(1 - u)
    pred = Polynomial([p.d, -p.alpha * gain])
    return (p.a * p.c / p.d) * allee * pred - gain


def admissible_interval(params: ModelParams) -> tuple[float, float]:
    """Prey levels where the nullcline formula gives a positive predator level.

    Empty (``lo == hi``) when ``c <= d``.
    """
    gain = params.c - params.d
    if gain <= 0:
        return (0.0, 0.0)
    hi = 1.0
    # the pole only cuts the interval when it lies below u = 1
    if params.alpha * gain > params.d:
        hi = params.d / (params.alpha * gain)
    return (0.0, hi)


def _refine_root(poly, dpoly, lo, hi, flo, xtol=1e-15, maxiter=200):
    """Safeguarded Newton inside a sign-change bracket ``[lo, hi]``."""
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = poly(x)
        if fx == 0.0:
            return x
        if (fx < 0) == (flo < 0):
            lo, flo = x, fx
        else:
            hi = x
        dfx = dpoly(x)
        step_ok = False
        if dfx != 0.0:
            xn = x - fx / dfx
            step_ok = lo < xn < hi
        if not step_ok:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= xtol * max(1.0, abs(x)) or hi - lo <= xtol:
            return xn
        x = xn
    return x


def interior_candidates(params: ModelParams) -> InteriorCandidateSet:
    """Bracket and refine the cubic's roots over the admissible interval.

    The scan grid is augmented with the cubic's critical points, so each
    monotone piece is bracketed separately and close root pairs are not lost
    inside one cell.  A critical point where the cubic touches zero is taken as
    a double root and flagged tangent.
    """
    lo, hi = admissible_interval(params)
    if hi <= lo:
        return InteriorCandidateSet((), (lo, hi))
    poly = interior_cubic(params)
    dpoly = poly.deriv()
    # a vanishing leading coefficient (tiny alpha) would send companion-matrix roots to inf
    dtrim = dpoly.trim(1e-14 * float(np.max(np.abs(dpoly.coef))))
    crit = [r.real for r in dtrim.roots() if abs(r.imag) < 1e-12 and lo < r.real < hi]
    grid = np.unique(np.concatenate([np.linspace(lo, hi, SCAN_POINTS), crit]))
    vals = poly(grid)
    scale = max(1.0, float(np.max(np.abs(poly.coef))))

    found: list[tuple[float, bool]] = []
    for i in range(len(grid) - 1):
        f0, f1 = vals[i], vals[i + 1]
        if f0 == 0.0 and lo < grid[i] < hi:
            found.append((float(grid[i]), False))
        elif f0 * f1 < 0:
            found.append((_refine_root(poly, dpoly, grid[i], grid[i + 1], f0), False))
    for x in crit:
        if abs(poly(x)) < 1e-12 * scale:
            found.append((float(x), True))

    found.sort()
    roots: list[float] = []
    tangent: list[bool] = []
    for x, tan in found:
        if roots and abs(x - roots[-1]) < MERGE_TOL:
            tangent[-1] = True
            continue
        roots.append(x)
        tangent.append(tan)
    return InteriorCandidateSet(tuple(roots), (lo, hi), tuple(tangent))


def polish(point, params: ModelParams, maxiter: int = 20) -> tuple[float, float]:
    """Newton iteration on the full two-dimensional system."""
    u, v = point
    best = (u, v)
    best_res = residual(best, params)
    for _ in range(maxiter):
        if best_res == 0.0:
            break
        du, dv = derivatives((u, v), params)
        try:
            j = jacobian_analytic((u, v), params)
        except SingularPointError:
            break
        det = j.det
        if det == 0.0 or not math.isfinite(det):
            break
        u, v = u - (j.j22 * du - j.j12 * dv) / det, v - (-j.j21 * du + j.j11 * dv) / det
        res = residual((u, v), params)
        if not math.isfinite(res):
            break
        if res < best_res:
            best, best_res = (u, v), res
        elif res >= best_res and best_res < RESIDUAL_TOL:
            break
    return best


def interior_equilibria(params: ModelParams) -> list[Equilibrium]:
    """All interior equilibria, sorted by prey level.

    Returns an empty list when there are none.
    """
    cands = interior_candidates(params)
    out: list[Equilibrium] = []
    for root, tan in zip(cands.roots, cands.tangent):
        try:
            v0 = v_from_u(root, params)
        except (PoleError, DomainError):
            continue
        u, v = polish((root, v0), params)
        res = residual((u, v), params)
        # the field vanishes at the origin, so tiny residuals there prove nothing
        if not (u > ORIGIN_SEPARATION and v > 0 and res < RESIDUAL_TOL):
            logger.debug("discarding candidate u=%r v=%r residual=%r", u, v, res)
            continue
        if any(abs(u - e.u) < MERGE_TOL and abs(v - e.v) < MERGE_TOL for e in out):
            continue
        out.append(Equilibrium(u, v, EquilibriumKind.INTERIOR, res, tangency=tan))
    out.sort(key=lambda e: e.u)
    if len(out) == 3:
        logger.warning("three interior equilibria at %s", params)
    return out


def count_interior(params: ModelParams) -> int:
    return len(interior_equilibria(params))


def all_equilibria(params: ModelParams) -> list[Equilibrium]:
    return boundary_equilibria(params) + interior_equilibria(params)
