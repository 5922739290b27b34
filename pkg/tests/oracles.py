"""Reference computations that share no code path with the package.

Interior equilibria are located directly on the full system.  For fixed
``u > 0`` the predator component ``c R - d v`` divided by ``v`` is strictly
decreasing in ``v``, so its zero (the predator nullcline) is found by a
vectorized bisection over a dense ``u`` grid.  The prey component evaluated
along that curve is then sign-scanned and each bracket bisected.  No cubic,
no closed-form nullcline and no Newton step are involved.
"""

from __future__ import annotations

import numpy as np

GRID = 20000
BISECT_ITERS = 200


def _field(u, v, a, b, c, d, alpha):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    den = v + (1.0 + alpha * v) * u
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, u * v * (1.0 + alpha * v) / den, 0.0)
    return a * u * (u - b) * (1.0 - u) - r, c * r - d * v


def _predator_rate(u, v, c, d, alpha):
    # (c R - d v) / v, defined for v > 0 and extended continuously at v = 0
    return c * u * (1.0 + alpha * v) / (v + (1.0 + alpha * v) * u) - d


def predator_nullcline(u, c, d, alpha, v_cap=1e12):
    """Positive predator level where ``dv/dt = 0`` for each ``u``; NaN if none."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    pos_at_zero = _predator_rate(u, 0.0, c, d, alpha) > 0
    # expand the upper end until the rate turns negative or the cap is hit
    for _ in range(64):
        grow = pos_at_zero & (_predator_rate(u, hi, c, d, alpha) > 0) & (hi < v_cap)
        if not grow.any():
            break
        hi = np.where(grow, hi * 2.0, hi)
    ok = pos_at_zero & (_predator_rate(u, hi, c, d, alpha) <= 0)
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        gt = _predator_rate(u, mid, c, d, alpha) > 0
        lo = np.where(gt, mid, lo)
        hi = np.where(gt, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(hi, 1.0)):
            break
    return np.where(ok, 0.5 * (lo + hi), np.nan)


def _prey_on_nullcline(u, a, b, c, d, alpha):
    v = predator_nullcline(u, c, d, alpha)
    g1, _ = _field(u, v, a, b, c, d, alpha)
    # no positive nullcline at this u means no equilibrium can sit there
    return np.where(np.isfinite(v), g1, np.nan), v


def interior_equilibria_oracle(a, b, c, d, alpha, grid=GRID, u_min=1e-7):
    """Sorted list of ``(u, v)`` interior equilibria in ``u in (0, 1)``."""
    us = np.linspace(u_min, 1.0, grid)
    h, _ = _prey_on_nullcline(us, a, b, c, d, alpha)
    out = []
    for i in range(grid - 1):
        h0, h1 = h[i], h[i + 1]
        if not (np.isfinite(h0) and np.isfinite(h1)):
            continue
        if h0 == 0.0:
            out.append(us[i])
            continue
        if h0 * h1 > 0:
            continue
        lo, hi, flo = us[i], us[i + 1], h0
        for _ in range(BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            fm = _prey_on_nullcline(mid, a, b, c, d, alpha)[0][0]
            if not np.isfinite(fm):
                break
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        out.append(0.5 * (lo + hi))
    pts = [(float(u), float(predator_nullcline(u, c, d, alpha)[0])) for u in out]
    return [p for p in pts if np.isfinite(p[1])]


def full_residual(point, a, b, c, d, alpha):
    g1, g2 = _field(point[0], point[1], a, b, c, d, alpha)
    return float(max(abs(g1), abs(g2)))


def central_jacobian(u, v, a, b, c, d, alpha, h=1e-6):
    """Central finite-difference Jacobian of the full field."""
    hu = h * max(1.0, abs(u))
    hv = h * max(1.0, abs(v))
    fu_p = np.array(_field(u + hu, v, a, b, c, d, alpha))
    fu_m = np.array(_field(u - hu, v, a, b, c, d, alpha))
    fv_p = np.array(_field(u, v + hv, a, b, c, d, alpha))
    fv_m = np.array(_field(u, v - hv, a, b, c, d, alpha))
    col_u = (fu_p - fu_m) / (2 * hu)
    col_v = (fv_p - fv_m) / (2 * hv)
    return np.column_stack([col_u, col_v])


def rk4_reference(f, y0, t_end, n):
    """Plain classical RK4 with ``n`` equal steps, no clamping."""
    y = np.array(y0, dtype=float)
    h = t_end / n
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def field_fn(a, b, c, d, alpha):
    return lambda y: np.array(_field(y[0], y[1], a, b, c, d, alpha), dtype=float)
