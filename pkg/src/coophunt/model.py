"""Predator-prey vector field with hunting cooperation and a strong Allee effect.

The prey ``u`` grows as ``a u (u - b)(1 - u)`` and is consumed through the
ratio-dependent response ``u v (1 + alpha v) / (v + (1 + alpha v) u)``; the
predator ``v`` converts consumption with efficiency ``c`` and dies at rate
``d``.

The response is not defined at the origin.  Following the numerical treatment
used for this model, the field is extended by ``(0, 0)`` there, and any state
whose response denominator falls below :data:`ORIGIN_EPS` counts as the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

ORIGIN_EPS = 1e-14

PARAM_NAMES = ("a", "b", "c", "d", "alpha")


class ParameterError(ValueError):
    """Raised when a parameter set violates the model's invariants."""


class SingularPointError(ArithmeticError):
    """Raised when a quantity is requested at the origin, where it is undefined."""


class DomainError(ValueError):
    """Raised when an operation is applied outside the states it is defined on."""


@dataclass(frozen=True)
class ModelParams:
    """The five model parameters.

    Parameters
    ----------
    a : float
        Intrinsic prey growth rate, ``a > 0``.
    b : float
        Allee threshold, strictly inside ``(-1, 1)``.
    c : float
        Conversion efficiency, ``c > 0``.
    d : float
        Predator death rate, ``d > 0``.
    alpha : float
        Hunting cooperation, ``alpha >= 0``.
    """

    a: float = 10.0
    b: float = 0.25
    c: float = 2.0
    d: float = 1.0
    alpha: float = 0.92

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ParameterError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not self.a > 0:
            raise ParameterError(f"a must be positive, got {self.a!r}")
        if not -1.0 < self.b < 1.0:
            raise ParameterError(f"b must lie in (-1, 1), got {self.b!r}")
        if not self.c > 0:
            raise ParameterError(f"c must be positive, got {self.c!r}")
        if not self.d > 0:
            raise ParameterError(f"d must be positive, got {self.d!r}")
        if not self.alpha >= 0:
            raise ParameterError(f"alpha must be nonnegative, got {self.alpha!r}")

    def with_value(self, name: str, value: float) -> "ModelParams":
        """Return a copy with one parameter replaced (validated again)."""
        if name not in PARAM_NAMES:
            raise ParameterError(f"unknown parameter {name!r}; expected one of {PARAM_NAMES}")
        return ModelParams(**{**self.as_dict(), name: value})

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}


@dataclass(frozen=True)
class State:
    """A point ``(u, v)`` of the nonnegative quadrant."""

    u: float
    v: float

    def __post_init__(self):
        u, v = float(self.u), float(self.v)
        if not (math.isfinite(u) and math.isfinite(v)):
            raise DomainError(f"state must be finite, got ({u!r}, {v!r})")
        if u < 0 or v < 0:
            raise DomainError(f"populations cannot be negative, got ({u!r}, {v!r})")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def __iter__(self) -> Iterator[float]:
        yield self.u
        yield self.v


class Derivative(NamedTuple):
    du_dt: float
    dv_dt: float


class Jacobian2(NamedTuple):
    j11: float
    j12: float
    j21: float
    j22: float

    @property
    def trace(self) -> float:
        return self.j11 + self.j22

    @property
    def det(self) -> float:
        return self.j11 * self.j22 - self.j12 * self.j21

    def as_array(self) -> np.ndarray:
        return np.array([[self.j11, self.j12], [self.j21, self.j22]])


def _denominator(u, v, alpha):
    return v + (1.0 + alpha * v) * u


def functional_response(state, params: ModelParams) -> float:
    """Consumption term ``u v (1 + alpha v) / (v + (1 + alpha v) u)``.

    Zero on both axes and, by convention, at the origin.
    """
    u, v = state
    den = _denominator(u, v, params.alpha)
    if abs(den) < ORIGIN_EPS:
        return 0.0
    return u * v * (1.0 + params.alpha * v) / den


def derivatives(state, params: ModelParams) -> Derivative:
    """Evaluate the vector field at ``state``.

    ``state`` is any ``(u, v)`` pair.  Points off the nonnegative quadrant are
    evaluated by the same formula, which is what the out-of-quadrant Allee
    point ``(b, 0)`` with ``b < 0`` needs.
    """
    u, v = state
    p = params
    r = functional_response((u, v), p)
    return Derivative(p.a * u * (u - p.b) * (1.0 - u) - r, p.c * r - p.d * v)


def field_grid(u, v, params: ModelParams):
    """Vectorized vector field over arrays ``u`` and ``v``.

    Returns ``(du_dt, dv_dt)`` arrays with the origin convention applied
    elementwise.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    p = params
    den = _denominator(u, v, p.alpha)
    origin = np.abs(den) < ORIGIN_EPS
    safe = np.where(origin, 1.0, den)
    r = np.where(origin, 0.0, u * v * (1.0 + p.alpha * v) / safe)
    return p.a * u * (u - p.b) * (1.0 - u) - r, p.c * r - p.d * v


def jacobian_analytic(state, params: ModelParams) -> Jacobian2:
    """Analytic Jacobian of the vector field.

    Raises
    ------
    SingularPointError
        At the origin, where the response has no limit.
    """
    u, v = state
    p = params
    den = _denominator(u, v, p.alpha)
    if abs(den) < ORIGIN_EPS:
        raise SingularPointError("the Jacobian is undefined at the origin")
    den2 = den * den
    coop = 1.0 + p.alpha * v
    # partial derivatives of the response in u and in v
    r_u = v * v * coop / den2
    r_v = u * (p.alpha**2 * u * v * v + p.alpha * v * v + 2.0 * p.alpha * u * v + u) / den2
    growth_u = p.a * (-3.0 * u * u + 2.0 * u + 2.0 * p.b * u - p.b)
    return Jacobian2(growth_u - r_u, -r_v, p.c * r_u, p.c * r_v - p.d)


def prey_growth_factor(state, params: ModelParams) -> float:
    """Per-capita prey rate ``g1`` with ``du/dt = g1 * u`` (interior states)."""
    u, v = state
    p = params
    return p.a * (u - p.b) * (1.0 - u) - v * (1.0 + p.alpha * v) / _denominator(u, v, p.alpha)


def g1_partial_u(state, params: ModelParams) -> float:
    """Partial derivative of the per-capita prey rate in ``u``.

    A negative value at an interior equilibrium is sufficient for stability.

    Raises
    ------
    DomainError
        Unless ``u > 0`` and ``v > 0``.
    """
    u, v = state
    if not (u > 0 and v > 0):
        raise DomainError(f"g1_partial_u needs an interior state, got ({u!r}, {v!r})")
    p = params
    coop = 1.0 + p.alpha * v
    den = _denominator(u, v, p.alpha)
    return p.a * (1.0 + p.b - 2.0 * u) + v * coop * coop / (den * den)
