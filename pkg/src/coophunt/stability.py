"""Eigenvalue-based classification of equilibria.

A planar fixed point is asymptotically stable iff the Jacobian has negative
trace and positive determinant.  Verdicts are refused (``Center`` or
``Degenerate``) when trace or determinant is within ``tol`` of zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .equilibria import Equilibrium, EquilibriumKind, boundary_equilibria, interior_equilibria
from .model import (
    DomainError,
    Jacobian2,
    ModelParams,
    g1_partial_u,
    jacobian_analytic,
)

DEFAULT_TOL = 1e-9


class StabilityLabel(enum.Enum):
    STABLE_NODE = "StableNode"
    STABLE_SPIRAL = "StableSpiral"
    UNSTABLE_NODE = "UnstableNode"
    UNSTABLE_SPIRAL = "UnstableSpiral"
    SADDLE = "Saddle"
    CENTER = "Center"
    DEGENERATE = "Degenerate"


STABLE_LABELS = frozenset({StabilityLabel.STABLE_NODE, StabilityLabel.STABLE_SPIRAL})


class EigenPair(NamedTuple):
    lambda1: complex
    lambda2: complex

    @property
    def max_real_part(self) -> float:
        return max(self.lambda1.real, self.lambda2.real)

    @property
    def trace(self) -> float:
        return (self.lambda1 + self.lambda2).real

    @property
    def det(self) -> float:
        return (self.lambda1 * self.lambda2).real


@dataclass(frozen=True)
class StabilityClass:
    label: StabilityLabel
    hyperbolic: bool

    @property
    def stable(self) -> bool:
        return self.label in STABLE_LABELS


@dataclass(frozen=True)
class ClassifiedEquilibrium:
    """An equilibrium with its spectrum and verdict.

    ``eigen`` is ``None`` for the origin, whose Jacobian does not exist; its
    verdict then comes from simulation and is stored in ``empirical``
    (``"attracting"``, ``"repelling"`` or ``"mixed"``).
    ``prey_slope`` is the sign-test value of ``g1_partial_u`` (interior only).
    """

    equilibrium: Equilibrium
    eigen: Optional[EigenPair]
    stability: StabilityClass
    prey_slope: Optional[float] = None
    empirical: Optional[str] = None


def eigenvalues_2x2(j: Jacobian2) -> EigenPair:
    """Roots of ``lambda^2 - trace lambda + det``.

    Real roots are computed in the cancellation-free form ``q, det / q``.
    """
    tr, det = j.trace, j.det
    disc = tr * tr - 4.0 * det
    if disc >= 0:
        s = math.sqrt(disc)
        q = 0.5 * (tr + math.copysign(s, tr))
        if q == 0.0:
            return EigenPair(complex(0.0), complex(0.0))
        l1, l2 = q, det / q
        if l1 < l2:
            l1, l2 = l2, l1
        return EigenPair(complex(l1), complex(l2))
    im = 0.5 * math.sqrt(-disc)
    return EigenPair(complex(0.5 * tr, im), complex(0.5 * tr, -im))


def classify(eigen: EigenPair, tol: float = DEFAULT_TOL) -> StabilityClass:
    tr, det = eigen.trace, eigen.det
    if abs(det) < tol:
        return StabilityClass(StabilityLabel.DEGENERATE, False)
    if det < 0:
        return StabilityClass(StabilityLabel.SADDLE, True)
    if abs(tr) < tol:
        return StabilityClass(StabilityLabel.CENTER, False)
    spiral = eigen.lambda1.imag != 0.0
    if tr < 0:
        label = StabilityLabel.STABLE_SPIRAL if spiral else StabilityLabel.STABLE_NODE
    else:
        label = StabilityLabel.UNSTABLE_SPIRAL if spiral else StabilityLabel.UNSTABLE_NODE
    return StabilityClass(label, True)


def classify_matrix(j: Jacobian2, tol: float = DEFAULT_TOL) -> tuple[EigenPair, StabilityClass]:
    eig = eigenvalues_2x2(j)
    return eig, classify(eig, tol)


class SufficientCondition(NamedTuple):
    holds: bool
    value: float


def interior_sufficient_condition(eq: Equilibrium, params: ModelParams,
                                  tol: float = DEFAULT_TOL) -> SufficientCondition:
    """Sign test on the prey per-capita slope at an interior equilibrium.

    ``holds`` (slope below ``-tol``) implies stability.  ``holds=False`` allows
    no conclusion.
    """
    if eq.kind is not EquilibriumKind.INTERIOR:
        raise DomainError(f"sufficient condition applies to interior equilibria, got {eq.kind.value}")
    value = g1_partial_u(eq.point, params)
    return SufficientCondition(value < -tol, value)


def classify_origin(params: ModelParams, radius: float = 1e-3, n_rays: int = 9,
                    t_end: float = 60.0) -> str:
    """Empirical verdict at the origin from a ring of nearby trajectories."""
    from .integrate import IntegratorConfig, simulate

    cfg = IntegratorConfig(t_end=t_end, extinction_threshold=1e-9)
    ends = []
    for k in range(n_rays):
        theta = 0.5 * math.pi * k / (n_rays - 1)
        traj = simulate((radius * math.cos(theta), radius * math.sin(theta)), params, cfg)
        u, v = traj.states[-1]
        ends.append(math.hypot(u, v))
    inward = [e < 0.5 * radius for e in ends]
    if all(inward):
        return "attracting"
    if not any(inward):
        return "repelling"
    return "mixed"


def classify_equilibrium(eq: Equilibrium, params: ModelParams, tol: float = DEFAULT_TOL,
                         empirical_origin: bool = False) -> ClassifiedEquilibrium:
    if eq.kind is EquilibriumKind.ORIGIN:
        verdict = classify_origin(params) if empirical_origin else None
        return ClassifiedEquilibrium(eq, None, StabilityClass(StabilityLabel.DEGENERATE, False),
                                     empirical=verdict)
    eig, cls = classify_matrix(jacobian_analytic(eq.point, params), tol)
    slope = None
    if eq.kind is EquilibriumKind.INTERIOR:
        slope = interior_sufficient_condition(eq, params, tol).value
    return ClassifiedEquilibrium(eq, eig, cls, prey_slope=slope)


def classify_all(params: ModelParams, tol: float = DEFAULT_TOL,
                 empirical_origin: bool = False) -> list[ClassifiedEquilibrium]:
    eqs = boundary_equilibria(params) + interior_equilibria(params)
    return [classify_equilibrium(e, params, tol, empirical_origin) for e in eqs]


@dataclass(frozen=True)
class BoundaryVerdict:
    """Closed-form and numeric verdicts for a prey-only equilibrium.

    The closed form is the triangular Jacobian ``[[growth, -1], [0, c - d]]``
    with ``growth = a (b - 1)`` at ``(1, 0)`` and ``a b (1 - b)`` at ``(b, 0)``.
    ``numeric`` is ``None`` when the point is the origin (``b = 0``).
    """

    u: float
    growth: float
    trace: float
    det: float
    closed_form_stable: bool
    closed_form: StabilityClass
    numeric: Optional[StabilityClass]
    out_of_quadrant: bool = False

    @property
    def agree(self) -> Optional[bool]:
        if self.numeric is None or not (self.numeric.hyperbolic and self.closed_form.hyperbolic):
            return None
        return self.numeric.label == self.closed_form.label


@dataclass(frozen=True)
class BoundaryStabilityReport:
    carrying: BoundaryVerdict
    allee: BoundaryVerdict


def _boundary_verdict(u: float, growth: float, params: ModelParams, tol: float) -> BoundaryVerdict:
    gain = params.c - params.d
    trace = growth + gain
    det = growth * gain
    closed = classify(eigenvalues_2x2(Jacobian2(growth, -1.0, 0.0, gain)), tol)
    numeric = None
    if abs(u) >= 1e-14:
        numeric = classify_matrix(jacobian_analytic((u, 0.0), params), tol)[1]
    return BoundaryVerdict(u, growth, trace, det, trace < 0 and det > 0, closed, numeric,
                           out_of_quadrant=u < 0)


def boundary_stability_closed_form(params: ModelParams, tol: float = DEFAULT_TOL) -> BoundaryStabilityReport:
    """Closed-form stability of ``(1, 0)`` and ``(b, 0)`` plus the numeric cross-check.

    ``(1, 0)`` is stable iff ``c < d``; ``(b, 0)`` with ``b > 0`` is never
    stable.  The ``(b, 0)`` verdict is reported for every ``b``.
    """
    a, b = params.a, params.b
    return BoundaryStabilityReport(
        carrying=_boundary_verdict(1.0, a * (b - 1.0), params, tol),
        allee=_boundary_verdict(b, a * b * (1.0 - b), params, tol),
    )

