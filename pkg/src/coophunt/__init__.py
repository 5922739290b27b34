"""Predator-prey dynamics with hunting cooperation and a strong Allee effect."""

from .bifurcation import (
    Axis,
    BifurcationDiagram,
    CriticalKind,
    CriticalPoint,
    EquilibriumLostError,
    FateMap,
    NoSignChangeError,
    SweepSpec,
    critical_bracket,
    fate_map,
    find_critical_alpha,
    sweep,
)
from .equilibria import (
    Equilibrium,
    EquilibriumKind,
    InteriorCandidateSet,
    PoleError,
    boundary_equilibria,
    count_interior,
    interior_candidates,
    interior_equilibria,
    v_from_u,
)
from .integrate import (
    EventKind,
    Fate,
    IntegratorConfig,
    Method,
    StepUnderflowError,
    Trajectory,
    classify_fate,
    simulate,
    step_rk4,
)
from .model import (
    Derivative,
    DomainError,
    Jacobian2,
    ModelParams,
    ParameterError,
    SingularPointError,
    State,
    derivatives,
    functional_response,
    g1_partial_u,
    jacobian_analytic,
)
from .stability import (
    ClassifiedEquilibrium,
    EigenPair,
    StabilityClass,
    StabilityLabel,
    boundary_stability_closed_form,
    classify,
    classify_all,
    classify_equilibrium,
    eigenvalues_2x2,
    interior_sufficient_condition,
)

__version__ = "0.1.0"
