"""Time integration: fixed-step RK4 and adaptive Dormand-Prince 5(4).

Both methods keep the nonnegative quadrant invariant.  A step that would make
a population negative is retried with half the step; once the step falls below
:data:`CLAMP_DT` the offending component is clamped to zero instead.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, State, derivatives

CLAMP_DT = 1e-12
UNDERFLOW_DT = 1e-14


class Method(enum.Enum):
    RK4_FIXED = "RK4Fixed"
    ADAPTIVE_RK45 = "AdaptiveRK45"


class EventKind(enum.Enum):
    PREY_EXTINCT = "PreyExtinct"
    PREDATOR_EXTINCT = "PredatorExtinct"
    BOTH_EXTINCT = "BothExtinct"
    CONVERGED = "ConvergedToSteadyState"
    HORIZON = "HorizonReached"
    STEP_LIMIT = "StepLimit"
    STEP_UNDERFLOW = "StepUnderflow"


TERMINAL_EVENTS = frozenset({
    EventKind.BOTH_EXTINCT, EventKind.CONVERGED, EventKind.HORIZON,
    EventKind.STEP_LIMIT, EventKind.STEP_UNDERFLOW,
})


class Fate(enum.Enum):
    COEXISTENCE = "CoexistenceEquilibrium"
    PREY_ONLY = "PreyOnlyEquilibrium"
    EXTINCTION = "Extinction"
    OSCILLATORY = "Oscillatory"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    ``convergence_tol`` applies to two signals at once: the max-norm change of
    the state over the last ``convergence_window`` time units and the max-norm
    of the vector field.  With ``stop_on_events=False`` only the horizon and
    the step cap stop the run.
    """

    method: Method = Method.ADAPTIVE_RK45
    dt: float = 0.01
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    t_end: float = 500.0
    max_steps: int = 2_000_000
    extinction_threshold: float = 1e-6
    convergence_tol: float = 1e-7
    convergence_window: float = 1.0
    stop_on_events: bool = True

    def __post_init__(self):
        if isinstance(self.method, str):
            object.__setattr__(self, "method", Method(self.method))
        for name in ("dt", "rel_tol", "abs_tol", "t_end", "extinction_threshold",
                     "convergence_tol", "convergence_window"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not (isinstance(self.max_steps, int) and self.max_steps > 0):
            raise ValueError(f"max_steps must be a positive integer, got {self.max_steps!r}")

    def as_dict(self) -> dict:
        return {
            "method": self.method.value, "dt": self.dt, "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol, "t_end": self.t_end, "max_steps": self.max_steps,
            "extinction_threshold": self.extinction_threshold,
            "convergence_tol": self.convergence_tol,
            "convergence_window": self.convergence_window,
            "stop_on_events": self.stop_on_events,
        }


@dataclass(frozen=True)
class Event:
    time: float
    kind: EventKind


@dataclass(eq=False)
class Trajectory:
    """Accepted steps of a run.

    ``times`` has shape ``(n,)`` and ``states`` shape ``(n, 2)``.  Exactly one
    of ``events`` is terminal, and it is the last one.
    """

    times: np.ndarray
    states: np.ndarray
    events: list[Event] = field(default_factory=list)
    accepted_steps: int = 0
    rejected_steps: int = 0
    clamped_steps: int = 0

    @property
    def terminal_event(self) -> Event:
        return self.events[-1]

    @property
    def final_state(self) -> State:
        return State(*self.states[-1])

    def state_at(self, i: int) -> State:
        return State(*self.states[i])

    def interpolate(self, t: float) -> tuple[float, float]:
        """Linear dense output between accepted steps."""
        u = float(np.interp(t, self.times, self.states[:, 0]))
        v = float(np.interp(t, self.times, self.states[:, 1]))
        return (u, v)


class StepUnderflowError(ArithmeticError):
    """The adaptive controller asked for a step below :data:`UNDERFLOW_DT`.

    ``trajectory`` holds the run up to the failure.
    """

    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


class NonFiniteDerivativeError(ArithmeticError):
    pass


def _field(u, v, params):
    du, dv = derivatives((u, v), params)
    if not (math.isfinite(du) and math.isfinite(dv)):
        raise NonFiniteDerivativeError(f"non-finite derivative at ({u!r}, {v!r})")
    return du, dv


def _rk4_raw(u, v, h, params):
    k1u, k1v = _field(u, v, params)
    k2u, k2v = _field(u + 0.5 * h * k1u, v + 0.5 * h * k1v, params)
    k3u, k3v = _field(u + 0.5 * h * k2u, v + 0.5 * h * k2v, params)
    k4u, k4v = _field(u + h * k3u, v + h * k3v, params)
    return (u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))


def step_rk4(state, dt: float, params: ModelParams) -> State:
    """One classical RK4 step; negative components of the result become 0."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    u, v = _rk4_raw(*state, dt, params)
    return State(max(u, 0.0), max(v, 0.0))


# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# fifth-order weights minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _dopri_step(u, v, h, k1, params):
    """One Dormand-Prince step; returns new state, error estimate and last stage."""
    ks = [k1]
    for i in range(1, 7):
        row = _A[i]
        su = u + h * sum(a * k[0] for a, k in zip(row, ks))
        sv = v + h * sum(a * k[1] for a, k in zip(row, ks))
        ks.append(_field(su, sv, params))
    # stage 7 is evaluated at the fifth-order solution (FSAL)
    un, vn = su, sv
    eu = h * sum(e * k[0] for e, k in zip(_E, ks))
    ev = h * sum(e * k[1] for e, k in zip(_E, ks))
    return un, vn, eu, ev, ks[6]


class _Recorder:
    def __init__(self, init, params, cfg):
        self.params = params
        self.cfg = cfg
        self.times = [0.0]
        self.us = [float(init[0])]
        self.vs = [float(init[1])]
        self.events: list[Event] = []
        self.prey_noted = False
        self.pred_noted = False
        self.accepted = 0
        self.rejected = 0
        self.clamped = 0

    def check(self, t, u, v, initial=False):
        """Record events at an accepted point; return True when the run must stop."""
        cfg = self.cfg
        if not cfg.stop_on_events:
            return False
        thr = cfg.extinction_threshold
        if initial:
            du, dv = _field(u, v, self.params)
            if max(abs(du), abs(dv)) < cfg.convergence_tol:
                self.events.append(Event(t, EventKind.CONVERGED))
                return True
        if u < thr and v < thr:
            self.events.append(Event(t, EventKind.BOTH_EXTINCT))
            return True
        if u < thr and not self.prey_noted:
            self.prey_noted = True
            self.events.append(Event(t, EventKind.PREY_EXTINCT))
        if v < thr and not self.pred_noted:
            self.pred_noted = True
            self.events.append(Event(t, EventKind.PREDATOR_EXTINCT))
        if not initial and t >= cfg.convergence_window:
            tp = t - cfg.convergence_window
            i = bisect.bisect_right(self.times, tp) - 1
            t0, t1 = self.times[i], self.times[i + 1]
            w = (tp - t0) / (t1 - t0) if t1 > t0 else 0.0
            up = self.us[i] + w * (self.us[i + 1] - self.us[i])
            vp = self.vs[i] + w * (self.vs[i + 1] - self.vs[i])
            if max(abs(u - up), abs(v - vp)) < cfg.convergence_tol:
                du, dv = _field(u, v, self.params)
                if max(abs(du), abs(dv)) < cfg.convergence_tol:
                    self.events.append(Event(t, EventKind.CONVERGED))
                    return True
        return False

    def push(self, t, u, v):
        self.times.append(t)
        self.us.append(u)
        self.vs.append(v)
        self.accepted += 1

    def finish(self, kind=None, t=None):
        if kind is not None:
            self.events.append(Event(self.times[-1] if t is None else t, kind))
        return Trajectory(
            times=np.array(self.times),
            states=np.column_stack([self.us, self.vs]),
            events=self.events,
            accepted_steps=self.accepted,
            rejected_steps=self.rejected,
            clamped_steps=self.clamped,
        )


def _rk4_nonneg(u, v, h, params, rec):
    un, vn = _rk4_raw(u, v, h, params)
    if un >= 0 and vn >= 0:
        return un, vn
    if h / 2 < CLAMP_DT:
        rec.clamped += 1
        return max(un, 0.0), max(vn, 0.0)
    um, vm = _rk4_nonneg(u, v, h / 2, params, rec)
    return _rk4_nonneg(um, vm, h / 2, params, rec)


def _simulate_rk4(rec, params, cfg):
    u, v = rec.us[0], rec.vs[0]
    n = 0
    while True:
        t = rec.times[-1]
        if t >= cfg.t_end * (1 - 1e-14):
            return rec.finish(EventKind.HORIZON)
        if rec.accepted >= cfg.max_steps:
            return rec.finish(EventKind.STEP_LIMIT)
        n += 1
        t_next = min(n * cfg.dt, cfg.t_end)
        u, v = _rk4_nonneg(u, v, t_next - t, params, rec)
        rec.push(t_next, u, v)
        if rec.check(t_next, u, v):
            return rec.finish()


def _simulate_adaptive(rec, params, cfg):
    u, v = rec.us[0], rec.vs[0]
    h = min(cfg.dt, cfg.t_end)
    k1 = _field(u, v, params)
    after_reject = False
    while True:
        t = rec.times[-1]
        if t >= cfg.t_end * (1 - 1e-14):
            return rec.finish(EventKind.HORIZON)
        if rec.accepted >= cfg.max_steps:
            return rec.finish(EventKind.STEP_LIMIT)
        h = min(h, cfg.t_end - t)
        un, vn, eu, ev, k7 = _dopri_step(u, v, h, k1, params)
        if un < 0 or vn < 0:
            if h / 2 >= CLAMP_DT:
                rec.rejected += 1
                h /= 2
                after_reject = True
                continue
            rec.clamped += 1
            un, vn = max(un, 0.0), max(vn, 0.0)
            k7 = _field(un, vn, params)
            err = 0.0
        else:
            su = cfg.abs_tol + cfg.rel_tol * max(abs(u), abs(un))
            sv = cfg.abs_tol + cfg.rel_tol * max(abs(v), abs(vn))
            err = max(abs(eu) / su, abs(ev) / sv)
        if err <= 1.0:
            t_new = t + h
            if cfg.t_end - t_new < 1e-14 * cfg.t_end:
                t_new = cfg.t_end
            u, v, k1 = un, vn, k7
            rec.push(t_new, u, v)
            if rec.check(t_new, u, v):
                return rec.finish()
            factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if after_reject:
                factor = min(factor, 1.0)
            after_reject = False
            h *= factor
        else:
            rec.rejected += 1
            after_reject = True
            h *= max(0.2, 0.9 * err ** -0.2)
        if h < UNDERFLOW_DT:
            traj = rec.finish(EventKind.STEP_UNDERFLOW)
            raise StepUnderflowError(f"step size underflow at t={rec.times[-1]!r}", traj)


def simulate(init, params: ModelParams, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate from ``init`` until the horizon or a terminal event.

    Raises
    ------
    StepUnderflowError
        When the adaptive step falls below :data:`UNDERFLOW_DT`; the partial
        trajectory is attached to the exception.
    """
    cfg = cfg or IntegratorConfig()
    u0, v0 = State(*init)
    rec = _Recorder((u0, v0), params, cfg)
    if rec.check(0.0, u0, v0, initial=True):
        return rec.finish()
    if cfg.method is Method.RK4_FIXED:
        return _simulate_rk4(rec, params, cfg)
    return _simulate_adaptive(rec, params, cfg)


def _count_extrema(x: np.ndarray) -> int:
    dx = np.diff(x)
    dx = dx[dx != 0]
    return int(np.sum(np.sign(dx[1:]) != np.sign(dx[:-1])))


def classify_fate(trajectory: Trajectory, cfg: IntegratorConfig | None = None) -> Fate:
    """Long-run outcome of a finished run.

    An oscillation counts only if it does not decay: the tail is the last 20 %
    of the horizon, and its second half must keep at least half the
    peak-to-peak amplitude of the first.
    """
    cfg = cfg or IntegratorConfig()
    thr = cfg.extinction_threshold
    u, v = trajectory.states[-1]
    kind = trajectory.terminal_event.kind
    if u < thr and v < thr:
        return Fate.EXTINCTION
    if kind is EventKind.CONVERGED:
        if u >= thr and v >= thr:
            return Fate.COEXISTENCE
        if v < thr:
            return Fate.PREY_ONLY
        return Fate.UNDETERMINED
    if kind is EventKind.HORIZON:
        t = trajectory.times
        tail = t >= t[-1] - 0.2 * cfg.t_end
        if np.count_nonzero(tail) < 8:
            return Fate.UNDETERMINED
        tt, ss = t[tail], trajectory.states[tail]
        amp = np.ptp(ss, axis=0).max()
        if amp > 10 * cfg.convergence_tol and _count_extrema(ss[:, 0]) >= 3:
            mid = tt[0] + 0.5 * (tt[-1] - tt[0])
            first = np.ptp(ss[tt <= mid], axis=0).max()
            second = np.ptp(ss[tt >= mid], axis=0).max()
            if second >= 0.5 * first:
                return Fate.OSCILLATORY
    return Fate.UNDETERMINED
