"""Acceptance criteria, one test each, with tolerances pinned.

Run ``pytest -v tests/test_acceptance.py``; the terminal summary lists a
PASS/FAIL line per criterion.
"""

import time

import numpy as np
import pytest

from coophunt.bifurcation import NoSignChangeError, SweepSpec, critical_bracket, find_critical_alpha, sweep
from coophunt.cli import main
from coophunt.equilibria import EquilibriumKind, interior_equilibria
from coophunt.integrate import Fate, IntegratorConfig, Method, classify_fate, simulate
from coophunt.model import ModelParams, jacobian_analytic
from coophunt.stability import classify_all, classify_equilibrium, eigenvalues_2x2

from oracles import central_jacobian, full_residual, interior_equilibria_oracle

SWITCH_TOL = 1e-9
BASE = ModelParams(a=10.0, b=0.25, c=2.0, d=1.0, alpha=0.92)


def coexistence_max_re(alpha):
    p = BASE.with_value("alpha", alpha)
    e = interior_equilibria(p)[-1]
    return classify_equilibrium(e, p).eigen.max_real_part


def random_params(rng):
    return ModelParams(
        a=rng.uniform(0.1, 20.0),
        b=rng.uniform(-0.999, 0.999),
        c=rng.uniform(0.1, 5.0),
        d=rng.uniform(0.1, 5.0),
        alpha=rng.uniform(0.0, 3.0),
    )


# criterion 1: stability switch between 0.92 and 0.96

@pytest.mark.criterion("1a", "coexistence point stable at alpha=0.92 (max Re < -1e-9), runtime < 1 s")
def test_c1a_stable_at_092(record_property):
    t0 = time.perf_counter()
    m = coexistence_max_re(0.92)
    dt = time.perf_counter() - t0
    record_property("detail", f"max Re = {m:.6g}, {dt * 1e3:.1f} ms")
    assert m < -SWITCH_TOL
    assert dt < 1.0


@pytest.mark.criterion("1b", "coexistence point unstable at alpha=0.96 (max Re > +1e-9)")
def test_c1b_unstable_at_096(record_property):
    m = coexistence_max_re(0.96)
    record_property("detail", f"max Re = {m:.6g} (still a stable spiral)")
    assert m > SWITCH_TOL


@pytest.mark.criterion("1c", "find_critical_alpha brackets alpha* inside (0.92, 0.96) to width 1e-4, runtime < 1 s")
def test_c1c_critical_alpha_bracket(record_property):
    t0 = time.perf_counter()
    wide = critical_bracket(BASE, 0.8, 1.0, 1e-4)
    try:
        found = find_critical_alpha(BASE, 0.92, 0.96, tol=1e-4)
        outcome = f"alpha* = {found:.6f}"
    except NoSignChangeError:
        found = None
        outcome = "no sign change on [0.92, 0.96]"
    dt = time.perf_counter() - t0
    record_property("detail", f"{outcome}; from [0.8, 1.0]: [{wide.lo:.6f}, {wide.hi:.6f}], "
                              f"{dt * 1e3:.1f} ms")
    assert wide.hi - wide.lo <= 1e-4
    assert dt < 1.0
    assert found is not None and 0.92 < found < 0.96
    assert 0.92 < wide.lo and wide.hi < 0.96


# criterion 2: boundary stability closed form

@pytest.mark.criterion("2", "1000 draws: (1,0) stable iff c<d; (b,0) unstable when b>0 and c<d")
def test_c2_boundary_closed_form(record_property):
    rng = np.random.default_rng(20020)
    bad = 0
    for _ in range(1000):
        p = random_params(rng)
        by_kind = {ce.equilibrium.kind: ce for ce in classify_all(p)}
        carrying = by_kind[EquilibriumKind.PREY_ONLY_CARRYING].stability
        if carrying.stable != (p.c < p.d):
            bad += 1
        if p.b > 0 and p.c < p.d:
            if by_kind[EquilibriumKind.PREY_ONLY_ALLEE].stability.stable:
                bad += 1
    record_property("detail", f"{bad} counterexamples")
    assert bad == 0


# criterion 3: negative prey slope implies stability

@pytest.mark.criterion("3", "500 draws with interior equilibria: dg1/du < -1e-9 implies stable")
def test_c3_sufficient_condition(record_property):
    rng = np.random.default_rng(30030)
    draws = checked = bad = 0
    while draws < 500:
        p = random_params(rng)
        eqs = interior_equilibria(p)
        if not eqs:
            continue
        draws += 1
        for e in eqs:
            ce = classify_equilibrium(e, p)
            if ce.prey_slope < -1e-9:
                checked += 1
                bad += not ce.stability.stable
    record_property("detail", f"{checked} equilibria met the condition, {bad} counterexamples")
    assert bad == 0 and checked > 0


# criterion 4: oracle equivalence

@pytest.mark.criterion("4", "200 draws: interior_equilibria set-equal to oracle within 1e-6, residual < 1e-10")
def test_c4_oracle_equivalence(record_property):
    rng = np.random.default_rng(40040)
    mismatches = high_residual = found = 0
    for _ in range(200):
        d = rng.uniform(0.2, 3.0)
        p = ModelParams(a=rng.uniform(1.0, 20.0), b=rng.uniform(-0.5, 0.8),
                        c=d * rng.uniform(0.5, 3.0), d=d, alpha=rng.uniform(0.0, 3.0))
        got = [e.point for e in interior_equilibria(p)]
        ref = interior_equilibria_oracle(p.a, p.b, p.c, p.d, p.alpha)
        found += len(got)
        same = len(got) == len(ref) and all(
            abs(g[0] - r[0]) <= 1e-6 and abs(g[1] - r[1]) <= 1e-6 for g, r in zip(got, ref))
        mismatches += not same
        high_residual += sum(full_residual(g, p.a, p.b, p.c, p.d, p.alpha) >= 1e-10 for g in got)
    record_property("detail", f"{found} equilibria, {mismatches} mismatched draws, "
                              f"{high_residual} residuals >= 1e-10")
    assert mismatches == 0 and high_residual == 0


# criterion 5: count regimes along the threshold sweep

@pytest.mark.criterion("5", "b-sweep [-0.25, 0.75] at alpha=0.5 shows counts {0,1,2}; count 0 at b=0.75")
def test_c5_count_regimes(record_property):
    diag = sweep(SweepSpec("b", -0.25, 0.75, 41, ModelParams(alpha=0.5)))
    counts = diag.counts()
    record_property("detail", f"counts seen {sorted(set(counts))}, count at b=0.75 is {counts[-1]}")
    assert {0, 1, 2} <= set(counts)
    assert diag.grid[-1] == 0.75 and counts[-1] == 0


# criterion 6: extinction for strong cooperation

@pytest.mark.criterion("6", "alpha=1.1, init (0.5,0.5), horizon 500: fate Extinction, both < 1e-4, runtime < 5 s")
def test_c6_extinction(record_property):
    cfg = IntegratorConfig(t_end=500.0)
    t0 = time.perf_counter()
    traj = simulate((0.5, 0.5), BASE.with_value("alpha", 1.1), cfg)
    fate = classify_fate(traj, cfg)
    dt = time.perf_counter() - t0
    u, v = traj.states[-1]
    record_property("detail", f"{fate.value} at t={traj.terminal_event.time:.4g}, "
                              f"final ({u:.3g}, {v:.3g}), {dt * 1e3:.1f} ms")
    assert fate is Fate.EXTINCTION
    assert u < 1e-4 and v < 1e-4
    assert dt < 5.0


# criterion 7: Jacobian and eigenvalue identities

@pytest.mark.criterion("7", "analytic vs central-difference Jacobian rel 1e-5 at 1000 states; eigen identities 1e-10")
def test_c7_jacobian(record_property):
    rng = np.random.default_rng(70070)
    worst_fd = worst_eig = 0.0
    for _ in range(1000):
        p = random_params(rng)
        u, v = rng.uniform(0.01, 1.5), rng.uniform(0.01, 5.0)
        j = jacobian_analytic((u, v), p)
        an = j.as_array()
        fd = central_jacobian(u, v, p.a, p.b, p.c, p.d, p.alpha)
        worst_fd = max(worst_fd, np.max(np.abs(an - fd)) / np.max(np.abs(an)))
        eig = eigenvalues_2x2(j)
        worst_eig = max(worst_eig,
                        abs(eig.trace - j.trace) / max(1.0, abs(j.trace)),
                        abs(eig.det - j.det) / max(1.0, abs(j.det)))
    record_property("detail", f"worst FD rel error {worst_fd:.2e}, worst identity error {worst_eig:.2e}")
    assert worst_fd < 1e-5
    assert worst_eig < 1e-10


# criterion 8: RK4 convergence order

@pytest.mark.criterion("8", "RK4 error at t=10 shrinks by a factor in [8, 32] when dt halves")
def test_c8_rk4_order(record_property):
    ref_cfg = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, t_end=10.0, stop_on_events=False)
    ref = simulate((0.5, 0.5), BASE, ref_cfg).states[-1]
    errs = []
    for dt in (0.1, 0.05):
        cfg = IntegratorConfig(method=Method.RK4_FIXED, dt=dt, t_end=10.0, stop_on_events=False)
        errs.append(np.max(np.abs(simulate((0.5, 0.5), BASE, cfg).states[-1] - ref)))
    ratio = errs[0] / errs[1]
    record_property("detail", f"errors {errs[0]:.3e} -> {errs[1]:.3e}, ratio {ratio:.2f}")
    assert 8.0 <= ratio <= 32.0


# criterion 9: determinism of file outputs

@pytest.mark.criterion("9", "sweep and fate-map outputs byte-identical across runs, serial and parallel")
def test_c9_determinism(tmp_path, record_property, capsys):
    runs = {"serial1": "1", "serial2": "1", "parallel": "4"}
    jobs = {
        "sweep": ["sweep"],
        "fate": ["fate-map", "--x-steps", "9", "--y-steps", "7"],
    }
    for name, args in jobs.items():
        for run, workers in runs.items():
            prefix = tmp_path / f"{name}-{run}"
            code = main(args + ["--workers", workers, "--csv", f"{prefix}.csv",
                                "--json", f"{prefix}.json", "--svg", f"{prefix}.svg"])
            assert code == 0
    capsys.readouterr()
    differing = []
    for name in jobs:
        for ext in ("csv", "json", "svg"):
            blobs = {(tmp_path / f"{name}-{run}.{ext}").read_bytes() for run in runs}
            if len(blobs) != 1:
                differing.append(f"{name}.{ext}")
    record_property("detail", "all 6 outputs identical" if not differing else f"differ: {differing}")
    assert not differing
