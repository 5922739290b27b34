import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coophunt.equilibria import EquilibriumKind, boundary_equilibria, interior_equilibria
from coophunt.model import DomainError, Jacobian2, ModelParams, jacobian_analytic
from coophunt.stability import (
    EigenPair,
    StabilityLabel,
    boundary_stability_closed_form,
    classify,
    classify_all,
    classify_equilibrium,
    classify_matrix,
    classify_origin,
    eigenvalues_2x2,
    interior_sufficient_condition,
)

DEFAULTS = ModelParams()
L = StabilityLabel

finite = st.floats(-50, 50, allow_nan=False)


class TestEigenvalues:
    def test_triangular(self):
        eig = eigenvalues_2x2(Jacobian2(-7.5, -1.0, 0.0, 1.0))
        assert sorted([eig.lambda1.real, eig.lambda2.real]) == [-7.5, 1.0]
        assert eig.lambda1.imag == eig.lambda2.imag == 0.0

    def test_rotation(self):
        eig = eigenvalues_2x2(Jacobian2(0.0, -1.0, 1.0, 0.0))
        assert {eig.lambda1, eig.lambda2} == {1j, -1j}
        assert eig.max_real_part == 0.0

    def test_scaled_identity(self):
        eig = eigenvalues_2x2(Jacobian2(-1.0, 0.0, 0.0, -1.0))
        assert eig.lambda1 == eig.lambda2 == -1.0

    def test_identities_on_random_matrices(self):
        rng = np.random.default_rng(7)
        for m in rng.uniform(-10, 10, size=(10000, 4)):
            j = Jacobian2(*m)
            eig = eigenvalues_2x2(j)
            scale = max(1.0, float(np.max(np.abs(m))) ** 2)
            assert abs(eig.trace - j.trace) <= 1e-10 * scale
            assert abs(eig.det - j.det) <= 1e-10 * scale

    @given(finite, finite, finite, finite)
    def test_agrees_with_numpy(self, a, b, c, d):
        j = Jacobian2(a, b, c, d)
        ours = sorted([eigenvalues_2x2(j).lambda1, eigenvalues_2x2(j).lambda2], key=lambda z: (z.real, z.imag))
        ref = sorted(np.linalg.eigvals(j.as_array()), key=lambda z: (z.real, z.imag))
        scale = max(1.0, abs(a), abs(b), abs(c), abs(d))
        # repeated roots are ill-conditioned, so compare through symmetric functions
        assert sum(ours) == pytest.approx(sum(ref), abs=1e-9 * scale)
        assert ours[0] * ours[1] == pytest.approx(ref[0] * ref[1], abs=1e-9 * scale * scale)


class TestClassify:
    def test_saddle(self):
        assert classify(EigenPair(-7.5 + 0j, 1.0 + 0j)).label is L.SADDLE

    def test_stable_spiral(self):
        cls = classify(EigenPair(-0.1 + 2j, -0.1 - 2j))
        assert cls.label is L.STABLE_SPIRAL and cls.stable and cls.hyperbolic

    def test_center(self):
        cls = classify(EigenPair(1j, -1j))
        assert cls.label is L.CENTER and not cls.hyperbolic and not cls.stable

    def test_nodes(self):
        assert classify(EigenPair(-1 + 0j, -2 + 0j)).label is L.STABLE_NODE
        assert classify(EigenPair(1 + 0j, 2 + 0j)).label is L.UNSTABLE_NODE
        assert classify(EigenPair(0.3 + 1j, 0.3 - 1j)).label is L.UNSTABLE_SPIRAL

    def test_degenerate(self):
        cls = classify(EigenPair(0j, -1 + 0j))
        assert cls.label is L.DEGENERATE and not cls.hyperbolic

    def test_tolerance_band(self):
        assert classify(EigenPair(1e-12 + 1j, 1e-12 - 1j)).label is L.CENTER
        assert classify(EigenPair(1e-12 + 1j, 1e-12 - 1j), tol=1e-14).label is L.UNSTABLE_SPIRAL

    @given(finite, finite, finite, finite)
    def test_stable_iff_trace_det(self, a, b, c, d):
        j = Jacobian2(a, b, c, d)
        _, cls = classify_matrix(j)
        if cls.hyperbolic:
            assert cls.stable == (j.trace < 0 and j.det > 0)


class TestBoundaryClosedForm:
    def test_predator_cannot_invade(self):
        r = boundary_stability_closed_form(ModelParams(c=1.0, d=2.0))
        assert r.carrying.closed_form_stable
        assert r.carrying.closed_form.label is L.STABLE_NODE
        assert not r.allee.closed_form_stable
        assert r.allee.closed_form.label is L.SADDLE

    def test_predator_invades(self):
        r = boundary_stability_closed_form(DEFAULTS)
        assert r.carrying.det == pytest.approx(-7.5)
        assert r.carrying.closed_form.label is L.SADDLE
        assert r.allee.closed_form.label is L.UNSTABLE_NODE

    def test_negative_threshold_is_a_stable_planar_point(self):
        r = boundary_stability_closed_form(ModelParams(b=-0.5, c=1.0, d=2.0))
        assert r.allee.out_of_quadrant
        assert r.allee.growth < 0
        assert r.allee.closed_form_stable

    def test_zero_threshold_has_no_numeric_check(self):
        r = boundary_stability_closed_form(DEFAULTS.with_value("b", 0.0))
        assert r.allee.numeric is None and r.allee.agree is None

    @settings(max_examples=200)
    @given(st.floats(0.1, 30), st.floats(-0.95, 0.95), st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0, 5))
    def test_numeric_agrees_with_closed_form(self, a, b, c, d, alpha):
        r = boundary_stability_closed_form(ModelParams(a, b, c, d, alpha))
        for verdict in (r.carrying, r.allee):
            assert verdict.agree in (True, None)


class TestSufficientCondition:
    def test_holds_at_defaults(self):
        coex = interior_equilibria(DEFAULTS)[-1]
        cond = interior_sufficient_condition(coex, DEFAULTS)
        assert cond.holds and cond.value < -1e-9
        assert classify_equilibrium(coex, DEFAULTS).stability.stable

    def test_fails_at_alpha_096(self):
        p = DEFAULTS.with_value("alpha", 0.96)
        coex = interior_equilibria(p)[-1]
        assert not interior_sufficient_condition(coex, p).holds

    def test_interior_only(self):
        with pytest.raises(DomainError):
            interior_sufficient_condition(boundary_equilibria(DEFAULTS)[1], DEFAULTS)

    def test_off_diagonal_signs(self):
        # stability then rests on j11 alone, which is u times the prey slope
        p = DEFAULTS
        for e in interior_equilibria(p):
            j = jacobian_analytic(e.point, p)
            assert j.j12 < 0 < j.j21 and j.j22 < 0
            assert j.j11 == pytest.approx(e.u * interior_sufficient_condition(e, p).value, rel=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.5, 25), st.floats(-0.9, 0.9), st.floats(0.1, 6), st.floats(0.1, 4), st.floats(0, 4))
    def test_negative_slope_implies_stable(self, a, b, c, d, alpha):
        p = ModelParams(a, b, c, d, alpha)
        for e in interior_equilibria(p):
            ce = classify_equilibrium(e, p)
            if ce.prey_slope < -1e-9:
                assert ce.stability.stable


class TestClassifyAll:
    def test_defaults(self):
        labels = [(ce.equilibrium.kind, ce.stability.label) for ce in classify_all(DEFAULTS)]
        assert labels == [
            (EquilibriumKind.ORIGIN, L.DEGENERATE),
            (EquilibriumKind.PREY_ONLY_CARRYING, L.SADDLE),
            (EquilibriumKind.PREY_ONLY_ALLEE, L.UNSTABLE_NODE),
            (EquilibriumKind.INTERIOR, L.SADDLE),
            (EquilibriumKind.INTERIOR, L.STABLE_SPIRAL),
        ]

    def test_origin_attracts(self):
        assert classify_origin(DEFAULTS) == "attracting"
        ce = classify_all(DEFAULTS, empirical_origin=True)[0]
        assert ce.empirical == "attracting" and ce.eigen is None
