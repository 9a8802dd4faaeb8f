import math

import numpy as np
import pytest

from core.errors import DegenerateInput, InvalidInput
from core.model.matrix import AxisEstimateMatrix
from core.penalty.curvature import contraction_constant, curvature_bounds, residual_intervals
from core.penalty.loader import parse_penalty, register_penalty
from core.penalty.power import DELTA_CLAMP, PowerPenalty


class TestPowerPenalty:
    def test_values(self):
        mse = PowerPenalty.mse()
        assert mse.value(3.0) == 9.0
        assert mse.value(0.0) == 0.0
        assert PowerPenalty(1.0001).value(2.0) == pytest.approx(2.0001386, abs=1e-7)
        np.testing.assert_array_equal(mse.value(np.array([-2.0, 2.0])), [4.0, 4.0])

    def test_quadratic_derivatives(self):
        mse = PowerPenalty.mse()
        assert mse.first_derivative(-1.5) == -3.0
        assert mse.first_derivative(0.0) == 0.0
        assert mse.second_derivative(123.0) == 2.0
        assert mse.second_derivative(0.0) == 2.0

    def test_fractional_exponent_derivatives(self):
        v = PowerPenalty(1.5)
        assert v.first_derivative(4.0) == pytest.approx(3.0)
        assert v.second_derivative(4.0) == pytest.approx(0.375)

    def test_second_derivative_at_zero(self):
        assert PowerPenalty(1.5).second_derivative(0.0) == pytest.approx(1.5 * 0.5 * DELTA_CLAMP ** -0.5)
        assert PowerPenalty(3.0).second_derivative(0.0) == 0.0

    @pytest.mark.parametrize("p", [1.0, 0.5, float("nan")])
    def test_exponent_must_exceed_one(self, p):
        with pytest.raises(InvalidInput):
            PowerPenalty(p)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_shape_properties(self, p):
        v = PowerPenalty(p)
        t = np.linspace(-10.0, 10.0, 201)
        assert np.all(v.value(t) >= 0.0)
        np.testing.assert_array_equal(v.value(t), v.value(-t))
        np.testing.assert_allclose(v.first_derivative(t), -v.first_derivative(-t))
        assert np.all(v.second_derivative(t) >= 0.0)
        assert np.all(v.second_derivative(t[t != 0.0]) > 0.0)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    @pytest.mark.parametrize("t", [0.1, -0.1, 1.0, -1.0, 10.0, -10.0])
    def test_finite_differences(self, p, t):
        v = PowerPenalty(p)
        h = 1e-6
        first = (v.value(t + h) - v.value(t - h)) / (2 * h)
        assert abs(v.first_derivative(t) - first) <= 1e-5 * max(1.0, abs(v.first_derivative(t)))
        # Wider step for the second difference; h = 1e-6 is dominated by rounding at |t| = 10
        h2 = 1e-4
        second = (v.value(t + h2) - 2 * v.value(t) + v.value(t - h2)) / h2**2
        assert abs(v.second_derivative(t) - second) <= 1e-5 * max(1.0, abs(v.second_derivative(t)))

    def test_pseudo_mae_tracks_absolute_error(self):
        rng = np.random.default_rng(8)
        v = PowerPenalty.pseudo_mae()
        for _ in range(100):
            residuals = rng.uniform(0.01, 100.0, size=20) * rng.choice([-1.0, 1.0], size=20)
            l1 = np.sum(np.abs(residuals))
            assert abs(v.total(residuals) - l1) <= 0.005 * l1

    def test_spec_strings(self):
        assert PowerPenalty.mse().spec == "p2"
        assert PowerPenalty.pseudo_mae().spec == "p1+eps:0.0001"
        assert PowerPenalty(3.0).spec == "p3"
        assert repr(PowerPenalty.mse()) == "PowerPenalty('p2')"


class TestCurvatureRange:
    def test_quadratic_is_constant(self):
        assert PowerPenalty.mse().curvature_range(-5.0, 7.0) == (2.0, 2.0, False)

    def test_cubic_interval(self):
        upper, lower, clamped = PowerPenalty(3.0).curvature_range(1.0, 2.0)
        assert (upper, lower, clamped) == (pytest.approx(12.0), pytest.approx(6.0), False)

    def test_fractional_interval_containing_zero_is_clamped(self):
        v = PowerPenalty(1.5)
        upper, lower, clamped = v.curvature_range(-1.0, 4.0)
        assert clamped
        assert upper == pytest.approx(v.second_derivative(DELTA_CLAMP))
        assert lower == pytest.approx(0.375)

    def test_fractional_interval_away_from_zero(self):
        upper, lower, clamped = PowerPenalty(1.5).curvature_range(-4.0, -1.0)
        assert not clamped
        assert upper == pytest.approx(0.75)
        assert lower == pytest.approx(0.375)

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_enlarging_interval_widens_bounds(self, p):
        v = PowerPenalty(p)
        rng = np.random.default_rng(5)
        for _ in range(50):
            lo, hi = np.sort(rng.uniform(-5, 5, size=2))
            grow = rng.uniform(0, 2, size=2)
            upper, lower, _ = v.curvature_range(lo, hi)
            upper2, lower2, _ = v.curvature_range(lo - grow[0], hi + grow[1])
            assert upper2 >= upper
            assert lower2 <= lower


class TestCurvatureBounds:
    def test_identity_matrix(self):
        u = AxisEstimateMatrix("x", np.eye(2), np.array([0.3, -0.7]))
        bounds = curvature_bounds(PowerPenalty.mse(), u, beta=0.25)
        np.testing.assert_array_equal(bounds.per_fingerprint_B, [2.0, 2.0])
        np.testing.assert_array_equal(bounds.per_fingerprint_b, [2.0, 2.0])
        assert bounds.L_max == 2.0
        assert bounds.l_min == 2.0
        assert bounds.beta_max == 0.5
        assert bounds.q == 0.0

    def test_quadratic_closed_form(self, two_by_two):
        bounds = curvature_bounds(PowerPenalty.mse(), two_by_two)
        u = np.abs(two_by_two.entries)
        assert bounds.L_max == pytest.approx(2.0 * np.max(u.T @ u))
        assert bounds.l_min == pytest.approx(2.0 * np.min(np.sum(u * u, axis=0)))
        assert bounds.beta == pytest.approx(bounds.beta_max / 2)
        assert 0.0 < bounds.l_min <= bounds.L_max
        assert 0.0 < bounds.q < 1.0

    def test_isotropic_step_gives_zero_contraction(self):
        u = AxisEstimateMatrix("x", np.eye(3), np.zeros(3))
        bounds = curvature_bounds(PowerPenalty.mse(), u, beta="auto")
        beta = 1.0 / (3 * bounds.L_max)
        assert contraction_constant(beta, 3, bounds.l_min, bounds.L_max) == 0.0

    def test_residual_intervals(self, two_by_two):
        lo, hi = residual_intervals(two_by_two)
        np.testing.assert_allclose(lo, [0.1, -0.4])
        np.testing.assert_allclose(hi, [0.4, 0.1])

    def test_clamp_is_reported(self, two_by_two):
        bounds = curvature_bounds(PowerPenalty.pseudo_mae(), two_by_two)
        assert bounds.clamp_applied
        assert np.all(bounds.per_fingerprint_b > 0)
        assert np.all(bounds.per_fingerprint_b <= bounds.per_fingerprint_B)

    def test_zero_column_is_degenerate(self):
        u = AxisEstimateMatrix("x", np.array([[1.0, 0.0], [2.0, 0.0]]), np.zeros(2))
        with pytest.raises(DegenerateInput):
            curvature_bounds(PowerPenalty.mse(), u)

    @pytest.mark.parametrize("beta", [0.0, -1.0, 0.5, 10.0, "fast"])
    def test_step_outside_window(self, beta):
        u = AxisEstimateMatrix("x", np.eye(2), np.zeros(2))
        with pytest.raises(InvalidInput):
            curvature_bounds(PowerPenalty.mse(), u, beta=beta)

    def test_contraction_inside_window(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            u = AxisEstimateMatrix("x", rng.uniform(0.1, 2.0, size=(10, 3)), rng.uniform(0, 1, size=10))
            bounds = curvature_bounds(PowerPenalty.mse(), u)
            for beta in rng.uniform(0.01, 0.99, size=5) * bounds.beta_max:
                q = contraction_constant(beta, 3, bounds.l_min, bounds.L_max)
                assert 0.0 <= q < 1.0


class TestPenaltyLoader:
    @pytest.mark.parametrize(
        "spec, p",
        [("p2", 2.0), ("MSE", 2.0), ("mae", 1.0001), ("p1+eps:0.0001", 1.0001), ("p1+eps:1e-3", 1.001), ("p3", 3.0)],
    )
    def test_known_specs(self, spec, p):
        assert parse_penalty(spec).p == pytest.approx(p, abs=1e-15)

    def test_spec_parses_back(self):
        for penalty in (PowerPenalty.mse(), PowerPenalty.pseudo_mae(), PowerPenalty(3.0)):
            assert parse_penalty(penalty.spec) == penalty

    @pytest.mark.parametrize("spec", ["", "huber", "p1", "p0.5", "p1+eps:"])
    def test_rejected_specs(self, spec):
        with pytest.raises(InvalidInput):
            parse_penalty(spec)

    def test_registered_family_takes_precedence(self):
        register_penalty(r"quartic", lambda m: PowerPenalty(4.0))
        assert parse_penalty("quartic").p == 4.0
        assert math.isclose(parse_penalty("p2").p, 2.0)
