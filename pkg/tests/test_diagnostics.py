import math

import numpy as np
import pytest

from dantzig_screen.core import Dataset, logistic, logit
from dantzig_screen.dantzig import DantzigInstance, delta_zero, solve_dantzig
from dantzig_screen.diagnostics import (
    approximation_report,
    bound_ratio,
    brute_force_dantzig,
    cubic,
    max_cubic_coefficient,
    mean_value_ratio,
    region_check,
    remainder_ratio,
)
from dantzig_screen.errors import InfeasibleAtResolutionError, InvalidArgumentError

from oracles import logistic_data, two_point


class TestCubic:
    def test_max(self):
        v = max_cubic_coefficient()
        assert 0.0962 <= v <= 0.0963
        assert v == pytest.approx(1 / (6 * math.sqrt(3)))
        assert abs(cubic(0.5 + math.sqrt(3) / 6)) == pytest.approx(v, abs=1e-15)
        assert cubic(0.5) == 0.0

    def test_dense_grid(self):
        p = np.linspace(0, 1, 1_000_000)
        assert abs(np.abs(cubic(p)).max() - max_cubic_coefficient()) < 1e-9


class TestRemainderRatio:
    def test_examples(self):
        assert remainder_ratio(0.0, 1.0, 0.7887) == pytest.approx(0.0962, abs=5e-5)
        assert remainder_ratio(1.3, 0.0, 0.8) == 0.0
        assert remainder_ratio(0.4, 1e-9, 0.8) == pytest.approx(0.0, abs=1e-9)

    def test_zero_at_half(self):
        t = np.linspace(-5, 5, 101)
        assert np.all(remainder_ratio(0.7, t, 0.5) == 0.0)

    def test_matches_taylor_remainder(self):
        # actual remainder over the first-order term lies between the plug-in
        # ratios at the two ends of the segment
        b0, t = 0.3, 0.4
        exact = logistic(b0 + t) - logistic(b0) - logistic(b0) * (1 - logistic(b0)) * t
        taylor_ratio = exact / (logistic(b0) * t)
        ends = [remainder_ratio(b0, t, logistic(b0)), remainder_ratio(b0, t, logistic(b0 + t))]
        # the logistic second derivative is -p(1-p)(2p-1): same sign convention
        assert min(ends) - 1e-12 <= -taylor_ratio <= max(ends) + 1e-12

    def test_bound_dominates(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            b0, t, p = rng.normal(), rng.normal(scale=2), rng.uniform(0.01, 0.99)
            assert abs(remainder_ratio(b0, t, p)) <= bound_ratio(b0, t) + 1e-15

    def test_invalid_p(self):
        with pytest.raises(InvalidArgumentError):
            remainder_ratio(0.0, 1.0, 1.0)

    def test_small_band_at_zero_intercept(self):
        # probabilities in (0.29, 0.71) at beta0 = 0 with the intermediate point
        # at one tenth of the way keep the ratio below 0.01
        t = logit(np.linspace(0.2901, 0.7099, 4001))
        assert np.abs(mean_value_ratio(0.0, t, 0.1)).max() < 0.01


class TestRegionCheck:
    def test_all_half(self):
        for eps in (0.1, 0.01, 0.05):
            rep = region_check(0.0, np.full(10, 0.5), eps)
            assert rep.admissible and rep.max_abs_ratio == 0.0

    def test_flags_outlier(self):
        probs = np.array([0.4, 0.5, 0.95, 0.6])
        rep = region_check(0.0, probs, 0.1)
        assert not rep.admissible
        np.testing.assert_array_equal(rep.outside, [2])
        assert rep.region == (0.302, 0.698)

    def test_band_at_zero_intercept(self):
        probs = np.linspace(0.3001, 0.6999, 500)
        rep = region_check(0.0, probs, 0.1)
        assert rep.max_abs_ratio < 0.1 and rep.ratio_ok

    def test_base_probability_condition(self):
        rep = region_check(logit(0.2), np.full(4, 0.5), 0.1)
        assert not rep.admissible

    def test_report_for_model(self):
        data = logistic_data(0, 30, 3, [0], [0.5])
        model = solve_dantzig(DantzigInstance(data, 0.5 * delta_zero(data)))
        rep = approximation_report(data, model)
        assert rep.probs.shape == (30,) and rep.ratios.shape == (30,)
        assert np.all(np.abs(rep.ratios) <= rep.bound_ratios + 1e-15)


class TestBruteForce:
    def test_zero_at_delta0(self):
        data = logistic_data(1, 20, 2, [0], [1.0])
        m = brute_force_dantzig(data, delta_zero(data) + 1e-9, grid_points_per_dim=41)
        assert np.all(m.coefficients == 0.0)

    def test_two_point(self):
        data = two_point()
        oracle = brute_force_dantzig(data, 0.25, box=5.0, grid_points_per_dim=10001)
        lp = solve_dantzig(DantzigInstance(data, 0.25))
        assert np.sign(oracle.coefficients[0]) == np.sign(lp.coefficients[0])
        assert oracle.support == lp.support
        # exact answer ln 7 lies within one grid step (1e-3)
        assert abs(oracle.coefficients[0] - math.log(7)) <= 1e-3

    @pytest.mark.parametrize("seed", [5, 6, 7])
    def test_strong_and_null(self, seed):
        data = logistic_data(seed, 30, 2, [0], [2.0])
        delta = 0.5 * delta_zero(data)
        oracle = brute_force_dantzig(data, delta, box=2.0, grid_points_per_dim=801, zero_tol=0.0075)
        lp = solve_dantzig(DantzigInstance(data, delta), zero_tol=0.0075)
        assert oracle.support == lp.support == {0}

    def test_lexicographic_tie_break(self):
        # symmetric columns: +-b on either coordinate are equally good
        x = np.array([[1.0, 1.0], [-1.0, -1.0]])
        data = Dataset(x, [1, 0], standardized=True, ddof=0)
        m = brute_force_dantzig(data, 0.5, box=2.0, grid_points_per_dim=81)
        assert m.coefficients[0] == 0.0 and m.coefficients[1] > 0

    def test_errors(self):
        with pytest.raises(InvalidArgumentError):
            brute_force_dantzig(logistic_data(0, 20, 4), 1.0)
        with pytest.raises(InvalidArgumentError):
            brute_force_dantzig(two_point(), 1.0, grid_points_per_dim=40)
        with pytest.raises(InfeasibleAtResolutionError):
            brute_force_dantzig(two_point(), 0.0, box=0.5, grid_points_per_dim=11)
