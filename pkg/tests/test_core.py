import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dantzig_screen.core import Dataset, ScreeningModel, logistic, logit, standardize
from dantzig_screen.errors import ConstantColumnError, DomainError, InvalidArgumentError


class TestLogistic:
    def test_examples(self):
        assert logistic(0.0) == 0.5
        assert abs(logistic(40.0) - 1.0) < 1e-12
        assert logistic(math.log(3.0)) == pytest.approx(0.75, abs=1e-15)

    def test_no_overflow(self):
        out = logistic(np.array([-1000.0, -40.0, 0.0, 40.0, 1000.0]))
        assert np.all(np.isfinite(out))
        assert out[0] == 0.0 and out[-1] == 1.0

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            logistic(float("nan"))
        with pytest.raises(InvalidArgumentError):
            logistic(np.array([0.0, np.inf]))

    def test_monotone(self):
        eta = np.sort(np.random.default_rng(0).normal(scale=20, size=5000))
        assert np.all(np.diff(logistic(eta)) >= 0)


class TestLogit:
    def test_examples(self):
        assert logit(0.5) == 0.0
        assert logit(0.75) == pytest.approx(math.log(3.0), abs=1e-15)
        with pytest.raises(DomainError):
            logit(1.0)
        with pytest.raises(DomainError):
            logit(0.0)

    def test_round_trip_grid(self):
        p = np.linspace(1e-6, 1 - 1e-6, 1000)
        assert np.max(np.abs(logistic(logit(p)) - p)) < 1e-10


class TestStandardize:
    def test_example(self):
        data, transform = standardize(Dataset([[1.0], [2.0], [3.0]], [0, 1, 1]))
        np.testing.assert_allclose(data.design[:, 0], [-1.0, 0.0, 1.0], atol=1e-15)
        assert transform.means[0] == 2.0 and transform.sds[0] == 1.0
        assert data.standardized

    def test_constant_column_named(self):
        raw = Dataset([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]], [0, 1, 1], names=("a", "b"))
        with pytest.raises(ConstantColumnError) as err:
            standardize(raw)
        assert err.value.columns == ["a"]
        assert "a" in str(err.value)

    def test_transform_maps_training_rows(self):
        rng = np.random.default_rng(1)
        raw = Dataset(rng.normal(3, 7, size=(20, 4)), rng.integers(0, 2, 20) | (np.arange(20) < 2))
        data, transform = standardize(raw)
        np.testing.assert_allclose(transform.apply(raw.design), data.design, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (12, 3), elements=st.floats(-1e3, 1e3, allow_subnormal=False)))
    def test_idempotent(self, x):
        y = np.arange(12) % 2
        try:
            once, _ = standardize(Dataset(x, y))
        except ConstantColumnError:
            return
        twice, _ = standardize(Dataset(once.design, y))
        np.testing.assert_allclose(twice.design, once.design, atol=1e-10)


class TestDataset:
    def test_invariants(self):
        with pytest.raises(InvalidArgumentError):
            Dataset([[1.0], [2.0]], [1, 1])
        with pytest.raises(InvalidArgumentError):
            Dataset([[1.0], [2.0]], [0, 2])
        with pytest.raises(InvalidArgumentError):
            Dataset([[1.0]], [0])
        with pytest.raises(InvalidArgumentError):
            Dataset([[1.0], [3.0]], [0, 1], standardized=True)

    def test_immutable(self):
        d = Dataset([[1.0], [2.0]], [0, 1])
        with pytest.raises(ValueError):
            d.design[0, 0] = 9.0

    def test_default_names(self):
        assert Dataset(np.zeros((2, 3)) + [[0, 1, 2]], [0, 1]).names == ("x1", "x2", "x3")


class TestScreeningModel:
    def test_support_uses_zero_tol(self):
        m = ScreeningModel(0.0, [1e-9, -0.5, 0.0, 2e-8], zero_tol=1e-8)
        assert m.support == {1, 3}
