import numpy as np
import pytest

from dantzig_screen.core import Dataset
from dantzig_screen.dantzig import DantzigInstance, solve_dantzig
from dantzig_screen.errors import DegenerateDataError, InvalidArgumentError
from dantzig_screen.path import (
    SolutionPath,
    compute_path,
    ever_active,
    inclusion_set,
    make_grid,
    rank_variables,
    reentry_flags,
    shrink_positions,
)

from oracles import logistic_data, two_point


class TestMakeGrid:
    def test_examples(self):
        np.testing.assert_allclose(make_grid(1.0, 5), [0, 0.25, 0.5, 0.75, 1.0])
        np.testing.assert_array_equal(make_grid(2.0, 2), [0.0, 2.0])

    def test_errors(self):
        with pytest.raises(DegenerateDataError):
            make_grid(0.0, 5)
        with pytest.raises(InvalidArgumentError):
            make_grid(1.0, 1)


class TestComputePath:
    def test_two_point_column(self):
        path = compute_path(two_point(), 5)
        np.testing.assert_allclose(path.coefficients[:, 0], [2, 1.5, 1.0, 0.5, 0], atol=1e-12)
        assert path.delta0 == 1.0

    def test_last_row_zero_and_band(self):
        data = logistic_data(0, 50, 15, [0, 1], [1.0, 1.0])
        path = compute_path(data, 41)
        assert np.all(path.coefficients[-1] == 0.0)
        assert path.max_band_violation(data) <= 1e-6
        assert path.grid[0] == 0.0 and path.grid[-1] == path.delta0

    def test_matches_cold_solves(self):
        data = logistic_data(1, 30, 8, [2], [1.5])
        path = compute_path(data, 21)
        for t in range(0, 21, 4):
            cold = solve_dantzig(DantzigInstance(data, path.grid[t]))
            assert np.abs(cold.coefficients).sum() == pytest.approx(
                np.abs(path.coefficients[t]).sum(), abs=1e-9
            )

    def test_planted_single_variable_leads(self):
        for seed in range(5):
            data = logistic_data(seed, 100, 10, [4], [2.5])
            pos = shrink_positions(compute_path(data, 101))
            assert np.argmax(pos) == 4 and np.sum(pos == pos.max()) == 1

    def test_chunked_equals_sequential(self):
        data = logistic_data(2, 40, 20, [0, 1, 2], [1.0, -1.0, 1.0])
        seq = compute_path(data, 51)
        par = compute_path(data, 51, workers=4)
        np.testing.assert_allclose(par.coefficients, seq.coefficients, atol=1e-8)

    def test_banded_formulation_same_path(self):
        data = logistic_data(3, 30, 6, [0], [1.0])
        a = compute_path(data, 21)
        b = compute_path(data, 21, formulation="banded")
        np.testing.assert_allclose(
            np.abs(a.coefficients).sum(axis=1), np.abs(b.coefficients).sum(axis=1), atol=1e-8
        )

    def test_degenerate(self):
        x = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        data = Dataset(x, [1, 1, 0, 0], standardized=True, ddof=0)
        with pytest.raises(DegenerateDataError):
            compute_path(data, 11)


def manual_path(columns, grid):
    return SolutionPath(np.asarray(grid, float), np.asarray(columns, float).T, grid[-1])


class TestShrinkPositions:
    def test_two_point(self):
        pos = shrink_positions(compute_path(two_point(), 5))
        assert pos[0] == 0.75

    def test_never_active_and_reentry(self):
        grid = [0, 1, 2, 3, 4]
        path = manual_path([[0, 0, 0, 0, 0], [1, 0, 1, 0, 0], [2, 1, 1, 1, 0]], grid)
        np.testing.assert_array_equal(shrink_positions(path), [0, 2, 3])
        np.testing.assert_array_equal(ever_active(path), [False, True, True])
        np.testing.assert_array_equal(reentry_flags(path), [False, True, False])

    def test_refinement_stability(self):
        for seed in range(4):
            data = logistic_data(seed, 60, 12, [0, 5], [1.0, -1.0])
            coarse = compute_path(data, 21)
            fine = compute_path(data, 41)
            spacing = coarse.grid[1]
            assert np.all(shrink_positions(fine) >= shrink_positions(coarse) - spacing - 1e-12)

    def test_column_permutation(self):
        data = logistic_data(7, 60, 10, [1, 6], [1.5, -1.0])
        perm = np.random.default_rng(0).permutation(10)
        permuted = Dataset(data.design[:, perm], data.response, [data.names[j] for j in perm], standardized=True)
        a = rank_variables(shrink_positions(compute_path(data, 51)))
        b = rank_variables(shrink_positions(compute_path(permuted, 51)))
        np.testing.assert_array_equal(b.rank, a.rank[perm])


class TestRanking:
    def test_examples(self):
        np.testing.assert_array_equal(rank_variables([0.9, 0.9, 0.5]).rank, [1, 1, 3])
        np.testing.assert_array_equal(rank_variables([0.3] * 4).rank, [1, 1, 1, 1])

    def test_tie_chain_pattern(self):
        a, b, c, d, e = 0.9, 0.7, 0.5, 0.3, 0.1
        r = rank_variables([a, a, b, c, c, c, d, d, e, e])
        np.testing.assert_array_equal(r.rank, [1, 1, 3, 4, 4, 4, 7, 7, 9, 9])
        assert r.tie_groups == ((0, 1), (2,), (3, 4, 5), (6, 7), (8, 9))

    def test_rank_order(self):
        pos = np.random.default_rng(3).integers(0, 6, size=30).astype(float)
        r = rank_variables(pos)
        for i in range(30):
            for j in range(30):
                if pos[i] > pos[j]:
                    assert r.rank[i] < r.rank[j]
                elif pos[i] == pos[j]:
                    assert r.rank[i] == r.rank[j]


class TestInclusion:
    def test_threshold_and_mask(self):
        pos = np.array([0.0, 0.5, 1.0, 0.0])
        np.testing.assert_array_equal(inclusion_set(pos, 0.5), [1, 2])
        np.testing.assert_array_equal(inclusion_set(pos, 0.0, [False, True, True, True]), [1, 2, 3])

    def test_nesting(self):
        path = compute_path(logistic_data(4, 60, 15, [0, 1], [1.0, 1.0]), 31)
        pos, active = shrink_positions(path), ever_active(path)
        sets = [set(inclusion_set(pos, d, active)) for d in path.grid]
        for a, b in zip(sets, sets[1:]):
            assert b <= a
