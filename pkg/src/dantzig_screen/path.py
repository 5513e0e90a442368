"""Coefficient profile over a delta grid, shrink-to-zero positions, ranking."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ZERO_TOL, Dataset
from .dantzig import DantzigInstance, band_violation, delta_zero, solve_dantzig
from .errors import DegenerateDataError, InvalidArgumentError

DEFAULT_GRID = 101


def make_grid(delta0: float, m: int) -> np.ndarray:
    """``m`` equally spaced cut points on ``[0, delta0]``."""
    if m < 2:
        raise InvalidArgumentError(f"grid needs at least 2 points, got {m}")
    if not delta0 > 0:
        raise DegenerateDataError(
            "delta0 is zero: no predictor is correlated with the response"
        )
    grid = np.linspace(0.0, delta0, m)
    grid[-1] = delta0
    return grid


@dataclass(frozen=True)
class SolutionPath:
    grid: np.ndarray
    coefficients: np.ndarray  # (m, k); row t solved at grid[t]
    delta0: float
    names: tuple[str, ...] = ()
    iterations: tuple[int, ...] = ()

    @property
    def m(self) -> int:
        return self.grid.shape[0]

    @property
    def k(self) -> int:
        return self.coefficients.shape[1]

    def max_band_violation(self, dataset: Dataset) -> float:
        inst = DantzigInstance(dataset, 0.0)
        gram, target = inst.gram, inst.target
        return max(
            band_violation(gram, target, row, d)
            for row, d in zip(self.coefficients, self.grid)
        )


def _sweep(inst: DantzigInstance, deltas, zero_tol, formulation):
    """Solve from the largest delta downward, warm-starting each solve."""
    rows, iters = [], []
    basis = None
    for d in deltas[::-1]:
        model = solve_dantzig(inst.at(d), basis, zero_tol, formulation)
        basis = model.meta["basis"]
        rows.append(model.coefficients)
        iters.append(model.meta["iterations"])
    return rows[::-1], iters[::-1]


def compute_path(
    dataset: Dataset,
    m: int = DEFAULT_GRID,
    zero_tol: float = ZERO_TOL,
    workers: int = 1,
    formulation: str = "split",
) -> SolutionPath:
    """Dantzig coefficients at ``m`` uniform cut points of ``[0, delta0]``.

    With ``workers > 1`` the grid is cut into contiguous chunks that are
    swept independently (each from its own top point).
    """
    d0 = delta_zero(dataset)
    if d0 <= 1e-12 * dataset.n:
        d0 = 0.0
    grid = make_grid(d0, m)
    inst = DantzigInstance(dataset, d0)
    if workers <= 1:
        rows, iters = _sweep(inst, grid, zero_tol, formulation)
    else:
        chunks = [c for c in np.array_split(np.arange(m), workers) if c.size]

        def sweep(chunk):
            return _sweep(inst, grid[chunk], zero_tol, formulation)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(sweep, chunks))
        rows = [r for part in parts for r in part[0]]
        iters = [i for part in parts for i in part[1]]
    coefs = np.vstack(rows)
    # zero is the optimal vertex at delta0; scrub LP round-off
    coefs[-1] = np.where(np.abs(coefs[-1]) <= zero_tol, 0.0, coefs[-1])
    coefs.setflags(write=False)
    grid.setflags(write=False)
    return SolutionPath(grid, coefs, d0, dataset.names, tuple(iters))


def shrink_positions(path: SolutionPath, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Largest grid delta at which each coefficient is nonzero (0 if never)."""
    active = np.abs(path.coefficients) > zero_tol
    pos = np.zeros(path.k)
    for j in range(path.k):
        idx = np.flatnonzero(active[:, j])
        if idx.size:
            pos[j] = path.grid[idx[-1]]
    return pos


def ever_active(path: SolutionPath, zero_tol: float = ZERO_TOL) -> np.ndarray:
    return np.any(np.abs(path.coefficients) > zero_tol, axis=0)


def reentry_flags(path: SolutionPath, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """True where a coefficient's nonzero stretch along the grid is broken."""
    active = np.abs(path.coefficients) > zero_tol
    starts = np.sum(active[1:] & ~active[:-1], axis=0) + active[0]
    return starts > 1


@dataclass(frozen=True)
class Ranking:
    shrink_position: np.ndarray
    rank: np.ndarray
    tie_groups: tuple[tuple[int, ...], ...]


def rank_variables(positions) -> Ranking:
    """Competition ranking, larger shrink position first; ties share a rank."""
    pos = np.asarray(positions, dtype=float).ravel()
    rank = np.array([1 + int(np.sum(pos > p)) for p in pos], dtype=int)
    groups = tuple(
        tuple(int(j) for j in np.flatnonzero(pos == level))
        for level in sorted(set(pos.tolist()), reverse=True)
    )
    return Ranking(pos, rank, groups)


def inclusion_set(
    positions, delta: float, active=None
) -> np.ndarray:
    """Indices selected at ``delta``: shrink position at or beyond ``delta``.

    ``active`` masks out variables that are zero along the whole grid,
    whose placeholder position of 0 would otherwise qualify at delta = 0.
    """
    pos = np.asarray(positions, dtype=float)
    keep = pos >= delta
    if active is not None:
        keep &= np.asarray(active, dtype=bool)
    return np.flatnonzero(keep)
