"""How good is the first-order expansion of the logistic mean?

The second-order Taylor remainder of ``logistic(b0 + x'b)`` around
``b = 0`` is ``-1/2 p(1-p)(2p-1) (x'b)^2`` with ``p`` taken at an
unknown intermediate point.  Its ratio to the first-order term
``logistic(b0) x'b`` is the remainder ratio reported here, either
plugged in at a chosen ``p`` or bounded with the global maximum of the
cubic ``|p(1-p)(2p-1)|``.

Also hosts :func:`brute_force_dantzig`, an exhaustive grid search for
the exact (non-linearized) Dantzig problem, used as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ZERO_TOL, Dataset, ScreeningModel, logistic, logit
from .errors import InfeasibleAtResolutionError, InvalidArgumentError


def cubic(p):
    """``p (1 - p) (2p - 1)``."""
    p = np.asarray(p, dtype=float)
    return p * (1.0 - p) * (2.0 * p - 1.0)


def max_cubic_coefficient() -> float:
    """Maximum of ``|p(1-p)(2p-1)|`` on [0, 1]: ``1 / (6 sqrt 3)``.

    Attained at ``p = 1/2 +- sqrt(3)/6``; often quoted as roughly 0.1.
    """
    return 1.0 / (6.0 * math.sqrt(3.0))


def remainder_ratio(beta0: float, linear_term, p_mid):
    """Second-order remainder over first-order term.

    ``1/2 p(1-p)(2p-1) t^2 / (logistic(beta0) t)`` for ``t = linear_term``;
    defined as 0 where ``t = 0``.
    """
    t = np.asarray(linear_term, dtype=float)
    p = np.asarray(p_mid, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise InvalidArgumentError("p_mid must lie in (0, 1)")
    out = 0.5 * cubic(p) * t / logistic(beta0)
    return float(out) if out.ndim == 0 else out


def mean_value_ratio(beta0: float, linear_term, t_frac: float):
    """Remainder ratio with ``p`` at the intermediate point ``t_frac``.

    ``p = logistic(t_frac * (beta0 + linear_term))``, ``0 < t_frac < 1``.
    """
    if not 0.0 < t_frac < 1.0:
        raise InvalidArgumentError("t_frac must lie in (0, 1)")
    eta = beta0 + np.asarray(linear_term, dtype=float)
    return remainder_ratio(beta0, linear_term, logistic(t_frac * eta))


def bound_ratio(beta0: float, linear_term):
    """Worst case of :func:`remainder_ratio` over every intermediate point."""
    t = np.abs(np.asarray(linear_term, dtype=float))
    out = 0.5 * max_cubic_coefficient() * t / logistic(beta0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Band:
    low: float
    high: float
    min_base_prob: float | None = None  # required logistic(beta0) lower bound
    beta0: float | None = None  # band tabulated at this exact intercept
    t_frac: float | None = None  # intermediate point used to tabulate it

    def base_ok(self, beta0: float) -> bool:
        if self.min_base_prob is not None and logistic(beta0) < self.min_base_prob:
            return False
        if self.beta0 is not None and abs(beta0 - self.beta0) > 1e-12:
            return False
        return True


# probability bands under which the remainder ratio is claimed below eps
BANDS = {
    0.1: Band(0.302, 0.698, min_base_prob=0.35),
    0.01: Band(0.29, 0.71, beta0=0.0, t_frac=0.1),
}


@dataclass(frozen=True)
class ApproxReport:
    probs: np.ndarray
    ratios: np.ndarray  # plug-in, p_mid = fitted probability
    bound_ratios: np.ndarray  # worst case over the intermediate point
    max_abs_ratio: float
    region: tuple[float, float] | None
    admissible: bool
    outside: np.ndarray  # indices of fitted probabilities outside the band
    epsilon: float

    @property
    def ratio_ok(self) -> bool:
        return self.max_abs_ratio < self.epsilon


def region_check(beta0: float, fitted_probs, epsilon: float = 0.1) -> ApproxReport:
    """Evaluate remainder ratios and membership in the band for ``epsilon``.

    Each observation's linear term is recovered as
    ``logit(p_i) - beta0``.  For a tabulated ``epsilon`` (0.1 or 0.01)
    ``admissible`` means every probability lies strictly inside the band
    and the intercept condition of that band holds; for any other
    ``epsilon`` there is no band and ``admissible`` falls back to the
    plug-in ratios themselves.
    """
    p = np.asarray(fitted_probs, dtype=float).ravel()
    if np.any((p <= 0) | (p >= 1)):
        raise InvalidArgumentError("fitted probabilities must lie in (0, 1)")
    lin = logit(p) - beta0
    ratios = np.asarray(remainder_ratio(beta0, lin, p), dtype=float).reshape(-1)
    bounds = np.asarray(bound_ratio(beta0, lin), dtype=float).reshape(-1)
    max_abs = float(np.max(np.abs(ratios))) if ratios.size else 0.0
    band = BANDS.get(epsilon)
    if band is None:
        outside = np.flatnonzero(np.abs(ratios) >= epsilon)
        return ApproxReport(p, ratios, bounds, max_abs, None, outside.size == 0, outside, epsilon)
    outside = np.flatnonzero((p <= band.low) | (p >= band.high))
    admissible = outside.size == 0 and band.base_ok(beta0)
    return ApproxReport(
        p, ratios, bounds, max_abs, (band.low, band.high), admissible, outside, epsilon
    )


def approximation_report(
    dataset: Dataset, model: ScreeningModel, epsilon: float = 0.1
) -> ApproxReport:
    probs = logistic(model.linear_predictor(dataset.design))
    probs = np.clip(probs, 1e-15, 1 - 1e-15)
    return region_check(model.intercept, probs, epsilon)


def brute_force_dantzig(
    dataset: Dataset,
    delta: float,
    box: float = 5.0,
    grid_points_per_dim: int = 401,
    zero_tol: float = ZERO_TOL,
) -> ScreeningModel:
    """Exhaustive search for ``min ||b||_1`` s.t. ``||X'(y - p(b))||_inf <= delta``.

    ``p(b) = logistic(logit(ybar) + X b)`` is the exact logistic mean.
    The search covers ``[-box, box]^k`` on a regular grid that contains 0;
    among equal-norm feasible points the lexicographically smallest wins.
    Exponential in ``k``, so limited to ``k <= 3``.
    """
    k = dataset.k
    if k > 3:
        raise InvalidArgumentError(f"brute force is limited to k <= 3, got {k}")
    if not box > 0:
        raise InvalidArgumentError("box must be positive")
    if grid_points_per_dim < 3 or grid_points_per_dim % 2 == 0:
        raise InvalidArgumentError("grid_points_per_dim must be odd and >= 3")
    x, y = dataset.design, dataset.response
    b0 = logit(dataset.base_rate)
    axis = np.linspace(-box, box, grid_points_per_dim)
    axis[grid_points_per_dim // 2] = 0.0

    if k == 1:
        blocks = [axis[:, None]]
    else:
        # one block per value of the first coordinate keeps lexicographic order
        rest = np.stack(
            np.meshgrid(*([axis] * (k - 1)), indexing="ij"), axis=-1
        ).reshape(-1, k - 1)
        blocks = (
            np.hstack([np.full((rest.shape[0], 1), a0), rest]) for a0 in axis
        )

    best = None  # (l1, point)
    for block in blocks:
        p = logistic(b0 + block @ x.T)  # (points, n)
        resid = (y - p) @ x  # (points, k)
        feasible = np.max(np.abs(resid), axis=1) <= delta
        if not feasible.any():
            continue
        cand = block[feasible]
        l1 = np.abs(cand).sum(axis=1)
        lo = l1.min()
        if best is None or lo < best[0] - 1e-12:
            best = (lo, cand[np.flatnonzero(l1 <= lo + 1e-12)[0]])
    if best is None:
        raise InfeasibleAtResolutionError(
            f"no grid point within box {box} satisfies the band at delta={delta:.6g}"
        )
    return ScreeningModel(b0, best[1], delta, zero_tol, meta={"oracle": "grid"})
