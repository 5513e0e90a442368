"""Cross-validated choice of delta under a support-size cap."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .core import ZERO_TOL, Dataset, ScreeningModel, Standardization, logistic, logit, standardize
from .errors import (
    InvalidArgumentError,
    RefitFailedError,
    SelectionError,
    StratificationError,
    UndefinedAUCError,
)
from .path import (
    DEFAULT_GRID,
    SolutionPath,
    compute_path,
    ever_active,
    inclusion_set,
    shrink_positions,
)

SCORING_MODES = ("plugin", "refit")
CRITERIA = ("auc", "misclassification")


def kfold_split(n: int, K: int, labels, seed: int) -> list[np.ndarray]:
    """Stratified ``K``-fold partition of ``range(n)``.

    Each class is shuffled with ``seed`` and dealt round-robin; dealing
    continues across classes so fold sizes differ by at most one.
    """
    labels = np.asarray(labels).ravel()
    if K < 2:
        raise InvalidArgumentError(f"need K >= 2 folds, got {K}")
    if labels.shape[0] != n:
        raise InvalidArgumentError(f"{labels.shape[0]} labels for n={n}")
    if n < K:
        raise InvalidArgumentError(f"n={n} is smaller than K={K}")
    classes, counts = np.unique(labels, return_counts=True)
    if classes.size < 2:
        raise StratificationError("both classes must be present")
    if counts.min() < K:
        small = classes[np.argmin(counts)]
        raise StratificationError(
            f"class {small!r} has {counts.min()} members, fewer than K={K}; "
            f"use at most {counts.min()} folds"
        )
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=int)
    offset = 0
    for cls in classes:
        idx = rng.permutation(np.flatnonzero(labels == cls))
        assignment[idx] = (offset + np.arange(idx.size)) % K
        offset += idx.size
    return [np.flatnonzero(assignment == f) for f in range(K)]


def auc(scores, labels) -> float:
    """Mann-Whitney AUC; tied scores count one half."""
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise InvalidArgumentError("scores and labels differ in length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("AUC needs both classes among the labels")
    ranks = rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def predict_prob(
    model: ScreeningModel, new_design, training_transform: Standardization | None = None
) -> np.ndarray:
    """``logistic(b0 + x'b)`` after mapping raw rows onto the training scale."""
    x = np.asarray(new_design, dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.shape[1] != model.coefficients.shape[0]:
        raise InvalidArgumentError(
            f"new design has {x.shape[1]} columns, model expects {model.coefficients.shape[0]}"
        )
    if training_transform is not None:
        x = training_transform.apply(x)
    return logistic(model.linear_predictor(x))


def refit_logistic(
    dataset: Dataset,
    support,
    max_iters: int = 50,
    tol: float = 1e-8,
    zero_tol: float = ZERO_TOL,
) -> ScreeningModel:
    """Unpenalized logistic MLE on the ``support`` columns (Newton/IRLS).

    Iterates until the score ``Z'(y - p)`` (intercept included) is below
    ``tol`` in max-norm.  Raises :class:`RefitFailedError` on separation
    (fitted probabilities reaching 0 or 1) or non-convergence.
    """
    support = np.asarray(sorted(int(j) for j in support), dtype=int)
    y = dataset.response
    n, k = dataset.n, dataset.k
    if support.size and (support.min() < 0 or support.max() >= k):
        raise InvalidArgumentError("support index out of range")
    if support.size >= n:
        raise RefitFailedError(f"support of size {support.size} needs more than n={n} rows")
    z = np.hstack([np.ones((n, 1)), dataset.design[:, support]])
    theta = np.zeros(z.shape[1])
    theta[0] = logit(dataset.base_rate)

    def loglik(eta):
        return float(np.sum(y * eta - np.logaddexp(0.0, eta)))

    eta = z @ theta
    ll = loglik(eta)
    for _ in range(max_iters + 1):
        p = logistic(eta)
        if np.min(np.minimum(p, 1.0 - p)) < 1e-10:
            raise RefitFailedError("fitted probabilities hit 0 or 1: data look separable")
        score = z.T @ (y - p)
        if np.max(np.abs(score)) < tol:
            coefs = np.zeros(k)
            coefs[support] = theta[1:]
            return ScreeningModel(theta[0], coefs, 0.0, zero_tol, meta={"refit": True})
        hess = z.T @ ((p * (1.0 - p))[:, None] * z)
        try:
            step = np.linalg.solve(hess, score)
        except np.linalg.LinAlgError as exc:
            raise RefitFailedError(f"singular information matrix: {exc}") from None
        t = 1.0
        while t > 1e-8:
            cand = theta + t * step
            eta_c = z @ cand
            ll_c = loglik(eta_c)
            if ll_c >= ll - 1e-12:
                break
            t *= 0.5
        theta, eta, ll = cand, eta_c, ll_c
    raise RefitFailedError(f"no convergence in {max_iters} Newton steps")


@dataclass(frozen=True)
class CvResult:
    """Per-fold and averaged criterion values over the delta grid.

    With ``criterion="misclassification"`` the score arrays hold the
    held-out accuracy (one minus the error rate), so larger is better in
    both modes.
    """

    grid: np.ndarray
    fold_auc: np.ndarray  # (K, m)
    mean_auc: np.ndarray
    support_size: np.ndarray
    admissible: np.ndarray
    delta_star: float
    star_index: int
    cap: int
    folds: tuple[np.ndarray, ...]
    criterion: str = "auc"
    scoring: str = "plugin"
    refit_failures: int = 0


def _fold_scores(dataset, train, test, m, scoring, criterion, zero_tol):
    raw = Dataset(dataset.design[train], dataset.response[train], dataset.names)
    train_std, transform = standardize(raw)
    fpath = compute_path(train_std, m, zero_tol)
    b0 = logit(train_std.base_rate)
    x_test = transform.apply(dataset.design[test])
    y_test = dataset.response[test]
    coefs = np.array(fpath.coefficients)
    intercepts = np.full(m, b0)
    failures = 0
    if scoring == "refit":
        positions = shrink_positions(fpath, zero_tol)
        active = ever_active(fpath, zero_tol)
        cache: dict[tuple[int, ...], ScreeningModel | None] = {}
        for t in range(m):
            key = tuple(inclusion_set(positions, fpath.grid[t], active).tolist())
            if key not in cache:
                try:
                    cache[key] = refit_logistic(train_std, key, zero_tol=zero_tol)
                except RefitFailedError:
                    cache[key] = None
            fit = cache[key]
            if fit is None:
                failures += 1
            else:
                coefs[t] = fit.coefficients
                intercepts[t] = fit.intercept
    probs = logistic(intercepts[None, :] + x_test @ coefs.T)
    if criterion == "auc":
        scores = np.array([auc(probs[:, t], y_test) for t in range(m)])
    else:
        scores = np.mean((probs >= 0.5) == (y_test[:, None] == 1), axis=0)
    return scores, failures


def support_sizes(path: SolutionPath, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Inclusion-rule selection size at every grid point."""
    positions = shrink_positions(path, zero_tol)
    active = ever_active(path, zero_tol)
    return np.array([inclusion_set(positions, d, active).size for d in path.grid])


def cross_validate(
    dataset: Dataset,
    m: int = DEFAULT_GRID,
    K: int = 5,
    seed: int = 0,
    cap_fraction: float = 0.25,
    scoring: str = "plugin",
    criterion: str = "auc",
    zero_tol: float = ZERO_TOL,
    path: SolutionPath | None = None,
    workers: int = 1,
) -> CvResult:
    """K-fold CV over the delta grid and choice of ``delta_star``.

    Each fold re-standardizes its training rows, computes its own path on
    ``m`` cut points of ``[0, delta0_fold]`` and scores the held-out rows
    at every cut point, so grid index ``t`` means the same fraction
    ``t / (m - 1)`` of delta0 in every fold.  Grid points whose full-data
    selection exceeds ``floor(cap_fraction * k)`` variables are
    inadmissible; ``delta_star`` is the admissible maximiser of the mean
    score, ties going to the larger delta.
    """
    if not dataset.standardized:
        raise InvalidArgumentError("cross_validate needs a standardized dataset")
    if not 0.0 < cap_fraction <= 1.0:
        raise InvalidArgumentError(f"cap_fraction must be in (0, 1], got {cap_fraction}")
    if scoring not in SCORING_MODES:
        raise InvalidArgumentError(f"scoring must be one of {SCORING_MODES}")
    if criterion not in CRITERIA:
        raise InvalidArgumentError(f"criterion must be one of {CRITERIA}")
    if path is None:
        path = compute_path(dataset, m, zero_tol)
    elif path.m != m:
        raise InvalidArgumentError(f"supplied path has {path.m} grid points, expected {m}")

    folds = kfold_split(dataset.n, K, dataset.response, seed)
    everything = np.arange(dataset.n)

    def run(f):
        test = folds[f]
        train = np.setdiff1d(everything, test)
        return _fold_scores(dataset, train, test, m, scoring, criterion, zero_tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(K)))
    else:
        results = [run(f) for f in range(K)]
    fold_scores = np.vstack([r[0] for r in results])
    failures = sum(r[1] for r in results)
    mean_scores = fold_scores.mean(axis=0)

    sizes = support_sizes(path, zero_tol)
    cap = math.floor(cap_fraction * dataset.k + 1e-9)
    admissible = sizes <= cap
    if not admissible.any():
        raise SelectionError(
            f"no grid point selects at most {cap} variables; raise the cap or refine the grid"
        )
    best = mean_scores[admissible].max()
    winners = np.flatnonzero(admissible & (mean_scores >= best - 1e-12))
    star = int(winners[-1])
    for arr in (fold_scores, mean_scores, sizes, admissible):
        arr.setflags(write=False)
    return CvResult(
        path.grid,
        fold_scores,
        mean_scores,
        sizes,
        admissible,
        float(path.grid[star]),
        star,
        cap,
        tuple(folds),
        criterion,
        scoring,
        failures,
    )
