"""Binary-response Dantzig selector as a linear program.

The logistic mean is expanded to first order around ``beta = (beta0, 0)``
with ``beta0 = logit(ybar)``.  With the slope fixed at 1/4 this gives the
band

    || X'(y - ybar) - (1/4) X'X b ||_inf <= delta

and the estimate minimises ``||b||_1`` over that band.  Writing
``v = u + b`` turns it into the LP

    min 1'u   s.t.   [ G  -G] [u]  >= -g - delta
                     [-G   G] [v]  >=  g - delta
                     [2I  -I]      >=  0,          u, v >= 0

with ``G = X'X / 4`` and ``g = X'(y - ybar)``; at the optimum ``u = |b|``.

The same polyhedron in the coordinates ``b = p - q`` (``p, q >= 0``,
``u = p + q``, ``v = 2p``) is the classic split-variable LP.  Every
column there has unit cost, so the dual simplex used for warm starts
does not stall on the zero-cost ``v`` columns; it is the default solve
route and its optimum is mapped back to ``(u, v)``.

:func:`slp_refine` replaces ``(G, g)`` by the exact Jacobian of the
logistic mean at the previous iterate and re-solves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import ZERO_TOL, Dataset, ScreeningModel, logistic, logit
from .errors import InvalidArgumentError, SolverFailure
from .lp import FEAS_TOL, LpProblem, warm_start_solve

log = logging.getLogger(__name__)

BAND_TOL = 1e-6


def delta_zero(dataset: Dataset) -> float:
    """Smallest delta at which the zero vector is feasible."""
    return float(np.max(np.abs(dataset.design.T @ dataset.centered_response())))


@dataclass(frozen=True)
class DantzigInstance:
    dataset: Dataset
    delta: float
    centered_response: np.ndarray = field(init=False, repr=False)
    intercept0: float = field(init=False)

    def __post_init__(self):
        if not self.dataset.standardized:
            raise InvalidArgumentError("Dantzig LP needs a standardized dataset")
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise InvalidArgumentError(f"delta must be finite and >= 0, got {self.delta}")
        yc = self.dataset.centered_response()
        yc.setflags(write=False)
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "centered_response", yc)
        object.__setattr__(self, "intercept0", logit(self.dataset.base_rate))

    @property
    def gram(self) -> np.ndarray:
        x = self.dataset.design
        return 0.25 * (x.T @ x)

    @property
    def target(self) -> np.ndarray:
        return self.dataset.design.T @ self.centered_response

    def at(self, delta: float) -> "DantzigInstance":
        return DantzigInstance(self.dataset, delta)


def build_banded_lp(gram: np.ndarray, target: np.ndarray, delta: float) -> LpProblem:
    """LP for ``min ||b||_1`` s.t. ``||target - gram @ b||_inf <= delta``.

    Decision vector is ``(u, v)`` with ``v = u + b``; nonnegativity of
    both is left to the solver's variable bounds.
    """
    gram = np.asarray(gram, dtype=float)
    target = np.asarray(target, dtype=float)
    k = target.shape[0]
    if gram.shape != (k, k):
        raise InvalidArgumentError(f"gram {gram.shape} does not match target length {k}")
    eye = np.eye(k)
    A = np.block([[gram, -gram], [-gram, gram], [2.0 * eye, -eye]])
    b = np.concatenate([-target - delta, target - delta, np.zeros(k)])
    c = np.concatenate([np.ones(k), np.zeros(k)])
    return LpProblem(c, A, b)


def build_split_lp(gram: np.ndarray, target: np.ndarray, delta: float) -> LpProblem:
    """Same band in split variables ``(p, q)`` with ``b = p - q``."""
    gram = np.asarray(gram, dtype=float)
    target = np.asarray(target, dtype=float)
    k = target.shape[0]
    if gram.shape != (k, k):
        raise InvalidArgumentError(f"gram {gram.shape} does not match target length {k}")
    A = np.block([[-gram, gram], [gram, -gram]])
    b = np.concatenate([-target - delta, target - delta])
    return LpProblem(np.ones(2 * k), A, b)


def build_lp(instance: DantzigInstance) -> LpProblem:
    return build_banded_lp(instance.gram, instance.target, instance.delta)


FORMULATIONS = ("split", "banded")


def _solve_band(gram, target, delta, basis_hint=None, formulation="split"):
    """Returns ``(b, u, v, solution)``."""
    if formulation == "split":
        problem = build_split_lp(gram, target, delta)
    elif formulation == "banded":
        problem = build_banded_lp(gram, target, delta)
    else:
        raise InvalidArgumentError(f"unknown formulation {formulation!r}")
    sol = warm_start_solve(problem, basis_hint, feas_tol=FEAS_TOL)
    if not sol.optimal:
        raise SolverFailure(
            f"LP not solved at delta={delta:.6g}: {sol.status.value}",
            delta=delta,
            status=sol.status,
        )
    k = target.shape[0]
    if formulation == "split":
        pos, neg = sol.z[:k], sol.z[k:]
        u, v = pos + neg, 2.0 * pos
    else:
        u, v = sol.z[:k], sol.z[k:]
    beta = v - u
    beta[np.abs(beta) <= 1e-14] = 0.0
    return beta, u, v, sol


def band_violation(gram, target, beta, delta) -> float:
    """Amount by which ``beta`` exceeds the band (<= 0 means inside)."""
    return float(np.max(np.abs(target - gram @ beta)) - delta)


def solve_dantzig(
    instance: DantzigInstance,
    basis_hint=None,
    zero_tol: float = ZERO_TOL,
    formulation: str = "split",
) -> ScreeningModel:
    """Linearized Dantzig estimate at ``instance.delta``.

    ``formulation="banded"`` solves the ``(u, v)`` program of
    :func:`build_lp` directly instead of its split-variable twin.  The
    returned model's ``meta`` carries the LP basis (for warm starts of the
    same formulation), the iteration count and the ``u``/``v`` vectors.
    """
    gram, target = instance.gram, instance.target
    beta, u, v, sol = _solve_band(gram, target, instance.delta, basis_hint, formulation)
    excess = band_violation(gram, target, beta, instance.delta)
    if excess > BAND_TOL:
        raise SolverFailure(
            f"solution leaves the band by {excess:.3g} at delta={instance.delta:.6g}",
            delta=instance.delta,
        )
    return ScreeningModel(
        instance.intercept0,
        beta,
        instance.delta,
        zero_tol,
        meta={"basis": sol.basis, "iterations": sol.iterations, "u": u, "v": v},
    )


def score_residual(dataset: Dataset, model: ScreeningModel) -> np.ndarray:
    """Exact likelihood score ``X'(y - p)`` with ``p = logistic(b0 + X b)``."""
    if model.coefficients.shape[0] != dataset.k:
        raise InvalidArgumentError(
            f"model has {model.coefficients.shape[0]} coefficients, dataset has {dataset.k}"
        )
    p = logistic(model.linear_predictor(dataset.design))
    return dataset.design.T @ (dataset.response - p)


@dataclass(frozen=True)
class SlpResult:
    model: ScreeningModel
    converged: bool
    rounds: int
    warning: str | None = None
    residual_norms: tuple[float, ...] = ()


def slp_refine(
    instance: DantzigInstance,
    initial: ScreeningModel,
    max_rounds: int = 20,
    step_tol: float = 1e-6,
) -> SlpResult:
    """Successive linear programming on the exact logistic score band.

    Each round linearizes ``p(b)`` at the current iterate ``b_t``:
    ``p(b) ~ p_t + W_t X (b - b_t)`` with ``W_t = diag(p_t (1 - p_t))``,
    so the band becomes ``||g_t - H_t b||_inf <= delta`` with
    ``H_t = X' W_t X`` and ``g_t = X'(y - p_t) + H_t b_t``.  The intercept
    stays at ``instance.intercept0``.  A round whose iterate has a larger
    exact score max-norm than the best so far is rejected and ends the
    loop.
    """
    data = instance.dataset
    x, y, delta = data.design, data.response, instance.delta
    b0 = instance.intercept0
    if initial.coefficients.shape[0] != data.k:
        raise InvalidArgumentError("initial model does not match the dataset")

    def norm(beta):
        p = logistic(b0 + x @ beta)
        return float(np.max(np.abs(x.T @ (y - p))))

    def make(beta, **meta):
        return ScreeningModel(b0, beta, delta, initial.zero_tol, meta=meta)

    current = np.array(initial.coefficients)
    best_norm = norm(current)
    norms = [best_norm]
    if best_norm <= delta:
        return SlpResult(initial, True, 0, None, tuple(norms))

    basis = None
    converged = False
    warning = None
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        p = logistic(b0 + x @ current)
        w = p * (1.0 - p)
        hess = x.T @ (w[:, None] * x)
        target = x.T @ (y - p) + hess @ current
        try:
            beta, _, _, sol = _solve_band(hess, target, delta, basis)
        except SolverFailure as exc:
            warning = f"round {rounds}: {exc}"
            log.warning("SLP stopped early: %s", warning)
            rounds -= 1
            break
        basis = sol.basis
        new_norm = norm(beta)
        if new_norm > best_norm + 1e-12:
            warning = f"round {rounds}: step rejected (score norm {new_norm:.6g} > {best_norm:.6g})"
            rounds -= 1
            break
        step = float(np.max(np.abs(beta - current)))
        current, best_norm = beta, new_norm
        norms.append(new_norm)
        if step < step_tol:
            converged = True
            break
    return SlpResult(make(current, rounds=rounds), converged, rounds, warning, tuple(norms))
