"""Dense revised simplex for ``min c'z  s.t.  A z >= b, z >= 0``.

The problem is put in equality form ``A z - s = b`` with surplus
variables ``s >= 0``.  A cold start runs a two-phase method: rows with
``b_i <= 0`` start with their surplus basic, the remaining rows get an
artificial column, and phase 1 minimises the artificial sum.  A warm
start refactors a caller-supplied basis and continues with the primal
simplex if it is primal feasible, or with the dual simplex if it is dual
feasible (the common case when only ``b`` changed).

Pricing is largest-coefficient with lowest-index tie-breaking; after a
run of degenerate pivots the solver switches to Bland's smallest-index
rule until a non-degenerate step is made, which rules out cycling.
Ratio-test ties are always broken by the lowest variable index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

FEAS_TOL = 1e-7
_OPT_TOL = 1e-9
_PIV_TOL = 1e-9
_TIE_TOL = 1e-12
_REFACTOR_EVERY = 50
_BLAND_AFTER = 30
_BLAND_REL = 1e-3


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


@dataclass(frozen=True)
class LpProblem:
    """``min c'z`` subject to ``A z >= b`` and ``z >= 0``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).ravel()
        if A.ndim != 2:
            raise InvalidArgumentError("A must be a 2-D matrix")
        if A.shape != (b.shape[0], c.shape[0]):
            raise InvalidArgumentError(
                f"dimension mismatch: A {A.shape}, b {b.shape}, c {c.shape}"
            )
        if c.shape[0] == 0:
            raise InvalidArgumentError("problem has no variables")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidArgumentError("LP data must be finite")
        for name, arr in (("c", c), ("A", A), ("b", b)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome.

    ``basis`` lists the basic columns of ``[A, -I]`` (variables first,
    then surpluses) and can be fed back to :func:`warm_start_solve`.
    ``dual`` holds the simplex multipliers, nonnegative at optimality.
    """

    status: LpStatus
    z: np.ndarray | None
    objective: float
    iterations: int
    basis: tuple[int, ...] | None = None
    dual: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _pick(idx, mag, order, bland):
    """Choose a pivot among ratio-test survivors ``idx``.

    Normally the largest pivot magnitude wins (lowest ``order`` on ties);
    in Bland mode the lowest ``order`` among acceptably large pivots wins.
    """
    big = mag >= (_BLAND_REL if bland else 1.0) * mag.max()
    cands = np.flatnonzero(big)
    return idx[cands[np.argmin(order[cands])]]


class _Simplex:
    def __init__(self, problem: LpProblem, feas_tol: float, max_iters: int | None):
        if not feas_tol > 0:
            raise InvalidArgumentError("feas_tol must be positive")
        A, b = problem.A, problem.b
        r, m = A.shape
        self.m, self.r = m, r
        self.b = b
        self.c = problem.c
        self.feas_tol = feas_tol
        self.art_rows = np.flatnonzero(b > 0)
        n_art = self.art_rows.size
        art = np.zeros((r, n_art))
        art[self.art_rows, np.arange(n_art)] = 1.0
        self.M = np.hstack([A, -np.eye(r), art])
        self.n_real = m + r
        self.n_cols = m + r + n_art
        self.cost2 = np.zeros(self.n_cols)
        self.cost2[:m] = problem.c
        self.real = np.zeros(self.n_cols, dtype=bool)
        self.real[: self.n_real] = True
        self.max_iters = max_iters if max_iters is not None else 50 * (m + r)
        self.iters = 0
        self.basis = np.empty(r, dtype=np.intp)
        self.Binv = np.empty((r, r))
        self.xB = np.empty(r)
        self._since_refactor = 0

    # -- basis bookkeeping -------------------------------------------------

    def refactor(self, check: bool = False) -> bool:
        B = self.M[:, self.basis]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(Binv)):
            return False
        if check and np.linalg.cond(B) > 1e12:
            return False
        self.Binv = Binv
        self.xB = Binv @ self.b
        self._since_refactor = 0
        return True

    def _pivot(self, p: int, q: int, col: np.ndarray, theta: float):
        self.xB -= theta * col
        self.xB[p] = theta
        row = self.Binv[p] / col[p]
        self.Binv -= np.outer(col, row)
        self.Binv[p] = row
        self.basis[p] = q
        self.iters += 1
        self._since_refactor += 1
        if self._since_refactor >= _REFACTOR_EVERY:
            self.refactor()

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        y = cost[self.basis] @ self.Binv
        d = cost - y @ self.M
        d[self.basis] = 0.0
        return d

    # -- iterations ----------------------------------------------------------

    def primal(self, cost: np.ndarray, allowed: np.ndarray) -> LpStatus:
        degenerate = 0
        while True:
            d = self._reduced_costs(cost)
            cand = np.flatnonzero((d < -_OPT_TOL) & allowed)
            if cand.size == 0:
                return LpStatus.OPTIMAL
            if self.iters >= self.max_iters:
                return LpStatus.ITERATION_LIMIT
            if degenerate >= _BLAND_AFTER:
                q = cand[0]
            else:
                q = cand[np.argmin(d[cand])]
            col = self.Binv @ self.M[:, q]
            pos = np.flatnonzero(col > _PIV_TOL)
            if pos.size == 0:
                return LpStatus.UNBOUNDED
            # Harris pass 1: step bound with the feasibility tolerance relaxed
            bound = np.min((np.maximum(self.xB[pos], 0.0) + self.feas_tol) / col[pos])
            ratios = np.maximum(self.xB[pos], 0.0) / col[pos]
            elig = pos[ratios <= bound]
            p = _pick(elig, col[elig], self.basis[elig], bland=degenerate >= _BLAND_AFTER)
            theta = max(self.xB[p], 0.0) / col[p]
            self._pivot(p, q, col, theta)
            np.maximum(self.xB, 0.0, out=self.xB, where=self.xB > -self.feas_tol)
            degenerate = degenerate + 1 if theta <= _TIE_TOL else 0

    def dual(self, cost: np.ndarray, allowed: np.ndarray) -> LpStatus:
        degenerate = 0
        while True:
            neg = np.flatnonzero(self.xB < -self.feas_tol)
            if neg.size == 0:
                return LpStatus.OPTIMAL
            if self.iters >= self.max_iters:
                return LpStatus.ITERATION_LIMIT
            if degenerate >= _BLAND_AFTER:
                p = neg[np.argmin(self.basis[neg])]
            else:
                p = neg[np.argmin(self.xB[neg])]
            d = np.maximum(self._reduced_costs(cost), 0.0)
            alpha = self.Binv[p] @ self.M
            alpha[self.basis] = 0.0
            cand = np.flatnonzero((alpha < -_PIV_TOL) & allowed)
            if cand.size == 0:
                return LpStatus.INFEASIBLE
            mag = -alpha[cand]
            bound = np.min((d[cand] + _OPT_TOL) / mag)
            ratios = d[cand] / mag
            sel = ratios <= bound
            t = ratios[sel].min()
            q = _pick(cand[sel], mag[sel], cand[sel], bland=degenerate >= _BLAND_AFTER)
            col = self.Binv @ self.M[:, q]
            self._pivot(p, q, col, self.xB[p] / col[p])
            degenerate = degenerate + 1 if t <= _TIE_TOL else 0

    # -- drivers -------------------------------------------------------------

    def cold(self) -> LpStatus:
        r, m = self.r, self.m
        self.basis[:] = m + np.arange(r)
        self.basis[self.art_rows] = self.n_real + np.arange(self.art_rows.size)
        diag = np.where(self.basis >= self.n_real, 1.0, -1.0)
        self.Binv = np.diag(diag)
        self.xB = diag * self.b
        self.iters = 0
        if self.art_rows.size:
            cost1 = np.zeros(self.n_cols)
            cost1[self.n_real :] = 1.0
            status = self.primal(cost1, np.ones(self.n_cols, dtype=bool))
            if status is LpStatus.ITERATION_LIMIT:
                return status
            art_basic = self.basis >= self.n_real
            infeas = self.xB[art_basic].sum()
            if infeas > self.feas_tol * max(1.0, np.abs(self.b).max()):
                return LpStatus.INFEASIBLE
            self._drive_out_artificials()
        return self.phase2()

    def _drive_out_artificials(self):
        for p in np.flatnonzero(self.basis >= self.n_real):
            row = self.Binv[p] @ self.M[:, : self.n_real]
            row[self.basis[self.basis < self.n_real]] = 0.0
            q = int(np.argmax(np.abs(row)))
            if abs(row[q]) <= _PIV_TOL:
                # redundant row; the artificial stays basic at zero and is
                # never priced in phase 2
                continue
            col = self.Binv @ self.M[:, q]
            self._pivot(p, q, col, self.xB[p] / col[p])
            self.iters -= 1

    def phase2(self) -> LpStatus:
        status = self.primal(self.cost2, self.real)
        if status is not LpStatus.OPTIMAL:
            return status
        # guard against drift accumulated since the last refactor
        if self.refactor() and np.any(self.xB < -self.feas_tol):
            status = self.dual(self.cost2, self.real)
            if status is LpStatus.OPTIMAL:
                status = self.primal(self.cost2, self.real)
        return status

    def from_basis(self, hint) -> LpStatus | None:
        """Continue from ``hint``; None means the hint is unusable."""
        hint = np.asarray(hint)
        if (
            hint.shape != (self.r,)
            or not np.issubdtype(hint.dtype, np.integer)
            or np.any(hint < 0)
            or np.any(hint >= self.n_real)
            or np.unique(hint).size != self.r
        ):
            return None
        self.basis[:] = hint
        self.iters = 0
        if not self.refactor(check=True):
            return None
        if np.all(self.xB >= -self.feas_tol):
            return self.phase2()
        d = self._reduced_costs(self.cost2)
        if np.all(d[self.real] >= -_OPT_TOL):
            status = self.dual(self.cost2, self.real)
            if status is LpStatus.OPTIMAL:
                status = self.phase2()
            return status
        return None

    def solution(self, status: LpStatus) -> LpSolution:
        if status is not LpStatus.OPTIMAL:
            return LpSolution(status, None, float("nan"), self.iters)
        x = np.zeros(self.n_cols)
        x[self.basis] = self.xB
        z = x[: self.m]
        z[(z < 0) & (z > -self.feas_tol)] = 0.0
        dual = self.cost2[self.basis] @ self.Binv
        basis = tuple(int(j) for j in self.basis)
        z.setflags(write=False)
        return LpSolution(status, z, float(self.c @ z), self.iters, basis, dual)


def solve_lp(
    problem: LpProblem, feas_tol: float = FEAS_TOL, max_iters: int | None = None
) -> LpSolution:
    """Solve ``problem`` from scratch.

    Running out of iterations is reported through the status, not raised.
    The default iteration budget is ``50 * (n_vars + n_rows)``.
    """
    solver = _Simplex(problem, feas_tol, max_iters)
    return solver.solution(solver.cold())


def warm_start_solve(
    problem: LpProblem,
    basis_hint=None,
    feas_tol: float = FEAS_TOL,
    max_iters: int | None = None,
) -> LpSolution:
    """Solve ``problem`` starting from ``basis_hint`` when it is usable.

    An empty, malformed or singular hint, or one that is neither primal
    nor dual feasible, silently falls back to :func:`solve_lp`.
    """
    if basis_hint is not None and len(basis_hint):
        solver = _Simplex(problem, feas_tol, max_iters)
        status = solver.from_basis(basis_hint)
        if status is not None:
            return solver.solution(status)
    return solve_lp(problem, feas_tol, max_iters)
