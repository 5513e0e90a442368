"""Shared data types, the logistic link and column standardization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantColumnError, DomainError, InvalidArgumentError

ZERO_TOL = 1e-8

_MEAN_TOL = 1e-10
_SD_TOL = 1e-8


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def logistic(eta):
    """Inverse logit, ``e^eta / (1 + e^eta)``.

    Accepts a scalar or an array.  The two branches keep ``exp`` from
    overflowing for large ``|eta|``.
    """
    arr = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("logistic: non-finite input")
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    e = np.exp(arr[~pos])
    out[~pos] = e / (1.0 + e)
    if out.ndim == 0:
        return float(out)
    return out


def logit(p):
    """Log-odds ``ln(p / (1 - p))`` for ``0 < p < 1``."""
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("logit: probability must lie strictly inside (0, 1)")
    out = np.log(arr) - np.log1p(-arr)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Standardization:
    """Column transform fitted on training data, reused on new rows."""

    means: np.ndarray
    sds: np.ndarray

    def apply(self, design) -> np.ndarray:
        design = np.asarray(design, dtype=float)
        if design.ndim != 2 or design.shape[1] != self.means.shape[0]:
            raise InvalidArgumentError(
                f"expected {self.means.shape[0]} columns, got shape {design.shape}"
            )
        return (design - self.means) / self.sds


@dataclass(frozen=True)
class Dataset:
    """Design matrix (no intercept column), binary response and names.

    ``ddof`` records the denominator convention under which a
    standardized design has unit standard deviation; :func:`standardize`
    always produces ``ddof=1``.
    """

    design: np.ndarray
    response: np.ndarray
    names: tuple[str, ...] = ()
    standardized: bool = False
    ddof: int = 1

    def __post_init__(self):
        design = np.asarray(self.design, dtype=float)
        if design.ndim == 1:
            design = design.reshape(-1, 1)
        if design.ndim != 2:
            raise InvalidArgumentError("design must be a 2-D matrix")
        n, k = design.shape
        if n < 2 or k < 1:
            raise InvalidArgumentError(f"need n >= 2 and k >= 1, got n={n}, k={k}")
        if not np.all(np.isfinite(design)):
            raise InvalidArgumentError("design contains non-finite values")
        response = np.asarray(self.response, dtype=float).ravel()
        if response.shape[0] != n:
            raise InvalidArgumentError(
                f"response length {response.shape[0]} does not match {n} rows"
            )
        if not np.all((response == 0.0) | (response == 1.0)):
            raise InvalidArgumentError("response values must be 0 or 1")
        if response.min() == response.max():
            raise InvalidArgumentError("response must contain both classes")
        names = tuple(str(s) for s in self.names) if len(self.names) else tuple(
            f"x{j + 1}" for j in range(k)
        )
        if len(names) != k:
            raise InvalidArgumentError(f"{len(names)} names for {k} columns")
        if self.standardized:
            means = design.mean(axis=0)
            sds = design.std(axis=0, ddof=self.ddof)
            bad = np.flatnonzero(
                (np.abs(means) >= _MEAN_TOL) | (np.abs(sds - 1.0) >= _SD_TOL)
            )
            if bad.size:
                raise InvalidArgumentError(
                    "columns flagged standardized but are not: "
                    + ", ".join(names[j] for j in bad)
                )
        object.__setattr__(self, "design", _frozen(design))
        object.__setattr__(self, "response", _frozen(response))
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def k(self) -> int:
        return self.design.shape[1]

    @property
    def base_rate(self) -> float:
        return float(self.response.mean())

    def centered_response(self) -> np.ndarray:
        return self.response - self.response.mean()

    def subset(self, rows) -> "Dataset":
        """Raw (unstandardized) view of selected rows."""
        rows = np.asarray(rows)
        return Dataset(self.design[rows], self.response[rows], self.names)


def standardize(raw: Dataset) -> tuple[Dataset, Standardization]:
    """Center every column and scale it to unit sample sd (ddof=1).

    Returns the standardized dataset and the transform so that held-out
    rows can be mapped onto the same scale.
    """
    x = raw.design
    means = x.mean(axis=0)
    sds = x.std(axis=0, ddof=1)
    # relative test: a column of equal values may carry rounding noise
    scale = np.maximum(np.abs(means), 1.0)
    const = np.flatnonzero(sds <= 1e-12 * scale)
    if const.size:
        raise ConstantColumnError([raw.names[j] for j in const])
    z = (x - means) / sds
    # one more centering pass removes residual rounding in the mean
    z = z - z.mean(axis=0)
    transform = Standardization(_frozen(means), _frozen(sds))
    return Dataset(z, raw.response, raw.names, standardized=True, ddof=1), transform


@dataclass(frozen=True)
class ScreeningModel:
    """Intercept plus coefficients on the standardized scale, fit at ``delta``."""

    intercept: float
    coefficients: np.ndarray
    delta: float = 0.0
    zero_tol: float = ZERO_TOL
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen(np.ravel(self.coefficients)))
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(
            int(j) for j in np.flatnonzero(np.abs(self.coefficients) > self.zero_tol)
        )

    def linear_predictor(self, design) -> np.ndarray:
        design = np.asarray(design, dtype=float)
        if design.ndim != 2 or design.shape[1] != self.coefficients.shape[0]:
            raise InvalidArgumentError(
                f"model has {self.coefficients.shape[0]} coefficients, "
                f"design has shape {design.shape}"
            )
        return self.intercept + design @ self.coefficients

