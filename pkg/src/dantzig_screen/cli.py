"""Command-line screening pipeline and synthetic data generator.

``dantzig-screen screen`` reads a CSV (rows are subjects, one column is
the binary response), computes the delta path, ranks variables by
shrink position, picks delta by cross-validation and writes CSV tables.
``dantzig-screen synth`` writes a logistic-model CSV plus a JSON file
with the ground truth.

Exit codes: 0 success, 2 bad input, 3 solver failure, 4 degenerate
data.  On failure a single JSON line describing the error goes to
stderr.  Log verbosity is read from ``DANTZIG_SCREEN_LOG``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import platform
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .core import ZERO_TOL, Dataset, logistic, standardize
from .dantzig import DantzigInstance, slp_refine, solve_dantzig
from .diagnostics import approximation_report
from .errors import InvalidArgumentError, ScreeningError
from .path import (
    DEFAULT_GRID,
    compute_path,
    ever_active,
    inclusion_set,
    rank_variables,
    reentry_flags,
    shrink_positions,
)
from .selection import CRITERIA, SCORING_MODES, cross_validate

log = logging.getLogger("dantzig_screen")

LOG_ENV = "DANTZIG_SCREEN_LOG"
DEFAULT_SEED = 20240101
MISSING = {"", "na", "nan", "null", "none", "?"}


@dataclass(frozen=True)
class RunConfig:
    input: str
    response: str
    out: str
    grid: int = DEFAULT_GRID
    folds: int = 5
    seed: int = DEFAULT_SEED
    cap: float = 0.25
    scoring: str = "plugin"
    criterion: str = "auc"
    zero_tol: float = ZERO_TOL
    slp: bool = False
    svg: bool = False

    def __post_init__(self):
        if self.grid < 2:
            raise InvalidArgumentError(f"--grid must be >= 2, got {self.grid}")
        if self.folds < 2:
            raise InvalidArgumentError(f"--folds must be >= 2, got {self.folds}")
        if not 0.0 < self.cap <= 1.0:
            raise InvalidArgumentError(f"--cap must be in (0, 1], got {self.cap}")
        if self.scoring not in SCORING_MODES:
            raise InvalidArgumentError(f"--scoring must be one of {SCORING_MODES}")
        if self.criterion not in CRITERIA:
            raise InvalidArgumentError(f"--criterion must be one of {CRITERIA}")
        if not self.zero_tol > 0:
            raise InvalidArgumentError("--zero-tol must be positive")


def fmt(value) -> str:
    """Shortest round-tripping text for a number; integers stay integers."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if value == 0.0:
        return "0"  # drops the sign of -0.0
    return repr(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else fmt(c) for c in row])


def _response_codes(values: list[str]) -> tuple[np.ndarray, dict[str, int]]:
    distinct = sorted(set(values))
    try:
        numeric = {v: float(v) for v in distinct}
    except ValueError:
        numeric = None
    if numeric is not None and set(numeric.values()) <= {0.0, 1.0}:
        mapping = {v: int(numeric[v]) for v in distinct}
    elif len(distinct) == 2:
        mapping = {distinct[0]: 0, distinct[1]: 1}
        log.info("response labels mapped: %r -> 0, %r -> 1", distinct[0], distinct[1])
    else:
        shown = ", ".join(repr(v) for v in distinct[:5])
        raise InvalidArgumentError(
            f"response must be 0/1 or have exactly two labels, found {len(distinct)}: {shown}"
        )
    return np.array([mapping[v] for v in values], dtype=float), mapping


def read_table(path, response_column: str) -> tuple[Dataset, dict]:
    """Parse the CSV into a raw (unstandardized) :class:`Dataset`.

    Rows with a missing value in any column are dropped.  The second
    return value records the row counts and the response label mapping.
    """
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise InvalidArgumentError(f"{path} is not UTF-8 text") from None
    if not rows:
        raise InvalidArgumentError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if response_column not in header:
        raise InvalidArgumentError(f"response column {response_column!r} not in header")
    if len(set(header)) != len(header):
        raise InvalidArgumentError("duplicate column names in header")
    ycol = header.index(response_column)
    xcols = [j for j in range(len(header)) if j != ycol]
    if not xcols:
        raise InvalidArgumentError("no predictor columns")

    kept, dropped = [], 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise InvalidArgumentError(
                f"line {lineno}: {len(row)} fields, header has {len(header)}"
            )
        cells = [c.strip() for c in row]
        if any(c.lower() in MISSING for c in cells):
            dropped += 1
            continue
        kept.append(cells)
    if dropped:
        log.warning("dropped %d row(s) with missing values", dropped)

    design = np.empty((len(kept), len(xcols)))
    for i, cells in enumerate(kept):
        for out_j, j in enumerate(xcols):
            try:
                design[i, out_j] = float(cells[j])
            except ValueError:
                raise InvalidArgumentError(
                    f"column {header[j]!r}: non-numeric value {cells[j]!r}"
                ) from None
    if not np.all(np.isfinite(design)):
        raise InvalidArgumentError("predictor values must be finite")
    y, mapping = _response_codes([cells[ycol] for cells in kept])
    counts = [int(np.sum(y == 0)), int(np.sum(y == 1))]
    if min(counts) < 2:
        raise InvalidArgumentError(
            f"need at least 2 rows per class, got {counts[0]} zeros and {counts[1]} ones"
        )
    info = {"rows_read": len(rows) - 1, "rows_dropped": dropped, "label_map": mapping}
    return Dataset(design, y, tuple(header[j] for j in xcols)), info


def ingest_csv(path, response_column: str) -> Dataset:
    """Read the CSV and return the standardized dataset."""
    raw, _ = read_table(path, response_column)
    return standardize(raw)[0]


def generate_synthetic(
    n: int,
    k: int,
    active,
    coefficients,
    intercept: float,
    seed: int,
    path,
    response: str = "y",
) -> tuple[Path, Path]:
    """Draw ``X ~ N(0, I)`` and ``y ~ Bernoulli(logistic(intercept + X b))``.

    ``b`` is zero except on ``active``.  Writes the CSV to ``path`` and
    the ground truth to ``<path stem>.truth.json``; returns both paths.
    """
    active = [int(j) for j in active]
    coefficients = [float(c) for c in coefficients]
    if n < 2 or k < 1:
        raise InvalidArgumentError(f"need n >= 2 and k >= 1, got n={n}, k={k}")
    if len(active) != len(coefficients):
        raise InvalidArgumentError("active and coefficients differ in length")
    if len(set(active)) != len(active) or any(not 0 <= j < k for j in active):
        raise InvalidArgumentError("active indices must be distinct and within range")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, k))
    beta = np.zeros(k)
    beta[active] = coefficients
    p = logistic(intercept + x @ beta)
    y = (rng.random(n) < p).astype(int)

    path = Path(path)
    names = [f"x{j + 1}" for j in range(k)]
    _write_csv(path, names + [response], (list(x[i]) + [int(y[i])] for i in range(n)))
    truth = {
        "n": n,
        "k": k,
        "seed": seed,
        "intercept": intercept,
        "active": [names[j] for j in active],
        "active_index": active,
        "coefficients": coefficients,
        "response": response,
        "class_counts": [int(n - y.sum()), int(y.sum())],
    }
    truth_path = path.with_name(path.stem + ".truth.json")
    truth_path.write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path, truth_path


def _plot(out: Path, path, cv) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "dantzig-screen"
    meta = {"Date": None, "Creator": "dantzig-screen"}

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(path.grid, path.coefficients, linewidth=0.8)
    ax.axvline(cv.delta_star, color="k", linestyle="--", linewidth=0.8)
    ax.set_xlabel("delta")
    ax.set_ylabel("coefficient (standardized)")
    fig.tight_layout()
    fig.savefig(out / "profile.svg", metadata=meta)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(cv.grid, cv.mean_auc, color="C0")
    ax.plot(cv.grid[~cv.admissible], cv.mean_auc[~cv.admissible], ".", color="0.6")
    ax.axvline(cv.delta_star, color="k", linestyle="--", linewidth=0.8)
    ax.set_xlabel("delta")
    ax.set_ylabel("mean CV " + cv.criterion)
    fig.tight_layout()
    fig.savefig(out / "cv_auc.svg", metadata=meta)
    plt.close(fig)


def run_screen(config: RunConfig) -> dict:
    """Run the full pipeline and write its tables to ``config.out``.

    Returns the manifest that is also written as ``run.json``.
    """
    raw, info = read_table(config.input, config.response)
    data, _ = standardize(raw)
    log.info("loaded n=%d rows, k=%d predictors", data.n, data.k)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    path = compute_path(data, config.grid, config.zero_tol)
    positions = shrink_positions(path, config.zero_tol)
    active = ever_active(path, config.zero_tol)
    ranking = rank_variables(positions)
    reentry = reentry_flags(path, config.zero_tol)
    cv = cross_validate(
        data,
        m=config.grid,
        K=config.folds,
        seed=config.seed,
        cap_fraction=config.cap,
        scoring=config.scoring,
        criterion=config.criterion,
        zero_tol=config.zero_tol,
        path=path,
    )
    selected = inclusion_set(positions, cv.delta_star, active)
    log.info("delta* = %.6g selects %d variable(s)", cv.delta_star, selected.size)

    instance = DantzigInstance(data, cv.delta_star)
    model = solve_dantzig(instance, zero_tol=config.zero_tol)
    slp_info = None
    if config.slp:
        res = slp_refine(instance, model)
        model = res.model
        slp_info = {
            "converged": res.converged,
            "rounds": res.rounds,
            "warning": res.warning,
            "score_norms": [float(v) for v in res.residual_norms],
        }
    report = approximation_report(data, model, 0.1)

    names = data.names
    _write_csv(
        out / "path.csv",
        ["delta", *names],
        ([d, *row] for d, row in zip(path.grid, path.coefficients)),
    )
    order = sorted(range(data.k), key=lambda j: (ranking.rank[j], j))
    _write_csv(
        out / "ranking.csv",
        ["variable", "shrink_position", "rank", "reentry"],
        ([names[j], positions[j], ranking.rank[j], reentry[j]] for j in order),
    )
    folds = [f"fold{f + 1}" for f in range(config.folds)]
    score = "auc" if config.criterion == "auc" else "accuracy"
    _write_csv(
        out / "cv_auc.csv",
        ["delta", *[f"{c}_{score}" for c in folds], f"mean_{score}",
         "support_size", "admissible", "delta_star"],
        (
            [cv.grid[t], *cv.fold_auc[:, t], cv.mean_auc[t], cv.support_size[t],
             cv.admissible[t], t == cv.star_index]
            for t in range(config.grid)
        ),
    )
    sel_order = sorted(selected.tolist(), key=lambda j: (ranking.rank[j], j))
    _write_csv(
        out / "selected.csv",
        ["variable", "shrink_position", "rank", "coefficient"],
        ([names[j], positions[j], ranking.rank[j], model.coefficients[j]] for j in sel_order),
    )
    in_band = np.ones(data.n, dtype=bool)
    in_band[report.outside] = False
    _write_csv(
        out / "diagnostics.csv",
        ["row", "fitted_prob", "ratio_plugin", "ratio_bound", "in_band"],
        (
            [i + 1, report.probs[i], report.ratios[i], report.bound_ratios[i], in_band[i]]
            for i in range(data.n)
        ),
    )

    manifest = {
        # the output directory is left out so reruns elsewhere compare equal
        "config": {k: v for k, v in asdict(config).items() if k != "out"},
        "n": data.n,
        "k": data.k,
        "rows_read": info["rows_read"],
        "rows_dropped": info["rows_dropped"],
        "label_map": info["label_map"],
        "base_rate": data.base_rate,
        "intercept": model.intercept,
        "delta0": path.delta0,
        "delta_star": cv.delta_star,
        "star_index": cv.star_index,
        "cap": cv.cap,
        "best_mean_score": float(cv.mean_auc[cv.star_index]),
        "selected": [names[j] for j in sel_order],
        "refit_failures": cv.refit_failures,
        "slp": slp_info,
        "approximation": {
            "region": list(report.region),
            "admissible": bool(report.admissible),
            "max_abs_ratio": report.max_abs_ratio,
            "outside": int(report.outside.size),
        },
        "versions": {
            "dantzig_screen": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    (out / "run.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if config.svg:
        _plot(out, path, cv)
    return manifest


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dantzig-screen",
        description="Variable screening for a binary response with the Dantzig selector.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("screen", help="run path, ranking and CV on a CSV")
    s.add_argument("--input", required=True, help="CSV file, one row per subject")
    s.add_argument("--response", required=True, help="name of the 0/1 response column")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--grid", type=int, default=DEFAULT_GRID, help="number of delta cut points")
    s.add_argument("--folds", type=int, default=5)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--cap", type=float, default=0.25, help="support cap as a fraction of k")
    s.add_argument("--scoring", choices=SCORING_MODES, default="plugin")
    s.add_argument("--criterion", choices=CRITERIA, default="auc")
    s.add_argument("--slp", action="store_true", help="refine the delta* fit by SLP")
    s.add_argument("--zero-tol", type=float, default=ZERO_TOL)
    s.add_argument("--svg", action="store_true", help="also write profile and CV plots")

    g = sub.add_parser("synth", help="write a synthetic logistic dataset")
    g.add_argument("--out", required=True, help="CSV file to write")
    g.add_argument("-n", type=int, default=100)
    g.add_argument("-k", type=int, default=40)
    g.add_argument("--active", type=int, nargs="*", default=[0, 1, 2],
                   help="0-based indices of the nonzero coefficients")
    g.add_argument("--coef", type=float, nargs="*", default=[1.5, -1.5, 1.5])
    g.add_argument("--intercept", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    g.add_argument("--response", default="y")
    return parser


def _setup_logging() -> None:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _fail(exc: Exception, code: int) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    delta = getattr(exc, "delta", None)
    if delta is not None and math.isfinite(delta):
        record["delta"] = delta
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    _setup_logging()
    args = _parser().parse_args(argv)
    try:
        if args.command == "screen":
            config = RunConfig(
                input=args.input,
                response=args.response,
                out=args.out,
                grid=args.grid,
                folds=args.folds,
                seed=args.seed,
                cap=args.cap,
                scoring=args.scoring,
                criterion=args.criterion,
                zero_tol=args.zero_tol,
                slp=args.slp,
                svg=args.svg,
            )
            manifest = run_screen(config)
            print(
                f"delta*={manifest['delta_star']:.6g} "
                f"selected={len(manifest['selected'])} -> {config.out}"
            )
        else:
            csv_path, truth = generate_synthetic(
                args.n, args.k, args.active, args.coef, args.intercept, args.seed,
                args.out, args.response,
            )
            print(f"wrote {csv_path} and {truth}")
    except ScreeningError as exc:
        return _fail(exc, exc.exit_code)
    except OSError as exc:
        return _fail(exc, 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
