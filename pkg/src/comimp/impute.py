"""Imputers that fill every masked cell of a DataMatrix.

All three methods are deterministic: identical input and config produce
bit-identical output. Observed cells are never rewritten.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataMatrix
from .errors import AllMissingColumn, NonFinite

_METHODS = ("mean", "knn", "soft_impute")


@dataclass(frozen=True)
class ImputerConfig:
    """Tagged choice of imputation strategy plus hyperparameters.

    ``lam`` and ``max_rank`` accept the string ``"auto"`` / ``"full"``
    respectively; only the soft-impute fields matter for ``soft_impute``,
    only ``k`` matters for ``knn``.
    """

    method: str = "mean"
    k: int = 5
    lam: float | str = "auto"
    tol: float = 1e-5
    max_iter: int = 300
    max_rank: int | str = "full"

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.lam != "auto" and float(self.lam) < 0:
            raise ValueError("lambda must be >= 0 or 'auto'")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.max_rank != "full" and int(self.max_rank) < 1:
            raise ValueError("max_rank must be >= 1 or 'full'")


@dataclass(frozen=True)
class ImputationResult:
    """A fully observed matrix plus bookkeeping about what was filled.

    ``cells_imputed`` counts filled cells per column. ``iterations``,
    ``final_objective`` and ``objective_history`` are populated by
    soft-impute only; ``fallback_cells`` lists (row, col) pairs where kNN
    fell back to the column mean because the row shared no observed
    feature with any donor.
    """

    matrix: DataMatrix
    cells_imputed: np.ndarray
    iterations: int = 0
    final_objective: float = float("nan")
    objective_history: tuple[float, ...] = ()
    fallback_cells: tuple[tuple[int, int], ...] = ()


def _check_columns_observed(X: DataMatrix) -> None:
    observed = X.mask.sum(axis=0)
    empty = [X.features.names[j] for j in np.nonzero(observed == 0)[0]]
    if empty:
        raise AllMissingColumn(f"columns with no observed cell: {empty}")


def _observed_column_means(X: DataMatrix) -> np.ndarray:
    sums = np.where(X.mask, X.values, 0.0).sum(axis=0)
    counts = X.mask.sum(axis=0)
    return sums / counts


def impute(X: DataMatrix, cfg: ImputerConfig) -> ImputationResult:
    """Dispatch to the configured imputation method."""
    if cfg.method == "mean":
        return impute_mean(X)
    if cfg.method == "knn":
        return impute_knn(X, cfg.k)
    return impute_soft(X, cfg)


def impute_mean(X: DataMatrix) -> ImputationResult:
    """Replace each missing cell with its column's observed mean."""
    _check_columns_observed(X)
    means = _observed_column_means(X)
    filled = np.where(X.mask, X.values, means[np.newaxis, :])
    matrix = DataMatrix(filled, np.ones_like(X.mask), X.features)
    return ImputationResult(matrix=matrix, cells_imputed=X.missing_per_column())


def impute_knn(X: DataMatrix, k: int = 5) -> ImputationResult:
    """k-nearest-neighbour imputation.

    Distances are Euclidean over features observed in both rows, computed
    on column-standardized values (statistics taken from the matrix
    itself) and normalized by the number of co-observed features. Each
    missing cell becomes the mean of its column over the k nearest donor
    rows (rows where that column is observed); fewer than k donors means
    all of them. Distance ties resolve to the lower row index. A row with
    no co-observed feature against every donor falls back to the column
    mean and the cell is recorded in ``fallback_cells``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_columns_observed(X)
    means = _observed_column_means(X)
    sq_dev = np.where(X.mask, (X.values - means) ** 2, 0.0).sum(axis=0)
    counts = X.mask.sum(axis=0)
    stds = np.sqrt(sq_dev / counts)
    stds[stds == 0.0] = 1.0

    Z = np.where(X.mask, (X.values - means) / stds, 0.0)
    filled = np.where(X.mask, X.values, np.nan)
    fallbacks: list[tuple[int, int]] = []

    for r in np.nonzero(~X.mask.all(axis=1))[0]:
        co = X.mask & X.mask[r]           # co-observed pattern against every row
        co_counts = co.sum(axis=1)
        diff = np.where(co, Z - Z[r], 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            dist = np.sqrt((diff**2).sum(axis=1) / co_counts)
        for j in np.nonzero(~X.mask[r])[0]:
            donors = np.nonzero(X.mask[:, j] & (co_counts > 0))[0]
            if donors.size == 0:
                filled[r, j] = means[j]
                fallbacks.append((int(r), int(j)))
                continue
            order = donors[np.argsort(dist[donors], kind="stable")]
            chosen = order[: min(k, order.size)]
            filled[r, j] = X.values[chosen, j].mean()

    matrix = DataMatrix(filled, np.ones_like(X.mask), X.features)
    return ImputationResult(
        matrix=matrix,
        cells_imputed=X.missing_per_column(),
        fallback_cells=tuple(fallbacks),
    )


def impute_soft(X: DataMatrix, cfg: ImputerConfig | None = None) -> ImputationResult:
    """Low-rank completion by iterated SVD soft-thresholding.

    Starts from a column-mean fill. Each iteration overlays the observed
    cells of ``X`` onto the current estimate, takes an SVD (truncated to
    ``max_rank`` when set), shrinks the singular values by ``lam``, and
    reconstructs. Stops when the relative Frobenius change drops below
    ``tol`` or after ``max_iter`` iterations. ``lam="auto"`` resolves to
    one fiftieth of the initialized matrix's largest singular value. The
    returned matrix keeps observed cells bit-exact; only masked cells take
    values from the converged estimate.
    """
    if cfg is None:
        cfg = ImputerConfig(method="soft_impute")
    _check_columns_observed(X)
    means = _observed_column_means(X)
    Z = np.where(X.mask, X.values, means[np.newaxis, :])

    if cfg.lam == "auto":
        lam = float(np.linalg.svd(Z, compute_uv=False)[0]) / 50.0
    else:
        lam = float(cfg.lam)

    history: list[float] = []
    iterations = 0
    for _ in range(cfg.max_iter):
        iterations += 1
        W = np.where(X.mask, X.values, Z)
        try:
            U, s, Vt = np.linalg.svd(W, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NonFinite(f"SVD failed to converge: {exc}") from exc
        if cfg.max_rank != "full":
            r = int(cfg.max_rank)
            U, s, Vt = U[:, :r], s[:r], Vt[:r, :]
        s_shrunk = np.maximum(s - lam, 0.0)
        Z_new = (U * s_shrunk) @ Vt
        if not np.all(np.isfinite(Z_new)):
            raise NonFinite("soft-impute produced non-finite values")
        resid = X.values[X.mask] - Z_new[X.mask]
        history.append(0.5 * float(resid @ resid) + lam * float(s_shrunk.sum()))
        denom = max(float(np.linalg.norm(Z)), 1e-12)
        change = float(np.linalg.norm(Z_new - Z)) / denom
        Z = Z_new
        if change < cfg.tol:
            break

    filled = np.where(X.mask, X.values, Z)
    matrix = DataMatrix(filled, np.ones_like(X.mask), X.features)
    return ImputationResult(
        matrix=matrix,
        cells_imputed=X.missing_per_column(),
        iterations=iterations,
        final_objective=history[-1],
        objective_history=tuple(history),
    )
