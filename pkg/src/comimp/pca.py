"""Principal component analysis on fully observed DataMatrix blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataMatrix, FeatureSet
from .errors import DegenerateRank, HasMissing, ShapeMismatch


@dataclass(frozen=True)
class RankRule:
    """How many components to keep: a fixed count or a variance threshold."""

    k: int | None = None
    var_explained: float | None = 0.95

    def __post_init__(self):
        if (self.k is None) == (self.var_explained is None):
            raise ValueError("set exactly one of k / var_explained")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")
        if self.var_explained is not None and not 0 < self.var_explained <= 1:
            raise ValueError("var_explained must be in (0, 1]")

    @classmethod
    def fixed(cls, k: int) -> "RankRule":
        return cls(k=k, var_explained=None)

    @classmethod
    def variance(cls, tau: float) -> "RankRule":
        return cls(k=None, var_explained=tau)


@dataclass(frozen=True)
class PcaModel:
    """Centering vector plus orthonormal projection basis.

    ``components`` columns are eigenvectors of the sample covariance in
    descending eigenvalue order; ``explained_variance_ratio`` is relative
    to the total variance of the training data (all eigenvalues, not just
    the retained ones).
    """

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    explained_variance_ratio: np.ndarray
    features: FeatureSet

    @property
    def n_components(self) -> int:
        return self.components.shape[1]


def pca_fit(A: DataMatrix, rank_rule: RankRule | None = None) -> PcaModel:
    """Fit PCA on a fully observed matrix.

    Centers columns (no variance scaling), eigen-decomposes the n-1
    sample covariance, clamps tiny negative eigenvalues to zero, and
    fixes each component's sign so its largest-magnitude entry is
    positive. With a variance threshold the retained rank is the
    smallest k whose cumulative explained-variance ratio reaches the
    threshold.
    """
    if rank_rule is None:
        rank_rule = RankRule()
    if not A.fully_observed:
        raise HasMissing("PCA input contains masked cells")
    n, p = A.values.shape
    if n < 2:
        raise DegenerateRank("PCA needs at least 2 rows")
    k_max = min(n - 1, p)
    mean = A.values.mean(axis=0)
    centered = A.values - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]

    total = float(eigvals.sum())
    ratios = eigvals / total if total > 0 else np.zeros_like(eigvals)

    if rank_rule.k is not None:
        if rank_rule.k > k_max:
            raise DegenerateRank(
                f"requested {rank_rule.k} components, at most {k_max} supported"
            )
        k = rank_rule.k
    else:
        cum = np.cumsum(ratios)
        reached = np.nonzero(cum >= rank_rule.var_explained - 1e-12)[0]
        k = int(reached[0]) + 1 if reached.size else k_max
        k = min(k, k_max)

    components = eigvecs[:, :k].copy()
    for j in range(k):
        pivot = np.argmax(np.abs(components[:, j]))
        if components[pivot, j] < 0:
            components[:, j] = -components[:, j]

    return PcaModel(
        mean=mean,
        components=components,
        eigenvalues=eigvals[:k].copy(),
        explained_variance_ratio=ratios[:k].copy(),
        features=A.features,
    )


def pca_project(model: PcaModel, B: DataMatrix, tag: str = "pc") -> DataMatrix:
    """Project ``B`` onto the model's components after centering with the
    training means. Output columns are named ``<tag>_pc1..k``."""
    if not B.fully_observed:
        raise HasMissing("projection input contains masked cells")
    if B.features != model.features:
        raise ShapeMismatch(
            f"features {B.features.names} do not match model features "
            f"{model.features.names}"
        )
    projected = (B.values - model.mean) @ model.components
    names = FeatureSet(f"{tag}_pc{i + 1}" for i in range(model.n_components))
    return DataMatrix(projected, np.ones(projected.shape, dtype=bool), names)


def pca_reconstruct(model: PcaModel, R: DataMatrix) -> DataMatrix:
    """Map projected rows back to the original feature space."""
    if R.n_cols != model.n_components:
        raise ShapeMismatch(
            f"{R.n_cols} columns but model keeps {model.n_components} components"
        )
    back = R.values @ model.components.T + model.mean
    return DataMatrix(back, np.ones(back.shape, dtype=bool), model.features)
