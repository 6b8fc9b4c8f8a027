"""Core containers: feature sets, masked numeric matrices, labels, datasets.

Everything here is immutable after construction; instances can be shared
freely across threads. Masked cells keep whatever number is stored in
``values`` but no consumer may read it (``mask`` is authoritative).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import LabelKindMismatch, SchemaMismatch, UnknownTarget

NUMERIC = "numeric"
CATEGORICAL = "categorical"


def _frozen_array(values, dtype=None) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FeatureSet:
    """Ordered, duplicate-free collection of feature names."""

    names: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        for name in names:
            if not isinstance(name, str) or name == "":
                raise ValueError(f"feature names must be non-empty strings, got {name!r}")
        index = {}
        for pos, name in enumerate(names):
            if name in index:
                raise ValueError(f"duplicate feature name {name!r}")
            index[name] = pos
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def position(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown feature {name!r}") from None


def feature_union(sets: Sequence[FeatureSet]) -> FeatureSet:
    """Union of feature sets, ordered by first appearance across the inputs."""
    seen: dict[str, None] = {}
    for fs in sets:
        for name in fs:
            seen.setdefault(name, None)
    return FeatureSet(seen.keys())


def feature_intersection(a: FeatureSet, b: FeatureSet) -> FeatureSet:
    """Names present in both, in ``a``'s order."""
    return FeatureSet(n for n in a if n in b)


def feature_difference(a: FeatureSet, b: FeatureSet) -> FeatureSet:
    """Names of ``a`` not present in ``b``, in ``a``'s order."""
    return FeatureSet(n for n in a if n not in b)


@dataclass(frozen=True)
class DataMatrix:
    """Real-valued matrix with an explicit observedness mask.

    ``mask[i, j]`` is True when cell (i, j) is observed. Observed cells must
    be finite; masked cells may hold anything (conventionally NaN).
    """

    values: np.ndarray
    mask: np.ndarray
    features: FeatureSet

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        if values.ndim != 2 or mask.ndim != 2:
            raise ValueError("values and mask must be 2-dimensional")
        if values.shape != mask.shape:
            raise ValueError(f"shape mismatch: values {values.shape} vs mask {mask.shape}")
        if values.shape[1] != len(self.features):
            raise ValueError(
                f"{values.shape[1]} columns but {len(self.features)} feature names"
            )
        if not np.all(np.isfinite(values[mask])):
            raise ValueError("observed cells must be finite")
        object.__setattr__(self, "values", _frozen_array(values, dtype=float))
        object.__setattr__(self, "mask", _frozen_array(mask, dtype=bool))

    @classmethod
    def from_dense(cls, values, features: FeatureSet | Iterable[str]) -> "DataMatrix":
        """Build from a dense array; NaN cells become masked."""
        if not isinstance(features, FeatureSet):
            features = FeatureSet(features)
        values = np.asarray(values, dtype=float)
        return cls(values=values, mask=~np.isnan(values), features=features)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def fully_observed(self) -> bool:
        return bool(self.mask.all())

    def missing_per_column(self) -> np.ndarray:
        return (~self.mask).sum(axis=0)


@dataclass(frozen=True)
class LabelVector:
    """Label column with no missing entries; numeric or categorical."""

    kind: str
    entries: np.ndarray
    name: str = "label"

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"kind must be {NUMERIC!r} or {CATEGORICAL!r}")
        if self.kind == NUMERIC:
            entries = np.asarray(self.entries, dtype=float)
            if not np.all(np.isfinite(entries)):
                raise ValueError("numeric labels must be finite (no missing labels)")
        else:
            entries = np.asarray([str(e) for e in np.asarray(self.entries).ravel()])
            if entries.size and any(e == "" for e in entries):
                raise ValueError("categorical labels must be non-empty (no missing labels)")
        if entries.ndim != 1:
            raise ValueError("labels must be 1-dimensional")
        object.__setattr__(self, "entries", _frozen_array(entries))

    def __len__(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Dataset:
    """Feature matrix paired with its label vector."""

    X: DataMatrix
    y: LabelVector

    def __post_init__(self):
        if self.X.n_rows != len(self.y):
            raise ValueError(
                f"{self.X.n_rows} rows but {len(self.y)} labels"
            )

    @property
    def n_rows(self) -> int:
        return self.X.n_rows


def align(X: DataMatrix, target: FeatureSet) -> DataMatrix:
    """Rearrange columns of ``X`` to ``target`` order, inserting all-missing
    columns for target features that ``X`` lacks.

    Raises ``UnknownTarget`` if ``X`` has a feature outside ``target``.
    Observed cells are copied bit-exactly.
    """
    extra = [n for n in X.features if n not in target]
    if extra:
        raise UnknownTarget(f"features {extra} not present in alignment target")
    n = X.n_rows
    values = np.full((n, len(target)), np.nan)
    mask = np.zeros((n, len(target)), dtype=bool)
    for j, name in enumerate(target):
        if name in X.features:
            src = X.features.position(name)
            values[:, j] = X.values[:, src]
            mask[:, j] = X.mask[:, src]
    return DataMatrix(values=values, mask=mask, features=target)


def select_features(X: DataMatrix, subset: FeatureSet) -> DataMatrix:
    """Columns of ``X`` named in ``subset``, in ``subset`` order."""
    cols = [X.features.position(name) for name in subset]
    idx = np.asarray(cols, dtype=int)
    return DataMatrix(values=X.values[:, idx], mask=X.mask[:, idx], features=subset)


def hstack(matrices: Sequence[DataMatrix]) -> DataMatrix:
    """Column-concatenate matrices with equal row counts and disjoint features."""
    if not matrices:
        raise ValueError("hstack needs at least one matrix")
    rows = {m.n_rows for m in matrices}
    if len(rows) != 1:
        raise SchemaMismatch(f"row counts differ: {sorted(rows)}")
    features = feature_union([m.features for m in matrices])
    if len(features) != sum(len(m.features) for m in matrices):
        raise SchemaMismatch("hstack inputs share feature names")
    return DataMatrix(
        values=np.hstack([m.values for m in matrices]),
        mask=np.hstack([m.mask for m in matrices]),
        features=features,
    )


def vstack(matrices: Sequence[DataMatrix]) -> DataMatrix:
    """Row-concatenate matrices that share an identical feature set."""
    if not matrices:
        raise ValueError("vstack needs at least one matrix")
    features = matrices[0].features
    for m in matrices[1:]:
        if m.features != features:
            raise SchemaMismatch(
                f"feature sets differ: {features.names} vs {m.features.names}"
            )
    return DataMatrix(
        values=np.vstack([m.values for m in matrices]),
        mask=np.vstack([m.mask for m in matrices]),
        features=features,
    )


def take_rows(dataset: Dataset, indices) -> Dataset:
    """Row subset of a dataset (features and label stay aligned)."""
    idx = np.asarray(indices, dtype=int)
    X = DataMatrix(
        values=dataset.X.values[idx],
        mask=dataset.X.mask[idx],
        features=dataset.X.features,
    )
    y = LabelVector(kind=dataset.y.kind, entries=dataset.y.entries[idx], name=dataset.y.name)
    return Dataset(X=X, y=y)


def vstack_labels(labels: Sequence[LabelVector]) -> LabelVector:
    """Concatenate label vectors sharing one kind and name."""
    if not labels:
        raise ValueError("vstack_labels needs at least one vector")
    first = labels[0]
    for lab in labels[1:]:
        if lab.kind != first.kind:
            raise LabelKindMismatch(
                f"cannot stack {first.kind} labels with {lab.kind} labels"
            )
        if lab.name != first.name:
            raise LabelKindMismatch(
                f"label names differ: {first.name!r} vs {lab.name!r}"
            )
    entries = np.concatenate([lab.entries for lab in labels])
    return LabelVector(kind=first.kind, entries=entries, name=first.name)
