"""Vertical dataset merging: plain union-align-stack-impute, the PCA
variant that first reduces each side's exclusive feature block, and the
sequential left fold over more than two datasets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .data import (
    DataMatrix,
    Dataset,
    FeatureSet,
    align,
    feature_difference,
    feature_intersection,
    feature_union,
    hstack,
    select_features,
    vstack,
    vstack_labels,
)
from .errors import SchemaMismatch
from .impute import ImputerConfig, impute
from .pca import PcaModel, RankRule, pca_fit, pca_project


@dataclass(frozen=True)
class MergeReport:
    """Provenance of one merge.

    ``row_ranges`` holds one half-open (start, end) span per component, in
    input order; together they cover every merged row. ``cells_created``
    counts all-missing cells inserted by alignment; ``cells_imputed``
    counts every cell the imputer filled (created plus pre-existing
    missing).
    """

    union_features: FeatureSet
    shared_features: FeatureSet
    row_ranges: tuple[tuple[int, int], ...]
    cells_created: int
    cells_imputed: int
    imputer: ImputerConfig


@dataclass(frozen=True)
class MergedDataset:
    """A fully observed combined dataset plus its merge report."""

    data: Dataset
    report: MergeReport

    def __post_init__(self):
        if not self.data.X.fully_observed:
            raise ValueError("merged dataset must be fully observed")


@dataclass(frozen=True)
class SplitDataset:
    """A dataset carried as a train/test pair over one feature set."""

    train: Dataset
    test: Dataset

    def __post_init__(self):
        if self.train.X.features != self.test.X.features:
            raise SchemaMismatch("train and test feature sets differ")
        if self.train.y.kind != self.test.y.kind or self.train.y.name != self.test.y.name:
            raise SchemaMismatch("train and test labels differ in kind or name")

    @property
    def features(self) -> FeatureSet:
        return self.train.X.features


@dataclass(frozen=True)
class MergedSplit:
    """Merged train and test partitions plus the per-block PCA models
    (None for a side with no exclusive features)."""

    train: MergedDataset
    test: MergedDataset
    pca_q1: PcaModel | None = None
    pca_q2: PcaModel | None = None


@dataclass(frozen=True)
class SequentialMergeResult:
    """Outcome of a left fold of pairwise PCA merges."""

    train: MergedDataset
    test: MergedDataset
    stage_train_reports: tuple[MergeReport, ...]
    stage_test_reports: tuple[MergeReport, ...]


def _stack_aligned(
    datasets: Sequence[Dataset], union: FeatureSet, cfg: ImputerConfig
) -> MergedDataset:
    aligned = [align(d.X, union) for d in datasets]
    stacked = vstack(aligned)
    y = vstack_labels([d.y for d in datasets])

    cells_created = sum(
        d.X.n_rows * (len(union) - len(d.X.features)) for d in datasets
    )
    cells_imputed = int((~stacked.mask).sum())
    result = impute(stacked, cfg)

    ranges = []
    start = 0
    for d in datasets:
        ranges.append((start, start + d.X.n_rows))
        start += d.X.n_rows

    shared = datasets[0].X.features
    for d in datasets[1:]:
        shared = feature_intersection(shared, d.X.features)

    report = MergeReport(
        union_features=union,
        shared_features=shared,
        row_ranges=tuple(ranges),
        cells_created=cells_created,
        cells_imputed=cells_imputed,
        imputer=cfg,
    )
    return MergedDataset(data=Dataset(X=result.matrix, y=y), report=report)


def comimp_merge(datasets: Sequence[Dataset], cfg: ImputerConfig) -> MergedDataset:
    """Combine r >= 2 datasets over the union of their features.

    Aligns every matrix to the first-appearance union order, stacks rows
    and labels vertically, then imputes the inserted (and any pre-existing)
    missing cells. Observed cells pass through untouched.
    """
    if len(datasets) < 2:
        raise ValueError("comimp_merge needs at least 2 datasets")
    union = feature_union([d.X.features for d in datasets])
    return _stack_aligned(datasets, union, cfg)


def _reduce_block(
    split: SplitDataset, block: FeatureSet, rank_rule: RankRule, tag: str
) -> tuple[PcaModel | None, DataMatrix | None, DataMatrix | None]:
    if len(block) == 0:
        return None, None, None
    train_block = select_features(split.train.X, block)
    test_block = select_features(split.test.X, block)
    model = pca_fit(train_block, rank_rule)
    return (
        model,
        pca_project(model, train_block, tag=tag),
        pca_project(model, test_block, tag=tag),
    )


def pca_comimp_merge(
    d1: SplitDataset,
    d2: SplitDataset,
    rank_rule: RankRule | None = None,
    cfg: ImputerConfig | None = None,
) -> MergedSplit:
    """Merge two train/test datasets after PCA-reducing each side's
    exclusive feature block.

    Shared features pass through unchanged. Each exclusive block is
    reduced by a PCA fitted on the training partition and reused for the
    test partition (test rows are centered with the training means).
    Reduced features are named ``q1_pc*`` / ``q2_pc*``. Train and test
    partitions are merged with the same feature order; imputation runs
    independently per partition.
    """
    if rank_rule is None:
        rank_rule = RankRule()
    if cfg is None:
        cfg = ImputerConfig()

    f1, f2 = d1.features, d2.features
    shared = feature_intersection(f1, f2)
    q1 = feature_difference(f1, f2)
    q2 = feature_difference(f2, f1)

    model1, r1_train, r1_test = _reduce_block(d1, q1, rank_rule, "q1")
    model2, r2_train, r2_test = _reduce_block(d2, q2, rank_rule, "q2")

    def side(dataset: Dataset, reduced: DataMatrix | None) -> Dataset:
        parts = [select_features(dataset.X, shared)]
        if reduced is not None:
            parts.append(reduced)
        return Dataset(X=hstack(parts), y=dataset.y)

    train_sides = [side(d1.train, r1_train), side(d2.train, r2_train)]
    test_sides = [side(d1.test, r1_test), side(d2.test, r2_test)]

    union = feature_union([s.X.features for s in train_sides])
    merged_train = _stack_aligned(train_sides, union, cfg)
    merged_test = _stack_aligned(test_sides, union, cfg)

    # shared_features of the stacked sides is S itself; keep it explicit
    return MergedSplit(
        train=merged_train, test=merged_test, pca_q1=model1, pca_q2=model2
    )


def sequential_merge(
    datasets: Sequence[SplitDataset],
    rank_rule: RankRule | None = None,
    cfg: ImputerConfig | None = None,
) -> SequentialMergeResult:
    """Left fold of pairwise PCA merges: ((D1 + D2) + D3) + ...

    Each stage's fully observed output becomes the left operand of the
    next stage; per-stage reports are accumulated in order.
    """
    if len(datasets) < 2:
        raise ValueError("sequential_merge needs at least 2 datasets")
    train_reports: list[MergeReport] = []
    test_reports: list[MergeReport] = []

    current = datasets[0]
    merged: MergedSplit | None = None
    for nxt in datasets[1:]:
        merged = pca_comimp_merge(current, nxt, rank_rule=rank_rule, cfg=cfg)
        train_reports.append(merged.train.report)
        test_reports.append(merged.test.report)
        current = SplitDataset(train=merged.train.data, test=merged.test.data)

    assert merged is not None
    return SequentialMergeResult(
        train=merged.train,
        test=merged.test,
        stage_train_reports=tuple(train_reports),
        stage_test_reports=tuple(test_reports),
    )
