"""Benchmark harness: the regression simulation, MCAR corruption, merge
studies over bundled datasets, and the randomized checker for the
merged-SSE inequality.

Every study is reproducible from (config, master seed): repeat i draws
from a generator seeded by a hash of (master seed, i), and summaries are
reduced in repeat order regardless of execution order. The environment
variable ``COMIMP_THREADS`` caps how many repeats run concurrently
(default 1, sequential).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .data import (
    DataMatrix,
    Dataset,
    FeatureSet,
    LabelVector,
    NUMERIC,
    feature_difference,
    select_features,
    take_rows,
)
from .errors import ComimpError, StudyError
from .impute import ImputerConfig, impute
from .merge import SplitDataset, comimp_merge
from .models import (
    ClassifierFit,
    TrainConfig,
    accuracy,
    fit_linear_svm,
    fit_logistic,
    fit_ols,
    mse,
)

_SIGMA_DEFAULT = ((1.0, 0.5, 0.3), (0.5, 1.0, 0.4), (0.3, 0.4, 1.0))


def derive_seed(master: int, index: int) -> int:
    """Deterministic per-repeat seed from the master seed and index."""
    state = np.random.SeedSequence((master, index)).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _thread_cap() -> int:
    raw = os.environ.get("COMIMP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_repeats(fn: Callable[[int], object], n: int) -> list:
    """Run ``fn`` over range(n); results come back in index order."""
    threads = _thread_cap()
    if threads == 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


# ---------------------------------------------------------------------------
# regression simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimulationConfig:
    """Generator settings for the two-dataset regression simulation.

    Labels follow ``y = beta[0] + x @ beta[1:] + eps`` with features drawn
    from a seeded multivariate Gaussian (Cholesky-factored covariance).
    The first feature is then removed from dataset 1 and the second from
    dataset 2; dataset 2's remaining stored features carry additive
    measurement noise (``d2_feature_noise`` gives the variances for
    original features 2 and 3). Each dataset splits train:test by
    ``train_ratio`` (rows are i.i.d., so the contiguous split is itself
    random).
    """

    n1: int = 300
    n2: int = 200
    mu: tuple[float, ...] = (1.0, 2.0, 0.5)
    sigma: tuple[tuple[float, ...], ...] = _SIGMA_DEFAULT
    beta: tuple[float, ...] = (1.0, 1.0, 0.5, 1.0)
    noise_var: float = 0.2
    d2_feature_noise: tuple[float, float] = (0.05, 0.1)
    train_ratio: float = 0.7
    seed: int = 0

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        p = len(self.mu)
        if sigma.shape != (p, p):
            raise ValueError("sigma shape must match mu length")
        if not np.allclose(sigma, sigma.T):
            raise ValueError("sigma must be symmetric")
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as exc:
            raise ValueError("sigma must be positive definite") from exc
        if len(self.beta) != p + 1:
            raise ValueError("beta must have one intercept plus one slope per feature")
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")
        if any(v < 0 for v in self.d2_feature_noise):
            raise ValueError("feature noise variances must be >= 0")
        if not 0 < self.train_ratio < 1:
            raise ValueError("train_ratio must be in (0, 1)")
        if min(self.n1, self.n2) < 7:
            raise ValueError("need at least 7 samples per dataset")


def _split_rows(d: Dataset, train_ratio: float) -> SplitDataset:
    n_train = int(np.floor(d.n_rows * train_ratio + 0.5))
    idx = np.arange(d.n_rows)
    return SplitDataset(
        train=take_rows(d, idx[:n_train]), test=take_rows(d, idx[n_train:])
    )


def gen_regression_sim(cfg: SimulationConfig) -> tuple[SplitDataset, SplitDataset]:
    """Generate the two partially overlapping regression datasets.

    Draw order from the seeded generator is fixed: dataset 1 features,
    dataset 1 label noise, dataset 2 features, dataset 2 label noise,
    then dataset 2's two feature-noise columns.
    """
    rng = np.random.default_rng(cfg.seed)
    mu = np.asarray(cfg.mu)
    L = np.linalg.cholesky(np.asarray(cfg.sigma))
    beta = np.asarray(cfg.beta)
    names = FeatureSet(f"X{i + 1}" for i in range(len(mu)))

    def draw(n: int) -> tuple[np.ndarray, np.ndarray]:
        X = rng.standard_normal((n, len(mu))) @ L.T + mu
        eps = rng.standard_normal(n) * np.sqrt(cfg.noise_var)
        y = beta[0] + X @ beta[1:] + eps
        return X, y

    X1, y1 = draw(cfg.n1)
    X2, y2 = draw(cfg.n2)
    X2 = X2.copy()
    X2[:, 1] += rng.standard_normal(cfg.n2) * np.sqrt(cfg.d2_feature_noise[0])
    X2[:, 2] += rng.standard_normal(cfg.n2) * np.sqrt(cfg.d2_feature_noise[1])

    def dataset(X: np.ndarray, y: np.ndarray, drop: str) -> Dataset:
        full = DataMatrix(X, np.ones(X.shape, dtype=bool), names)
        kept = feature_difference(names, FeatureSet([drop]))
        return Dataset(
            X=select_features(full, kept),
            y=LabelVector(kind=NUMERIC, entries=y, name="Y"),
        )

    d1 = _split_rows(dataset(X1, y1, "X1"), cfg.train_ratio)
    d2 = _split_rows(dataset(X2, y2, "X2"), cfg.train_ratio)
    return d1, d2


# ---------------------------------------------------------------------------
# MCAR corruption
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McarConfig:
    """Missing-completely-at-random masking at a fixed cell rate."""

    rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.rate < 1:
            raise ValueError("rate must be in [0, 1)")


def apply_mcar(X: DataMatrix, cfg: McarConfig) -> DataMatrix:
    """Mask each observed cell independently with probability ``rate``.

    Columns are processed left to right; a draw that would leave a column
    with zero observed cells is re-drawn for that column, so every column
    keeps at least one observation. Deterministic per seed.
    """
    rng = np.random.default_rng(cfg.seed)
    mask = X.mask.copy()
    for j in range(X.n_cols):
        observed = X.mask[:, j]
        if cfg.rate == 0 or not observed.any():
            continue
        while True:
            drop = (rng.random(X.n_rows) < cfg.rate) & observed
            if not drop[observed].all():
                break
        mask[:, j] = observed & ~drop
    return DataMatrix(values=X.values, mask=mask, features=X.features)


# ---------------------------------------------------------------------------
# Monte Carlo summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SummaryRow:
    model: str
    partition: str
    mean: float
    variance: float


@dataclass(frozen=True)
class MonteCarloSummary:
    """Mean and variance of a metric per (model, test partition)."""

    metric: str
    rows: tuple[SummaryRow, ...]
    repeats: int
    master_seed: int
    repeat_seeds: tuple[int, ...]

    def row(self, model: str, partition: str) -> SummaryRow:
        for r in self.rows:
            if r.model == model and r.partition == partition:
                return r
        raise KeyError(f"no row for model={model!r} partition={partition!r}")

    def to_csv(self) -> str:
        lines = ["metric,model,partition,mean,variance,repeats,seed"]
        for r in self.rows:
            lines.append(
                f"{self.metric},{r.model},{r.partition},{r.mean!r},{r.variance!r},"
                f"{self.repeats},{self.master_seed}"
            )
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        header = f"{'model':<8} {'partition':<14} {'mean':>10} {'variance':>12}"
        lines = [
            f"{self.metric} over {self.repeats} repeats (seed {self.master_seed})",
            header,
            "-" * len(header),
        ]
        for r in self.rows:
            lines.append(
                f"{r.model:<8} {r.partition:<14} {r.mean:>10.4f} {r.variance:>12.6f}"
            )
        return "\n".join(lines)


def _summarize(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    var = float(values.var(ddof=1)) if values.size > 1 else 0.0
    return mean, var


# ---------------------------------------------------------------------------
# regression study
# ---------------------------------------------------------------------------


def run_regression_study(
    cfg: SimulationConfig, repeats: int, imputer: ImputerConfig
) -> MonteCarloSummary:
    """Monte Carlo comparison of per-dataset OLS fits against an OLS fit
    on the merged data.

    Per repeat: generate the two datasets, fit f1 and f2 on their own
    training sets, merge the training sets and the test sets (same
    imputer, imputation independent per partition), fit f on the merged
    training set, and record test MSE of f1, f2 and f on the d1, d2 and
    merged test sets respectively. A failing repeat aborts the study.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    seeds = tuple(derive_seed(cfg.seed, i) for i in range(repeats))

    def one(i: int) -> tuple[float, float, float]:
        try:
            d1, d2 = gen_regression_sim(replace(cfg, seed=seeds[i]))
            f1 = fit_ols(d1.train.X, d1.train.y)
            f2 = fit_ols(d2.train.X, d2.train.y)
            merged_train = comimp_merge([d1.train, d2.train], imputer)
            merged_test = comimp_merge([d1.test, d2.test], imputer)
            f = fit_ols(merged_train.data.X, merged_train.data.y)
            return (
                mse(f1, d1.test.X, d1.test.y),
                mse(f2, d2.test.X, d2.test.y),
                mse(f, merged_test.data.X, merged_test.data.y),
            )
        except ComimpError as exc:
            raise StudyError(i, str(exc)) from exc

    results = np.asarray(_map_repeats(one, repeats))
    rows = []
    for col, (model, partition) in enumerate(
        [("f1", "d1_test"), ("f2", "d2_test"), ("f", "merged_test")]
    ):
        mean, var = _summarize(results[:, col])
        rows.append(SummaryRow(model=model, partition=partition, mean=mean, variance=var))
    return MonteCarloSummary(
        metric="mse",
        rows=tuple(rows),
        repeats=repeats,
        master_seed=cfg.seed,
        repeat_seeds=seeds,
    )


# ---------------------------------------------------------------------------
# merge studies on real datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MergeStudyProtocol:
    """Everything a classification merge study needs besides the data.

    ``component_ratios`` set means the (single) source dataset is randomly
    partitioned into components per repeat; otherwise the inputs are used
    as the components directly. ``drop_columns`` lists 0-based feature
    indices to delete per component. When MCAR corruption leaves a
    component with missing cells, the per-component models impute it with
    ``component_imputer`` (defaults to ``imputer``); the merged model
    instead absorbs those cells in the merge's single imputation pass.
    ``standardize`` rescales every source column to mean 0 / variance 1
    up front; the SVD-based imputer needs that on data whose feature
    scales differ by orders of magnitude.
    """

    drop_columns: tuple[tuple[int, ...], ...]
    component_ratios: tuple[float, ...] | None = None
    train_ratio: float = 0.5
    mcar_rate: float = 0.0
    classifier: str = "logistic"
    train_config: TrainConfig | None = None
    repeats: int = 200
    imputer: ImputerConfig = field(
        default_factory=lambda: ImputerConfig(method="soft_impute")
    )
    component_imputer: ImputerConfig | None = None
    standardize: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.component_ratios is not None:
            if len(self.component_ratios) < 2:
                raise ValueError("need at least 2 component ratios")
            if abs(sum(self.component_ratios) - 1.0) > 1e-9:
                raise ValueError("component ratios must sum to 1")
            if len(self.drop_columns) != len(self.component_ratios):
                raise ValueError("one drop list per component required")
        if not 0 < self.train_ratio < 1:
            raise ValueError("train_ratio must be in (0, 1)")
        if not 0 <= self.mcar_rate < 1:
            raise ValueError("mcar_rate must be in [0, 1)")
        if self.classifier not in ("logistic", "svm"):
            raise ValueError("classifier must be 'logistic' or 'svm'")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


def _standardize_dataset(d: Dataset) -> Dataset:
    """Rescale every column to observed mean 0, variance 1 (zero-variance
    columns are left centered only)."""
    values = np.where(d.X.mask, d.X.values, np.nan)
    mu = np.nanmean(values, axis=0)
    sd = np.nanstd(values, axis=0)
    sd = np.where(sd == 0.0, 1.0, sd)
    scaled = (d.X.values - mu) / sd
    return Dataset(X=DataMatrix(scaled, d.X.mask, d.X.features), y=d.y)


def _partition_counts(n: int, ratios: Sequence[float]) -> list[int]:
    counts = [int(np.floor(r * n + 0.5)) for r in ratios[:-1]]
    counts.append(n - sum(counts))
    if min(counts) < 2:
        raise ValueError(f"partition of {n} rows by {ratios} leaves <2 rows")
    return counts


def _drop_features(d: Dataset, drop: Sequence[int]) -> Dataset:
    names = d.X.features.names
    for j in drop:
        if not 0 <= j < len(names):
            raise ValueError(f"drop index {j} out of range for {len(names)} features")
    kept = FeatureSet(n for i, n in enumerate(names) if i not in set(drop))
    return Dataset(X=select_features(d.X, kept), y=d.y)


def _assert_monotone_loss(fit: ClassifierFit, repeat: int) -> None:
    hist = np.asarray(fit.loss_history)
    slack = 1e-8 * (1.0 + np.abs(hist[:-1]))
    if np.any(np.diff(hist) > slack):
        raise StudyError(repeat, f"{fit.kind} loss increased; lower the learning rate")


def _fit_classifier(protocol: MergeStudyProtocol, X, y) -> ClassifierFit:
    if protocol.classifier == "logistic":
        return fit_logistic(X, y, protocol.train_config)
    return fit_linear_svm(X, y, protocol.train_config)


def _complete(d: Dataset, imputer: ImputerConfig) -> Dataset:
    if d.X.fully_observed:
        return d
    return Dataset(X=impute(d.X, imputer).matrix, y=d.y)


def run_merge_study(
    datasets: Sequence[Dataset], protocol: MergeStudyProtocol
) -> MonteCarloSummary:
    """Monte Carlo comparison of per-component classifiers against one
    classifier trained on the merged data.

    Per repeat: (optionally) partition the source into components, delete
    the protocol's columns, split each component train/test, apply MCAR
    corruption, merge the training sets and the test sets, fit the
    per-component models and the merged model, and record each model's
    accuracy on its own test partition plus the merged model's accuracy
    on the matching slice of the merged test set.
    """
    if protocol.component_ratios is not None:
        if len(datasets) != 1:
            raise ValueError("component_ratios partitions a single source dataset")
    elif len(datasets) < 2:
        raise ValueError("need >= 2 component datasets when not partitioning")

    r = (
        len(protocol.component_ratios)
        if protocol.component_ratios is not None
        else len(datasets)
    )
    if len(protocol.drop_columns) != r:
        raise ValueError(f"{r} components but {len(protocol.drop_columns)} drop lists")
    component_imputer = protocol.component_imputer or protocol.imputer
    if protocol.standardize:
        datasets = [_standardize_dataset(d) for d in datasets]
    seeds = tuple(derive_seed(protocol.seed, i) for i in range(protocol.repeats))

    def one(i: int) -> np.ndarray:
        try:
            rng = np.random.default_rng(seeds[i])
            if protocol.component_ratios is not None:
                source = datasets[0]
                perm = rng.permutation(source.n_rows)
                counts = _partition_counts(source.n_rows, protocol.component_ratios)
                components, start = [], 0
                for c in counts:
                    components.append(take_rows(source, perm[start : start + c]))
                    start += c
            else:
                components = list(datasets)

            components = [
                _drop_features(d, drop)
                for d, drop in zip(components, protocol.drop_columns)
            ]

            splits = []
            for d in components:
                perm = rng.permutation(d.n_rows)
                n_tr = int(np.floor(d.n_rows * protocol.train_ratio + 0.5))
                splits.append(
                    SplitDataset(
                        train=take_rows(d, perm[:n_tr]), test=take_rows(d, perm[n_tr:])
                    )
                )

            if protocol.mcar_rate > 0:
                corrupted = []
                for s in splits:
                    cfg_tr = McarConfig(protocol.mcar_rate, seed=int(rng.integers(2**63)))
                    cfg_ts = McarConfig(protocol.mcar_rate, seed=int(rng.integers(2**63)))
                    corrupted.append(
                        SplitDataset(
                            train=Dataset(apply_mcar(s.train.X, cfg_tr), s.train.y),
                            test=Dataset(apply_mcar(s.test.X, cfg_ts), s.test.y),
                        )
                    )
                splits = corrupted

            merged_train = comimp_merge([s.train for s in splits], protocol.imputer)
            merged_test = comimp_merge([s.test for s in splits], protocol.imputer)
            f = _fit_classifier(protocol, merged_train.data.X, merged_train.data.y)
            _assert_monotone_loss(f, i)

            out = []
            for idx, s in enumerate(splits):
                own_train = _complete(s.train, component_imputer)
                own_test = _complete(s.test, component_imputer)
                fi = _fit_classifier(protocol, own_train.X, own_train.y)
                _assert_monotone_loss(fi, i)
                out.append(accuracy(fi, own_test.X, own_test.y))

                lo, hi = merged_test.report.row_ranges[idx]
                rows = np.arange(lo, hi)
                slice_ds = take_rows(merged_test.data, rows)
                out.append(accuracy(f, slice_ds.X, slice_ds.y))
            return np.asarray(out)
        except StudyError:
            raise
        except (ComimpError, ValueError) as exc:
            raise StudyError(i, str(exc)) from exc

    results = np.vstack(_map_repeats(one, protocol.repeats))
    rows = []
    for idx in range(r):
        for col, model in ((2 * idx, f"f{idx + 1}"), (2 * idx + 1, "f")):
            mean, var = _summarize(results[:, col])
            rows.append(
                SummaryRow(
                    model=model, partition=f"d{idx + 1}_test", mean=mean, variance=var
                )
            )
    return MonteCarloSummary(
        metric="accuracy",
        rows=tuple(rows),
        repeats=protocol.repeats,
        master_seed=protocol.seed,
        repeat_seeds=seeds,
    )


# ---------------------------------------------------------------------------
# protocol presets for the bundled datasets
# ---------------------------------------------------------------------------


def seed_merge_protocol(**overrides) -> MergeStudyProtocol:
    """Seed dataset, two components (85:15), drop the first two features
    from component 1 and the last feature from component 2."""
    defaults = dict(
        drop_columns=((0, 1), (6,)),
        component_ratios=(0.85, 0.15),
        classifier="logistic",
        repeats=200,
    )
    defaults.update(overrides)
    return MergeStudyProtocol(**defaults)


def seed_failure_protocol(**overrides) -> MergeStudyProtocol:
    """Seed dataset variant that leaves a single overlapping feature:
    component 1 loses the first three features, component 2 the last
    three, so only the middle feature is shared."""
    defaults = dict(
        drop_columns=((0, 1, 2), (4, 5, 6)),
        component_ratios=(0.85, 0.15),
        classifier="logistic",
        repeats=200,
    )
    defaults.update(overrides)
    return MergeStudyProtocol(**defaults)


def wine_imputation_protocol(rate: float, **overrides) -> MergeStudyProtocol:
    """Wine dataset, two components (7:3), first two / last two features
    dropped, MCAR corruption at ``rate`` on every partition. Columns are
    standardized up front (wine feature scales span four orders of
    magnitude, which would starve the SVD imputer of the small columns)."""
    defaults = dict(
        drop_columns=((0, 1), (11, 12)),
        component_ratios=(0.7, 0.3),
        mcar_rate=rate,
        classifier="logistic",
        repeats=200,
        standardize=True,
    )
    defaults.update(overrides)
    return MergeStudyProtocol(**defaults)


def wine_three_way_protocol(**overrides) -> MergeStudyProtocol:
    """Wine dataset split into three equal components; component 1 loses
    its first feature, component 2 its last eight, component 3 features
    five and six."""
    defaults = dict(
        drop_columns=((0,), tuple(range(5, 13)), (4, 5)),
        component_ratios=(1 / 3, 1 / 3, 1 / 3),
        classifier="logistic",
        repeats=200,
    )
    defaults.update(overrides)
    return MergeStudyProtocol(**defaults)


# ---------------------------------------------------------------------------
# merged-SSE inequality checker
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremInstance:
    """One random instance of the two-design SSE comparison.

    ``u1`` is the single centered regressor of the first design; ``v1``
    and ``v2`` are the centered regressors of the second. Centering makes
    the mean-imputed merged design's filled column exactly zero on the
    first block.
    """

    u1: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        for name in ("u1", "v1", "v2"):
            col = np.asarray(getattr(self, name), dtype=float)
            if abs(col.mean()) > 1e-12:
                raise ValueError(f"{name} must be centered")


@dataclass(frozen=True)
class TheoremReport:
    trials: int
    violations: int
    max_violation: float
    redraws: int
    first_trial_sse: tuple[float, float, float]

    def to_text(self) -> str:
        return (
            f"trials={self.trials} violations={self.violations} "
            f"max_violation={self.max_violation:.3e} redraws={self.redraws}"
        )


def make_theorem_instance(rng: np.random.Generator, n: int, m: int) -> TheoremInstance:
    def centered(k: int) -> np.ndarray:
        x = rng.standard_normal(k)
        return x - x.mean()

    return TheoremInstance(
        u1=centered(n),
        v1=centered(m),
        v2=centered(m),
        y=rng.standard_normal(n),
        z=rng.standard_normal(m),
    )


def evaluate_theorem_instance(inst: TheoremInstance) -> tuple[float, float, float]:
    """Training SSEs of OLS fits on the merged design and the two
    component designs. The merged design stacks (u1, 0) over (v1, v2):
    the zero block is the mean-imputed value of the centered v2 column.
    """
    n, m = inst.u1.shape[0], inst.v1.shape[0]

    def ols_sse(columns: list[np.ndarray], labels: np.ndarray) -> float:
        X = DataMatrix(
            np.column_stack(columns),
            np.ones((labels.shape[0], len(columns)), dtype=bool),
            FeatureSet(f"c{i}" for i in range(len(columns))),
        )
        y = LabelVector(kind=NUMERIC, entries=labels, name="y")
        return fit_ols(X, y).sse_train

    sse_d1 = ols_sse([inst.u1], inst.y)
    sse_d2 = ols_sse([inst.v1, inst.v2], inst.z)
    merged_c1 = np.concatenate([inst.u1, inst.v1])
    merged_c2 = np.concatenate([np.zeros(n), inst.v2])
    sse_d = ols_sse([merged_c1, merged_c2], np.concatenate([inst.y, inst.z]))
    return sse_d, sse_d1, sse_d2


def check_theorem(
    trials: int,
    n_range: tuple[int, int] = (5, 50),
    m_range: tuple[int, int] = (5, 50),
    seed: int = 0,
) -> TheoremReport:
    """Randomly probe the inequality SSE_merged >= SSE_1 + SSE_2.

    A violation is counted when SSE_1 + SSE_2 exceeds SSE_merged by more
    than 1e-8 * (1 + SSE_merged). Rank-deficient draws are re-drawn and
    counted. Trial i uses its own derived seed, so results do not depend
    on execution order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n_range[0] < 3 or m_range[0] < 4:
        raise ValueError("need n >= 3 and m >= 4 for full-rank designs")

    def one(i: int) -> tuple[int, float, tuple[float, float, float], int]:
        rng = np.random.default_rng(derive_seed(seed, i))
        for attempt in range(100):
            n = int(rng.integers(n_range[0], n_range[1] + 1))
            m = int(rng.integers(m_range[0], m_range[1] + 1))
            inst = make_theorem_instance(rng, n, m)
            try:
                sse_d, sse_d1, sse_d2 = evaluate_theorem_instance(inst)
            except ComimpError:
                continue
            excess = (sse_d1 + sse_d2) - sse_d
            violated = int(excess > 1e-8 * (1.0 + sse_d))
            return violated, max(excess, 0.0), (sse_d, sse_d1, sse_d2), attempt
        raise StudyError(i, "100 consecutive rank-deficient draws")

    outcomes = _map_repeats(one, trials)
    return TheoremReport(
        trials=trials,
        violations=sum(o[0] for o in outcomes),
        max_violation=max(o[1] for o in outcomes),
        redraws=sum(o[3] for o in outcomes),
        first_trial_sse=outcomes[0][2],
    )
