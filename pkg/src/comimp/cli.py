"""Command-line front end.

Subcommands: ``merge`` (union-align-stack-impute over CSV files),
``pca-merge`` (the PCA variant over train/test pairs), ``bench``
(Monte Carlo studies), ``check-theorem`` (merged-SSE inequality probe).

Exit codes: 0 success; 1 inequality violation from check-theorem; 2 CSV
or schema errors; 3 a column with no observed cell; 4 missing values
inside a PCA block; 5 a failed benchmark repeat; 64 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import bench, csvio
from .data import Dataset
from .errors import (
    AllMissingColumn,
    CsvSchemaError,
    HasMissing,
    LabelKindMismatch,
    SchemaMismatch,
    StudyError,
    UnknownTarget,
)
from .fixtures import load_seed, load_wine
from .impute import ImputerConfig
from .merge import SplitDataset, comimp_merge, pca_comimp_merge
from .models import LOGISTIC_DEFAULTS, SVM_DEFAULTS, TrainConfig
from .pca import RankRule

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_SCHEMA = 2
EXIT_ALL_MISSING = 3
EXIT_PCA_MISSING = 4
EXIT_BENCH = 5
EXIT_USAGE = 64

_SCHEMA_ERRORS = (CsvSchemaError, SchemaMismatch, LabelKindMismatch, UnknownTarget)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse hook
        raise _UsageError(message)


def _add_imputer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--imputer", choices=("mean", "knn", "soft"), default="mean")
    parser.add_argument("--k", type=int, default=5, help="kNN donor count")
    parser.add_argument("--lambda", dest="lam", default="auto",
                        help="soft-impute shrinkage (number or 'auto')")
    parser.add_argument("--tol", type=float, default=1e-5)
    parser.add_argument("--max-iter", type=int, default=300)
    parser.add_argument("--max-rank", default="full",
                        help="soft-impute SVD truncation (integer or 'full')")


def _imputer_from_args(args) -> ImputerConfig:
    method = {"mean": "mean", "knn": "knn", "soft": "soft_impute"}[args.imputer]
    lam = args.lam if args.lam == "auto" else float(args.lam)
    max_rank = args.max_rank if args.max_rank == "full" else int(args.max_rank)
    return ImputerConfig(
        method=method, k=args.k, lam=lam, tol=args.tol,
        max_iter=args.max_iter, max_rank=max_rank,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="comimp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_merge = sub.add_parser("merge", help="merge >=2 CSV files vertically")
    p_merge.add_argument("inputs", nargs="+", help="input CSV paths (>= 2)")
    p_merge.add_argument("--label", required=True, help="label column name")
    p_merge.add_argument("--output", required=True, help="merged CSV path")
    p_merge.add_argument("--id-columns", default="",
                         help="comma-separated id columns carried through unimputed")
    p_merge.add_argument("--na-token", action="append", default=None,
                         help="missing-cell token (repeatable; default: '' and 'NA')")
    p_merge.add_argument("--seed", type=int, default=0)
    _add_imputer_flags(p_merge)

    p_pca = sub.add_parser("pca-merge", help="PCA-reduce exclusive blocks, then merge")
    p_pca.add_argument("--train1", required=True)
    p_pca.add_argument("--test1", required=True)
    p_pca.add_argument("--train2", required=True)
    p_pca.add_argument("--test2", required=True)
    p_pca.add_argument("--label", required=True)
    p_pca.add_argument("--output-prefix", required=True)
    group = p_pca.add_mutually_exclusive_group()
    group.add_argument("--components", type=int, default=None)
    group.add_argument("--var-explained", type=float, default=None)
    p_pca.add_argument("--seed", type=int, default=0)
    _add_imputer_flags(p_pca)

    p_bench = sub.add_parser("bench", help="Monte Carlo studies")
    bench_sub = p_bench.add_subparsers(dest="bench_command", required=True)
    for name in ("regression-sim", "merge-study", "imputation-study"):
        b = bench_sub.add_parser(name)
        b.add_argument("--repeats", type=int, default=None)
        b.add_argument("--seed", type=int, default=None,
                       help="master seed (default 0; a config 'seed' key also counts)")
        b.add_argument("--config", default=None, help="key = value config file")
        b.add_argument("--output", default=None, help="summary CSV path")

    p_thm = sub.add_parser("check-theorem", help="probe SSE_merged >= SSE_1 + SSE_2")
    p_thm.add_argument("--trials", type=int, default=10000)
    p_thm.add_argument("--seed", type=int, default=0)

    return parser


# ---------------------------------------------------------------------------
# merge
# ---------------------------------------------------------------------------


def _cmd_merge(args) -> int:
    if len(args.inputs) < 2:
        raise _UsageError("merge needs at least 2 input files")
    na_tokens = tuple(args.na_token) if args.na_token else csvio.DEFAULT_NA_TOKENS
    id_columns = tuple(c for c in args.id_columns.split(",") if c)
    tables = [
        csvio.read_table(p, label=args.label, id_columns=id_columns, na_tokens=na_tokens)
        for p in args.inputs
    ]
    merged = comimp_merge([t.dataset for t in tables], _imputer_from_args(args))

    id_names: list[str] = []
    for t in tables:
        for name in t.id_names:
            if name not in id_names:
                id_names.append(name)
    id_rows: list[tuple[str, ...]] = []
    for t in tables:
        have = {n: i for i, n in enumerate(t.id_names)}
        for row in t.id_rows:
            id_rows.append(tuple(row[have[n]] if n in have else "NA" for n in id_names))

    csvio.write_table(args.output, merged.data, tuple(id_names), tuple(id_rows))
    report_path = f"{args.output}.report.json"
    csvio.write_report(report_path, merged.report, seed=args.seed)
    print(f"merged {len(tables)} files -> {args.output} (report: {report_path})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# pca-merge
# ---------------------------------------------------------------------------


def _pca_block_summary(name: str, model, block) -> list[list]:
    """Per-component rows plus the training-block reconstruction check
    (mean squared reconstruction error, normalized by n-1, must equal the
    discarded variance)."""
    from .pca import pca_project, pca_reconstruct

    centered = block.values - model.mean
    total = float((centered**2).sum()) / (block.n_rows - 1)
    discarded = total - float(model.eigenvalues.sum())
    back = pca_reconstruct(model, pca_project(model, block))
    recon = float(((block.values - back.values) ** 2).sum()) / (block.n_rows - 1)
    check = "pass" if abs(recon - discarded) <= 1e-8 * (1.0 + abs(discarded)) else "fail"

    rows = []
    for j in range(model.n_components):
        rows.append([
            name, j + 1,
            repr(float(model.eigenvalues[j])),
            repr(float(model.explained_variance_ratio[j])),
            repr(recon), repr(discarded), check,
        ])
    return rows


def _cmd_pca_merge(args) -> int:
    def read_pair(train_path, test_path) -> SplitDataset:
        train = csvio.read_table(train_path, label=args.label).dataset
        test = csvio.read_table(test_path, label=args.label).dataset
        return SplitDataset(train=train, test=test)

    d1 = read_pair(args.train1, args.test1)
    d2 = read_pair(args.train2, args.test2)

    if args.components is not None:
        rule = RankRule.fixed(args.components)
    elif args.var_explained is not None:
        rule = RankRule.variance(args.var_explained)
    else:
        rule = RankRule()

    merged = pca_comimp_merge(d1, d2, rank_rule=rule, cfg=_imputer_from_args(args))

    from .data import feature_difference, select_features

    summary_rows: list[list] = []
    for name, model, split, other in (
        ("q1", merged.pca_q1, d1, d2),
        ("q2", merged.pca_q2, d2, d1),
    ):
        if model is None:
            continue
        block_features = feature_difference(split.features, other.features)
        block = select_features(split.train.X, block_features)
        summary_rows.extend(_pca_block_summary(name, model, block))

    prefix = args.output_prefix
    csvio.write_table(f"{prefix}_train.csv", merged.train.data)
    csvio.write_table(f"{prefix}_test.csv", merged.test.data)
    with open(f"{prefix}_report.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "train": csvio.report_to_dict(merged.train.report, seed=args.seed),
                "test": csvio.report_to_dict(merged.test.report, seed=args.seed),
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    with open(f"{prefix}_pca_summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([
            "block", "component", "eigenvalue", "explained_variance_ratio",
            "block_mean_sq_reconstruction_error", "block_discarded_variance",
            "reconstruction_check",
        ])
        writer.writerows(summary_rows)
    print(f"wrote {prefix}_train.csv {prefix}_test.csv {prefix}_report.json "
          f"{prefix}_pca_summary.csv")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _parse_config_file(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"{path}: line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _cfg_imputer(cfg: dict[str, str], default_method: str = "soft_impute") -> ImputerConfig:
    method = {"mean": "mean", "knn": "knn", "soft": "soft_impute"}.get(
        cfg.get("imputer", ""), default_method
    )
    lam = cfg.get("lambda", "auto")
    return ImputerConfig(
        method=method,
        k=int(cfg.get("k", 5)),
        lam=lam if lam == "auto" else float(lam),
        tol=float(cfg.get("tol", 1e-5)),
        max_iter=int(cfg.get("max_iter", 300)),
        max_rank=cfg.get("max_rank", "full")
        if cfg.get("max_rank", "full") == "full"
        else int(cfg["max_rank"]),
    )


def _cfg_train(cfg: dict[str, str], classifier: str) -> TrainConfig | None:
    keys = ("learning_rate", "epochs", "l2")
    if not any(k in cfg for k in keys):
        return None
    base = LOGISTIC_DEFAULTS if classifier == "logistic" else SVM_DEFAULTS
    return TrainConfig(
        learning_rate=float(cfg.get("learning_rate", base.learning_rate)),
        epochs=int(cfg.get("epochs", base.epochs)),
        l2=float(cfg.get("l2", base.l2)),
    )


def _cfg_drops(text: str) -> tuple[tuple[int, ...], ...]:
    blocks = []
    for part in text.split("|"):
        part = part.strip()
        if part in ("", "-"):
            blocks.append(())
        else:
            blocks.append(tuple(int(t) for t in part.split(",")))
    return tuple(blocks)


def _cfg_dataset(cfg: dict[str, str]) -> list[Dataset]:
    name = cfg.get("dataset", "seed")
    if name == "seed":
        return [load_seed()]
    if name == "wine":
        return [load_wine()]
    label = cfg.get("label")
    if label is None:
        raise _UsageError("config key 'label' is required for a CSV dataset path")
    table = csvio.read_table(name, label=label, label_kind=cfg.get("label_kind"))
    return [table.dataset]


def _write_summary(summary: bench.MonteCarloSummary, path: str) -> None:
    Path(path).write_text(summary.to_csv(), encoding="utf-8")
    print(summary.to_table())
    print(f"summary csv: {path}")


def _cmd_bench(args) -> int:
    cfg = _parse_config_file(args.config) if args.config else {}
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))

    if args.bench_command == "regression-sim":
        sim = bench.SimulationConfig(
            n1=int(cfg.get("n1", 300)),
            n2=int(cfg.get("n2", 200)),
            noise_var=float(cfg.get("noise_var", 0.2)),
            train_ratio=float(cfg.get("train_ratio", 0.7)),
            seed=seed,
        )
        repeats = args.repeats or int(cfg.get("repeats", 500))
        summary = bench.run_regression_study(sim, repeats, _cfg_imputer(cfg))
        _write_summary(summary, args.output or "regression_sim_summary.csv")
        return EXIT_OK

    if args.bench_command == "merge-study":
        protocol = bench.seed_merge_protocol(seed=seed)
        default_dataset = "seed"
    else:
        protocol = bench.wine_imputation_protocol(
            rate=float(cfg.get("mcar_rate", 0.8)), seed=seed
        )
        default_dataset = "wine"
    cfg.setdefault("dataset", default_dataset)

    overrides: dict = {}
    if "drops" in cfg:
        overrides["drop_columns"] = _cfg_drops(cfg["drops"])
    if "ratios" in cfg:
        text = cfg["ratios"]
        overrides["component_ratios"] = (
            None if text == "none" else tuple(float(t) for t in text.split(","))
        )
    if "train_ratio" in cfg:
        overrides["train_ratio"] = float(cfg["train_ratio"])
    if "mcar_rate" in cfg:
        overrides["mcar_rate"] = float(cfg["mcar_rate"])
    if "classifier" in cfg:
        overrides["classifier"] = cfg["classifier"]
    if "repeats" in cfg:
        overrides["repeats"] = int(cfg["repeats"])
    if args.repeats:
        overrides["repeats"] = args.repeats
    if "imputer" in cfg or "lambda" in cfg or "k" in cfg:
        overrides["imputer"] = _cfg_imputer(cfg)
    classifier = overrides.get("classifier", protocol.classifier)
    train_cfg = _cfg_train(cfg, classifier)
    if train_cfg is not None:
        overrides["train_config"] = train_cfg
    protocol = replace(protocol, **overrides)

    summary = bench.run_merge_study(_cfg_dataset(cfg), protocol)
    default_name = f"{args.bench_command.replace('-', '_')}_summary.csv"
    _write_summary(summary, args.output or default_name)
    return EXIT_OK


# ---------------------------------------------------------------------------
# check-theorem
# ---------------------------------------------------------------------------


def _cmd_check_theorem(args) -> int:
    if args.trials < 1:
        raise _UsageError("--trials must be >= 1")
    report = bench.check_theorem(args.trials, seed=args.seed)
    print(report.to_text())
    if args.trials == 1:
        sse_d, sse_d1, sse_d2 = report.first_trial_sse
        print(f"sse_d={sse_d!r} sse_d1={sse_d1!r} sse_d2={sse_d2!r}")
    return EXIT_OK if report.violations == 0 else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "merge":
            return _cmd_merge(args)
        if args.command == "pca-merge":
            return _cmd_pca_merge(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_check_theorem(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _SCHEMA_ERRORS as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except AllMissingColumn as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALL_MISSING
    except HasMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PCA_MISSING
    except StudyError as exc:
        print(f"bench error: {exc}", file=sys.stderr)
        return EXIT_BENCH


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
