"""CSV ingestion and emission for the command-line layer.

Canonical file form: UTF-8, header row, no quoting, "." decimal point,
"\\n" line ends, missing cells written as the empty string. Numbers are
written in their shortest round-trip decimal form (integral floats drop
the trailing ".0"). Reading accepts any of the configured missing-cell
tokens (default: empty string and "NA").
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import CATEGORICAL, NUMERIC, DataMatrix, Dataset, FeatureSet, LabelVector
from .errors import CsvSchemaError
from .merge import MergeReport

DEFAULT_NA_TOKENS = ("", "NA")


def format_number(x: float) -> str:
    """Shortest decimal form that round-trips through float()."""
    x = float(x)
    if math.isfinite(x) and x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


@dataclass(frozen=True)
class Table:
    """One parsed CSV: a dataset plus carried-through id columns."""

    dataset: Dataset
    id_names: tuple[str, ...]
    id_rows: tuple[tuple[str, ...], ...]
    path: str


def read_table(
    path: str | Path,
    label: str,
    id_columns: tuple[str, ...] = (),
    na_tokens: tuple[str, ...] = DEFAULT_NA_TOKENS,
    label_kind: str | None = None,
) -> Table:
    """Parse a CSV into a Dataset.

    The header is required, names must be unique, and every row needs the
    header's arity. Columns named in ``id_columns`` are carried through as
    strings and excluded from the feature matrix. The label column must
    be present with no missing entries; its kind is inferred (numeric when
    every value parses as a float) unless ``label_kind`` forces it.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvSchemaError(f"{path}: empty file, header row required")
    header = rows[0]
    if any(h == "" for h in header):
        raise CsvSchemaError(f"{path}: header contains an empty column name")
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise CsvSchemaError(f"{path}: duplicate header names {dupes}")
    if label not in header:
        raise CsvSchemaError(f"{path}: label column {label!r} not in header")

    ids_present = tuple(c for c in id_columns if c in header)
    feature_names = [h for h in header if h != label and h not in ids_present]
    col_of = {h: i for i, h in enumerate(header)}
    na = set(na_tokens)

    body = rows[1:]
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise CsvSchemaError(
                f"{path}: line {r} has {len(row)} cells, header has {len(header)}"
            )

    n = len(body)
    values = np.full((n, len(feature_names)), np.nan)
    for j, name in enumerate(feature_names):
        c = col_of[name]
        for i, row in enumerate(body):
            token = row[c]
            if token in na:
                continue
            try:
                v = float(token)
            except ValueError:
                raise CsvSchemaError(
                    f"{path}: column {name!r} line {i + 2}: {token!r} is not numeric"
                ) from None
            if math.isnan(v):
                continue
            if math.isinf(v):
                raise CsvSchemaError(
                    f"{path}: column {name!r} line {i + 2}: non-finite value"
                )
            values[i, j] = v

    label_tokens = [row[col_of[label]] for row in body]
    missing_labels = [i + 2 for i, t in enumerate(label_tokens) if t in na]
    if missing_labels:
        raise CsvSchemaError(
            f"{path}: label column {label!r} has missing values at lines {missing_labels}"
        )

    kind = label_kind
    if kind is None:
        try:
            [float(t) for t in label_tokens]
            kind = NUMERIC
        except ValueError:
            kind = CATEGORICAL
    if kind == NUMERIC:
        y = LabelVector(kind=NUMERIC, entries=[float(t) for t in label_tokens], name=label)
    else:
        y = LabelVector(kind=CATEGORICAL, entries=label_tokens, name=label)

    X = DataMatrix.from_dense(values, FeatureSet(feature_names))
    id_rows = tuple(
        tuple(row[col_of[c]] for c in ids_present) for row in body
    )
    return Table(dataset=Dataset(X=X, y=y), id_names=ids_present, id_rows=id_rows, path=str(path))


def write_table(
    path: str | Path,
    dataset: Dataset,
    id_names: tuple[str, ...] = (),
    id_rows: tuple[tuple[str, ...], ...] | None = None,
) -> None:
    """Write a dataset in canonical form: ids, features, then the label."""
    if id_names and (id_rows is None or len(id_rows) != dataset.n_rows):
        raise ValueError("id_rows must be given for every row when id_names is set")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(id_names) + list(dataset.X.features) + [dataset.y.name])
        for i in range(dataset.n_rows):
            cells = list(id_rows[i]) if id_names else []
            for j in range(dataset.X.n_cols):
                if dataset.X.mask[i, j]:
                    cells.append(format_number(dataset.X.values[i, j]))
                else:
                    cells.append("")
            if dataset.y.kind == NUMERIC:
                cells.append(format_number(float(dataset.y.entries[i])))
            else:
                cells.append(str(dataset.y.entries[i]))
            writer.writerow(cells)


def report_to_dict(report: MergeReport, seed: int = 0) -> dict:
    return {
        "union_features": list(report.union_features),
        "row_ranges": [list(r) for r in report.row_ranges],
        "cells_created": report.cells_created,
        "cells_imputed": report.cells_imputed,
        "imputer": {
            "method": report.imputer.method,
            "k": report.imputer.k,
            "lambda": report.imputer.lam,
            "tol": report.imputer.tol,
            "max_iter": report.imputer.max_iter,
            "max_rank": report.imputer.max_rank,
        },
        "seed": seed,
    }


def write_report(path: str | Path, report: MergeReport, seed: int = 0) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report, seed), fh, indent=2)
        fh.write("\n")
