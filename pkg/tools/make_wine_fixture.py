#!/usr/bin/env python3
"""Materialize the UCI Wine dataset (178x13, 3 classes) as a CSV fixture.

Maintainer tooling: requires scikit-learn, which bundles the exact UCI
values. The shipped package reads the committed CSV and never imports
scikit-learn. Classes are written as 1..3, matching the UCI file.

    python tools/make_wine_fixture.py

writes src/comimp/fixtures/wine.csv
"""

from pathlib import Path

from sklearn.datasets import load_wine

OUT = Path(__file__).resolve().parents[1] / "src" / "comimp" / "fixtures" / "wine.csv"


def fmt(x: float) -> str:
    return str(int(x)) if float(x) == int(x) else repr(float(x))


def main() -> None:
    bundle = load_wine()
    header = list(bundle.feature_names) + ["class"]
    lines = [",".join(header)]
    for row, target in zip(bundle.data, bundle.target):
        lines.append(",".join([fmt(v) for v in row] + [str(int(target) + 1)]))
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(bundle.data)} rows)")


if __name__ == "__main__":
    main()
