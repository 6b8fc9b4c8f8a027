"""Loaders for the bundled benchmark datasets.

``wine.csv`` is the UCI Wine data (178 rows, 13 features, 3 classes).
For the 210x7 wheat-kernel data this repository ships a synthetic
surrogate (``seeds_synthetic.csv``) generated by ``tools/make_seed_surrogate.py``,
because the real file could not be fetched in the build environment. Drop
the real data into ``src/comimp/fixtures/seeds.csv`` (same header, class
column last) and the loader will prefer it.
"""

from __future__ import annotations

from pathlib import Path

from .csvio import read_table
from .data import Dataset

FIXTURE_DIR = Path(__file__).parent / "fixtures"


def seed_fixture_path() -> Path:
    real = FIXTURE_DIR / "seeds.csv"
    return real if real.exists() else FIXTURE_DIR / "seeds_synthetic.csv"


def load_seed() -> Dataset:
    """210x7 wheat-kernel dataset (or its synthetic surrogate), 3 classes."""
    table = read_table(seed_fixture_path(), label="class", label_kind="categorical")
    return table.dataset


def load_wine() -> Dataset:
    """UCI Wine: 178 rows, 13 features, 3 classes."""
    table = read_table(FIXTURE_DIR / "wine.csv", label="class", label_kind="categorical")
    return table.dataset
