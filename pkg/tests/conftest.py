import numpy as np
import pytest

from comimp import CATEGORICAL, NUMERIC, DataMatrix, Dataset, FeatureSet, LabelVector


@pytest.fixture
def worked_example():
    """The two motivating tables: 4 people with height/weight, 3 with
    weight/calories-per-meal, blood-sugar labels."""
    d1 = Dataset(
        X=DataMatrix.from_dense(
            [[120, 80], [150, 70], [140, 80], [135, 85]], ["height", "weight"]
        ),
        y=LabelVector(NUMERIC, [80, 90, 85, 95], name="BSL"),
    )
    d2 = Dataset(
        X=DataMatrix.from_dense(
            [[90, 100], [85, 150], [92, 170]], ["weight", "calo/meal"]
        ),
        y=LabelVector(NUMERIC, [100, 95, 82], name="BSL"),
    )
    return d1, d2


def random_masked_matrix(rng, n=8, p=5, missing=0.3):
    values = rng.normal(size=(n, p))
    mask = rng.random((n, p)) > missing
    mask[rng.integers(n), :] = True  # keep every column imputable
    return DataMatrix(values, mask, FeatureSet(f"c{j}" for j in range(p)))


def tiny_classification(rng, n=40, p=3, classes=("a", "b")):
    X = rng.normal(size=(n, p))
    labels = [classes[i % len(classes)] for i in range(n)]
    shift = np.asarray([1.0 if lab == classes[0] else -1.0 for lab in labels])
    X[:, 0] += shift
    return Dataset(
        X=DataMatrix(X, np.ones(X.shape, bool), FeatureSet(f"x{j}" for j in range(p))),
        y=LabelVector(CATEGORICAL, labels),
    )
