"""Linear models used by the benchmark studies: ordinary least squares
with its SSE accounting, plus deterministic gradient-descent logistic
regression and linear SVM classifiers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CATEGORICAL, NUMERIC, DataMatrix, LabelVector
from .errors import HasMissing, NonFinite, RankDeficient, SingleClass

# Relative tolerance on the normal matrix's singular values, below which
# the design is treated as singular.
_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class LinearRegressionFit:
    """OLS solution; ``coefficients[0]`` is the intercept."""

    coefficients: np.ndarray
    sse_train: float


def _design(X: DataMatrix) -> np.ndarray:
    if not X.fully_observed:
        raise HasMissing("regression design contains masked cells")
    return np.hstack([np.ones((X.n_rows, 1)), X.values])


def fit_ols(X: DataMatrix, y: LabelVector) -> LinearRegressionFit:
    """Solve the normal equations for an intercept-augmented design.

    Raises ``RankDeficient`` when the normal matrix is numerically
    singular (smallest singular value below 1e-10 times the largest,
    which includes the n < p+1 case).
    """
    if y.kind != NUMERIC:
        raise ValueError("fit_ols needs numeric labels")
    Z = _design(X)
    n, p1 = Z.shape
    if n < p1:
        raise RankDeficient(f"{n} rows cannot identify {p1} coefficients")
    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    # singular values of Z'Z are the squares of Z's
    if s[-1] ** 2 < _RANK_RTOL * s[0] ** 2:
        raise RankDeficient("normal matrix is numerically singular")
    coef = Vt.T @ ((U.T @ y.entries) / s)
    resid = y.entries - Z @ coef
    return LinearRegressionFit(coefficients=coef, sse_train=float(resid @ resid))


def sse(fit: LinearRegressionFit, X: DataMatrix, y: LabelVector) -> float:
    """Sum of squared residuals of ``fit`` on the given data."""
    resid = y.entries - _design(X) @ fit.coefficients
    return float(resid @ resid)


def mse(fit: LinearRegressionFit, X: DataMatrix, y: LabelVector) -> float:
    """Mean squared residual of ``fit`` on the given data."""
    return sse(fit, X, y) / X.n_rows


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent hyperparameters for the classifiers."""

    learning_rate: float
    epochs: int
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")


LOGISTIC_DEFAULTS = TrainConfig(learning_rate=0.5, epochs=400)
SVM_DEFAULTS = TrainConfig(learning_rate=0.05, epochs=400)


@dataclass(frozen=True)
class ClassifierFit:
    """Trained linear classifier with its standardization statistics.

    ``weights`` is (p, n_classes); prediction is the argmax of class
    scores with ties resolved to the lowest class index. ``loss_history``
    holds the objective at initialization and after every epoch.
    """

    kind: str
    weights: np.ndarray
    bias: np.ndarray
    classes: tuple[str, ...]
    feature_means: np.ndarray
    feature_stds: np.ndarray
    train_config: TrainConfig
    loss_history: tuple[float, ...]


def _class_setup(X: DataMatrix, y: LabelVector):
    if not X.fully_observed:
        raise HasMissing("classifier design contains masked cells")
    if y.kind != CATEGORICAL:
        raise ValueError("classifiers need categorical labels")
    classes = tuple(sorted(set(y.entries.tolist())))
    if len(classes) < 2:
        raise SingleClass(f"need at least 2 classes, got {classes}")
    mu = X.values.mean(axis=0)
    sd = X.values.std(axis=0)
    sd = np.where(sd == 0.0, 1.0, sd)
    Xs = (X.values - mu) / sd
    index = {c: i for i, c in enumerate(classes)}
    labels = np.asarray([index[c] for c in y.entries.tolist()])
    return Xs, labels, classes, mu, sd


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def fit_logistic(
    X: DataMatrix, y: LabelVector, cfg: TrainConfig | None = None
) -> ClassifierFit:
    """Multinomial logistic regression by full-batch gradient descent.

    Features are standardized internally (training statistics stored in
    the fit); weights start at zero, so the fit is deterministic. The
    cross-entropy objective carries an L2 penalty on the weights (not the
    biases).
    """
    if cfg is None:
        cfg = LOGISTIC_DEFAULTS
    Xs, labels, classes, mu, sd = _class_setup(X, y)
    n, p = Xs.shape
    C = len(classes)
    onehot = np.zeros((n, C))
    onehot[np.arange(n), labels] = 1.0

    W = np.zeros((p, C))
    b = np.zeros(C)

    def objective(P):
        ce = -np.log(np.maximum(P[np.arange(n), labels], 1e-300)).mean()
        return ce + 0.5 * cfg.l2 * float((W**2).sum())

    history = []
    for _ in range(cfg.epochs):
        P = _softmax(Xs @ W + b)
        history.append(objective(P))
        G = P - onehot
        W = W - cfg.learning_rate * (Xs.T @ G / n + cfg.l2 * W)
        b = b - cfg.learning_rate * G.mean(axis=0)
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise NonFinite("logistic training diverged; lower the learning rate")
    history.append(objective(_softmax(Xs @ W + b)))

    return ClassifierFit(
        kind="logistic",
        weights=W,
        bias=b,
        classes=classes,
        feature_means=mu,
        feature_stds=sd,
        train_config=cfg,
        loss_history=tuple(history),
    )


def fit_linear_svm(
    X: DataMatrix, y: LabelVector, cfg: TrainConfig | None = None
) -> ClassifierFit:
    """One-vs-rest linear SVM with squared hinge loss, trained by
    full-batch gradient descent under the same contract as the logistic
    fit (standardization inside, zero init, L2 on weights)."""
    if cfg is None:
        cfg = SVM_DEFAULTS
    Xs, labels, classes, mu, sd = _class_setup(X, y)
    n, p = Xs.shape
    C = len(classes)
    T = np.where(labels[:, None] == np.arange(C)[None, :], 1.0, -1.0)

    W = np.zeros((p, C))
    b = np.zeros(C)

    def forward():
        margins = np.maximum(1.0 - T * (Xs @ W + b), 0.0)
        loss = float((margins**2).mean(axis=0).sum()) + 0.5 * cfg.l2 * float(
            (W**2).sum()
        )
        return margins, loss

    history = []
    for _ in range(cfg.epochs):
        margins, loss = forward()
        history.append(loss)
        G = -2.0 / n * (T * margins)
        W = W - cfg.learning_rate * (Xs.T @ G + cfg.l2 * W)
        b = b - cfg.learning_rate * G.sum(axis=0)
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise NonFinite("SVM training diverged; lower the learning rate")
    history.append(forward()[1])

    return ClassifierFit(
        kind="linear_svm",
        weights=W,
        bias=b,
        classes=classes,
        feature_means=mu,
        feature_stds=sd,
        train_config=cfg,
        loss_history=tuple(history),
    )


def predict(fit: ClassifierFit, X: DataMatrix) -> np.ndarray:
    """Predicted class labels; score ties go to the lowest class index."""
    if not X.fully_observed:
        raise HasMissing("prediction input contains masked cells")
    Xs = (X.values - fit.feature_means) / fit.feature_stds
    scores = Xs @ fit.weights + fit.bias
    picked = np.argmax(scores, axis=1)
    classes = np.asarray(fit.classes)
    return classes[picked]


def accuracy(fit: ClassifierFit, X: DataMatrix, y: LabelVector) -> float:
    """Fraction of rows whose predicted class equals the label."""
    return float((predict(fit, X) == y.entries).mean())
