"""Multinomial logistic regression: softmax prediction, SGD training with
validation early stopping, and error reporting with Wald intervals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, VariableMask, apply_mask
from .errors import DataError, DimensionError
from .numerics import log_softmax, make_rng, softmax


@dataclass
class MlrModel:
    """Per-class weight vectors (K, M) and biases (K,)."""

    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[0],):
            raise DimensionError("weights must be (K, M) with K biases")
        if self.k < 2:
            raise DimensionError("need at least two classes")

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    """SGD hyper-parameters shared by the pre-classifier and the top layer.

    patience counts epochs without a validation improvement before stopping;
    l2 defaults to 0 because early stopping is the overfitting control.
    """

    learning_rate: float
    max_epochs: int
    patience: int
    seed: int
    minibatch_size: int = 1
    l2: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be > 0")
        if self.max_epochs < 0 or self.patience < 1 or self.minibatch_size < 1:
            raise DataError("epochs/patience/minibatch_size out of range")
        if self.l2 < 0:
            raise DataError("l2 must be >= 0")


@dataclass(frozen=True)
class ErrorReport:
    """Classification error rate with its 95% Wald interval halfwidth."""

    error_rate: float
    n: int
    ci95_halfwidth: float

    @classmethod
    def from_rate(cls, error_rate: float, n: int) -> "ErrorReport":
        return cls(error_rate, n, wald_halfwidth(error_rate, n))


def wald_halfwidth(p: float, n: int) -> float:
    """1.96 * sqrt(p(1-p)/n), the 95% normal-approximation halfwidth."""
    if n < 1:
        raise DataError("need n >= 1 for a confidence interval")
    return 1.96 * float(np.sqrt(p * (1.0 - p) / n))


def predict_proba(m: MlrModel, x: np.ndarray) -> np.ndarray:
    """Softmax of Wx + b for a single example."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.m,):
        raise DimensionError(f"expected input of width {m.m}, got {x.shape}")
    return softmax(m.weights @ x + m.biases)


def predict_labels(m: MlrModel, x: np.ndarray) -> np.ndarray:
    """Argmax class labels (1-based) for a matrix of examples; ties pick the
    lowest class index."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != m.m:
        raise DimensionError(f"expected inputs of width {m.m}, got {x.shape[1]}")
    logits = x @ m.weights.T + m.biases
    return np.argmax(logits, axis=1) + 1


def cross_entropy(m: MlrModel, x: np.ndarray, label: int) -> float:
    """Negative log posterior of the true class, computed in log space."""
    logp = log_softmax(m.weights @ np.asarray(x, dtype=np.float64) + m.biases)
    return -float(logp[label - 1])


def loss_and_grads(m: MlrModel, x: np.ndarray, label: int,
                   l2: float = 0.0) -> tuple[float, np.ndarray, np.ndarray]:
    """Cross-entropy and its analytic gradients for one example.

    This is the exact gradient the trainer steps along, so it is what the
    finite-difference oracle must match.
    """
    x = np.asarray(x, dtype=np.float64)
    logits = m.weights @ x + m.biases
    p = softmax(logits)
    loss = cross_entropy(m, x, label)
    g = p.copy()
    g[label - 1] -= 1.0
    grad_w = np.outer(g, x)
    grad_b = g
    if l2 > 0.0:
        loss += 0.5 * l2 * float(np.sum(m.weights * m.weights))
        grad_w = grad_w + l2 * m.weights
    return loss, grad_w, grad_b


def _batch_grads(weights, biases, xb, yb, l2):
    logits = xb @ weights.T + biases
    p = softmax(logits)
    p[np.arange(xb.shape[0]), yb - 1] -= 1.0
    grad_w = p.T @ xb / xb.shape[0]
    grad_b = p.mean(axis=0)
    if l2 > 0.0:
        grad_w += l2 * weights
    return grad_w, grad_b


def validation_error(weights, biases, x, labels) -> float:
    logits = x @ weights.T + biases
    return float(np.mean(np.argmax(logits, axis=1) + 1 != labels))


def train_mlr(train: Dataset, valid: Dataset, mask: VariableMask,
              cfg: TrainConfig, return_history: bool = False):
    """Fit an MLR on masked inputs by minibatch SGD with early stopping.

    Weights start at zero (the loss is convex, so the optimum does not
    depend on the start and zero keeps masked columns exactly zero). The
    returned model is the snapshot with the best validation error; ties go
    to the earlier epoch. Masked weight columns are frozen at zero: their
    gradient is identically zero because the inputs are zeroed, and the
    explicit freeze keeps float noise from ever accumulating there.
    """
    if train.n == 0:
        raise DataError("cannot train on an empty dataset")
    if valid.n == 0:
        raise DataError("early stopping needs a non-empty validation set")
    if train.num_classes != valid.num_classes or train.m != valid.m:
        raise DataError("train and validation sets disagree on M or K")
    if mask.m != train.m:
        raise DimensionError("mask length does not match the dataset width")

    k, m = train.num_classes, train.m
    x_train = apply_mask(train.x, mask)
    x_valid = apply_mask(valid.x, mask)
    keep = mask.bits

    weights = np.zeros((k, m))
    biases = np.zeros(k)
    rng = make_rng(cfg.seed)
    batch = cfg.minibatch_size

    best_err = validation_error(weights, biases, x_valid, valid.labels)
    best = (weights.copy(), biases.copy())
    history = [(0, best_err)]
    since_improvement = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(train.n)
        for lo in range(0, train.n, batch):
            idx = order[lo:lo + batch]
            gw, gb = _batch_grads(weights, biases, x_train[idx],
                                  train.labels[idx], cfg.l2)
            weights -= cfg.learning_rate * gw
            biases -= cfg.learning_rate * gb
            weights[:, ~keep] = 0.0

        err = validation_error(weights, biases, x_valid, valid.labels)
        history.append((epoch, err))
        if err < best_err:
            best_err = err
            best = (weights.copy(), biases.copy())
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement >= cfg.patience:
                break

    model = MlrModel(best[0], best[1])
    assert np.all(model.weights[:, ~keep] == 0.0)
    if return_history:
        return model, history
    return model


def evaluate(classify, d: Dataset) -> ErrorReport:
    """Error rate of a label predictor over a dataset, with Wald interval.

    classify maps an (N, M) matrix to N predicted labels in {1..K}.
    """
    if d.n == 0:
        raise DataError("cannot evaluate on an empty dataset")
    predicted = np.asarray(classify(d.x))
    if predicted.shape != (d.n,):
        raise DimensionError("predictor must return one label per example")
    error_rate = float(np.mean(predicted != d.labels))
    return ErrorReport.from_rate(error_rate, d.n)
