"""Importance-based variable selection.

A trained MLR induces one discriminant hyperplane per class pair; a
variable's influence on that pair is the magnitude of the matching unit
normal component. Importances are those magnitudes normalized per pair by
the largest one, and a variable's task importance is the max across pairs.
Variables whose task importance falls below a threshold are masked out, and
the train/score/drop loop repeats until a stop criterion fires.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, VariableMask
from .errors import DegenerateModelError, DimensionError, OverThresholdError
from .mlr import MlrModel, TrainConfig, train_mlr, validation_error
from .numerics import Rng


@dataclass
class ImportanceReport:
    """Per-variable task importances in [0, 1], plus per-pair detail."""

    importance: np.ndarray
    pairs: dict[tuple[int, int], np.ndarray] | None = None
    iteration: int = 0


@dataclass(frozen=True)
class IvsConfig:
    """Selection threshold, iteration cap, and the pre-classifier's trainer."""

    threshold: float
    max_iterations: int
    mlr: TrainConfig

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class IvsIteration:
    iteration: int
    kept: int
    validation_error: float
    report: ImportanceReport


@dataclass
class IvsResult:
    mask: VariableMask
    history: list[IvsIteration]


def normal_vector(m: MlrModel, i: int, j: int) -> np.ndarray:
    """Unit normal of the discriminant hyperplane between classes i and j.

    Biases shift the hyperplane but do not tilt it, so they never enter.
    Raises if the two classes share identical weights (no hyperplane).
    """
    if i == j:
        raise ValueError("need two distinct classes")
    diff = m.weights[i - 1] - m.weights[j - 1]
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise DegenerateModelError(f"classes {i} and {j} have identical weights")
    return diff / norm


def discriminant(m: MlrModel, i: int, j: int, x: np.ndarray) -> float:
    """Normalized signed distance of x from the (i, j) hyperplane.

    Linear in x, with gradient equal to the unit normal; the
    finite-difference oracle differentiates this.
    """
    diff = m.weights[i - 1] - m.weights[j - 1]
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise DegenerateModelError(f"classes {i} and {j} have identical weights")
    return float((diff @ np.asarray(x, dtype=np.float64)
                  + (m.biases[i - 1] - m.biases[j - 1])) / norm)


def pair_importance(v: np.ndarray) -> np.ndarray:
    """|v_d| scaled by the infinity norm; the largest component is exactly 1."""
    v = np.asarray(v, dtype=np.float64)
    mags = np.abs(v)
    top = mags.max()
    if top == 0.0:
        raise DegenerateModelError("zero normal vector cannot be scored")
    return mags / top


def task_importance(m: MlrModel, iteration: int = 0,
                    keep_pairs: bool = True) -> ImportanceReport:
    """Componentwise max of pair importances over all unordered class pairs.

    The normal of (j, i) is the negation of (i, j)'s, so i < j covers
    everything. Pairs with identical weights carry no hyperplane and are
    skipped; if every pair is degenerate there is nothing to score.
    """
    pairs: dict[tuple[int, int], np.ndarray] = {}
    importance = np.zeros(m.m)
    scored = False
    for i in range(1, m.k + 1):
        for j in range(i + 1, m.k + 1):
            try:
                s = pair_importance(normal_vector(m, i, j))
            except DegenerateModelError:
                continue
            scored = True
            pairs[(i, j)] = s
            importance = np.maximum(importance, s)
    if not scored:
        raise DegenerateModelError("every class pair is degenerate")
    return ImportanceReport(importance, pairs if keep_pairs else None, iteration)


def update_mask(importance: np.ndarray, threshold: float,
                prev: VariableMask) -> VariableMask:
    """Keep a variable iff it was kept before AND its importance clears the
    threshold (selection only ever shrinks)."""
    importance = np.asarray(importance, dtype=np.float64)
    if importance.shape != (prev.m,):
        raise DimensionError("importance vector and mask lengths differ")
    bits = prev.bits & (importance >= threshold)
    if not bits.any():
        raise OverThresholdError(
            f"threshold {threshold} drops every variable; lower it or stop"
        )
    return VariableMask(bits)


def run_ivs(train: Dataset, valid: Dataset, cfg: IvsConfig, rng: Rng) -> IvsResult:
    """Iterative selection: train a fresh pre-classifier on the masked data,
    score variables, shrink the mask, repeat.

    Stops when (a) the previous update left the mask unchanged, (b) the new
    pre-classifier's validation error exceeds the best seen so far, or
    (c) the iteration cap is reached. The returned mask is the one produced
    by the best-validation iteration, which makes stopping on (b) safe.
    """
    mask = VariableMask.all_ones(train.m)
    prev_mask: VariableMask | None = None
    best_err = np.inf
    best_mask = mask
    history: list[IvsIteration] = []

    for iteration in range(1, cfg.max_iterations + 1):
        mlr_cfg = replace(cfg.mlr, seed=int(rng.integers(0, 2**63)))
        model = train_mlr(train, valid, mask, mlr_cfg)
        err = validation_error(model.weights, model.biases, valid.x, valid.labels)
        report = task_importance(model, iteration)

        # Stop checks precede the update: (a) looks at what the previous
        # update changed, (b) at the error trend; a stopping iteration is
        # recorded but never shrinks the mask further.
        if (prev_mask is not None and mask == prev_mask) or err > best_err:
            history.append(IvsIteration(iteration, mask.popcount, err, report))
            break

        new_mask = update_mask(report.importance, cfg.threshold, mask)
        history.append(IvsIteration(iteration, new_mask.popcount, err, report))
        if err < best_err:
            best_err = err
            best_mask = new_mask
        prev_mask = mask
        mask = new_mask

    return IvsResult(best_mask, history)


def write_importance_csv(path, importance: np.ndarray) -> None:
    """Two-column CSV: variable index (1-based) and its task importance."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variable", "importance"])
        for d, value in enumerate(np.asarray(importance), start=1):
            writer.writerow([d, repr(float(value))])


def write_history_csv(path, history: list[IvsIteration]) -> None:
    """Per-iteration kept-variable counts and validation errors."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "kept", "validation_error"])
        for item in history:
            writer.writerow([item.iteration, item.kept,
                             repr(item.validation_error)])
