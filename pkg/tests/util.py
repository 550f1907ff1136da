"""Shared test helpers: finite differences and small random instances."""

import numpy as np

from sdae_ivs.mlr import MlrModel
from sdae_ivs.numerics import make_rng


def central_diff(f, arr: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central finite differences of scalar f with respect to every entry."""
    grad = np.zeros_like(arr, dtype=np.float64)
    it = np.nditer(arr, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = arr[idx]
        arr[idx] = orig + step
        hi = f()
        arr[idx] = orig - step
        lo = f()
        arr[idx] = orig
        grad[idx] = (hi - lo) / (2.0 * step)
    return grad


def grads_close(analytic: np.ndarray, numeric: np.ndarray,
                rel_tol: float = 1e-5) -> bool:
    """Vector-relative agreement: ||a - n|| <= tol * (1 + ||n||)."""
    diff = float(np.linalg.norm(np.asarray(analytic) - np.asarray(numeric)))
    return diff <= rel_tol * (1.0 + float(np.linalg.norm(numeric)))


def random_mlr(seed: int, k: int, m: int, scale: float = 1.0) -> MlrModel:
    rng = make_rng(seed)
    return MlrModel(scale * rng.normal(size=(k, m)), scale * rng.normal(size=k))
