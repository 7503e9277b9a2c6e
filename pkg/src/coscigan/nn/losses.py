"""Losses on probabilities. Each returns (value, gradient w.r.t. ``pred``)."""
from __future__ import annotations

import numpy as np

from ..errors import ShapeError

CLAMP = 1e-7


def _check(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if target.ndim == 0:
        target = np.full_like(pred, float(target))
    if pred.shape != target.shape:
        raise ShapeError(f"pred {pred.shape} and target {target.shape} differ")
    if pred.size == 0:
        raise ShapeError("empty prediction vector")
    return pred, target


def bce_loss(pred, target) -> float:
    """Mean binary cross entropy, probabilities clamped to [1e-7, 1 - 1e-7]."""
    return bce(pred, target)[0]


def bce(pred, target) -> tuple[float, np.ndarray]:
    pred, target = _check(pred, target)
    p = np.clip(pred, CLAMP, 1.0 - CLAMP)
    value = -np.mean(target * np.log(p) + (1.0 - target) * np.log1p(-p))
    # (p - t) / (p (1 - p)) so that, chained through a sigmoid, the logit
    # gradient is (p - t) / n
    grad = (p - target) / (p * (1.0 - p)) / pred.size
    return float(value), grad


def mse(pred, target) -> tuple[float, np.ndarray]:
    pred, target = _check(pred, target)
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / pred.size


def log_one_minus(pred) -> tuple[float, np.ndarray]:
    """mean log(1 - p): the literal minimax generator objective (minimised)."""
    pred = np.asarray(pred, dtype=np.float64)
    p = np.clip(pred, CLAMP, 1.0 - CLAMP)
    return float(np.mean(np.log1p(-p))), -1.0 / (1.0 - p) / pred.size


CRITERIA = {"BCE": bce, "MSE": mse}
