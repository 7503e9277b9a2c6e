"""Finite-difference verification of the hand-written backward passes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nets import Network


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_parameter: str
    n_checked: int
    input_rel_error: float

    def passed(self, tolerance: float) -> bool:
        return max(self.max_rel_error, self.input_rel_error) < tolerance


def _rel(a: np.ndarray, b: np.ndarray, floor: float) -> np.ndarray:
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def grad_check(
    net: Network,
    inputs: np.ndarray,
    seed: int = 0,
    h: float = 1e-5,
    floor: float = 1e-4,
) -> GradCheckReport:
    """Compare backprop against central differences for every parameter and input.

    The scalar objective is ``sum(u * net(inputs))`` with a random upstream
    ``u``; dropout stays off. Relative errors use ``max(|a|, |b|, floor)`` as
    denominator so that vanishing gradients do not dominate.
    """
    rng = np.random.default_rng(seed)
    inputs = np.asarray(inputs, dtype=np.float64)
    out = net.forward(inputs)
    upstream = rng.standard_normal(np.shape(out))

    def objective(x=inputs) -> float:
        return float(np.sum(upstream * net.forward(x)))

    net.zero_grad()
    net.forward(inputs)
    dx = net.backward(upstream)
    analytic = {k: g.copy() for k, g in net.params.grads.items()}

    worst, worst_name, count = 0.0, "", 0
    for name, value in net.params.values.items():
        numeric = np.empty_like(value)
        flat = value.reshape(-1)
        num_flat = numeric.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            up = objective()
            flat[j] = orig - h
            down = objective()
            flat[j] = orig
            num_flat[j] = (up - down) / (2 * h)
        err = float(_rel(analytic[name], numeric, floor).max())
        count += value.size
        if err > worst:
            worst, worst_name = err, name

    num_dx = np.empty_like(inputs)
    xin = inputs.copy()
    for j in range(xin.size):
        orig = xin.flat[j]
        xin.flat[j] = orig + h
        up = objective(xin)
        xin.flat[j] = orig - h
        down = objective(xin)
        xin.flat[j] = orig
        num_dx.flat[j] = (up - down) / (2 * h)
    input_err = float(_rel(np.reshape(dx, inputs.shape), num_dx, floor).max())
    return GradCheckReport(worst, worst_name, count, input_err)
