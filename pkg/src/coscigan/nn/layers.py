"""Layers with explicit forward/backward passes.

Every layer keeps the activations of its most recent forward call and
accumulates parameter gradients into the owning :class:`NetParams` on
``backward``. Input gradients are returned.
"""
from __future__ import annotations

import numpy as np

from ..errors import ShapeError, StateError
from .params import NetParams


def sigmoid(x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Logistic function via tanh; stable for large |x| and fast on strided views."""
    out = np.tanh(0.5 * x, out=out)
    out *= 0.5
    out += 0.5
    return out


def _uniform(rng: np.random.Generator, bound: float, shape) -> np.ndarray:
    return rng.uniform(-bound, bound, size=shape)


class Layer:
    def _require_forward(self, attr: str = "_x") -> None:
        if getattr(self, attr, None) is None:
            raise StateError(f"{type(self).__name__}.backward called before forward")


class Linear(Layer):
    def __init__(
        self,
        params: NetParams,
        name: str,
        n_in: int,
        n_out: int,
        rng: np.random.Generator,
    ):
        self.params = params
        self.n_in, self.n_out = n_in, n_out
        self.w_key, self.b_key = f"{name}.weight", f"{name}.bias"
        bound = 1.0 / np.sqrt(n_in)
        params.add(self.w_key, _uniform(rng, bound, (n_in, n_out)))
        params.add(self.b_key, _uniform(rng, bound, (n_out,)))
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.n_in:
            raise ShapeError(f"Linear expects last dim {self.n_in}, got {x.shape[-1]}")
        self._x = x
        return x @ self.params[self.w_key] + self.params[self.b_key]

    def backward(self, dy: np.ndarray, param_grads: bool = True) -> np.ndarray:
        self._require_forward()
        if param_grads:
            x2 = self._x.reshape(-1, self.n_in)
            dy2 = dy.reshape(-1, self.n_out)
            self.params.grads[self.w_key] += x2.T @ dy2
            self.params.grads[self.b_key] += dy2.sum(axis=0)
        return dy @ self.params[self.w_key].T


class LeakyReLU(Layer):
    def __init__(self, slope: float = 0.1):
        self.slope = slope
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return np.where(x > 0, x, self.slope * x)

    def backward(self, dy: np.ndarray, param_grads: bool = True) -> np.ndarray:
        self._require_forward()
        return np.where(self._x > 0, dy, self.slope * dy)


class Dropout(Layer):
    """Inverted dropout: kept units are scaled by 1/(1-p) while training."""

    def __init__(self, p: float):
        if not 0.0 <= p < 1.0:
            raise ValueError("dropout probability must be in [0, 1)")
        self.p = p
        self._mask = None
        self._x = None

    def forward(
        self, x: np.ndarray, training: bool = False, rng: np.random.Generator | None = None
    ) -> np.ndarray:
        self._x = x
        if not training or self.p == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("training-mode dropout needs an rng")
        self._mask = (rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * self._mask

    def backward(self, dy: np.ndarray, param_grads: bool = True) -> np.ndarray:
        self._require_forward()
        return dy if self._mask is None else dy * self._mask


class Sigmoid(Layer):
    def __init__(self):
        self._y = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._y = sigmoid(x)
        return self._y

    def backward(self, dy: np.ndarray, param_grads: bool = True) -> np.ndarray:
        self._require_forward("_y")
        return dy * self._y * (1.0 - self._y)


class LSTM(Layer):
    """Single-layer batch-first LSTM, zero initial state.

    Gate blocks along the last weight axis are ordered (input, forget,
    output, cell candidate) so the three sigmoid gates share one call.
    Weights are uniform in +-1/sqrt(hidden), the usual recurrent convention.
    """

    def __init__(
        self,
        params: NetParams,
        name: str,
        input_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
    ):
        self.params = params
        self.input_dim, self.hidden_dim = input_dim, hidden_dim
        self.wx_key = f"{name}.weight_ih"
        self.wh_key = f"{name}.weight_hh"
        self.b_key = f"{name}.bias"
        bound = 1.0 / np.sqrt(hidden_dim)
        h4 = 4 * hidden_dim
        params.add(self.wx_key, _uniform(rng, bound, (input_dim, h4)))
        params.add(self.wh_key, _uniform(rng, bound, (hidden_dim, h4)))
        params.add(self.b_key, _uniform(rng, bound, (h4,)))
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        """``x`` is (batch, time, input_dim); returns hidden states (batch, time, hidden)."""
        if x.ndim != 3 or x.shape[2] != self.input_dim:
            raise ShapeError(
                f"LSTM expects (batch, time, {self.input_dim}), got {x.shape}"
            )
        B, T, _ = x.shape
        H = self.hidden_dim
        wh = self.params[self.wh_key]
        # time-major buffers keep every per-step slice contiguous
        acts = np.ascontiguousarray(x.transpose(1, 0, 2)) @ self.params[self.wx_key]
        acts += self.params[self.b_key]
        cs = np.empty((T, B, H))
        tcs = np.empty((T, B, H))
        hs = np.empty((T, B, H))
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        for t in range(T):
            a = acts[t]
            a += h @ wh
            sigmoid(a[:, : 3 * H], out=a[:, : 3 * H])
            np.tanh(a[:, 3 * H :], out=a[:, 3 * H :])
            c = a[:, H : 2 * H] * c
            c += a[:, :H] * a[:, 3 * H :]
            cs[t] = c
            tc = np.tanh(c, out=tcs[t])
            h = np.multiply(a[:, 2 * H : 3 * H], tc, out=hs[t])
        self._x, self._acts, self._cs, self._tcs, self._hs = x, acts, cs, tcs, hs
        return hs.transpose(1, 0, 2)

    def backward(self, dhs: np.ndarray, param_grads: bool = True) -> np.ndarray:
        """``dhs`` is the gradient w.r.t. every hidden state (zeros where unused)."""
        self._require_forward()
        x, acts, cs, tcs, hs = self._x, self._acts, self._cs, self._tcs, self._hs
        T, B, H = hs.shape
        dhs = dhs.transpose(1, 0, 2)
        wh_t = np.ascontiguousarray(self.params[self.wh_key].T)
        dxg = np.empty((T, B, 4 * H))
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        zeros = np.zeros((B, H))
        for t in range(T - 1, -1, -1):
            act = acts[t]
            i = act[:, :H]
            f = act[:, H : 2 * H]
            o = act[:, 2 * H : 3 * H]
            g = act[:, 3 * H :]
            tc = tcs[t]
            c_prev = cs[t - 1] if t > 0 else zeros
            dh = dhs[t] + dh_next
            dc = dh * o * (1.0 - tc * tc)
            dc += dc_next
            da = dxg[t]
            da[:, :H] = dc * g * i * (1.0 - i)
            da[:, H : 2 * H] = dc * c_prev * f * (1.0 - f)
            da[:, 2 * H : 3 * H] = dh * tc * o * (1.0 - o)
            da[:, 3 * H :] = dc * i * (1.0 - g * g)
            dc_next = dc * f
            dh_next = da @ wh_t
        flat_da = dxg.reshape(-1, 4 * H)
        if param_grads:
            h_prev = np.concatenate([np.zeros((1, B, H)), hs[:-1]], axis=0)
            grads = self.params.grads
            grads[self.wx_key] += np.ascontiguousarray(x.transpose(1, 0, 2)).reshape(-1, self.input_dim).T @ flat_da
            grads[self.wh_key] += h_prev.reshape(-1, H).T @ flat_da
            grads[self.b_key] += flat_da.sum(axis=0)
        return (dxg @ self.params[self.wx_key].T).transpose(1, 0, 2)
