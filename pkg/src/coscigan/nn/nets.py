"""Network families used by the GANs and the downstream classifier."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError, StateError
from .layers import LSTM, Dropout, LeakyReLU, Linear, Sigmoid
from .params import NetParams


@dataclass(frozen=True)
class LstmNetSpec:
    input_dim: int
    output_dim: int
    hidden_dim: int = 256
    num_layers: int = 1

    def __post_init__(self):
        if min(self.input_dim, self.output_dim, self.hidden_dim, self.num_layers) < 1:
            raise ValueError(f"all LSTM dimensions must be >= 1: {self}")


@dataclass(frozen=True)
class MlpDiscSpec:
    input_dim: int
    lld_widths: tuple[int, ...] = (256, 128, 64)
    leaky_slope: float = 0.1
    dropout_p: float = 0.3

    def __post_init__(self):
        if self.input_dim < 1 or not self.lld_widths:
            raise ValueError(f"invalid MLP discriminator spec: {self}")
        if any(b >= a for a, b in zip(self.lld_widths, self.lld_widths[1:])):
            raise ValueError("LLD widths must be strictly decreasing")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must be in [0, 1)")


class Network:
    """Common plumbing: parameters, call recording and the backward guard."""

    params: NetParams

    def __init__(self, seed: int):
        self.params = NetParams(init_seed=seed)
        self._recorded = False

    def _mark(self) -> None:
        self._recorded = True

    def _check_recorded(self) -> None:
        if not self._recorded:
            raise StateError(f"{type(self).__name__}: backward called before forward")

    def zero_grad(self) -> None:
        self.params.zero_grad()

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class _LstmStack:
    def __init__(self, params, prefix, input_dim, hidden_dim, num_layers, rng):
        self.layers = [
            LSTM(params, f"{prefix}{k}", input_dim if k == 0 else hidden_dim, hidden_dim, rng)
            for k in range(num_layers)
        ]

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dh, param_grads=True):
        for layer in reversed(self.layers):
            dh = layer.backward(dh, param_grads)
        return dh


class LstmGenerator(Network):
    """Noise -> LSTM -> final hidden state -> linear map to ``out_len`` values.

    ``noise_mode="sequence"`` feeds the noise vector as ``noise_len`` scalar
    timesteps; ``"vector"`` feeds it as one timestep of width ``noise_len``.
    """

    def __init__(
        self,
        noise_len: int,
        out_len: int,
        hidden_dim: int = 256,
        num_layers: int = 1,
        noise_mode: str = "sequence",
        seed: int = 0,
    ):
        super().__init__(seed)
        if noise_mode not in ("sequence", "vector"):
            raise ValueError(f"unknown noise_mode {noise_mode!r}")
        self.noise_len, self.out_len, self.noise_mode = noise_len, out_len, noise_mode
        self.spec = LstmNetSpec(
            input_dim=1 if noise_mode == "sequence" else noise_len,
            output_dim=out_len,
            hidden_dim=hidden_dim,
            num_layers=num_layers,
        )
        rng = np.random.default_rng(seed)
        self.lstm = _LstmStack(self.params, "lstm", self.spec.input_dim, hidden_dim, num_layers, rng)
        self.head = Linear(self.params, "linear", hidden_dim, out_len, rng)

    def forward(self, noise: np.ndarray, training: bool = False, rng=None) -> np.ndarray:
        noise = np.asarray(noise, dtype=np.float64)
        squeeze = noise.ndim == 1
        if squeeze:
            noise = noise[None]
        if noise.ndim != 2 or noise.shape[1] != self.noise_len:
            raise ShapeError(f"noise must be (batch, {self.noise_len}), got {noise.shape}")
        x = noise[:, :, None] if self.noise_mode == "sequence" else noise[:, None, :]
        hs = self.lstm.forward(x)
        self._T = hs.shape[1]
        out = self.head.forward(hs[:, -1])
        self._mark()
        return out[0] if squeeze else out

    def backward(self, dout: np.ndarray, param_grads: bool = True) -> np.ndarray:
        self._check_recorded()
        dout = np.atleast_2d(dout)
        dh_last = self.head.backward(dout, param_grads)
        dhs = np.zeros((dh_last.shape[0], self._T, dh_last.shape[1]))
        dhs[:, -1] = dh_last
        dx = self.lstm.backward(dhs, param_grads)
        return dx[:, :, 0] if self.noise_mode == "sequence" else dx[:, 0, :]


class LstmDiscriminator(Network):
    """Series -> LSTM -> final hidden -> linear -> sigmoid probability.

    Accepts (batch, time) for univariate input or (batch, time, features).
    Also serves as the downstream classifier with ``input_dim = n_channels``.
    """

    def __init__(self, input_dim: int = 1, hidden_dim: int = 256, num_layers: int = 1, seed: int = 0):
        super().__init__(seed)
        self.spec = LstmNetSpec(input_dim=input_dim, output_dim=1, hidden_dim=hidden_dim, num_layers=num_layers)
        rng = np.random.default_rng(seed)
        self.lstm = _LstmStack(self.params, "lstm", input_dim, hidden_dim, num_layers, rng)
        self.head = Linear(self.params, "linear", hidden_dim, 1, rng)
        self.sigmoid = Sigmoid()

    def forward(self, series: np.ndarray, training: bool = False, rng=None) -> np.ndarray:
        x = np.asarray(series, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None]
        self._univariate = x.ndim == 2
        if self._univariate:
            x = x[:, :, None]
        if x.ndim != 3 or x.shape[2] != self.spec.input_dim:
            raise ShapeError(
                f"expected (batch, time, {self.spec.input_dim}) input, got {np.shape(series)}"
            )
        hs = self.lstm.forward(x)
        self._T = hs.shape[1]
        p = self.sigmoid.forward(self.head.forward(hs[:, -1]))[:, 0]
        self._mark()
        return p[0] if squeeze else p

    def backward(self, dp: np.ndarray, param_grads: bool = True) -> np.ndarray:
        self._check_recorded()
        dz = self.sigmoid.backward(np.reshape(dp, (-1, 1)))
        dh_last = self.head.backward(dz, param_grads)
        dhs = np.zeros((dh_last.shape[0], self._T, dh_last.shape[1]))
        dhs[:, -1] = dh_last
        dx = self.lstm.backward(dhs, param_grads)
        return dx[:, :, 0] if self._univariate else dx


class MlpDiscriminator(Network):
    """Stack of Linear-LeakyReLU-Dropout blocks, then linear -> 1 -> sigmoid."""

    def __init__(self, spec: MlpDiscSpec, seed: int = 0):
        super().__init__(seed)
        self.spec = spec
        rng = np.random.default_rng(seed)
        self.blocks = []
        width = spec.input_dim
        for k, w in enumerate(spec.lld_widths):
            self.blocks.append(
                (
                    Linear(self.params, f"lld{k}.linear", width, w, rng),
                    LeakyReLU(spec.leaky_slope),
                    Dropout(spec.dropout_p),
                )
            )
            width = w
        self.head = Linear(self.params, "linear", width, 1, rng)
        self.sigmoid = Sigmoid()

    def forward(
        self, x: np.ndarray, training: bool = False, rng: np.random.Generator | None = None
    ) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None]
        if x.ndim != 2 or x.shape[1] != self.spec.input_dim:
            raise ShapeError(f"expected (batch, {self.spec.input_dim}) input, got {x.shape}")
        for lin, act, drop in self.blocks:
            x = drop.forward(act.forward(lin.forward(x)), training=training, rng=rng)
        p = self.sigmoid.forward(self.head.forward(x))[:, 0]
        self._mark()
        return p[0] if squeeze else p

    def backward(self, dp: np.ndarray, param_grads: bool = True) -> np.ndarray:
        self._check_recorded()
        d = self.head.backward(self.sigmoid.backward(np.reshape(dp, (-1, 1))), param_grads)
        for lin, act, drop in reversed(self.blocks):
            d = lin.backward(act.backward(drop.backward(d)), param_grads)
        return d


class MlpGenerator(Network):
    """Noise -> (Linear -> LeakyReLU) x k -> linear map to ``out_len``."""

    def __init__(
        self,
        noise_len: int,
        out_len: int,
        widths: tuple[int, ...] = (256, 256),
        leaky_slope: float = 0.1,
        seed: int = 0,
    ):
        super().__init__(seed)
        self.noise_len, self.out_len = noise_len, out_len
        rng = np.random.default_rng(seed)
        self.hidden = []
        width = noise_len
        for k, w in enumerate(widths):
            self.hidden.append((Linear(self.params, f"fc{k}", width, w, rng), LeakyReLU(leaky_slope)))
            width = w
        self.head = Linear(self.params, "linear", width, out_len, rng)

    def forward(self, noise: np.ndarray, training: bool = False, rng=None) -> np.ndarray:
        x = np.asarray(noise, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None]
        if x.shape[-1] != self.noise_len:
            raise ShapeError(f"noise must be (batch, {self.noise_len}), got {x.shape}")
        for lin, act in self.hidden:
            x = act.forward(lin.forward(x))
        out = self.head.forward(x)
        self._mark()
        return out[0] if squeeze else out

    def backward(self, dout: np.ndarray, param_grads: bool = True) -> np.ndarray:
        self._check_recorded()
        d = self.head.backward(np.atleast_2d(dout), param_grads)
        for lin, act in reversed(self.hidden):
            d = lin.backward(act.backward(d), param_grads)
        return d
