from __future__ import annotations

import numpy as np

from ..errors import NumericError, ShapeError


class NetParams:
    """Named parameter arrays for one network with a matching gradient buffer.

    Layers look arrays up by name on every call, so replacing ``values[name]``
    in place (checkpoint loading, finite differences) is picked up immediately.
    """

    def __init__(self, init_seed: int | None = None):
        self.init_seed = init_seed
        self.values: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def add(self, name: str, value: np.ndarray) -> None:
        if name in self.values:
            raise KeyError(f"duplicate parameter {name!r}")
        value = np.asarray(value, dtype=np.float64)
        self.values[name] = value
        self.grads[name] = np.zeros_like(value)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def size(self) -> int:
        return sum(v.size for v in self.values.values())

    def zero_grad(self) -> None:
        for g in self.grads.values():
            g.fill(0.0)

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.values.values()])

    def flat_grad(self) -> np.ndarray:
        return np.concatenate([g.ravel() for g in self.grads.values()])

    def set_flat(self, vec: np.ndarray) -> None:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != self.size:
            raise ShapeError(f"expected {self.size} values, got {vec.size}")
        offset = 0
        for v in self.values.values():
            v[...] = vec[offset : offset + v.size].reshape(v.shape)
            offset += v.size

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        if set(state) != set(self.values):
            raise ShapeError(
                f"parameter names differ: {sorted(set(state) ^ set(self.values))}"
            )
        for name, arr in state.items():
            if arr.shape != self.values[name].shape:
                raise ShapeError(
                    f"{name}: shape {arr.shape} != {self.values[name].shape}"
                )
            self.values[name][...] = arr

    def state(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.values.items()}

    def check_finite(self) -> None:
        for name, v in self.values.items():
            if not np.all(np.isfinite(v)):
                raise NumericError(f"non-finite value in parameter {name!r}")
