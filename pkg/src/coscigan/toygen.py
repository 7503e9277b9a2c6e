"""Two-channel sine datasets with known per-patient amplitudes.

Every instance is a patient of type 1 or 2 whose amplitude ``A`` is drawn
once and shared by both channels; channel ``c`` is ``A sin(2 pi f_c t) + eps``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .dataset import MTSDataset, save_csv
from .errors import ConfigError


class Variant(str, Enum):
    SIMPLE_SINE = "SimpleSine"
    FREQ_CHANGE = "FreqChange"
    ANOMALY = "Anomaly"


@dataclass(frozen=True)
class ToySpec:
    variant: Variant = Variant.SIMPLE_SINE
    n_per_type: int = 1024
    length: int = 800
    freq_ch1: float = 0.01
    freq_ch2: float = 0.005
    amp_mean_pt1: float = 0.4
    amp_mean_pt2: float = 0.6
    amp_sd: float = 0.05
    noise_sd: float = 0.05
    anomaly_fraction: float = 0.25
    anomaly_sd: float = 0.05
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.amp_sd <= 0 or self.noise_sd < 0 or self.anomaly_sd < 0:
            raise ConfigError("amp_sd must be > 0 and noise sds >= 0")
        if self.freq_ch1 <= 0 or self.freq_ch2 <= 0:
            raise ConfigError("frequencies must be positive")
        if self.length < 2 or self.n_per_type < 1:
            raise ConfigError("need length >= 2 and n_per_type >= 1")
        if not 0.0 < self.anomaly_fraction <= 1.0:
            raise ConfigError("anomaly_fraction must be in (0, 1]")


@dataclass(frozen=True)
class ToyTruth:
    patient_type: np.ndarray  # 1 or 2
    amplitude: np.ndarray

    def save_csv(self, path) -> None:
        rows = ["instance,patient_type,amplitude"]
        rows += [
            f"{i},{int(t)},{a!r}"
            for i, (t, a) in enumerate(zip(self.patient_type.tolist(), self.amplitude.tolist()))
        ]
        Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def phase(freq: float, length: int, variant: Variant) -> np.ndarray:
    """Sine phase over t = 0..L-1; FreqChange doubles the frequency at L/2 without a jump."""
    t = np.arange(length, dtype=np.float64)
    if variant is not Variant.FREQ_CHANGE:
        return 2 * np.pi * freq * t
    mid = length / 2
    return np.where(t < mid, 2 * np.pi * freq * t, 2 * np.pi * freq * (mid + 2 * (t - mid)))


def anomaly_span(length: int, fraction: float = 0.25) -> tuple[int, int]:
    half = int(round(length * fraction / 2))
    mid = length // 2
    return mid - half, mid + half


def generate_toy(spec: ToySpec) -> tuple[MTSDataset, ToyTruth]:
    rng = np.random.default_rng(spec.seed)
    n = 2 * spec.n_per_type
    ptype = np.repeat([1, 2], spec.n_per_type)
    means = np.where(ptype == 1, spec.amp_mean_pt1, spec.amp_mean_pt2)
    amp = rng.normal(means, spec.amp_sd)
    waves = np.stack(
        [np.sin(phase(f, spec.length, spec.variant)) for f in (spec.freq_ch1, spec.freq_ch2)]
    )
    values = amp[:, None, None] * waves[None]
    values = values + rng.normal(0.0, spec.noise_sd, size=values.shape) if spec.noise_sd else values
    if spec.variant is Variant.ANOMALY:
        lo, hi = anomaly_span(spec.length, spec.anomaly_fraction)
        values[:, :, lo:hi] = rng.normal(0.0, spec.anomaly_sd, size=(n, 2, hi - lo))
    labels = (ptype == 2).astype(np.int64)
    return MTSDataset(values, labels), ToyTruth(ptype, amp)


def write_toy(spec: ToySpec, data_path, truth_path) -> tuple[MTSDataset, ToyTruth]:
    data, truth = generate_toy(spec)
    save_csv(data, data_path)
    truth.save_csv(truth_path)
    return data, truth


def spec_dict(spec: ToySpec) -> dict:
    d = asdict(spec)
    d["variant"] = spec.variant.value
    return d
