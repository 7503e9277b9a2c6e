"""Synthetic EEG-style recording with labelled eye blinks.

Stand-in for a real eye-state recording so the blink-classification pipeline
runs offline. One long multichannel recording is produced:

* background: independent AR(1) noise per channel plus a weak shared
  alpha-band rhythm;
* blinks: a damped oscillation injected into every channel at the same time
  with a per-event amplitude, width and polarity and a fixed per-channel
  gain (frontal channels large, distant channels near zero);
* artifacts: isolated single-channel transients of the same shape at random
  times, so a bump in one channel alone is not evidence of a blink;
* spikes: rare large outliers for the z-score filter to remove.

Samples inside a blink are labelled 1 (the "eyes closed" state).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MTSDataset, events_from_mask, extract_event_windows, zscore_filter


@dataclass(frozen=True)
class EegSimSpec:
    n_channels: int = 8
    n_blinks: int = 256
    window: int = 32
    margin: int = 4
    blink_width: tuple[int, int] = (8, 14)
    blink_amp: tuple[float, float] = (2.0, 4.0)
    gains: tuple[float, ...] = (1.0, 0.9, 0.8, 0.65, 0.5, 0.3, 0.1, 0.0)
    ar_coef: float = 0.8
    alpha_amp: float = 0.3
    alpha_period: float = 10.0
    artifact_rate: float = 0.006
    spike_rate: float = 2e-4
    spike_amp: float = 25.0
    seed: int = 0

    def gain_vector(self) -> np.ndarray:
        g = np.zeros(self.n_channels)
        k = min(len(self.gains), self.n_channels)
        g[:k] = self.gains[:k]
        return g


def _bump(width: int) -> np.ndarray:
    t = np.arange(width, dtype=np.float64)
    return np.sin(np.pi * t / width) * np.exp(-t / width)


def simulate_recording(spec: EegSimSpec) -> tuple[MTSDataset, list[tuple[int, int, int]]]:
    """Return a one-instance recording (1, C, T) and its blink events."""
    rng = np.random.default_rng(spec.seed)
    # blinks spaced so that negative windows exist between them
    gap = spec.window + 2 * spec.margin + spec.blink_width[1]
    T = spec.n_blinks * 2 * gap + gap
    C = spec.n_channels

    noise = rng.standard_normal((C, T))
    x = np.empty((C, T))
    x[:, 0] = noise[:, 0]
    scale = np.sqrt(1.0 - spec.ar_coef**2)
    for t in range(1, T):
        x[:, t] = spec.ar_coef * x[:, t - 1] + scale * noise[:, t]
    phase0 = rng.uniform(0, 2 * np.pi)
    alpha = spec.alpha_amp * np.sin(2 * np.pi * np.arange(T) / spec.alpha_period + phase0)
    x += alpha[None] * rng.uniform(0.5, 1.0, size=(C, 1))

    gains = spec.gain_vector()
    mask = np.zeros(T, dtype=bool)
    slots = rng.permutation(spec.n_blinks * 2)[: spec.n_blinks]
    for slot in np.sort(slots):
        width = int(rng.integers(spec.blink_width[0], spec.blink_width[1] + 1))
        start = int(slot * gap + gap // 2 + rng.integers(0, gap // 2))
        start = min(start, T - width)
        amp = rng.uniform(*spec.blink_amp) * rng.choice([-1.0, 1.0])
        x[:, start : start + width] += gains[:, None] * amp * _bump(width)[None]
        mask[start : start + width] = True

    n_art = rng.poisson(spec.artifact_rate * T)
    for _ in range(n_art):
        c = int(rng.integers(C))
        width = int(rng.integers(spec.blink_width[0], spec.blink_width[1] + 1))
        start = int(rng.integers(0, T - width))
        amp = rng.uniform(*spec.blink_amp) * rng.choice([-1.0, 1.0])
        x[c, start : start + width] += amp * _bump(width)

    n_spikes = rng.poisson(spec.spike_rate * T * C)
    for _ in range(n_spikes):
        x[int(rng.integers(C)), int(rng.integers(T))] += spec.spike_amp * rng.choice([-1.0, 1.0])

    events = [(0, s, e) for s, e in events_from_mask(mask)]
    return MTSDataset(x[None]), events


def blink_frames(spec: EegSimSpec, zscore_threshold: float = 3.0) -> MTSDataset:
    """Outlier-filtered, windowed, class-balanced blink frames (N, C, window)."""
    recording, events = simulate_recording(spec)
    cleaned = zscore_filter(recording, zscore_threshold)
    return extract_event_windows(cleaned, events, spec.window, spec.margin)
