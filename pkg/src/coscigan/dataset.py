"""Multivariate time-series container, CSV I/O and preprocessing.

CSV layout: one instance per row, channels concatenated (channel ``i``
occupies columns ``[i*L, (i+1)*L)``), an optional trailing integer label
column, and an optional first line::

    cosci-mts v1; channels=C; length=L; labeled=0|1
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DataError, ParseError, ShapeError

HEADER_RE = re.compile(
    r"^cosci-mts v1;\s*channels=(\d+);\s*length=(\d+);\s*labeled=([01])\s*$"
)


@dataclass(frozen=True)
class MTSDataset:
    """``values`` is indexed [instance, channel, timestep]."""

    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise ShapeError(f"values must be 3-D (N, C, L), got shape {values.shape}")
        n, c, length = values.shape
        if n < 1 or c < 1 or length < 2:
            raise ShapeError(f"need N >= 1, C >= 1, L >= 2; got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("dataset contains NaN or infinite values")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise ShapeError(f"expected {n} labels, got shape {labels.shape}")
            if not np.all((labels == 0) | (labels == 1)):
                raise DataError("labels must be 0 or 1")
            labels = labels.astype(np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n_instances(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]

    @property
    def length(self) -> int:
        return self.values.shape[2]

    @property
    def labeled(self) -> bool:
        return self.labels is not None

    def __len__(self) -> int:
        return self.n_instances

    def flat(self) -> np.ndarray:
        """(N, C*L) channel-major matrix, the CSV / central-discriminator layout."""
        return self.values.reshape(self.n_instances, -1)

    @classmethod
    def from_flat(cls, flat: np.ndarray, n_channels: int, labels=None) -> "MTSDataset":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.ndim != 2 or flat.shape[1] % n_channels:
            raise ShapeError(f"cannot split {flat.shape} into {n_channels} channels")
        return cls(flat.reshape(flat.shape[0], n_channels, -1), labels)

    def subset(self, indices) -> "MTSDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return MTSDataset(self.values[idx], None if self.labels is None else self.labels[idx])

    def select_channels(self, channels: Sequence[int]) -> "MTSDataset":
        return MTSDataset(self.values[:, list(channels)], self.labels)

    def with_labels(self, labels) -> "MTSDataset":
        return MTSDataset(self.values, labels)

    def class_subset(self, label: int) -> "MTSDataset":
        if self.labels is None:
            raise DataError("dataset is unlabeled")
        return self.subset(np.flatnonzero(self.labels == label))


def concat(datasets: Sequence[MTSDataset]) -> MTSDataset:
    labeled = [d.labeled for d in datasets]
    if any(labeled) and not all(labeled):
        raise DataError("cannot concatenate labeled and unlabeled datasets")
    values = np.concatenate([d.values for d in datasets])
    labels = np.concatenate([d.labels for d in datasets]) if all(labeled) else None
    return MTSDataset(values, labels)


# --------------------------------------------------------------------------- I/O


def header_line(n_channels: int, length: int, labeled: bool) -> str:
    return f"cosci-mts v1; channels={n_channels}; length={length}; labeled={int(labeled)}"


def save_csv(dataset: MTSDataset, path) -> None:
    flat = dataset.flat()
    lines = [header_line(dataset.n_channels, dataset.length, dataset.labeled)]
    for r, row in enumerate(flat):
        fields = [repr(v) for v in row.tolist()]
        if dataset.labeled:
            fields.append(str(int(dataset.labels[r])))
        lines.append(",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_csv(path, n_channels: int | None = None, length: int | None = None) -> MTSDataset:
    """Read the CSV layout above.

    ``n_channels``/``length`` are required for header-less files and must
    agree with the header when one is present. Header-less files carry no
    label column.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    labeled = False
    first_row = 0
    if lines and lines[0].startswith("cosci-mts"):
        m = HEADER_RE.match(lines[0].strip())
        if not m:
            raise ParseError(f"malformed header {lines[0]!r}", row=0)
        hc, hl, hlab = int(m.group(1)), int(m.group(2)), m.group(3) == "1"
        if n_channels is not None and n_channels != hc:
            raise ShapeError(f"header says {hc} channels, caller expects {n_channels}")
        if length is not None and length != hl:
            raise ShapeError(f"header says length {hl}, caller expects {length}")
        n_channels, length, labeled = hc, hl, hlab
        first_row = 1
    if n_channels is None or length is None:
        raise ShapeError("n_channels and length are required for files without a header")
    width = n_channels * length + int(labeled)
    rows = lines[first_row:]
    if not rows:
        raise ShapeError("file contains no instances")
    values = np.empty((len(rows), n_channels * length))
    labels = np.empty(len(rows), dtype=np.int64) if labeled else None
    for r, line in enumerate(rows):
        fields = line.split(",")
        if len(fields) != width:
            raise ShapeError(f"row {r}: expected {width} fields, found {len(fields)}")
        try:
            nums = [float(f) for f in fields[: n_channels * length]]
        except ValueError as exc:
            raise ParseError(str(exc), row=r) from None
        if not all(np.isfinite(nums)):
            raise DataError(f"row {r}: non-finite value")
        values[r] = nums
        if labeled:
            try:
                labels[r] = int(fields[-1])
            except ValueError:
                raise ParseError(f"bad label {fields[-1]!r}", row=r) from None
    return MTSDataset.from_flat(values, n_channels, labels)


# ------------------------------------------------------------------ preprocessing


def zscore_flags(dataset: MTSDataset, threshold: float) -> np.ndarray:
    """Boolean mask of samples whose per-channel pooled |z| exceeds ``threshold``."""
    if threshold <= 0:
        raise ConfigError("threshold must be positive")
    v = dataset.values
    mu = v.mean(axis=(0, 2), keepdims=True)
    sd = v.std(axis=(0, 2), keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.abs(v - mu) / sd
    return np.where(sd > 0, z > threshold, False)


def zscore_filter(dataset: MTSDataset, threshold: float = 3.0) -> MTSDataset:
    """Replace outliers by linear interpolation between the nearest kept samples.

    Mean and standard deviation are pooled per channel over all instances
    and timesteps; a constant channel passes through unchanged. Flagged
    endpoints take the value of the nearest kept sample.
    """
    flags = zscore_flags(dataset, threshold)
    if not flags.any():
        return dataset
    out = dataset.values.copy()
    t = np.arange(dataset.length)
    for n, c in zip(*np.nonzero(flags.any(axis=2))):
        bad = flags[n, c]
        if bad.all():
            continue
        out[n, c, bad] = np.interp(t[bad], t[~bad], out[n, c, ~bad])
    return MTSDataset(out, dataset.labels)


def events_from_mask(mask: np.ndarray) -> list[tuple[int, int]]:
    """Half-open [start, end) runs of True in a 1-D boolean array."""
    m = np.concatenate([[False], np.asarray(mask, dtype=bool), [False]])
    edges = np.flatnonzero(np.diff(m.astype(np.int8)))
    return [(int(s), int(e)) for s, e in zip(edges[::2], edges[1::2])]


def extract_event_windows(
    dataset: MTSDataset,
    events: Sequence[tuple[int, int, int]],
    window: int,
    margin: int,
) -> MTSDataset:
    """Cut labeled, class-balanced frames around events.

    Each event ``(instance, start, end)`` yields one positive frame of
    ``window`` samples centred on the event and clipped to the series; the
    event plus ``margin`` samples each side (as far as the series allows) must
    fit, otherwise the event is skipped. Negative frames come from a
    left-to-right scan over every instance, taking non-overlapping windows that
    stay ``margin`` samples clear of all events. Classes are balanced by
    truncating whichever is larger.
    """
    if window < 1 or margin < 0:
        raise ConfigError("window must be >= 1 and margin >= 0")
    if window > dataset.length:
        raise ConfigError(f"window {window} longer than series ({dataset.length})")
    if not events:
        raise DataError("no events to extract")
    T = dataset.length
    by_instance: dict[int, list[tuple[int, int]]] = {}
    for inst, start, end in events:
        if not (0 <= inst < dataset.n_instances and 0 <= start < end <= T):
            raise ConfigError(f"event {(inst, start, end)} out of bounds")
        by_instance.setdefault(inst, []).append((start, end))

    positives = []
    for inst, start, end in events:
        lo, hi = max(start - margin, 0), min(end + margin, T)
        if hi - lo > window:
            continue
        s = (start + end) // 2 - window // 2
        s = min(max(s, 0), T - window)
        s = min(max(s, hi - window), lo)
        positives.append(dataset.values[inst, :, s : s + window])

    negatives = []
    for inst in range(dataset.n_instances):
        blocked = sorted(
            (max(s - margin, 0), min(e + margin, T)) for s, e in by_instance.get(inst, [])
        )
        s = 0
        while s + window <= T and len(negatives) < len(positives):
            hit = next((b for b in blocked if b[0] < s + window and b[1] > s), None)
            if hit is None:
                negatives.append(dataset.values[inst, :, s : s + window])
                s += window
            else:
                s = hit[1]
        if len(negatives) >= len(positives):
            break

    k = min(len(positives), len(negatives))
    if k == 0:
        raise DataError("no balanced frames could be extracted")
    values = np.stack(positives[:k] + negatives[:k])
    labels = np.concatenate([np.ones(k, dtype=np.int64), np.zeros(k, dtype=np.int64)])
    return MTSDataset(values, labels)


def forward_select_channels(
    dataset: MTSDataset,
    k: int,
    scorer: Callable[[MTSDataset], float],
) -> list[int]:
    """Greedy forward selection; ties go to the lowest channel index."""
    if not 1 <= k <= dataset.n_channels:
        raise ConfigError(f"k must be in [1, {dataset.n_channels}]")
    chosen: list[int] = []
    for _ in range(k):
        best, best_score = None, -np.inf
        for c in range(dataset.n_channels):
            if c in chosen:
                continue
            score = scorer(dataset.select_channels(chosen + [c]))
            if score > best_score:
                best, best_score = c, score
        chosen.append(best)
    return chosen


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must be in (0, 1)")


def split_indices(dataset: MTSDataset, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Shuffled (stratified when labeled) train/test index sets, both sorted."""
    rng = np.random.default_rng(spec.seed)
    if dataset.labeled:
        groups = [np.flatnonzero(dataset.labels == c) for c in (0, 1)]
    else:
        groups = [np.arange(dataset.n_instances)]
    train, test = [], []
    for g in groups:
        if g.size == 0:
            continue
        g = rng.permutation(g)
        n_train = int(round(spec.train_fraction * g.size))
        train.append(g[:n_train])
        test.append(g[n_train:])
    train_idx = np.sort(np.concatenate(train))
    test_idx = np.sort(np.concatenate(test))
    if train_idx.size == 0 or test_idx.size == 0:
        raise ConfigError(
            f"split of {dataset.n_instances} instances at {spec.train_fraction} leaves a side empty"
        )
    return train_idx, test_idx


def split(dataset: MTSDataset, spec: SplitSpec) -> tuple[MTSDataset, MTSDataset]:
    train_idx, test_idx = split_indices(dataset, spec)
    return dataset.subset(train_idx), dataset.subset(test_idx)
