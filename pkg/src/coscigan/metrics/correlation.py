"""Cross-channel feature correlation matrices and their similarity scores."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..dataset import MTSDataset
from ..errors import DataError, ShapeError
from .features import FEATURE_NAMES, feature_matrix


@dataclass(frozen=True)
class FeatureCorrMatrix:
    """Entry (f, g): Pearson correlation across instances between feature f of
    ``channels[0]`` and feature g of ``channels[1]``. Entries that are
    undefined (zero variance) are stored as 0 and flagged in ``undefined``."""

    feature_names: tuple[str, ...]
    values: np.ndarray
    channels: tuple[int, int]
    dropped: tuple[str, ...]
    undefined: np.ndarray

    def to_csv(self, path) -> None:
        lines = ["feature," + ",".join(self.feature_names)]
        for name, row in zip(self.feature_names, self.values):
            lines.append(name + "," + ",".join(repr(float(v)) for v in row))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def _is_constant(col: np.ndarray) -> bool:
    scale = max(float(np.max(np.abs(col))), 1.0)
    return float(np.ptp(col)) <= 1e-12 * scale


def cross_pearson(fa: np.ndarray, fb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pearson correlation of every column of ``fa`` with every column of ``fb``."""
    a = fa - fa.mean(axis=0)
    b = fb - fb.mean(axis=0)
    na = np.sqrt(np.sum(a * a, axis=0))
    nb = np.sqrt(np.sum(b * b, axis=0))
    const_a = np.array([_is_constant(c) for c in fa.T])
    const_b = np.array([_is_constant(c) for c in fb.T])
    undefined = const_a[:, None] | const_b[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (a.T @ b) / np.outer(na, nb)
    r = np.where(undefined, 0.0, np.clip(r, -1.0, 1.0))
    return r, undefined


def feature_corr_matrix(
    data: MTSDataset,
    channel_a: int,
    channel_b: int,
    keep: tuple[str, ...] | list[str] | None = None,
) -> FeatureCorrMatrix:
    """Cross-channel feature correlations.

    With ``keep=None`` the features that are constant on either channel of
    ``data`` are dropped (use this on the real set); pass the real matrix's
    ``feature_names`` as ``keep`` to score a synthetic set on the same list.
    """
    if data.n_instances < 3:
        raise DataError("need at least 3 instances to correlate features")
    fa = feature_matrix(data.values[:, channel_a])
    fb = feature_matrix(data.values[:, channel_b])
    if keep is None:
        keep_idx = [
            k for k in range(len(FEATURE_NAMES))
            if not (_is_constant(fa[:, k]) or _is_constant(fb[:, k]))
        ]
    else:
        unknown = set(keep) - set(FEATURE_NAMES)
        if unknown:
            raise ShapeError(f"unknown features {sorted(unknown)}")
        keep_idx = [FEATURE_NAMES.index(n) for n in keep]
    if len(keep_idx) < 2:
        raise DataError("fewer than 2 non-constant features survive")
    r, undefined = cross_pearson(fa[:, keep_idx], fb[:, keep_idx])
    names = tuple(FEATURE_NAMES[k] for k in keep_idx)
    dropped = tuple(n for n in FEATURE_NAMES if n not in names)
    return FeatureCorrMatrix(names, r, (channel_a, channel_b), dropped, undefined)


def matrix_similarity(real_m: FeatureCorrMatrix, synth_m: FeatureCorrMatrix) -> dict[str, float]:
    """MAE, Frobenius norm of the difference, and Spearman / Kendall (tau-b)
    rank correlation of the row-major flattened entries."""
    if real_m.feature_names != synth_m.feature_names or real_m.values.shape != synth_m.values.shape:
        raise ShapeError("matrices cover different feature lists")
    a = real_m.values.ravel()
    b = synth_m.values.ravel()
    diff = a - b
    rho = stats.spearmanr(a, b).statistic
    tau = stats.kendalltau(a, b).statistic
    return {
        "mae": float(np.mean(np.abs(diff))),
        "frobenius": float(np.sqrt(np.sum(diff * diff))),
        "spearman_rho": float(rho) if np.isfinite(rho) else 0.0,
        "kendall_tau": float(tau) if np.isfinite(tau) else 0.0,
    }


def pairwise_report(real: MTSDataset, synth: MTSDataset) -> list[dict]:
    """Similarity scores for every channel pair (a < b)."""
    out = []
    for a in range(real.n_channels):
        for b in range(a + 1, real.n_channels):
            rm = feature_corr_matrix(real, a, b)
            sm = feature_corr_matrix(synth, a, b, keep=rm.feature_names)
            row = {"channels": [a, b], "dropped": list(rm.dropped)}
            row.update(matrix_similarity(rm, sm))
            out.append(row)
    return out
