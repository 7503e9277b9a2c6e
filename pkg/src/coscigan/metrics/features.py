"""A 15-feature bank of univariate time-series characteristics.

Order and behaviour under ``x -> x + c``:

=====================  =======================================  ===========
name                   definition                               shift
=====================  =======================================  ===========
mean                   arithmetic mean                          covariant
sd                     population standard deviation            invariant
skewness               third standardised moment                invariant
kurtosis               fourth standardised moment minus 3       invariant
acf1                   lag-1 autocorrelation                    invariant
first_1e_lag           first lag whose autocorrelation < 1/e    invariant
dominant_freq          argmax periodogram frequency (cycles/s)  invariant
spectral_centroid      power-weighted mean frequency            invariant
amplitude              sqrt(2) * sd                             invariant
trend_slope            least-squares slope against t            invariant
mean_crossings         crossings of the mean / L                invariant
longest_above_mean     longest run strictly above mean / L      invariant
hist5_mode             centre of fullest of 5 equal bins        covariant
hist10_entropy         Shannon entropy (nats) of 10 bins        invariant
diff_above_sd          share of |diff| exceeding sd(diff)       invariant
=====================  =======================================  ===========

A constant series maps to 0 for every feature except ``mean`` and
``hist5_mode``, which equal the constant.
"""
from __future__ import annotations

import numpy as np

from ..errors import ShapeError

FEATURE_NAMES = (
    "mean",
    "sd",
    "skewness",
    "kurtosis",
    "acf1",
    "first_1e_lag",
    "dominant_freq",
    "spectral_centroid",
    "amplitude",
    "trend_slope",
    "mean_crossings",
    "longest_above_mean",
    "hist5_mode",
    "hist10_entropy",
    "diff_above_sd",
)
N_FEATURES = len(FEATURE_NAMES)
MIN_LENGTH = 8


def _acf(xc: np.ndarray, var: float) -> np.ndarray:
    n = xc.size
    spec = np.fft.rfft(xc, 2 * n)
    ac = np.fft.irfft(spec * np.conj(spec))[:n] / n
    return ac / var


def _longest_run(mask: np.ndarray) -> int:
    if not mask.any():
        return 0
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return int(np.max(edges[1::2] - edges[::2]))


def feature_vector(series) -> np.ndarray:
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < MIN_LENGTH:
        raise ShapeError(f"need a 1-D series of length >= {MIN_LENGTH}")
    L = x.size
    mu = x.mean()
    xc = x - mu
    var = float(np.mean(xc * xc))
    out = np.zeros(N_FEATURES)
    out[0] = mu
    scale = max(abs(mu), 1.0)
    if var <= (1e-12 * scale) ** 2:
        out[12] = mu
        return out

    sd = np.sqrt(var)
    z = xc / sd
    out[1] = sd
    out[2] = np.mean(z**3)
    out[3] = np.mean(z**4) - 3.0

    ac = _acf(xc, var)
    out[4] = ac[1]
    below = np.flatnonzero(ac < 1.0 / np.e)
    out[5] = below[0] if below.size else L

    power = np.abs(np.fft.rfft(xc)) ** 2
    freqs = np.arange(power.size) / L
    p = power[1:]
    out[6] = freqs[1 + int(np.argmax(p))]
    out[7] = float(np.sum(freqs[1:] * p) / np.sum(p)) if p.sum() > 0 else 0.0

    out[8] = np.sqrt(2.0) * sd
    t = np.arange(L, dtype=np.float64)
    tc = t - t.mean()
    out[9] = np.dot(tc, xc) / np.dot(tc, tc)

    above = x > mu
    out[10] = np.count_nonzero(above[1:] != above[:-1]) / L
    out[11] = _longest_run(above) / L

    counts5, edges5 = np.histogram(x, bins=5, range=(x.min(), x.max()))
    k = int(np.argmax(counts5))
    out[12] = 0.5 * (edges5[k] + edges5[k + 1])

    counts10, _ = np.histogram(x, bins=10, range=(x.min(), x.max()))
    prob = counts10[counts10 > 0] / L
    out[13] = -np.sum(prob * np.log(prob))

    d = np.abs(np.diff(x))
    dsd = np.diff(x).std()
    out[14] = np.mean(d > dsd) if dsd > 0 else 0.0
    return out


def feature_matrix(values: np.ndarray) -> np.ndarray:
    """Features for every row of an (N, L) array -> (N, F)."""
    values = np.asarray(values, dtype=np.float64)
    return np.stack([feature_vector(row) for row in values])
