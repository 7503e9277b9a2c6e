"""2-D projections for comparing real and synthetic sets: PCA and exact t-SNE."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dataset import MTSDataset
from ..errors import ConfigError, DataError, ShapeError


def _flatten(data_sets: Sequence[MTSDataset]) -> list[np.ndarray]:
    if not data_sets:
        raise DataError("no datasets given")
    shape = data_sets[0].values.shape[1:]
    for d in data_sets:
        if d.values.shape[1:] != shape:
            raise ShapeError("all datasets must share channel count and length")
    return [d.flat() for d in data_sets]


@dataclass(frozen=True)
class PcaBasis:
    mean: np.ndarray
    components: np.ndarray  # (dims, D), rows orthonormal
    eigenvalues: np.ndarray  # (dims,), sample covariance (ddof=1)

    def project(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) @ self.components.T

    def reconstruct(self, y: np.ndarray) -> np.ndarray:
        return y @ self.components + self.mean


def fit_pca(x: np.ndarray, dims: int = 2) -> PcaBasis:
    if x.shape[0] < 3:
        raise DataError("PCA needs at least 3 instances")
    mean = x.mean(axis=0)
    xc = x - mean
    # right singular vectors = covariance eigenvectors, already descending
    _, s, vt = np.linalg.svd(xc, full_matrices=False)
    comps = vt[:dims].copy()
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    eig = s[:dims] ** 2 / (x.shape[0] - 1)
    return PcaBasis(mean, comps, eig)


def pca_project(data_sets: Sequence[MTSDataset], dims: int = 2) -> list[np.ndarray]:
    """Project every set onto the top components of the first (real) set."""
    flats = _flatten(data_sets)
    basis = fit_pca(flats[0], dims)
    return [basis.project(x) for x in flats]


# ---------------------------------------------------------------------- t-SNE


def _sq_distances(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * x @ x.T
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def conditional_probabilities(
    sq_dist: np.ndarray, perplexity: float, tol: float = 1e-10, max_steps: int = 200
) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise Gaussian conditionals whose entropy (nats) equals log(perplexity).

    Returns (P, beta) with beta the per-point precision found by bisection.
    """
    n = sq_dist.shape[0]
    target = np.log(perplexity)
    P = np.zeros((n, n))
    betas = np.ones(n)
    for i in range(n):
        d = np.delete(sq_dist[i], i)
        d = d - d.min()
        lo, hi = 0.0, np.inf
        beta = 1.0 / max(np.mean(d), 1e-12)
        for _ in range(max_steps):
            w = np.exp(-d * beta)
            s = w.sum()
            p = w / s
            entropy = np.log(s) + beta * np.dot(d, p)
            diff = entropy - target
            if abs(diff) < tol:
                break
            if diff > 0:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else 0.5 * (beta + hi)
            else:
                hi = beta
                beta = 0.5 * (beta + lo)
        P[i, np.arange(n) != i] = p
        betas[i] = beta
    return P, betas


def tsne(
    x: np.ndarray,
    perplexity: float = 30.0,
    iterations: int = 1000,
    seed: int = 0,
    learning_rate: float | None = None,
    exaggeration: float = 12.0,
    exaggeration_iters: int = 250,
) -> np.ndarray:
    """Exact O(N^2) t-SNE with early exaggeration, momentum and gains.

    ``learning_rate=None`` picks ``max(n / exaggeration / 4, 50)``, which stays
    stable for the small point counts used here.
    """
    n = x.shape[0]
    if n < 3 * perplexity:
        raise ConfigError(f"{n} points cannot support perplexity {perplexity} (need >= 3x)")
    if learning_rate is None:
        learning_rate = max(n / exaggeration / 4.0, 50.0)
    P_cond, _ = conditional_probabilities(_sq_distances(x), perplexity)
    P = (P_cond + P_cond.T) / (2.0 * n)
    P = np.maximum(P, 1e-12)
    rng = np.random.default_rng(seed)
    y = 1e-4 * rng.standard_normal((n, 2))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    for it in range(iterations):
        exag = exaggeration if it < exaggeration_iters else 1.0
        momentum = 0.5 if it < exaggeration_iters else 0.8
        num = 1.0 / (1.0 + _sq_distances(y))
        np.fill_diagonal(num, 0.0)
        Q = np.maximum(num / num.sum(), 1e-12)
        W = (exag * P - Q) * num
        grad = 4.0 * (np.diag(W.sum(axis=1)) - W) @ y
        same = np.sign(grad) == np.sign(velocity)
        gains = np.where(same, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        velocity = momentum * velocity - learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)
    return y


def tsne_embed(
    data_sets: Sequence[MTSDataset],
    perplexity: float = 30.0,
    iterations: int = 1000,
    seed: int = 0,
) -> list[np.ndarray]:
    """Embed the pooled, flattened instances of all sets; split back per set."""
    flats = _flatten(data_sets)
    y = tsne(np.concatenate(flats), perplexity, iterations, seed)
    bounds = np.cumsum([0] + [len(f) for f in flats])
    return [y[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
