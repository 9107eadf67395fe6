"""K-means clustering with k-means++ seeding.

Two drivers share the seeding and assignment code: a full-batch Lloyd loop
for small inputs and a mini-batch loop (per-center counts, learning rate
1/count) for large ones. Both are deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg_core import as_data_matrix, euclidean_distance_matrix

# "auto" mode switches from full-batch to mini-batch at this many rows.
FULL_BATCH_LIMIT = 5000

_MODES = ("auto", "full", "minibatch")


@dataclass(frozen=True)
class KmeansConfig:
    """Clustering parameters.

    mode "auto" resolves to "full" below FULL_BATCH_LIMIT rows and
    "minibatch" at or above it. ``n_init`` restarts apply to the full-batch
    driver only; the mini-batch driver always runs ``max_iters`` batches.
    """

    k: int
    mode: str = "auto"
    batch_size: int = 1024
    max_iters: int = 100
    seed: int = 0
    n_init: int = 3

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be positive, got {self.max_iters}")
        if self.n_init < 1:
            raise ValueError(f"n_init must be positive, got {self.n_init}")


@dataclass(frozen=True)
class ClusterAssignment:
    centers: np.ndarray  # (k, d)
    labels: np.ndarray  # (n,) ints in [0, k)
    inertia: float  # sum of squared distances to assigned centers
    k: int


def assign_labels(x, centers) -> np.ndarray:
    """Index of the nearest center per row; ties go to the smallest index."""
    return np.argmin(euclidean_distance_matrix(x, centers), axis=1)


def kmeans_fit(x, cfg: KmeansConfig) -> ClusterAssignment:
    """Cluster ``x`` into ``cfg.k`` groups.

    Parameters
    ----------
    x : (n, d) data matrix.
    cfg : KmeansConfig with k <= n.

    Returns
    -------
    ClusterAssignment whose centers, labels and inertia are reproducible
    byte-for-byte for a fixed seed, config and input.
    """
    x = as_data_matrix(x, "x")
    n = x.shape[0]
    if cfg.k > n:
        raise ValueError(f"k={cfg.k} exceeds the number of points n={n}")
    rng = np.random.default_rng(cfg.seed)
    mode = cfg.mode
    if mode == "auto":
        mode = "full" if n < FULL_BATCH_LIMIT else "minibatch"
    if mode == "full":
        best = None
        for _ in range(cfg.n_init):
            run = _lloyd_once(x, cfg.k, cfg.max_iters, rng)
            if best is None or run[2] < best[2]:
                best = run
        centers, labels, inertia = best
    else:
        centers, labels, inertia = _minibatch(x, cfg, rng)
    return ClusterAssignment(
        centers=centers, labels=labels.astype(np.int64), inertia=inertia, k=cfg.k
    )


def _kmeans_plusplus(x, k, rng):
    """Seed centers at data points, weighting draws by squared distance to the
    nearest center chosen so far."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[int(rng.integers(n))]
    closest_sq = euclidean_distance_matrix(x, centers[:1])[:, 0] ** 2
    for j in range(1, k):
        total = closest_sq.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest_sq / total))
        else:
            # every remaining point coincides with an existing center
            idx = int(rng.integers(n))
        centers[j] = x[idx]
        new_sq = euclidean_distance_matrix(x, centers[j : j + 1])[:, 0] ** 2
        np.minimum(closest_sq, new_sq, out=closest_sq)
    return centers


def _group_means(x, labels, k, previous):
    """Per-cluster means; clusters with no points keep their previous center."""
    centers = previous.copy()
    counts = np.bincount(labels, minlength=k)
    for col in range(x.shape[1]):
        sums = np.bincount(labels, weights=x[:, col], minlength=k)
        centers[counts > 0, col] = sums[counts > 0] / counts[counts > 0]
    return centers


def _reseed_empty(x, centers, labels):
    """Move each empty center onto the point farthest from its assigned center.

    Reassigns after every move so at most k passes are needed; gives up when
    every point already sits exactly on a center.
    """
    k = centers.shape[0]
    for _ in range(k + 1):
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            break
        dist_to_own = np.linalg.norm(x - centers[labels], axis=1)
        far = int(np.argmax(dist_to_own))
        if dist_to_own[far] <= 0:
            break
        centers = centers.copy()
        centers[empty[0]] = x[far]
        labels = assign_labels(x, centers)
    return centers, labels


def _inertia(x, centers, labels):
    d = euclidean_distance_matrix(x, centers)
    return float((d[np.arange(x.shape[0]), labels] ** 2).sum())


def _lloyd_once(x, k, max_iters, rng, trace=None):
    centers = _kmeans_plusplus(x, k, rng)
    labels = assign_labels(x, centers)
    centers, labels = _reseed_empty(x, centers, labels)
    for _ in range(max_iters):
        if trace is not None:
            trace.append(_inertia(x, centers, labels))
        centers = _group_means(x, labels, k, previous=centers)
        new_labels = assign_labels(x, centers)
        centers, new_labels = _reseed_empty(x, centers, new_labels)
        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        if converged:
            break
    return centers, labels, _inertia(x, centers, labels)


def _minibatch(x, cfg, rng):
    n = x.shape[0]
    centers = _kmeans_plusplus(x, cfg.k, rng)
    counts = np.zeros(cfg.k)
    b = min(cfg.batch_size, n)
    for _ in range(cfg.max_iters):
        batch = x[rng.choice(n, size=b, replace=False)]
        batch_labels = assign_labels(batch, centers)
        for j in np.unique(batch_labels):
            members = batch[batch_labels == j]
            counts[j] += members.shape[0]
            eta = members.shape[0] / counts[j]
            centers[j] = (1.0 - eta) * centers[j] + eta * members.mean(axis=0)
    labels = assign_labels(x, centers)
    centers, labels = _reseed_empty(x, centers, labels)
    return centers, labels, _inertia(x, centers, labels)
