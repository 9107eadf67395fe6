"""Dense-matrix primitives: pairwise distances, z-scoring, and PCA."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Cap on scratch elements per chunk when forming (rows, k, d) difference
# tensors; keeps peak extra memory near 32 MB regardless of input size.
_CHUNK_ELEMS = 4_194_304


def as_data_matrix(x, name: str = "matrix") -> np.ndarray:
    """Validate and return a 2-D float64 array with finite entries."""
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} needs at least one row and one column, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class PcaModel:
    """Principal-component basis fitted to a data matrix.

    Attributes
    ----------
    mean : (d,) column means of the training data.
    components : (m, d) orthonormal rows sorted by explained variance.
    explained_variance : (m,) non-increasing variances, or None when the
        model was reloaded from disk (variances are not persisted).
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray | None


def euclidean_distance_matrix(a, b) -> np.ndarray:
    """All-pairs Euclidean distances between rows of ``a`` (n, d) and ``b`` (k, d).

    Computed from explicit coordinate differences (not the expanded quadratic
    form), so small distances do not lose precision to cancellation.
    """
    a = as_data_matrix(a, "a")
    b = as_data_matrix(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column mismatch: a has shape {a.shape}, b has shape {b.shape}")
    n, d = a.shape
    k = b.shape[0]
    out = np.empty((n, k))
    step = max(1, _CHUNK_ELEMS // (k * d))
    for start in range(0, n, step):
        stop = min(n, start + step)
        diff = a[start:stop, None, :] - b[None, :, :]
        np.sqrt(np.einsum("ijl,ijl->ij", diff, diff), out=out[start:stop])
    return out


def zscore_normalize(m) -> np.ndarray:
    """Column-wise z-score using the population standard deviation.

    Columns with zero variance map to all-zeros instead of dividing by zero.
    """
    m = as_data_matrix(m, "matrix")
    mean = m.mean(axis=0)
    std = m.std(axis=0)
    out = np.zeros_like(m)
    nz = std > 0.0
    out[:, nz] = (m[:, nz] - mean[nz]) / std[nz]
    return out


def pca_fit(x, m: int) -> PcaModel:
    """Fit the top ``m`` principal directions of ``x`` via SVD of the centered matrix.

    Component signs are fixed so that each row's largest-magnitude entry is
    positive, which makes results reproducible across equivalent inputs.
    """
    x = as_data_matrix(x, "x")
    n, d = x.shape
    limit = min(n, d)
    if not 1 <= m <= limit:
        raise ValueError(f"m must be in [1, {limit}] for a {n}x{d} matrix, got {m}")
    mean = x.mean(axis=0)
    _, s, vt = np.linalg.svd(x - mean, full_matrices=False)
    components = vt[:m].copy()
    for row in components:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    explained = (s[:m] ** 2) / max(n - 1, 1)
    return PcaModel(mean=mean, components=components, explained_variance=explained)


def pca_transform(model: PcaModel, x) -> np.ndarray:
    """Project rows of ``x`` onto the fitted components after centering."""
    x = as_data_matrix(x, "x")
    d = model.components.shape[1]
    if x.shape[1] != d:
        raise ValueError(f"x has {x.shape[1]} columns, model expects {d}")
    return (x - model.mean) @ model.components.T
