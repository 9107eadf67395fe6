"""Gaussian membership machinery shared by the fit and transform loops.

Memberships score every point against every cluster center with a Gaussian
kernel; the embedding is driven by matching the low-dimensional membership
matrix to the high-dimensional one under a Frobenius loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg_core import as_data_matrix, euclidean_distance_matrix

# Below this loss the gradient is defined as exactly zero (the analytic
# expression divides by the loss).
GRADIENT_LOSS_FLOOR = 1e-12


@dataclass(frozen=True)
class SigmaEstimate:
    """Gaussian bandwidth plus the space ("high" or "low") it was estimated in."""

    value: float
    space: str


@dataclass(frozen=True)
class MembershipMatrix:
    """Point-to-center memberships in (0, 1] with the bandwidth that produced them."""

    values: np.ndarray
    sigma: float


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, MembershipMatrix) else np.asarray(u, dtype=np.float64)


def sigma_high(distances) -> SigmaEstimate:
    """Bandwidth for the original space.

    For each center, take the median of its distances to every point (median
    of an even-length list is the mean of the two central values), then
    average those medians over the centers.
    """
    d = as_data_matrix(distances, "distances")
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    if not np.any(d > 0):
        raise ValueError("all point-to-center distances are zero; cannot estimate a bandwidth")
    medians = np.median(d, axis=0)
    return SigmaEstimate(value=float(medians.mean()), space="high")


def sigma_low(centers) -> SigmaEstimate:
    """Bandwidth for the embedded space.

    For each center, take the median of its distances to the other k-1
    centers, then average those medians over the centers.
    """
    c = as_data_matrix(centers, "centers")
    k = c.shape[0]
    if k < 2:
        raise ValueError(f"need at least 2 centers to estimate a bandwidth, got {k}")
    d = euclidean_distance_matrix(c, c)
    off_diagonal = d[~np.eye(k, dtype=bool)].reshape(k, k - 1)
    value = float(np.median(off_diagonal, axis=1).mean())
    if value <= 0.0:
        raise ValueError("all centers are identical; bandwidth would be zero")
    return SigmaEstimate(value=value, space="low")


def membership_matrix(distances, sigma: float) -> MembershipMatrix:
    """Gaussian membership exp(-dist^2 / (2 sigma^2)) for every point-center pair."""
    d = as_data_matrix(distances, "distances")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    values = np.exp(-(d * d) / (2.0 * sigma * sigma))
    return MembershipMatrix(values=values, sigma=float(sigma))


def frobenius_loss(u_low, u_high) -> float:
    """Frobenius norm of the difference between two membership matrices."""
    a = _values(u_low)
    b = _values(u_high)
    if a.shape != b.shape:
        raise ValueError(f"membership shape mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sqrt(np.sum(diff * diff)))


def loss_gradient(y, c_low, sigma: float, u_low, u_high, loss: float) -> np.ndarray:
    """Analytic gradient of the Frobenius loss with respect to the embedding rows.

    Each center j contributes, to point i and coordinate l,

        -((uL[i,j] - uH[i,j]) / loss) * uL[i,j] * (y[i,l] - c_low[j,l]) / sigma**2

    and contributions are summed over j. The point-to-center distance cancels
    between the kernel derivative and the distance derivative, so points that
    sit exactly on a center are well defined. At (numerically) zero loss the
    gradient is the zero matrix.
    """
    y = as_data_matrix(y, "y")
    c = as_data_matrix(c_low, "c_low")
    if y.shape[1] != c.shape[1]:
        raise ValueError(f"column mismatch: y has shape {y.shape}, c_low has shape {c.shape}")
    ul = _values(u_low)
    uh = _values(u_high)
    if ul.shape != uh.shape or ul.shape != (y.shape[0], c.shape[0]):
        raise ValueError(
            f"membership shapes {ul.shape} and {uh.shape} do not match "
            f"{(y.shape[0], c.shape[0])} points x centers"
        )
    if loss <= GRADIENT_LOSS_FLOOR:
        return np.zeros_like(y)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    w = -(ul - uh) * ul / (loss * sigma * sigma)
    return y * w.sum(axis=1, keepdims=True) - w @ c
