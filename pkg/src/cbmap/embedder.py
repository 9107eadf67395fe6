"""Fitting and applying the embedding.

The pipeline clusters the input, converts point-to-center distances into a
Gaussian membership matrix, and then moves low-dimensional point positions by
Adam so that the low-dimensional membership matrix matches the high-dimensional
one. Low-dimensional centers track the moving points (using the original
cluster labels) and are re-normalized every iteration.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import membership as mb
from .clustering import KmeansConfig, kmeans_fit
from .linalg_core import (
    PcaModel,
    as_data_matrix,
    euclidean_distance_matrix,
    pca_fit,
    pca_transform,
    zscore_normalize,
)

MODEL_FORMAT_VERSION = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

_CENTER_INITS = ("pca", "random")


@dataclass(frozen=True)
class CbmapConfig:
    """Embedding parameters.

    ``clustering`` defaults to a KmeansConfig built from ``n_clusters`` and
    ``seed`` at fit time. ``center_init`` chooses how low-dimensional centers
    start: a PCA projection of the high-dimensional centers, or a seeded
    Gaussian draw; both are z-scored before use.
    """

    n_clusters: int
    out_dim: int = 2
    max_iter: int = 500
    learning_rate: float = 0.1
    center_init: str = "pca"
    clustering: KmeansConfig | None = None
    init_noise_std: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n_clusters < 2:
            raise ValueError(f"n_clusters must be at least 2, got {self.n_clusters}")
        if self.out_dim < 1:
            raise ValueError(f"out_dim must be at least 1, got {self.out_dim}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.center_init not in _CENTER_INITS:
            raise ValueError(f"center_init must be one of {_CENTER_INITS}, got {self.center_init!r}")
        if self.init_noise_std <= 0:
            raise ValueError(f"init_noise_std must be positive, got {self.init_noise_std}")


@dataclass(frozen=True)
class CbmapModel:
    """Everything needed to embed new points with a frozen fit."""

    centers_high: np.ndarray  # (k, d)
    centers_low: np.ndarray  # (k, m)
    sigma_high: float
    sigma_low: float
    config: CbmapConfig
    center_pca: PcaModel | None = None
    feature_scaler: tuple[np.ndarray, np.ndarray] | None = None  # (mean, std) applied upstream


@dataclass(frozen=True)
class FitResult:
    embedding: np.ndarray  # (n, m)
    loss_history: np.ndarray  # (max_iter,)
    model: CbmapModel
    labels: np.ndarray  # (n,) cluster labels from the high-dimensional fit


@dataclass
class AdamState:
    """First/second moment accumulators; persists across iterations."""

    mean: np.ndarray
    variance: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "AdamState":
        return cls(mean=np.zeros(shape), variance=np.zeros(shape))


def adam_update(y, grad, state: AdamState, learning_rate: float, step_index: int):
    """One bias-corrected Adam step; returns the new positions and state."""
    if step_index < 1:
        raise ValueError(f"step_index must be at least 1, got {step_index}")
    mean = ADAM_BETA1 * state.mean + (1.0 - ADAM_BETA1) * grad
    variance = ADAM_BETA2 * state.variance + (1.0 - ADAM_BETA2) * grad * grad
    mean_hat = mean / (1.0 - ADAM_BETA1**step_index)
    variance_hat = variance / (1.0 - ADAM_BETA2**step_index)
    y_new = y - learning_rate * mean_hat / (np.sqrt(variance_hat) + ADAM_EPS)
    return y_new, AdamState(mean=mean, variance=variance)


def init_embedding(labels, centers_low, noise_std: float, seed) -> np.ndarray:
    """Start every point at its cluster's low-dimensional center plus Gaussian noise."""
    centers_low = as_data_matrix(centers_low, "centers_low")
    labels = np.asarray(labels)
    if noise_std <= 0:
        raise ValueError(f"noise_std must be positive, got {noise_std}")
    if labels.min() < 0 or labels.max() >= centers_low.shape[0]:
        raise ValueError(f"labels must lie in [0, {centers_low.shape[0]}), got range "
                         f"[{labels.min()}, {labels.max()}]")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((labels.shape[0], centers_low.shape[1])) * noise_std
    return centers_low[labels] + noise


def update_centers(y, labels, k: int, previous=None) -> np.ndarray:
    """Mean embedding position per cluster label.

    A label with no points keeps its previous center (required whenever that
    can happen, hence the ``previous`` argument).
    """
    y = as_data_matrix(y, "y")
    labels = np.asarray(labels)
    counts = np.bincount(labels, minlength=k)
    if previous is None:
        if (counts == 0).any():
            missing = int(np.flatnonzero(counts == 0)[0])
            raise ValueError(f"cluster {missing} has no points and no previous center was given")
        centers = np.empty((k, y.shape[1]))
    else:
        centers = np.asarray(previous, dtype=np.float64).copy()
        if centers.shape != (k, y.shape[1]):
            raise ValueError(f"previous centers have shape {centers.shape}, expected {(k, y.shape[1])}")
    occupied = counts > 0
    for col in range(y.shape[1]):
        sums = np.bincount(labels, weights=y[:, col], minlength=k)
        centers[occupied, col] = sums[occupied] / counts[occupied]
    return centers


def fit(x, cfg: CbmapConfig) -> FitResult:
    """Embed ``x`` into ``cfg.out_dim`` dimensions.

    Steps: cluster, estimate the high-dimensional bandwidth and membership
    matrix once, initialize low-dimensional centers (PCA of the
    high-dimensional centers, or random) and point positions, then iterate:
    recompute the low-dimensional membership matrix, take an Adam step on the
    point positions along the loss gradient, recompute centers from the
    original cluster labels, z-score them, and refresh the low bandwidth.
    The Adam state is carried across iterations, not reset.
    """
    x = as_data_matrix(x, "x")
    n, d = x.shape
    if cfg.out_dim >= d:
        raise ValueError(f"out_dim={cfg.out_dim} must be smaller than the input dimension {d}")
    if cfg.n_clusters > n:
        raise ValueError(f"n_clusters={cfg.n_clusters} exceeds the number of points n={n}")
    kcfg = cfg.clustering
    if kcfg is None:
        kcfg = KmeansConfig(k=cfg.n_clusters, seed=cfg.seed)
    elif kcfg.k != cfg.n_clusters:
        raise ValueError(f"clustering.k={kcfg.k} disagrees with n_clusters={cfg.n_clusters}")

    assignment = kmeans_fit(x, kcfg)
    labels = assignment.labels
    centers_high = assignment.centers

    dist_high = euclidean_distance_matrix(x, centers_high)
    s_high = mb.sigma_high(dist_high)
    u_high = mb.membership_matrix(dist_high, s_high.value)

    # Independent streams for the center draw and the point-noise draw.
    seed_centers, seed_points = np.random.SeedSequence(cfg.seed).spawn(2)
    center_pca = None
    if cfg.center_init == "pca" and cfg.n_clusters > cfg.out_dim:
        center_pca = pca_fit(centers_high, cfg.out_dim)
        centers_low = pca_transform(center_pca, centers_high)
    else:
        if cfg.center_init == "pca":
            warnings.warn(
                f"n_clusters={cfg.n_clusters} <= out_dim={cfg.out_dim}; "
                "falling back to random center initialization"
            )
        centers_low = np.random.default_rng(seed_centers).standard_normal(
            (cfg.n_clusters, cfg.out_dim)
        )
    centers_low = zscore_normalize(centers_low)
    s_low = mb.sigma_low(centers_low)

    y = init_embedding(labels, centers_low, cfg.init_noise_std, seed_points)
    state = AdamState.zeros(y.shape)
    history = np.empty(cfg.max_iter)
    for it in range(cfg.max_iter):
        dist_low = euclidean_distance_matrix(y, centers_low)
        u_low = mb.membership_matrix(dist_low, s_low.value)
        loss = mb.frobenius_loss(u_low, u_high)
        history[it] = loss
        grad = mb.loss_gradient(y, centers_low, s_low.value, u_low, u_high, loss)
        y, state = adam_update(y, grad, state, cfg.learning_rate, it + 1)
        centers_low = update_centers(y, labels, cfg.n_clusters, previous=centers_low)
        centers_low = zscore_normalize(centers_low)
        s_low = mb.sigma_low(centers_low)

    model = CbmapModel(
        centers_high=centers_high,
        centers_low=centers_low,
        sigma_high=s_high.value,
        sigma_low=s_low.value,
        config=replace(cfg, clustering=kcfg),
        center_pca=center_pca,
    )
    return FitResult(embedding=y, loss_history=history, model=model, labels=labels)


def transform(model: CbmapModel, x_new, iters: int = 300, seed=None) -> np.ndarray:
    """Embed new points with a frozen model.

    Memberships of the new points use the stored high-dimensional centers and
    bandwidth; each point starts at the low-dimensional center it is most
    strongly a member of (plus seeded noise) and is refined by Adam while the
    centers and low bandwidth stay fixed.
    """
    x = as_data_matrix(x_new, "x_new")
    d = model.centers_high.shape[1]
    if x.shape[1] != d:
        raise ValueError(f"x_new has {x.shape[1]} columns, model expects {d}")
    if iters < 1:
        raise ValueError(f"iters must be at least 1, got {iters}")
    cfg = model.config

    dist_high = euclidean_distance_matrix(x, model.centers_high)
    u_high = mb.membership_matrix(dist_high, model.sigma_high)
    # argmax membership == argmin distance, and stays well defined when every
    # membership in a row underflows to zero
    nearest = np.argmin(dist_high, axis=1)

    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    noise = rng.standard_normal((x.shape[0], model.centers_low.shape[1])) * cfg.init_noise_std
    y = model.centers_low[nearest] + noise

    state = AdamState.zeros(y.shape)
    for it in range(iters):
        dist_low = euclidean_distance_matrix(y, model.centers_low)
        u_low = mb.membership_matrix(dist_low, model.sigma_low)
        loss = mb.frobenius_loss(u_low, u_high)
        grad = mb.loss_gradient(y, model.centers_low, model.sigma_low, u_low, u_high, loss)
        y, state = adam_update(y, grad, state, cfg.learning_rate, it + 1)
    return y


def _config_to_dict(cfg: CbmapConfig, scaler) -> dict:
    doc = {
        "n_clusters": cfg.n_clusters,
        "out_dim": cfg.out_dim,
        "max_iter": cfg.max_iter,
        "learning_rate": cfg.learning_rate,
        "center_init": cfg.center_init,
        "init_noise_std": cfg.init_noise_std,
        "seed": cfg.seed,
        "clustering": None,
        "feature_scaler": None,
    }
    if cfg.clustering is not None:
        kc = cfg.clustering
        doc["clustering"] = {
            "k": kc.k,
            "mode": kc.mode,
            "batch_size": kc.batch_size,
            "max_iters": kc.max_iters,
            "seed": kc.seed,
            "n_init": kc.n_init,
        }
    if scaler is not None:
        mean, std = scaler
        doc["feature_scaler"] = {"mean": list(map(float, mean)), "std": list(map(float, std))}
    return doc


def model_to_dict(model: CbmapModel) -> dict:
    """JSON-ready document; center arrays are flattened row-major."""
    k, d = model.centers_high.shape
    m = model.centers_low.shape[1]
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "k": k,
        "d": d,
        "m": m,
        "centers_high": [float(v) for v in model.centers_high.ravel()],
        "centers_low": [float(v) for v in model.centers_low.ravel()],
        "sigma_high": float(model.sigma_high),
        "sigma_low": float(model.sigma_low),
        "config": _config_to_dict(model.config, model.feature_scaler),
        "center_pca": None,
    }
    if model.center_pca is not None:
        doc["center_pca"] = {
            "mean": [float(v) for v in model.center_pca.mean],
            "components": [float(v) for v in model.center_pca.components.ravel()],
        }
    return doc


def save_model(model: CbmapModel, path) -> None:
    """Write the model as JSON.

    Floats are serialized with Python's shortest round-trip representation,
    so reloading reproduces every value bit-for-bit.
    """
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def _reshape(values, shape, what):
    arr = np.asarray(values, dtype=np.float64)
    expected = int(np.prod(shape))
    if arr.ndim != 1 or arr.shape[0] != expected:
        raise ValueError(f"model field {what!r} has {arr.size} values, expected {expected}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"model field {what!r} contains non-finite values")
    return arr.reshape(shape)


def load_model(path) -> CbmapModel:
    """Read a model written by :func:`save_model`, validating version and shapes."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: model file must contain a JSON object")
    version = doc.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(
            f"{path}: unsupported model version {version!r}; expected {MODEL_FORMAT_VERSION}"
        )
    try:
        k, d, m = int(doc["k"]), int(doc["d"]), int(doc["m"])
        cfg_doc = doc["config"]
        kcfg = None
        if cfg_doc.get("clustering") is not None:
            kc = cfg_doc["clustering"]
            kcfg = KmeansConfig(
                k=int(kc["k"]),
                mode=str(kc["mode"]),
                batch_size=int(kc["batch_size"]),
                max_iters=int(kc["max_iters"]),
                seed=int(kc["seed"]),
                n_init=int(kc["n_init"]),
            )
        cfg = CbmapConfig(
            n_clusters=int(cfg_doc["n_clusters"]),
            out_dim=int(cfg_doc["out_dim"]),
            max_iter=int(cfg_doc["max_iter"]),
            learning_rate=float(cfg_doc["learning_rate"]),
            center_init=str(cfg_doc["center_init"]),
            clustering=kcfg,
            init_noise_std=float(cfg_doc["init_noise_std"]),
            seed=int(cfg_doc["seed"]),
        )
        scaler = None
        if cfg_doc.get("feature_scaler") is not None:
            sc = cfg_doc["feature_scaler"]
            scaler = (
                _reshape(sc["mean"], (d,), "feature_scaler.mean"),
                _reshape(sc["std"], (d,), "feature_scaler.std"),
            )
        center_pca = None
        if doc.get("center_pca") is not None:
            cp = doc["center_pca"]
            center_pca = PcaModel(
                mean=_reshape(cp["mean"], (d,), "center_pca.mean"),
                components=_reshape(cp["components"], (m, d), "center_pca.components"),
                explained_variance=None,
            )
        sigma_high = float(doc["sigma_high"])
        sigma_low = float(doc["sigma_low"])
        if sigma_high <= 0 or sigma_low <= 0:
            raise ValueError(f"bandwidths must be positive, got {sigma_high} and {sigma_low}")
        return CbmapModel(
            centers_high=_reshape(doc["centers_high"], (k, d), "centers_high"),
            centers_low=_reshape(doc["centers_low"], (k, m), "centers_low"),
            sigma_high=sigma_high,
            sigma_low=sigma_low,
            config=cfg,
            center_pca=center_pca,
            feature_scaler=scaler,
        )
    except KeyError as exc:
        raise ValueError(f"{path}: model file is missing field {exc}") from None
