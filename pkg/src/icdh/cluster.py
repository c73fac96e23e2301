"""K-Means over object pixels and selection of the dominant color.

Lloyd iterations from k-means++ seeding, best-of-restarts by inertia. The
implementation is self-contained so the per-iteration inertia trace can be
checked against the exhaustive-partition oracle in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .colors import Rgb8, rgb_to_decimal
from .detection import BoundingBox
from .errors import ValidationError
from .validation import check_image, check_point_matrix


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 5
    max_iters: int = 50
    tol: float = 0.5
    seed: int = 0
    restarts: int = 3

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.tol < 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")


@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray  # (k, d) float64
    counts: np.ndarray  # (k,) int64, members per cluster
    inertia: float
    labels: np.ndarray  # (n,) cluster index per input point
    inertia_history: tuple[float, ...]  # inertia after each assignment step of the winning restart


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, float]:
    d2 = _squared_distances(points, centroids)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(len(points)), labels].sum())
    return labels, inertia


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [points[rng.integers(len(points))]]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        probs = d2 / total
        idx = rng.choice(len(points), p=probs)
        centers.append(points[idx])
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return np.array(centers, dtype=np.float64)


def _update_centroids(points: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, bool]:
    k = len(centroids)
    new = centroids.copy()
    counts = np.bincount(labels, minlength=k)
    for j in range(k):
        if counts[j] > 0:
            new[j] = points[labels == j].mean(axis=0)
    reseeded = False
    for j in np.nonzero(counts == 0)[0]:
        # Reseed an emptied cluster to the point farthest from its nearest centroid.
        d2min = _squared_distances(points, new).min(axis=1)
        new[j] = points[int(np.argmax(d2min))]
        reseeded = True
    return new, reseeded


def _lloyd(points: np.ndarray, init: np.ndarray, max_iters: int, tol: float):
    centroids = init
    labels, inertia = _assign(points, centroids)
    history = [inertia]
    for _ in range(max_iters):
        new_centroids, reseeded = _update_centroids(points, labels, centroids)
        new_labels, new_inertia = _assign(points, new_centroids)
        history.append(new_inertia)
        shift = float(np.sqrt(np.sum((new_centroids - centroids) ** 2, axis=1)).max())
        converged = np.array_equal(new_labels, labels) or (not reseeded and shift <= tol)
        centroids, labels, inertia = new_centroids, new_labels, new_inertia
        if converged:
            break
    return centroids, labels, inertia, tuple(history)


def kmeans(points, config: KMeansConfig = KMeansConfig()) -> KMeansResult:
    """Best-of-restarts Lloyd clustering; deterministic given ``config.seed``.

    The effective cluster count is ``min(k, number of distinct points)`` so no
    restart can start with duplicate centers.
    """
    points = check_point_matrix(points)
    k_eff = min(config.k, len(np.unique(points, axis=0)))
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    best = None
    for seq in seeds:
        rng = np.random.Generator(np.random.PCG64(seq))
        init = _kmeans_pp_init(points, k_eff, rng)
        centroids, labels, inertia, history = _lloyd(points, init, config.max_iters, config.tol)
        if best is None or inertia < best[2]:
            best = (centroids, labels, inertia, history)
    centroids, labels, inertia, history = best
    counts = np.bincount(labels, minlength=k_eff)
    return KMeansResult(centroids, counts, inertia, labels, history)


class ColorKMeans(BaseEstimator):
    """Estimator wrapper around :func:`kmeans` (fit/predict, get_params)."""

    def __init__(self, n_clusters=5, max_iters=50, tol=0.5, seed=0, restarts=3):
        self.n_clusters = n_clusters
        self.max_iters = max_iters
        self.tol = tol
        self.seed = seed
        self.restarts = restarts

    def _config(self) -> KMeansConfig:
        return KMeansConfig(self.n_clusters, self.max_iters, self.tol, self.seed, self.restarts)

    def fit(self, X, y=None):
        result = kmeans(X, self._config())
        self.cluster_centers_ = result.centroids
        self.counts_ = result.counts
        self.labels_ = result.labels
        self.inertia_ = result.inertia
        self.inertia_history_ = result.inertia_history
        return self

    def predict(self, X):
        X = check_point_matrix(X, n_features=self.cluster_centers_.shape[1])
        labels, _ = _assign(X, self.cluster_centers_)
        return labels

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_


def sample_pixels(image, box: BoundingBox, max_samples: int = 4096, seed: int = 0) -> np.ndarray:
    """Pixels of ``box`` as (n, 3) float points; uniformly subsampled above ``max_samples``."""
    image = check_image(image)
    h, w = image.shape[:2]
    if box.x < 0 or box.y < 0 or box.x + box.w > w or box.y + box.h > h:
        raise ValidationError(f"box {box} outside {w}x{h} image")
    if max_samples < 1:
        raise ValueError(f"max_samples must be >= 1, got {max_samples}")
    patch = image[box.y : box.y + box.h, box.x : box.x + box.w]
    points = patch.reshape(-1, 3).astype(np.float64)
    if len(points) <= max_samples:
        return points
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = rng.choice(len(points), size=max_samples, replace=False)
    return points[idx]


def dominant_color(image, box: BoundingBox, config: KMeansConfig = KMeansConfig(), max_samples: int = 4096) -> Rgb8:
    """Centroid of the most populous cluster, rounded to 8-bit channels.

    Count ties break toward the centroid with the lower 24-bit decimal encoding.
    """
    points = sample_pixels(image, box, max_samples=max_samples, seed=config.seed)
    result = kmeans(points, config)
    rounded = [
        Rgb8(*(int(v) for v in np.clip(np.floor(c + 0.5), 0, 255)))
        for c in result.centroids
    ]
    order = sorted(range(len(rounded)), key=lambda j: (-result.counts[j], rgb_to_decimal(rounded[j])))
    return rounded[order[0]]
