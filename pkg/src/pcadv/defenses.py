"""Input-purification defenses used as gray-box evaluators: simple random
subsampling, statistical outlier removal, and re-centering.

All three are stateless sklearn transformers: srs/sor return subsets of the
input point set, recenter is a rigid translation. Functional cores are
exposed separately for single-cloud use.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import geometry as geo
from .validation import check_cloud, check_cloud_batch


def srs_defense(points, drop_ratio, rng):
    """Keep a uniformly random subset of ceil(N * (1 - drop_ratio)) points."""
    pts = check_cloud(points)
    if not 0.0 <= drop_ratio < 1.0:
        raise ValueError(f"drop_ratio must be in [0, 1), got {drop_ratio}")
    n = pts.shape[0]
    keep = int(np.ceil(n * (1.0 - drop_ratio)))
    if keep < 1:
        raise ValueError("drop_ratio would leave no points")
    idx = rng.permutation(n)[:keep]
    return pts[idx]


def sor_defense(points, k, alpha):
    """Statistical outlier removal: drop points whose mean distance to their
    k nearest other points exceeds mu + alpha * sigma, where mu and sigma
    are the (population) statistics of those mean distances over this cloud."""
    pts = check_cloud(points)
    n = pts.shape[0]
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the cloud size {n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    d = geo.pairwise_distances(pts, pts)
    np.fill_diagonal(d, np.inf)
    mean_knn = np.sort(d, axis=1)[:, :k].mean(axis=1)
    mu = mean_knn.mean()
    sigma = mean_knn.std()
    return pts[mean_knn <= mu + alpha * sigma]


def recenter_defense(points):
    """Subtract the centroid; no rescaling."""
    pts = check_cloud(points)
    return pts - pts.mean(axis=0, dtype=np.float64).astype(np.float32)


class SRSDefense(BaseEstimator, TransformerMixin):
    """Random point dropping. transform() derives a per-cloud child seed
    from (seed, cloud index) so batch results are deterministic."""

    name = "srs"

    def __init__(self, drop_ratio=0.75, seed=0):
        self.drop_ratio = drop_ratio
        self.seed = seed

    def fit(self, X=None, y=None):
        return self

    def apply(self, points, rng):
        return srs_defense(points, self.drop_ratio, rng)

    def transform(self, X):
        clouds = check_cloud_batch(X)
        return [
            srs_defense(c, self.drop_ratio, np.random.default_rng([self.seed, i]))
            for i, c in enumerate(clouds)
        ]


class SORDefense(BaseEstimator, TransformerMixin):
    name = "sor"

    def __init__(self, k=12, alpha=0.9):
        self.k = k
        self.alpha = alpha

    def fit(self, X=None, y=None):
        return self

    def apply(self, points, rng=None):
        return sor_defense(points, self.k, self.alpha)

    def transform(self, X):
        return [sor_defense(c, self.k, self.alpha) for c in check_cloud_batch(X)]


class RecenterDefense(BaseEstimator, TransformerMixin):
    name = "recenter"

    def __init__(self):
        pass

    def fit(self, X=None, y=None):
        return self

    def apply(self, points, rng=None):
        return recenter_defense(points)

    def transform(self, X):
        return [recenter_defense(c) for c in check_cloud_batch(X)]
