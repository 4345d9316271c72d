"""Hierarchical point-network building blocks shared by the victim
classifiers and the attack generator: sample-group-pool set abstraction
with ball neighborhoods.

Neighbor/centroid indices are discrete and come from the numpy kernels in
`geometry` (computed on detached coordinates); all continuous math happens
in torch so gradients flow through gathered coordinates and features.
"""

from dataclasses import dataclass

import numpy as np
import torch

from . import geometry as geo
from . import ops


@dataclass
class LevelSpec:
    """One sample-group-pool level: m centroids, ball radius, neighbor cap,
    and the shared MLP widths applied to grouped features."""

    n_centroids: int
    radius: float
    widths: tuple
    max_neighbors: int = 32


def level_indices(points, spec, clamp=False):
    """Centroid and group indices for one level of one cloud.

    points: (n, 3) numpy array (current level's coordinates).
    Returns (centroid_idx (m,), group_idx (m, max_neighbors)).
    FPS is seeded at the point closest to the centroid so the selection is
    canonical (independent of input ordering). With clamp=True the centroid
    count drops to n when the cloud is smaller than the spec asks for, which
    keeps victims usable on defense-reduced clouds.
    """
    n = points.shape[0]
    m = spec.n_centroids
    if clamp:
        m = min(m, n)
    if m > n:
        raise ValueError(f"level wants {m} centroids but cloud has {n} points")
    if m == n:
        centroid_idx = np.arange(n, dtype=np.int64)
    else:
        centroid_idx = geo.farthest_point_sample(points, m, geo.centroid_seed_index(points))
    group_idx, _, _ = geo.ball_query(
        points[centroid_idx], points, spec.radius, min(spec.max_neighbors, n)
    )
    return centroid_idx, group_idx


def stack_level_indices(clouds, spec, clamp=False):
    """level_indices over a batch of same-size clouds -> torch index tensors."""
    cent, grp = zip(*(level_indices(c, spec, clamp=clamp) for c in clouds))
    return (
        torch.from_numpy(np.stack(cent)),
        torch.from_numpy(np.stack(grp)),
    )


class SetAbstraction(torch.nn.Module):
    """FPS -> ball grouping -> shared MLP on [relative coords, features]
    -> per-group max pool."""

    def __init__(self, widths, in_channels, rng):
        super().__init__()
        self.mlp = ops.PointwiseMLP((in_channels + 3, *widths), rng)

    def forward(self, coords, feats, centroid_idx, group_idx):
        """coords (B, n, 3), feats (B, n, C) or None, indices from
        level_indices. Returns (new_coords (B, m, 3), new_feats (B, m, C'))."""
        new_coords = ops.gather_points(coords, centroid_idx)
        grouped = ops.gather_points(coords, group_idx) - new_coords.unsqueeze(2)
        if feats is not None:
            grouped = torch.cat([grouped, ops.gather_points(feats, group_idx)], dim=-1)
        return new_coords, ops.max_pool_group(self.mlp(grouped))


class GlobalAbstraction(torch.nn.Module):
    """Final whole-cloud level: shared MLP on [coords, features] rows, then
    a single max pool over all remaining points."""

    def __init__(self, widths, in_channels, rng):
        super().__init__()
        self.mlp = ops.PointwiseMLP((in_channels + 3, *widths), rng)

    def forward(self, coords, feats):
        rows = coords if feats is None else torch.cat([coords, feats], dim=-1)
        return ops.max_pool_group(self.mlp(rows))
