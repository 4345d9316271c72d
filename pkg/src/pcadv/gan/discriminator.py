"""Graph-patch discriminator: pointwise feature head with k-NN max-pool
aggregation, one FPS pool block, residual graph-convolution blocks, and a
global score head.

The graph convolution is bias-free: f_out(x) = W_self f_in(x) +
W_neighbor sum_{q in N(x)} f_in(q), where N(x) is the k nearest OTHER
points (the separate self term makes self-inclusion redundant).
"""

from dataclasses import dataclass

import numpy as np
import torch

from .. import geometry as geo
from .. import ops

HEAD_WIDTHS = (32, 64)
BLOCK_CHANNELS = 64
POOL_DIVISOR = 4
N_RESIDUAL_BLOCKS = 2


def knn_indices(points, k, include_self):
    """k-NN index matrix (n, k) over one cloud; optionally excluding each
    point itself (for Eq-style graphs with an explicit self term)."""
    pts = np.asarray(points, dtype=np.float64)
    if include_self:
        idx, _ = geo.knn(pts, pts, k)
        return idx
    idx, _ = geo.knn(pts, pts, k + 1)
    # drop each row's own index (first by distance 0, else wherever ties put it)
    own = np.arange(pts.shape[0])[:, None]
    keep = idx != own
    # rows where the point is duplicated may keep all k+1; trim to k
    out = np.empty((pts.shape[0], k), dtype=np.int64)
    for i in range(pts.shape[0]):
        row = idx[i][keep[i]]
        out[i] = row[:k] if row.size >= k else idx[i][idx[i] != i][:k]
    return out


def graph_convolution(features, neighbor_idx, w_self, w_neighbor):
    """Bias-free graph convolution on (B, n, c) features with (B, n, k)
    neighbor indices and (c_out, c_in) weight matrices."""
    if features.shape[1] != neighbor_idx.shape[1]:
        raise ValueError(
            f"graph/feature misalignment: {neighbor_idx.shape[1]} vertices vs "
            f"{features.shape[1]} feature rows"
        )
    neighbor_sum = ops.gather_points(features, neighbor_idx).sum(dim=2)
    return features @ w_self.T + neighbor_sum @ w_neighbor.T


class GraphConv(torch.nn.Module):
    def __init__(self, in_channels, out_channels, rng):
        super().__init__()
        self.self_weight = torch.nn.Linear(in_channels, out_channels, bias=False)
        self.neighbor_weight = torch.nn.Linear(in_channels, out_channels, bias=False)
        ops.init_linear(self.self_weight, rng)
        ops.init_linear(self.neighbor_weight, rng)

    def forward(self, features, neighbor_idx):
        return graph_convolution(
            features, neighbor_idx, self.self_weight.weight, self.neighbor_weight.weight
        )


class ResidualGraphBlock(torch.nn.Module):
    """conv -> ReLU -> conv plus the skip path; output width equals input
    width, and zeroed conv weights make the block an exact identity."""

    def __init__(self, channels, rng):
        super().__init__()
        self.conv1 = GraphConv(channels, channels, rng)
        self.conv2 = GraphConv(channels, channels, rng)

    def forward(self, features, neighbor_idx):
        h = torch.relu(self.conv1(features, neighbor_idx))
        return features + self.conv2(h, neighbor_idx)


@dataclass
class DiscriminatorGeometry:
    head_idx: np.ndarray   # (n, k) k-NN incl. self for head aggregation
    seed_idx: np.ndarray   # (n/4,) FPS pool seeds
    pool_idx: np.ndarray   # (n/4, k) k-NN of seeds over the full cloud
    graph_idx: np.ndarray  # (n/4, k) exclude-self k-NN among seeds


def discriminator_geometry(points, k=8, pool_divisor=POOL_DIVISOR):
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    head_idx, _ = geo.knn(pts, pts, min(k, n))
    m = max(1, n // pool_divisor)
    seed_idx = geo.farthest_point_sample(pts, m, geo.centroid_seed_index(pts))
    pool_idx, _ = geo.knn(pts[seed_idx], pts, min(k, n))
    graph_idx = knn_indices(pts[seed_idx], min(k, m - 1) if m > 1 else 1, include_self=m == 1)
    return DiscriminatorGeometry(head_idx, seed_idx, pool_idx, graph_idx)


def stack_discriminator_geometries(geoms):
    return tuple(
        torch.from_numpy(np.stack([getattr(g, name) for g in geoms]))
        for name in ("head_idx", "seed_idx", "pool_idx", "graph_idx")
    )


class Discriminator(torch.nn.Module):
    """Scalar realism score per cloud (or per patch with patch_scores)."""

    def __init__(self, rng, k=8, patch_scores=False):
        super().__init__()
        self.k = k
        self.patch_scores = patch_scores
        self.head = ops.PointwiseMLP((3, *HEAD_WIDTHS), rng)
        self.blocks = torch.nn.ModuleList(
            ResidualGraphBlock(BLOCK_CHANNELS, rng) for _ in range(N_RESIDUAL_BLOCKS)
        )
        self.score = torch.nn.Linear(BLOCK_CHANNELS, 1)
        ops.init_linear(self.score, rng)

    def geometry(self, points):
        return discriminator_geometry(points, self.k)

    def forward(self, coords, geometry=None):
        """coords (B, N, 3) -> scores (B,) (or (B, N/4) patch scores)."""
        if geometry is None:
            geometry = stack_discriminator_geometries(
                [self.geometry(c) for c in coords.detach().cpu().numpy().astype(np.float64)]
            )
        head_idx, seed_idx, pool_idx, graph_idx = geometry
        h = self.head(coords)
        h = ops.max_pool_group(ops.gather_points(h, head_idx))
        h = ops.max_pool_group(ops.gather_points(h, pool_idx))
        for block in self.blocks:
            h = block(h, graph_idx)
        if self.patch_scores:
            return self.score(h).squeeze(-1)
        return self.score(ops.max_pool_group(h)).squeeze(-1)
