"""Label-guided generator: hierarchical point encoder, one-hot label
encoder, and a coordinate-reconstruction decoder with per-layer label
concatenation.

The encoder samples the cloud into four scales (N, N/2, N/4, N/8) with
set-abstraction levels (N, 0.05, [32,32,64]), (N/2, 0.1, [64,64,128]),
(N/4, 0.2, [128,128,256]), (N/8, 0.3, [256,256,512]) and 32-point ball
neighborhoods, so level i holds N/2^(i-1) points with 64*2^(i-1) channels.
The decoder upsamples every level back to all N points by inverse-distance
3-NN interpolation, reduces each to 64 channels, concatenates them with the
raw coordinates (4*64 + 3 = 259 channels), and reconstructs coordinates
through pointwise dense layers of widths 256, 128, 64, each preceded by
concatenating the target's one-hot code (first layer only in single-layer
mode), ending in a 3-channel linear layer.
"""

from dataclasses import dataclass

import numpy as np
import torch

from .. import geometry as geo
from .. import ops
from ..layers import SetAbstraction

# (points divisor, ball radius, mlp widths); neighbor cap 32 throughout
DEFAULT_LEVEL_PARAMS = (
    (1, 0.05, (32, 32, 64)),
    (2, 0.1, (64, 64, 128)),
    (4, 0.2, (128, 128, 256)),
    (8, 0.3, (256, 256, 512)),
)
DECODER_WIDTHS = (256, 128, 64)
REDUCED_CHANNELS = 64


@dataclass
class GeneratorGeometry:
    """Discrete indices for one cloud: per-level (centroid_idx, group_idx)
    plus per-level 3-NN interpolation (idx, weights) back to all N points."""

    levels: list  # [(centroid_idx (m_i,), group_idx (m_i, cap))]
    interp: list  # [(idx (N, 3), weights (N, 3))]


def generator_geometry(points, level_params=DEFAULT_LEVEL_PARAMS, neighbor_cap=32):
    """Compute all discrete sampling/grouping/interpolation indices for one
    (N, 3) cloud. Depends only on the input coordinates, so it is cached per
    training cloud."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n % 8 != 0:
        raise ValueError(f"point count must be divisible by 8, got {n}")
    levels, interp = [], []
    current = pts
    for divisor, radius, _ in level_params:
        m = n // divisor
        if m == current.shape[0]:
            centroid_idx = np.arange(m, dtype=np.int64)
        else:
            centroid_idx = geo.farthest_point_sample(
                current, m, geo.centroid_seed_index(current)
            )
        sampled = current[centroid_idx]
        group_idx, _, _ = geo.ball_query(
            sampled, current, radius, min(neighbor_cap, current.shape[0])
        )
        levels.append((centroid_idx, group_idx))
        interp.append(geo.interpolation_weights(pts, sampled))
        current = sampled
    return GeneratorGeometry(levels, interp)


def stack_geometries(geoms):
    """Batch per-cloud geometries into torch index/weight tensors."""
    n_levels = len(geoms[0].levels)
    levels, interp = [], []
    for i in range(n_levels):
        levels.append(
            (
                torch.from_numpy(np.stack([g.levels[i][0] for g in geoms])),
                torch.from_numpy(np.stack([g.levels[i][1] for g in geoms])),
            )
        )
        interp.append(
            (
                torch.from_numpy(np.stack([g.interp[i][0] for g in geoms])),
                torch.from_numpy(np.stack([g.interp[i][1] for g in geoms]).astype(np.float32)),
            )
        )
    return levels, interp


def encode_label(targets, n_classes, n_layers):
    """One-hot label code replicated for each concatenation layer:
    (B,) int targets -> (n_layers, B, n_classes) float."""
    t = torch.as_tensor(targets).long().reshape(-1)
    if t.min() < 0 or t.max() >= n_classes:
        raise ValueError(f"target out of range for {n_classes} classes")
    onehot = torch.nn.functional.one_hot(t, n_classes).float()
    return onehot.unsqueeze(0).expand(n_layers, -1, -1)


class PointEncoder(torch.nn.Module):
    """Four-scale hierarchical feature pyramid."""

    def __init__(self, rng, level_params=DEFAULT_LEVEL_PARAMS):
        super().__init__()
        self.level_params = tuple(level_params)
        blocks = []
        in_channels = 0
        for _, _, widths in self.level_params:
            blocks.append(SetAbstraction(tuple(widths), in_channels, rng))
            in_channels = widths[-1]
        self.blocks = torch.nn.ModuleList(blocks)

    def forward(self, coords, level_indices):
        """coords (B, N, 3); level_indices from stack_geometries.
        Returns [(coords_i (B, m_i, 3), feats_i (B, m_i, c_i))]."""
        pyramid = []
        feats = None
        for block, (centroid_idx, group_idx) in zip(self.blocks, level_indices):
            coords, feats = block(coords, feats, centroid_idx, group_idx)
            pyramid.append((coords, feats))
        return pyramid


class PointDecoder(torch.nn.Module):
    """Interpolate every level to all N points, fuse, and reconstruct
    coordinates with label-conditioned pointwise dense layers."""

    def __init__(self, n_classes, rng, level_params=DEFAULT_LEVEL_PARAMS, single_layer_label=False):
        super().__init__()
        self.n_classes = n_classes
        self.single_layer_label = single_layer_label
        self.reducers = torch.nn.ModuleList(
            ops.PointwiseMLP((widths[-1], REDUCED_CHANNELS), rng)
            for _, _, widths in level_params
        )
        fused = REDUCED_CHANNELS * len(level_params) + 3
        layers = []
        in_width = fused
        for i, width in enumerate(DECODER_WIDTHS):
            if i == 0 or not single_layer_label:
                in_width += n_classes
            layers.append(torch.nn.Linear(in_width, width))
            in_width = width
        layers.append(torch.nn.Linear(in_width, 3))
        self.fc = torch.nn.ModuleList(layers)
        for layer in self.fc:
            ops.init_linear(layer, rng)

    def forward(self, pyramid, label_code, coords, interp_indices):
        """pyramid from PointEncoder, label_code (layers, B, C), coords the
        original (B, N, 3) cloud, interp_indices from stack_geometries."""
        upsampled = []
        for (_, feats), (idx, weights), reducer in zip(pyramid, interp_indices, self.reducers):
            gathered = ops.gather_points(feats, idx)  # (B, N, 3, c)
            upsampled.append(reducer((gathered * weights.unsqueeze(-1)).sum(dim=2)))
        h = torch.cat([*upsampled, coords], dim=-1)
        n_points = h.shape[1]
        for i, layer in enumerate(self.fc):
            is_last = i == len(self.fc) - 1
            if not is_last and (i == 0 or not self.single_layer_label):
                code = label_code[min(i, label_code.shape[0] - 1)]
                per_point = code.unsqueeze(1).expand(-1, n_points, -1)
                h = torch.cat([per_point, h], dim=-1)
            h = layer(h)
            if not is_last:
                h = torch.relu(h)
        return h


class Generator(torch.nn.Module):
    """Full label-guided generator: adversarial cloud = decoder(label code,
    feature pyramid). Output point count always equals the input's."""

    def __init__(self, n_classes, rng, level_params=DEFAULT_LEVEL_PARAMS,
                 single_layer_label=False, neighbor_cap=32):
        super().__init__()
        self.n_classes = n_classes
        self.level_params = tuple(level_params)
        self.neighbor_cap = neighbor_cap
        self.n_label_layers = len(DECODER_WIDTHS)
        self.encoder = PointEncoder(rng, self.level_params)
        self.decoder = PointDecoder(n_classes, rng, self.level_params, single_layer_label)

    def geometry(self, points):
        return generator_geometry(points, self.level_params, self.neighbor_cap)

    def forward(self, coords, targets, geometry=None):
        """coords (B, N, 3) float32 tensor, targets (B,) ints."""
        if geometry is None:
            geometry = stack_geometries(
                [self.geometry(c) for c in coords.detach().cpu().numpy().astype(np.float64)]
            )
        level_indices, interp_indices = geometry
        label_code = encode_label(targets, self.n_classes, self.n_label_layers)
        pyramid = self.encoder(coords, level_indices)
        return self.decoder(pyramid, label_code, coords, interp_indices)
