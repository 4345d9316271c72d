"""Reduced PointNet++ victim: two single-scale set-abstraction levels, a
global abstraction, and a dense head.

Centroid counts clamp to the current cloud size so defense-reduced clouds
(fewer points than the spec asks for) still classify.
"""

import numpy as np
import torch

from ..layers import GlobalAbstraction, LevelSpec, SetAbstraction, stack_level_indices
from .base import DenseHead, VictimClassifier

DEFAULT_LEVELS = (
    (64, 0.25, (32, 32, 64), 32),
    (16, 0.5, (64, 64, 128), 32),
)


class PointNetPPNet(torch.nn.Module):
    def __init__(self, n_classes, level_specs, global_widths, head_widths, dropout, rng):
        super().__init__()
        self.specs = [LevelSpec(m, r, tuple(w), cap) for m, r, w, cap in level_specs]
        blocks = []
        in_channels = 0  # level 1 groups carry relative coords only
        for spec in self.specs:
            blocks.append(SetAbstraction(spec.widths, in_channels, rng))
            in_channels = spec.widths[-1]
        self.levels = torch.nn.ModuleList(blocks)
        self.global_level = GlobalAbstraction(tuple(global_widths), in_channels, rng)
        self.head = DenseHead((global_widths[-1], *head_widths, n_classes), rng, dropout)

    def forward(self, coords):
        feats = None
        clouds = coords.detach().cpu().numpy().astype(np.float64)
        for spec, block in zip(self.specs, self.levels):
            centroid_idx, group_idx = stack_level_indices(clouds, spec, clamp=True)
            coords, feats = block(coords, feats, centroid_idx, group_idx)
            clouds = coords.detach().cpu().numpy().astype(np.float64)
        return self.head(self.global_level(coords, feats))


class PointNetPPClassifier(VictimClassifier):
    """Hierarchical victim: set-abstraction levels given as
    (n_centroids, radius, mlp_widths, neighbor_cap) tuples."""

    arch = "pointnetpp"

    def __init__(
        self,
        levels=DEFAULT_LEVELS,
        global_widths=(128, 256),
        head_widths=(128,),
        dropout=0.0,
        epochs=40,
        batch_size=16,
        lr=1e-3,
        seed=0,
        verbose=False,
    ):
        self.levels = levels
        self.global_widths = global_widths
        self.head_widths = head_widths
        self.dropout = dropout
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.verbose = verbose

    def _build_net(self, n_classes, rng):
        return PointNetPPNet(
            n_classes,
            tuple(tuple(level) for level in self.levels),
            tuple(self.global_widths),
            tuple(self.head_widths),
            self.dropout,
            rng,
        )
