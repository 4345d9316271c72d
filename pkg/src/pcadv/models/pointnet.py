"""PointNet victim: shared per-point MLP, global max pool, dense head.

No spatial transformer by default; the attack mechanics do not depend on it
and omitting it keeps gradient checks tractable (a T-Net can be bolted on
via `use_tnet=True`).
"""

import numpy as np
import torch

from .. import ops
from .base import DenseHead, VictimClassifier


class TNet(torch.nn.Module):
    """3x3 input-alignment transform (off by default)."""

    def __init__(self, rng, widths=(64, 128, 256)):
        super().__init__()
        self.point_mlp = ops.PointwiseMLP((3, *widths), rng)
        self.head = DenseHead((widths[-1], 128, 9), rng)

    def forward(self, coords):
        pooled = ops.max_pool_group(self.point_mlp(coords))
        mat = self.head(pooled).reshape(-1, 3, 3)
        eye = torch.eye(3, dtype=mat.dtype, device=mat.device)
        return torch.bmm(coords, mat + eye)


class PointNetNet(torch.nn.Module):
    def __init__(self, n_classes, point_widths, head_widths, dropout, use_tnet, rng):
        super().__init__()
        self.tnet = TNet(rng) if use_tnet else None
        self.point_mlp = ops.PointwiseMLP((3, *point_widths), rng)
        self.head = DenseHead((point_widths[-1], *head_widths, n_classes), rng, dropout)

    def forward(self, coords):
        # coords (B, N, 3) -> logits (B, C)
        if self.tnet is not None:
            coords = self.tnet(coords)
        return self.head(ops.max_pool_group(self.point_mlp(coords)))


class PointNetClassifier(VictimClassifier):
    """Victim classifier with per-point widths (64, 64, 64, 128, 1024),
    global max pooling, and a (512, 256, C) dense head."""

    arch = "pointnet"

    def __init__(
        self,
        point_widths=(64, 64, 64, 128, 1024),
        head_widths=(512, 256),
        dropout=0.0,
        use_tnet=False,
        epochs=60,
        batch_size=32,
        lr=1e-3,
        seed=0,
        verbose=False,
    ):
        self.point_widths = point_widths
        self.head_widths = head_widths
        self.dropout = dropout
        self.use_tnet = use_tnet
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.verbose = verbose

    def _build_net(self, n_classes, rng):
        return PointNetNet(
            n_classes,
            tuple(self.point_widths),
            tuple(self.head_widths),
            self.dropout,
            self.use_tnet,
            rng,
        )
