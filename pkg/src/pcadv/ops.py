"""Differentiable operator substrate: the torch primitives every network in
this package is assembled from, plus differentiable set distances used by
losses and optimization-based attacks.

Forward conventions: per-point feature tensors are (..., n_points, channels);
grouped neighbor stacks are (..., n_points, group_size, channels). Parameters
are initialized from an explicit numpy Generator (fan-in scaled uniform
weights, zero biases) so runs are reproducible independent of torch's global
RNG state.
"""

import numpy as np
import torch
from torch import nn


def init_linear(layer, rng):
    """Fan-in scaled uniform init: W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), b = 0."""
    fan_in = layer.weight.shape[1]
    bound = 1.0 / np.sqrt(fan_in)
    w = rng.uniform(-bound, bound, size=tuple(layer.weight.shape))
    with torch.no_grad():
        layer.weight.copy_(torch.from_numpy(w).to(layer.weight.dtype))
        if layer.bias is not None:
            layer.bias.zero_()


class PointwiseMLP(nn.Module):
    """Shared per-point transform: a Linear+ReLU stack applied identically to
    every point row. The final layer's ReLU is dropped when final_activation
    is False (coordinate/logit heads)."""

    def __init__(self, widths, rng, final_activation=True):
        super().__init__()
        if len(widths) < 2:
            raise ValueError("widths needs an input and at least one output size")
        self.layers = nn.ModuleList(
            nn.Linear(widths[i], widths[i + 1]) for i in range(len(widths) - 1)
        )
        self.final_activation = final_activation
        for layer in self.layers:
            init_linear(layer, rng)

    def forward(self, x):
        if x.shape[-1] != self.layers[0].in_features:
            raise ValueError(
                f"expected {self.layers[0].in_features} input channels, got {x.shape[-1]}"
            )
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1 or self.final_activation:
                x = torch.relu(x)
        return x


def max_pool_group(grouped):
    """Elementwise max over each group's rows: (..., group, C) -> (..., C).

    torch.max routes the subgradient to the (first) argmax element.
    """
    if grouped.shape[-2] == 0:
        raise ValueError("cannot max-pool an empty group")
    return grouped.max(dim=-2).values


def softmax_cross_entropy(logits, target):
    """Cross-entropy -log softmax(logits)[target], max-shift stabilized.

    Accepts a (C,) vector with an int target or a (B, C) batch with (B,)
    targets (returns the batch mean).
    """
    if logits.dim() == 1:
        logits = logits.unsqueeze(0)
        target = torch.as_tensor([int(target)], device=logits.device)
    else:
        target = torch.as_tensor(target, device=logits.device).long().reshape(-1)
    n_classes = logits.shape[-1]
    if target.min() < 0 or target.max() >= n_classes:
        raise ValueError(f"target out of range for {n_classes} classes")
    log_z = torch.logsumexp(logits, dim=-1)
    picked = logits.gather(1, target.unsqueeze(1)).squeeze(1)
    return (log_z - picked).mean()


def gather_points(values, idx):
    """Batched row gather: values (B, n, C), idx (B, m[, k]) -> (B, m[, k], C)."""
    batch = torch.arange(values.shape[0], device=values.device)
    if idx.dim() == 2:
        return values[batch[:, None], idx]
    return values[batch[:, None, None], idx]


# ---------------------------------------------------------------------------
# differentiable set distances (numpy twins live in geometry.py; tests pin
# both routes to the same values)

def _cross_distances(a, b, eps=1e-12):
    diff = a[:, :, None, :] - b[:, None, :, :]
    return torch.sqrt(diff.pow(2).sum(-1) + eps)


def paired_l2(a, b):
    """Mean per-point Euclidean displacement; (B, N, 3) x (B, N, 3) -> scalar."""
    return torch.sqrt((a - b).pow(2).sum(-1) + 1e-12).mean()


def mean_squared_displacement(a, b):
    """Mean over points of the squared per-point displacement norm."""
    return (a - b).pow(2).sum(-1).mean()


def chamfer(a, b):
    """Symmetric Chamfer distance, averaged over the batch."""
    d = _cross_distances(a, b)
    return 0.5 * (d.min(dim=2).values.mean() + d.min(dim=1).values.mean())


def hausdorff(a, b):
    """Symmetric Hausdorff distance, averaged over the batch."""
    d = _cross_distances(a, b)
    fwd = d.min(dim=2).values.max(dim=1).values
    bwd = d.min(dim=1).values.max(dim=1).values
    return torch.maximum(fwd, bwd).mean()
