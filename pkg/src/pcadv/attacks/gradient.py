"""Gradient-based baseline attacks.

FGSM takes a single signed-gradient step toward the target; IFGM iterates
l2-normalized gradient steps with the cumulative perturbation clipped to an
l2 ball after every step. Both move AGAINST the gradient of the
cross-entropy toward the target (targeted descent).
"""

import time

import numpy as np
from sklearn.base import BaseEstimator

from ..validation import check_cloud, check_target
from .base import finalize_result


class FGSMAttack(BaseEstimator):
    """One step of size eps along -sign(grad): per-coordinate displacement
    is exactly eps wherever the gradient is nonzero."""

    name = "fgsm"

    def __init__(self, victim=None, eps=0.3):
        self.victim = victim
        self.eps = eps

    def attack(self, points, target):
        clean = check_cloud(points)
        target = check_target(target, self.victim.n_classes_)
        start = time.perf_counter()
        grad = self.victim.input_gradient(clean, target)
        adv = clean - self.eps * np.sign(grad).astype(np.float32)
        seconds = time.perf_counter() - start
        return finalize_result(clean, adv, target, self.victim, seconds)


class IFGMAttack(BaseEstimator):
    """Iterative l2-normalized gradient descent toward the target.

    normalize="cloud" divides by the flattened whole-cloud gradient norm
    (default); "point" normalizes each point's 3-vector instead. The
    cumulative perturbation is clipped to ||adv - clean||_2 <= eps after
    every step. Stops early (and records it) on a vanishing gradient.
    """

    name = "ifgm"

    def __init__(self, victim=None, eps=0.3, steps=10, step_size=None, normalize="cloud"):
        self.victim = victim
        self.eps = eps
        self.steps = steps
        self.step_size = step_size
        self.normalize = normalize

    def attack(self, points, target):
        clean = check_cloud(points)
        target = check_target(target, self.victim.n_classes_)
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        step_size = self.eps / self.steps if self.step_size is None else self.step_size
        adv = clean.copy()
        stopped_early = False
        start = time.perf_counter()
        for _ in range(self.steps):
            grad = self.victim.input_gradient(adv, target)
            if self.normalize == "cloud":
                norm = float(np.linalg.norm(grad))
                if norm == 0.0:
                    stopped_early = True
                    break
                direction = grad / norm
            elif self.normalize == "point":
                norms = np.linalg.norm(grad, axis=1, keepdims=True)
                if not norms.any():
                    stopped_early = True
                    break
                direction = np.where(norms > 0, grad / np.maximum(norms, 1e-12), 0.0)
            else:
                raise ValueError(f"unknown normalize mode {self.normalize!r}")
            adv = adv - step_size * direction.astype(np.float32)
            offset = adv - clean
            total = float(np.linalg.norm(offset))
            if total > self.eps:
                adv = clean + offset * (self.eps / total)
        seconds = time.perf_counter() - start
        return finalize_result(
            clean, adv, target, self.victim, seconds, extra={"stopped_early": stopped_early}
        )
