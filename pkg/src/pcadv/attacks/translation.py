"""Rigid-translation attack and the identity (null) attack.

The translation attack shifts a whole cloud by one random offset: per axis
a magnitude drawn uniform from [0, eps) with an independent random sign.
Intra-cloud geometry is untouched, which is what makes it a pure test of
translation robustness (and what recentering defenses neutralize exactly).
Untargeted: the target argument is ignored.
"""

import time

import numpy as np
from sklearn.base import BaseEstimator

from ..validation import check_cloud
from .base import finalize_result


class TranslationAttack(BaseEstimator):
    name = "translation"

    def __init__(self, victim=None, eps=0.5, seed=0):
        self.victim = victim
        self.eps = eps
        self.seed = seed

    def offset(self, rng):
        magnitude = rng.uniform(0.0, self.eps, size=3)
        signs = rng.integers(0, 2, size=3) * 2 - 1
        return (magnitude * signs).astype(np.float32)

    def attack(self, points, target=None, rng=None):
        clean = check_cloud(points)
        rng = np.random.default_rng(self.seed) if rng is None else rng
        start = time.perf_counter()
        adv = clean + self.offset(rng)
        seconds = time.perf_counter() - start
        return finalize_result(clean, adv, target, self.victim, seconds)


class IdentityAttack(BaseEstimator):
    """Null attack: returns the cloud unchanged. Baseline row for reports."""

    name = "identity"

    def __init__(self, victim=None):
        self.victim = victim

    def attack(self, points, target=None):
        clean = check_cloud(points)
        start = time.perf_counter()
        seconds = time.perf_counter() - start
        return finalize_result(clean, clean.copy(), target, self.victim, seconds)
