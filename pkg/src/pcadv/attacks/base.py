"""Attack result record and shared finalization helper.

Attacks are pure with respect to their inputs: they always return a new
cloud. Wall time covers the attack computation only; the perturbation
metrics are computed outside the timer.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import geometry as geo


@dataclass
class AttackResult:
    points: np.ndarray
    target: int | None
    prediction: int
    success: bool
    l2: float
    chamfer: float
    hausdorff: float
    kurtosis: float
    seconds: float
    extra: dict = field(default_factory=dict)


def finalize_result(clean, adv, target, victim, seconds, extra=None):
    """Fill an AttackResult from a finished adversarial cloud: victim
    prediction, success flag, and the perturbation metrics."""
    adv = np.asarray(adv, dtype=np.float32)
    prediction = int(victim.predict([adv])[0])
    try:
        kurt = geo.kurtosis_metric(adv)
    except ValueError:
        kurt = float("nan")  # perfectly regular cloud; undefined metric
    return AttackResult(
        points=adv,
        target=None if target is None else int(target),
        prediction=prediction,
        success=target is not None and prediction == int(target),
        l2=geo.paired_l2_distance(clean, adv) if len(clean) == len(adv) else float("nan"),
        chamfer=geo.chamfer_distance(clean, adv),
        hausdorff=geo.hausdorff_distance(clean, adv),
        kurtosis=kurt,
        seconds=float(seconds),
        extra=extra or {},
    )
