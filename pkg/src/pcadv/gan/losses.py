"""Generator and discriminator objectives.

Generator: classification loss toward the target label, reconstruction
loss against the clean cloud, and a least-squares realism term
||1 - D(adv)||^2. The balance weight `alpha` multiplies the classification
term by default (alpha_on="cls"), which matches the observed behavior that
larger alpha buys attack success at the cost of distortion; alpha_on="rec"
selects the literal composition L_cls + alpha*L_rec + beta*L_dis instead.

Discriminator: least-squares real/fake objective
0.5 ||D(adv)||^2 + 0.5 ||1 - D(clean)||^2, zero exactly when D scores fakes
0 and reals 1. Scores may be scalars per cloud or per-patch vectors; terms
average over whatever is given.
"""

import torch

from .. import ops


def generator_loss(
    logits,
    targets,
    adv,
    clean,
    d_score=None,
    alpha=1.0,
    beta=1.0,
    alpha_on="cls",
    rec_loss="l2",
):
    """Returns (total tensor, components dict of detached floats).

    rec_loss "l2" is the mean squared per-point displacement; "chamfer" is
    the symmetric Chamfer distance (the looser ablation objective).
    """
    cls_term = ops.softmax_cross_entropy(logits, targets)
    if rec_loss == "l2":
        rec_term = ops.mean_squared_displacement(adv, clean)
    elif rec_loss == "chamfer":
        rec_term = ops.chamfer(adv, clean)
    else:
        raise ValueError(f"unknown rec_loss {rec_loss!r}")
    if d_score is not None:
        dis_term = (1.0 - d_score).pow(2).mean()
    else:
        dis_term = torch.zeros((), dtype=adv.dtype)
    if alpha_on == "cls":
        total = alpha * cls_term + rec_term + beta * dis_term
    elif alpha_on == "rec":
        total = cls_term + alpha * rec_term + beta * dis_term
    else:
        raise ValueError(f"alpha_on must be 'cls' or 'rec', got {alpha_on!r}")
    components = {
        "cls": float(cls_term.detach()),
        "rec": float(rec_term.detach()),
        "dis": float(dis_term.detach()),
        "total": float(total.detach()),
    }
    return total, components


def discriminator_loss(score_real, score_fake):
    """0.5 ||D(fake)||^2 + 0.5 ||1 - D(real)||^2 (means over batch/patches)."""
    return 0.5 * score_fake.pow(2).mean() + 0.5 * (1.0 - score_real).pow(2).mean()
