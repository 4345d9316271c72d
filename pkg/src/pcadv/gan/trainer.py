"""Adversarial training loop and the LGGANAttack estimator.

fit(X, y) alternates, per minibatch, one discriminator Adam step (lr 1e-5)
and one generator Adam step (lr 1e-3) against a frozen victim. Target
labels are drawn uniformly from the non-true classes, reseeded each epoch.
Sampling/grouping/interpolation indices of the training clouds depend only
on their coordinates, so they are computed once and cached.

A non-finite loss or gradient aborts training and restores the last
epoch-end parameters (the last-good checkpoint).
"""

import copy
import time

import numpy as np
import torch
from sklearn.base import BaseEstimator

from ..attacks.base import finalize_result
from ..checkpoint import load_checkpoint, load_module_arrays, module_arrays, save_checkpoint
from ..optim import Adam
from ..validation import check_cloud, check_cloud_batch, check_labels, check_target
from .discriminator import Discriminator, stack_discriminator_geometries
from .generator import DEFAULT_LEVEL_PARAMS, Generator, stack_geometries
from .losses import discriminator_loss, generator_loss


def sample_targets(labels, n_classes, rng):
    """Uniform targets over classes != truth, one per cloud."""
    offsets = rng.integers(1, n_classes, size=len(labels))
    return (labels + offsets) % n_classes


class LGGANAttack(BaseEstimator):
    """Single-forward-pass targeted attack: train once against a victim,
    then transform any cloud toward any label with one generator pass."""

    def __init__(
        self,
        victim=None,
        alpha=40.0,
        beta=1.0,
        alpha_on="cls",
        rec_loss="l2",
        use_gan=True,
        single_layer_label=False,
        patch_scores=False,
        epochs=40,
        warmup_epochs=0,
        batch_size=4,
        lr_g=1e-3,
        lr_d=1e-5,
        level_params=DEFAULT_LEVEL_PARAMS,
        neighbor_cap=32,
        knn_k=8,
        seed=0,
        verbose=False,
    ):
        self.victim = victim
        self.alpha = alpha
        self.beta = beta
        self.alpha_on = alpha_on
        self.rec_loss = rec_loss
        self.use_gan = use_gan
        self.single_layer_label = single_layer_label
        self.patch_scores = patch_scores
        self.epochs = epochs
        self.warmup_epochs = warmup_epochs
        self.batch_size = batch_size
        self.lr_g = lr_g
        self.lr_d = lr_d
        self.level_params = level_params
        self.neighbor_cap = neighbor_cap
        self.knn_k = knn_k
        self.seed = seed
        self.verbose = verbose

    # -- construction ---------------------------------------------------------

    def _build(self, n_classes):
        rng = np.random.default_rng(self.seed)
        self.generator_ = Generator(
            n_classes,
            rng,
            tuple(tuple(p) for p in self.level_params),
            self.single_layer_label,
            self.neighbor_cap,
        )
        self.discriminator_ = (
            Discriminator(rng, self.knn_k, self.patch_scores) if self.use_gan else None
        )
        self.n_classes_ = n_classes

    def _check_is_fitted(self):
        if not hasattr(self, "generator_"):
            raise RuntimeError("LGGANAttack is not fitted; call fit() or load().")

    # -- training ---------------------------------------------------------------

    def fit(self, X, y, validation=None):
        """Train against the frozen victim. `validation` is an optional
        (clouds, labels) pair; its targeted success rate is logged per epoch."""
        if self.victim is None:
            raise ValueError("LGGANAttack needs a fitted victim classifier")
        clouds = check_cloud_batch(X)
        labels = check_labels(y, len(clouds))
        n_classes = self.victim.n_classes_
        if n_classes < 2:
            raise ValueError("victim must distinguish at least 2 classes")
        self._build(n_classes)

        coords_all = torch.from_numpy(np.stack(clouds))
        clouds64 = [c.astype(np.float64) for c in clouds]
        gen_geoms = [self.generator_.geometry(c) for c in clouds64]
        disc_geoms = (
            [self.discriminator_.geometry(c) for c in clouds64] if self.use_gan else None
        )

        opt_g = Adam(self.generator_.parameters(), lr=self.lr_g)
        opt_d = Adam(self.discriminator_.parameters(), lr=self.lr_d) if self.use_gan else None

        val_pack = None
        if validation is not None:
            val_clouds = check_cloud_batch(validation[0])
            val_labels = check_labels(validation[1], len(val_clouds))
            val_rng = np.random.default_rng([self.seed, 9999])
            val_targets = sample_targets(val_labels, n_classes, val_rng)
            val_pack = (val_clouds, val_targets)

        victim_params = list(self.victim.net_.parameters())
        frozen_state = [p.requires_grad for p in victim_params]
        for p in victim_params:
            p.requires_grad_(False)

        self.history_ = []
        n = len(clouds)
        snapshot = copy.deepcopy(self.generator_.state_dict())
        snapshot_d = copy.deepcopy(self.discriminator_.state_dict()) if self.use_gan else None
        try:
            for epoch in range(self.epochs):
                # reconstruction warm-up: train shape representation first
                # (classification weight zeroed), then attack fine-tuning
                alpha = 0.0 if epoch < self.warmup_epochs else self.alpha
                epoch_rng = np.random.default_rng([self.seed, 1 + epoch])
                targets_all = sample_targets(labels, n_classes, epoch_rng)
                order = epoch_rng.permutation(n)
                sums = {"cls": 0.0, "rec": 0.0, "dis": 0.0, "total": 0.0, "d": 0.0}
                try:
                    for start in range(0, n, self.batch_size):
                        batch = order[start : start + self.batch_size]
                        comps, d_loss = self._train_step(
                            coords_all[batch],
                            targets_all[batch],
                            [gen_geoms[i] for i in batch],
                            [disc_geoms[i] for i in batch] if self.use_gan else None,
                            opt_g,
                            opt_d,
                            alpha,
                        )
                        for key, value in comps.items():
                            sums[key] += value * len(batch)
                        sums["d"] += d_loss * len(batch)
                except FloatingPointError as exc:
                    self.generator_.load_state_dict(snapshot)
                    if self.use_gan:
                        self.discriminator_.load_state_dict(snapshot_d)
                    self.history_.append(
                        {"epoch": epoch, "event": "diverged", "detail": str(exc)}
                    )
                    break
                record = {
                    "epoch": epoch,
                    "loss_cls": sums["cls"] / n,
                    "loss_rec": sums["rec"] / n,
                    "loss_dis": sums["dis"] / n,
                    "loss_total": sums["total"] / n,
                    "loss_d": sums["d"] / n,
                }
                if val_pack is not None:
                    record["val_success_rate"] = self._targeted_success(*val_pack)
                self.history_.append(record)
                if self.verbose:
                    extras = (
                        f" val_asr {record['val_success_rate']:.3f}"
                        if "val_success_rate" in record
                        else ""
                    )
                    print(
                        f"[lggan] epoch {epoch}: cls {record['loss_cls']:.4f} "
                        f"rec {record['loss_rec']:.4f} dis {record['loss_dis']:.4f} "
                        f"d {record['loss_d']:.4f}{extras}",
                        flush=True,
                    )
                snapshot = copy.deepcopy(self.generator_.state_dict())
                if self.use_gan:
                    snapshot_d = copy.deepcopy(self.discriminator_.state_dict())
        finally:
            for p, flag in zip(victim_params, frozen_state):
                p.requires_grad_(flag)
        return self

    def _train_step(self, coords, targets, gen_geoms, disc_geoms, opt_g, opt_d, alpha=None):
        # warm-up passes alpha=0: zero the classification term under either
        # alpha placement (the literal-equation mode weights it implicitly 1)
        alpha_on = self.alpha_on
        if alpha is None:
            alpha = self.alpha
        elif alpha == 0.0:
            alpha_on = "cls"
        geometry = stack_geometries(gen_geoms)
        adv = self.generator_(coords, targets, geometry)
        if not torch.isfinite(adv).all():
            raise FloatingPointError("generator produced non-finite coordinates")

        d_loss_val = 0.0
        d_score = None
        if self.use_gan:
            adv_geom = stack_discriminator_geometries(
                [
                    self.discriminator_.geometry(c)
                    for c in adv.detach().cpu().numpy().astype(np.float64)
                ]
            )
            real_geom = stack_discriminator_geometries(disc_geoms)
            score_fake = self.discriminator_(adv.detach(), adv_geom)
            score_real = self.discriminator_(coords, real_geom)
            d_loss = discriminator_loss(score_real, score_fake)
            if not torch.isfinite(d_loss):
                raise FloatingPointError("discriminator loss is non-finite")
            opt_d.zero_grad()
            d_loss.backward()
            opt_d.step()
            d_loss_val = float(d_loss.detach())
            d_score = self.discriminator_(adv, adv_geom)  # post-update score for G

        logits = self.victim.logits_tensor(adv)
        total, comps = generator_loss(
            logits,
            targets,
            adv,
            coords,
            d_score,
            alpha=alpha,
            beta=self.beta,
            alpha_on=alpha_on,
            rec_loss=self.rec_loss,
        )
        if not torch.isfinite(total):
            raise FloatingPointError("generator loss is non-finite")
        opt_g.zero_grad()
        total.backward()
        opt_g.step()
        return comps, d_loss_val

    # -- inference ----------------------------------------------------------------

    def generate(self, X, targets):
        """Adversarial clouds for explicit targets; (n, N, 3) float32."""
        self._check_is_fitted()
        clouds = check_cloud_batch(X)
        targets = np.asarray(targets).reshape(-1)
        if len(targets) != len(clouds):
            raise ValueError("one target per cloud required")
        out = []
        self.generator_.eval()
        with torch.no_grad():
            for start in range(0, len(clouds), max(1, self.batch_size) * 4):
                chunk = clouds[start : start + max(1, self.batch_size) * 4]
                coords = torch.from_numpy(np.stack(chunk))
                t = targets[start : start + len(chunk)]
                out.append(self.generator_(coords, t).numpy())
        return np.concatenate(out, axis=0)

    def transform(self, X, targets=None):
        """Adversarial clouds; targets default to seeded uniform labels."""
        self._check_is_fitted()
        clouds = check_cloud_batch(X)
        if targets is None:
            rng = np.random.default_rng([self.seed, 77])
            targets = rng.integers(0, self.n_classes_, size=len(clouds))
        return self.generate(clouds, targets)

    def attack(self, points, target):
        """Single-cloud targeted attack: one generator forward, one victim
        forward, plus the perturbation metrics."""
        self._check_is_fitted()
        clean = check_cloud(points)
        target = check_target(target, self.n_classes_)
        start = time.perf_counter()
        with torch.no_grad():
            adv = self.generator_(torch.from_numpy(clean[None]), [target])[0].numpy()
        seconds = time.perf_counter() - start
        return finalize_result(clean, adv, target, self.victim, seconds)

    def _targeted_success(self, clouds, targets):
        adv = self.generate(clouds, targets)
        preds = self.victim.predict(list(adv))
        return float(np.mean(preds == targets))

    # -- persistence -----------------------------------------------------------------

    def save(self, generator_path, discriminator_path=None):
        self._check_is_fitted()
        params = self.get_params(deep=False)
        params.pop("victim")
        params["level_params"] = [
            [int(d), float(r), list(map(int, w))] for d, r, w in params["level_params"]
        ]
        hyper = {"estimator": params, "n_classes": int(self.n_classes_)}
        save_checkpoint(
            generator_path, "lggan_generator", module_arrays(self.generator_), hyper, self.seed
        )
        if discriminator_path is not None:
            if self.discriminator_ is None:
                raise ValueError("no discriminator to save (use_gan=False)")
            save_checkpoint(
                discriminator_path,
                "lggan_discriminator",
                module_arrays(self.discriminator_),
                hyper,
                self.seed,
            )

    @classmethod
    def load(cls, generator_path, victim, discriminator_path=None):
        ckpt = load_checkpoint(generator_path)
        if ckpt.kind != "lggan_generator":
            raise ValueError(f"checkpoint kind {ckpt.kind!r} is not a generator")
        params = dict(ckpt.hyperparams["estimator"])
        params["level_params"] = tuple(
            (int(d), float(r), tuple(int(x) for x in w)) for d, r, w in params["level_params"]
        )
        attack = cls(victim=victim, **params)
        attack._build(ckpt.hyperparams["n_classes"])
        load_module_arrays(attack.generator_, ckpt.params)
        attack.generator_.eval()
        if discriminator_path is not None and attack.discriminator_ is not None:
            d_ckpt = load_checkpoint(discriminator_path)
            load_module_arrays(attack.discriminator_, d_ckpt.params)
        attack.history_ = []
        return attack
