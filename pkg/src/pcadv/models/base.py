"""Shared estimator machinery for the victim classifiers: sklearn-style
fit/predict surface over a torch network, with input-gradient access and
checkpoint persistence."""

import numpy as np
import torch
from sklearn.base import BaseEstimator, ClassifierMixin

from .. import ops
from ..checkpoint import load_checkpoint, load_module_arrays, module_arrays, save_checkpoint
from ..optim import Adam
from ..validation import check_cloud, check_cloud_batch, check_labels


class VictimClassifier(BaseEstimator, ClassifierMixin):
    """Base class: subclasses set `arch` and implement _build_net."""

    arch = None

    def _build_net(self, n_classes, rng):
        raise NotImplementedError

    def _check_is_fitted(self):
        if not hasattr(self, "net_"):
            raise RuntimeError(f"{type(self).__name__} is not fitted; call fit() or load().")

    @property
    def n_classes_(self):
        self._check_is_fitted()
        return len(self.classes_)

    def _encode_labels(self, y):
        return np.searchsorted(self.classes_, y)

    def fit(self, X, y):
        clouds = check_cloud_batch(X)
        sizes = {c.shape[0] for c in clouds}
        if len(sizes) != 1:
            raise ValueError(f"training clouds must share a point count, got sizes {sorted(sizes)}")
        labels = check_labels(y, len(clouds))
        self.classes_ = np.unique(labels)
        if len(self.classes_) < 2:
            raise ValueError("need at least 2 classes to fit a classifier")
        rng = np.random.default_rng(self.seed)
        self.net_ = self._build_net(len(self.classes_), rng)
        self.history_ = []
        coords = torch.from_numpy(np.stack(clouds))
        targets = torch.from_numpy(self._encode_labels(labels))
        optimizer = Adam(self.net_.parameters(), lr=self.lr)
        n = len(clouds)
        for epoch in range(self.epochs):
            order = rng.permutation(n)
            epoch_loss, correct = 0.0, 0
            self.net_.train()
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                logits = self.net_(coords[batch])
                loss = ops.softmax_cross_entropy(logits, targets[batch])
                if not torch.isfinite(loss):
                    raise FloatingPointError(
                        f"{self.arch} training diverged at epoch {epoch} (non-finite loss)"
                    )
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                epoch_loss += float(loss.detach()) * len(batch)
                correct += int((logits.argmax(dim=1) == targets[batch]).sum())
            record = {"epoch": epoch, "loss": epoch_loss / n, "accuracy": correct / n}
            self.history_.append(record)
            if getattr(self, "verbose", False):
                print(
                    f"[{self.arch}] epoch {epoch}: loss {record['loss']:.4f} "
                    f"accuracy {record['accuracy']:.3f}",
                    flush=True,
                )
        self.net_.eval()
        return self

    def logits(self, X):
        """Raw class scores, (n_clouds, n_classes). Handles ragged batches
        (clouds of different sizes) by grouping equal-size clouds."""
        self._check_is_fitted()
        clouds = check_cloud_batch(X)
        out = np.empty((len(clouds), len(self.classes_)), dtype=np.float32)
        by_size = {}
        for i, c in enumerate(clouds):
            by_size.setdefault(c.shape[0], []).append(i)
        self.net_.eval()
        with torch.no_grad():
            for idx in by_size.values():
                batch = torch.from_numpy(np.stack([clouds[i] for i in idx]))
                out[idx] = self.net_(batch).numpy()
        return out

    def predict(self, X):
        return self.classes_[self.logits(X).argmax(axis=1)]

    def predict_proba(self, X):
        scores = torch.from_numpy(self.logits(X))
        return torch.softmax(scores, dim=1).numpy()

    def logits_tensor(self, coords):
        """Differentiable forward on an already-built (B, N, 3) tensor."""
        self._check_is_fitted()
        return self.net_(coords)

    def input_gradient(self, points, label):
        """Gradient of the cross-entropy toward `label` w.r.t. the N x 3
        input coordinates."""
        self._check_is_fitted()
        pts = check_cloud(points)
        coords = torch.from_numpy(pts).clone().requires_grad_(True)
        logits = self.net_(coords.unsqueeze(0))[0]
        target = int(np.searchsorted(self.classes_, label))
        loss = ops.softmax_cross_entropy(logits, target)
        loss.backward()
        return coords.grad.detach().numpy().copy()

    # -- persistence ---------------------------------------------------------

    def save(self, path):
        self._check_is_fitted()
        hyper = {
            "estimator": self.get_params(),
            "n_classes": int(len(self.classes_)),
            "classes": [int(c) for c in self.classes_],
        }
        save_checkpoint(path, self.arch, module_arrays(self.net_), hyper, seed=self.seed)

    @classmethod
    def load(cls, path):
        ckpt = load_checkpoint(path)
        if ckpt.kind != cls.arch:
            raise ValueError(f"checkpoint kind {ckpt.kind!r} does not match {cls.arch!r}")
        params = {k: _tuplify(v) for k, v in ckpt.hyperparams["estimator"].items()}
        model = cls(**params)
        model.classes_ = np.asarray(ckpt.hyperparams["classes"], dtype=np.int64)
        model.net_ = model._build_net(ckpt.hyperparams["n_classes"], np.random.default_rng(model.seed))
        load_module_arrays(model.net_, ckpt.params)
        model.net_.eval()
        model.history_ = []
        return model


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


class DenseHead(torch.nn.Module):
    """Fully-connected classification head with ReLU between layers and
    optional dropout (off by default so runs stay deterministic)."""

    def __init__(self, widths, rng, dropout=0.0):
        super().__init__()
        self.layers = torch.nn.ModuleList(
            torch.nn.Linear(widths[i], widths[i + 1]) for i in range(len(widths) - 1)
        )
        self.dropout = dropout
        for layer in self.layers:
            ops.init_linear(layer, rng)

    def forward(self, x):
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = torch.relu(x)
                if self.dropout > 0:
                    x = torch.nn.functional.dropout(x, self.dropout, self.training)
        return x
