"""Experiment configuration: defaults, YAML loading, deep merge, and the
resolved-copy convention (every run writes the config it actually used
beside its outputs).

The document is flat keys per section; unknown keys are rejected so typos
fail loudly instead of silently running defaults.
"""

import copy
from pathlib import Path

import yaml

DEFAULTS = {
    "seed": 0,
    "data": {
        "n_classes": 4,
        "n_points": 256,
        "train_per_class": 200,
        "test_per_class": 50,
        "jitter": 0.02,
    },
    "victim": {
        "arch": "pointnet",
        "epochs": 60,
        "batch_size": 32,
        "lr": 0.001,
        "dropout": 0.0,
        "use_tnet": False,
        "point_widths": [64, 64, 64, 128, 1024],
        "head_widths": [512, 256],
        "pp_levels": [[64, 0.25, [32, 32, 64], 32], [16, 0.5, [64, 64, 128], 32]],
        "pp_global_widths": [128, 256],
        "pp_head_widths": [128],
    },
    "lggan": {
        "alpha": 40.0,
        "beta": 1.0,
        "alpha_on": "cls",
        "rec_loss": "l2",
        "use_gan": True,
        "single_layer_label": False,
        "patch_scores": False,
        "epochs": 40,
        "warmup_epochs": 0,
        "batch_size": 4,
        "lr_g": 0.001,
        "lr_d": 0.00001,
        "knn_k": 8,
        "neighbor_cap": 32,
    },
    "attacks": {
        "fgsm": {"eps": 0.3},
        "ifgm": {"eps": 0.3, "steps": 10, "step_size": None, "normalize": "cloud"},
        "cw": {
            "distance": "l2",
            "initial_const": 10.0,
            "steps": 200,
            "lr": 0.01,
            "binary_search_rounds": 5,
            "kappa": 0.0,
        },
        "translation": {"eps": 0.5},
    },
    "defenses": {
        "srs": {"drop_ratio": 0.75},
        "sor": {"k": 12, "alpha": 0.9},
    },
    "eval": {
        "attacks": ["lggan", "ifgm", "fgsm"],
        "defenses": ["srs", "sor"],
        "limit": None,
        "cw_limit": 25,
    },
    "report": {
        "formats": ["csv", "json"],
        "plot": True,
    },
}


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ValueError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, path=f"{path}{key}.")
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path=None, overrides=None):
    """Defaults <- YAML file <- explicit overrides (dotted keys)."""
    config = copy.deepcopy(DEFAULTS)
    if path is not None:
        with open(path) as fh:
            user = yaml.safe_load(fh) or {}
        if not isinstance(user, dict):
            raise ValueError(f"{path}: config must be a mapping of sections")
        config = _merge(config, user)
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        node = config
        *parents, leaf = dotted.split(".")
        for part in parents:
            node = node[part]
        if leaf not in node:
            raise ValueError(f"unknown config key {dotted!r}")
        node[leaf] = value
    return config


def save_resolved(config, out_dir, name="resolved_config.yaml"):
    """Copy the fully-resolved config beside a run's outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(yaml.safe_dump(config, sort_keys=True))
    return path
