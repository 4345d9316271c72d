"""Command-line interface.

Subcommands: make-data, train-victim, train-lggan, attack, evaluate,
report. Every run resolves its config (defaults <- --config file <- flag
overrides) and copies the resolved document beside its outputs.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .attacks import CWAttack, FGSMAttack, IdentityAttack, IFGMAttack, TranslationAttack
from .config import load_config, save_resolved
from .data import PointCloudDataset, load_packed, make_toy_dataset, save_packed
from .defenses import RecenterDefense, SORDefense, SRSDefense
from .evaluate import aggregate, emit_report, read_records, rows_from_json, rows_to_json, run_attack, write_records
from .gan import LGGANAttack
from .models import ARCHITECTURES, load_victim

ATTACK_NAMES = ("lggan", "fgsm", "ifgm", "cw", "translation", "identity")


# ---------------------------------------------------------------------------
# config-driven factories (shared with the test suite)

def build_victim(config, arch=None):
    arch = arch or config["victim"]["arch"]
    section = config["victim"]
    if arch == "pointnet":
        return ARCHITECTURES["pointnet"](
            point_widths=tuple(section["point_widths"]),
            head_widths=tuple(section["head_widths"]),
            dropout=section["dropout"],
            use_tnet=section["use_tnet"],
            epochs=section["epochs"],
            batch_size=section["batch_size"],
            lr=section["lr"],
            seed=config["seed"],
        )
    if arch == "pointnetpp":
        return ARCHITECTURES["pointnetpp"](
            levels=tuple(tuple(level) for level in section["pp_levels"]),
            global_widths=tuple(section["pp_global_widths"]),
            head_widths=tuple(section["pp_head_widths"]),
            dropout=section["dropout"],
            epochs=section["epochs"],
            batch_size=section["batch_size"],
            lr=section["lr"],
            seed=config["seed"],
        )
    raise ValueError(f"unknown victim architecture {arch!r}")


def build_lggan(config, victim):
    section = dict(config["lggan"])
    return LGGANAttack(victim=victim, seed=config["seed"], **section)


def build_attack(name, config, victim, generator_path=None):
    if name == "lggan":
        if generator_path is None:
            raise ValueError("the lggan attack needs a trained generator checkpoint")
        return LGGANAttack.load(generator_path, victim)
    if name == "fgsm":
        return FGSMAttack(victim, **config["attacks"]["fgsm"])
    if name == "ifgm":
        return IFGMAttack(victim, **config["attacks"]["ifgm"])
    if name == "cw":
        return CWAttack(victim, **config["attacks"]["cw"])
    if name == "translation":
        return TranslationAttack(victim, seed=config["seed"], **config["attacks"]["translation"])
    if name == "identity":
        return IdentityAttack(victim)
    raise ValueError(f"unknown attack {name!r} (expected one of {ATTACK_NAMES})")


def build_defenses(config, names=None):
    names = config["eval"]["defenses"] if names is None else names
    out = []
    for name in names:
        if name == "srs":
            out.append(SRSDefense(seed=config["seed"], **config["defenses"]["srs"]))
        elif name == "sor":
            out.append(SORDefense(**config["defenses"]["sor"]))
        elif name == "recenter":
            out.append(RecenterDefense())
        else:
            raise ValueError(f"unknown defense {name!r}")
    return out


def load_split(data_dir, split):
    path = Path(data_dir) / f"{split}.pcad"
    if not path.exists():
        raise FileNotFoundError(f"missing dataset file {path}")
    return load_packed(path, split=split)


# ---------------------------------------------------------------------------
# commands

def cmd_make_data(args):
    config = load_config(args.config, {"seed": args.seed})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train, test = make_toy_dataset(seed=config["seed"], **config["data"])
    save_packed(train, out / "train.pcad")
    save_packed(test, out / "test.pcad")
    (out / "meta.json").write_text(
        json.dumps(
            {
                "class_names": list(train.class_names),
                "n_points": train.n_points,
                "train_clouds": len(train),
                "test_clouds": len(test),
                "seed": config["seed"],
            },
            sort_keys=True,
            indent=2,
        )
        + "\n"
    )
    save_resolved(config, out)
    print(f"wrote {len(train)} train / {len(test)} test clouds to {out}")


def cmd_train_victim(args):
    config = load_config(args.config, {"seed": args.seed, "victim.arch": args.arch})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train = load_split(args.data, "train")
    test = load_split(args.data, "test")
    victim = build_victim(config)
    victim.verbose = True
    victim.fit(list(train.points), train.labels)
    train_acc = victim.score(list(train.points), train.labels)
    test_acc = victim.score(list(test.points), test.labels)
    path = out / f"victim_{victim.arch}.ckpt"
    victim.save(path)
    with open(out / "victim_train_log.jsonl", "w") as fh:
        for record in victim.history_:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        fh.write(
            json.dumps(
                {"final": True, "train_accuracy": train_acc, "test_accuracy": test_acc},
                sort_keys=True,
            )
            + "\n"
        )
    save_resolved(config, out)
    print(f"victim {victim.arch}: train accuracy {train_acc:.3f}, test accuracy {test_acc:.3f}")
    print(f"checkpoint: {path}")


def cmd_train_lggan(args):
    config = load_config(
        args.config,
        {"seed": args.seed, "lggan.alpha": args.alpha, "lggan.beta": args.beta},
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train = load_split(args.data, "train")
    test = load_split(args.data, "test")
    victim = load_victim(args.victim)
    attack = build_lggan(config, victim)
    attack.verbose = True
    attack.fit(list(train.points), train.labels, validation=(list(test.points), test.labels))
    gen_path = out / "lggan_generator.ckpt"
    disc_path = out / "lggan_discriminator.ckpt" if attack.use_gan else None
    attack.save(gen_path, disc_path)
    with open(out / "lggan_train_log.jsonl", "w") as fh:
        for record in attack.history_:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    save_resolved(config, out)
    last = next((r for r in reversed(attack.history_) if "val_success_rate" in r), None)
    if last is not None:
        print(f"final validation targeted success rate: {last['val_success_rate']:.3f}")
    print(f"generator checkpoint: {gen_path}")


def _attack_limit(name, config, cli_limit):
    if cli_limit is not None:
        return cli_limit
    if name == "cw":
        return config["eval"]["cw_limit"]
    return config["eval"]["limit"]


def _run_one_attack(name, config, victim, dataset, defenses, generator_path, limit, out):
    attack = build_attack(name, config, victim, generator_path)
    tags = {"seed": config["seed"]}
    if name == "lggan":
        tags["alpha"] = attack.alpha
    records = run_attack(
        attack,
        victim,
        dataset,
        defenses,
        seed=config["seed"],
        limit=_attack_limit(name, config, limit),
        tags=tags,
    )
    write_records(records, out / f"results_{name}.jsonl")
    return records


def cmd_attack(args):
    config = load_config(args.config, {"seed": args.seed})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = load_split(args.data, "test")
    victim = load_victim(args.victim)
    defenses = build_defenses(config)
    records = _run_one_attack(
        args.attack, config, victim, dataset, defenses, args.generator, args.limit, out
    )
    rows = aggregate(records)
    (out / f"report_{args.attack}.json").write_text(rows_to_json(rows))
    save_resolved(config, out)
    for row in rows:
        print(
            f"{row['attack']:>12} | defense={row['defense']:<8} | ASR {row['asr']:6.2f}% "
            f"| accuracy {row['accuracy']:6.2f}% | l2 {row['mean_l2']:.4f} "
            f"| chamfer {row['mean_chamfer']:.4f} | {row['mean_seconds']:.4f}s/object"
        )


def cmd_evaluate(args):
    config = load_config(args.config, {"seed": args.seed})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = load_split(args.data, "test")
    victim = load_victim(args.victim)
    defenses = build_defenses(config)
    all_records = []
    for name in config["eval"]["attacks"]:
        generator = args.generator if name == "lggan" else None
        all_records.extend(
            _run_one_attack(name, config, victim, dataset, defenses, generator, args.limit, out)
        )
    rows = aggregate(all_records)
    (out / "report.json").write_text(rows_to_json(rows))
    save_resolved(config, out)
    print(f"wrote {len(rows)} report rows to {out / 'report.json'}")


def cmd_report(args):
    config = load_config(args.config, {"seed": args.seed})
    rows = rows_from_json(Path(args.results).read_text())
    written = emit_report(
        rows,
        args.out,
        formats=config["report"]["formats"],
        plot=config["report"]["plot"],
    )
    save_resolved(config, args.out)
    for path in written:
        print(f"wrote {path}")


# ---------------------------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--config", default=None, help="YAML config file")
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_argument("--out", required=True, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pcadv",
        description="Point-cloud adversarial attack/defense toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-data", help="generate the procedural toy benchmark")
    _add_common(p)
    p.set_defaults(func=cmd_make_data)

    p = sub.add_parser("train-victim", help="train a victim classifier")
    _add_common(p)
    p.add_argument("--data", required=True, help="dataset directory (train.pcad/test.pcad)")
    p.add_argument("--arch", choices=sorted(ARCHITECTURES), default=None)
    p.set_defaults(func=cmd_train_victim)

    p = sub.add_parser("train-lggan", help="train the label-guided generator")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--victim", required=True, help="victim checkpoint path")
    p.add_argument("--alpha", type=float, default=None, help="classification weight override")
    p.add_argument("--beta", type=float, default=None, help="GAN weight override")
    p.set_defaults(func=cmd_train_lggan)

    p = sub.add_parser("attack", help="run one attack over the test split")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--victim", required=True)
    p.add_argument("--attack", required=True, choices=ATTACK_NAMES)
    p.add_argument("--generator", default=None, help="lggan generator checkpoint")
    p.add_argument("--limit", type=int, default=None, help="cap on evaluated clouds")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("evaluate", help="run the configured attack suite and aggregate")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--victim", required=True)
    p.add_argument("--generator", default=None)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="emit csv/json tables and the alpha-sweep plot")
    _add_common(p)
    p.add_argument("--results", required=True, help="report.json produced by evaluate/attack")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
