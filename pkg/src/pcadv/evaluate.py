"""Attack evaluation: run an attack over a dataset's clouds with sampled
target labels, score raw and defended victim predictions per instance, and
aggregate into report rows.

Every reported mean is a re-aggregation of persisted per-instance records;
nothing is aggregated lossily. All randomness (targets, SRS subsampling,
translation offsets) derives from the run seed plus the cloud index, so
identical configs and seeds reproduce identical records.
"""

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .attacks.translation import TranslationAttack
from .gan.trainer import sample_targets

REPORT_COLUMNS = (
    "attack",
    "victim",
    "defense",
    "n",
    "asr",
    "accuracy",
    "mean_l2",
    "mean_chamfer",
    "mean_kurtosis",
    "mean_seconds",
    "alpha",
    "seed",
)


@dataclass
class InstanceRecord:
    attack: str
    victim: str
    index: int
    truth: int
    target: int
    prediction: int
    defended: dict
    l2: float
    chamfer: float
    hausdorff: float
    kurtosis: float
    seconds: float
    tags: dict = field(default_factory=dict)


def evaluation_targets(labels, n_classes, seed):
    """One target label != truth per cloud, uniform, from the run seed.
    Identical across attacks under the same seed so rows pair up."""
    rng = np.random.default_rng([seed, 101])
    return sample_targets(np.asarray(labels), n_classes, rng)


def run_attack(attack, victim, dataset, defenses=(), seed=0, limit=None, tags=None):
    """Attack every (or the first `limit`) test cloud once, then evaluate the
    victim on the raw adversarial cloud and under each defense."""
    n = len(dataset) if limit is None else min(limit, len(dataset))
    targets = evaluation_targets(dataset.labels, dataset.n_classes, seed)
    records = []
    name = getattr(attack, "name", type(attack).__name__.lower())
    for i in range(n):
        cloud = dataset.points[i]
        target = int(targets[i])
        if isinstance(attack, TranslationAttack):
            result = attack.attack(cloud, target, rng=np.random.default_rng([seed, 7, i]))
        else:
            result = attack.attack(cloud, target)
        defended = {}
        for defense in defenses:
            purified = defense.apply(result.points, np.random.default_rng([seed, 11, i]))
            defended[defense.name] = int(victim.predict([purified])[0])
        records.append(
            InstanceRecord(
                attack=name,
                victim=victim.arch,
                index=i,
                truth=int(dataset.labels[i]),
                target=target,
                prediction=result.prediction,
                defended=defended,
                l2=result.l2,
                chamfer=result.chamfer,
                hausdorff=result.hausdorff,
                kurtosis=result.kurtosis,
                seconds=result.seconds,
                tags=dict(tags or {}),
            )
        )
    return records


def aggregate(records):
    """EvalReport rows, one per (attack, tags, defense incl. 'none')."""
    groups = {}
    for record in records:
        key = (record.attack, record.victim, tuple(sorted(record.tags.items())))
        groups.setdefault(key, []).append(record)
    rows = []
    for (attack, victim, tags), group in groups.items():
        defense_names = ["none"] + sorted({d for r in group for d in r.defended})
        for defense in defense_names:
            preds = np.array(
                [r.prediction if defense == "none" else r.defended[defense] for r in group]
            )
            truths = np.array([r.truth for r in group])
            targets = np.array([r.target for r in group])
            row = {
                "attack": attack,
                "victim": victim,
                "defense": defense,
                "n": len(group),
                "asr": 100.0 * float(np.mean(preds == targets)),
                "accuracy": 100.0 * float(np.mean(preds == truths)),
                "mean_l2": float(np.mean([r.l2 for r in group])),
                "mean_chamfer": float(np.mean([r.chamfer for r in group])),
                "mean_kurtosis": float(np.nanmean([r.kurtosis for r in group])),
                "mean_seconds": float(np.mean([r.seconds for r in group])),
            }
            row.update(dict(tags))
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# persistence

def write_records(records, path):
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(asdict(record), sort_keys=True) + "\n")


def read_records(path):
    records = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                records.append(InstanceRecord(**json.loads(line)))
    return records


def rows_to_csv(rows):
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=REPORT_COLUMNS, extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({col: row.get(col, "") for col in REPORT_COLUMNS})
    return buffer.getvalue()


def rows_to_json(rows):
    return json.dumps(rows, sort_keys=True, indent=2) + "\n"


def rows_from_json(text):
    return json.loads(text)


def emit_report(rows, out_dir, formats=("csv", "json"), plot=False):
    """Write the report table (and the alpha-sweep plot when rows carry
    varying `alpha` tags). Returns the list of written paths."""
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not rows:
        raise ValueError("cannot emit an empty report")
    written = []
    if "csv" in formats:
        path = out_dir / "report.csv"
        path.write_text(rows_to_csv(rows))
        written.append(path)
    if "json" in formats:
        path = out_dir / "report.json"
        path.write_text(rows_to_json(rows))
        written.append(path)
    if plot:
        path = plot_alpha_sweep(rows, out_dir / "alpha_sweep.png")
        if path is not None:
            written.append(path)
    return written


def plot_alpha_sweep(rows, path):
    """Success-rate / l2 / Chamfer vs alpha for undefended rows tagged with
    an alpha value; skipped (returns None) when fewer than two alphas."""
    sweep = sorted(
        (
            (float(r["alpha"]), r)
            for r in rows
            if r.get("alpha") is not None and r["defense"] == "none"
        ),
        key=lambda pair: pair[0],
    )
    if len({a for a, _ in sweep}) < 2:
        return None
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    alphas = [a for a, _ in sweep]
    asr = [r["asr"] for _, r in sweep]
    l2 = [r["mean_l2"] for _, r in sweep]
    chamfer = [r["mean_chamfer"] for _, r in sweep]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(alphas, asr, "o-", color="red", label="attack success rate (%)")
    ax.set_xscale("log")
    ax.set_xlabel("alpha (classification weight)")
    ax.set_ylabel("attack success rate (%)", color="red")
    ax2 = ax.twinx()
    ax2.plot(alphas, l2, "s-", color="blue", label="mean l2")
    ax2.plot(alphas, chamfer, "^-", color="black", label="mean Chamfer")
    ax2.set_ylabel("distance (unit-cube units)")
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [line.get_label() for line in lines], loc="center right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
