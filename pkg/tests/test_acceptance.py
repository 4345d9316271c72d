"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`. The suite trains real
models (a victim, several generators); expect roughly an hour on two CPU
cores. Everything is seeded; thresholds and tolerances are stated inline.

Shared artifacts are built once in session fixtures:
  * the full benchmark (4 classes, 256 points, 200/50 clouds per class,
    seed 0) with its victim and default-config generator, used by
    criteria 4, 6 (seed 0 leg), and 7;
  * three reduced ordering pipelines (seeds 1/2/3: 60/15 clouds per class)
    each carrying an alpha sweep, used by criteria 5, 6, and 8.
"""

import copy
import json
import time
from pathlib import Path

import numpy as np
import pytest
import torch
import yaml

from pcadv import geometry as geo
from pcadv import ops
from pcadv.attacks import CWAttack, FGSMAttack, IFGMAttack, TranslationAttack
from pcadv.cli import main as cli_main
from pcadv.data import make_toy_dataset
from pcadv.defenses import SORDefense, SRSDefense, recenter_defense
from pcadv.evaluate import aggregate, evaluation_targets, run_attack
from pcadv.gan import LGGANAttack
from pcadv.gan.discriminator import Discriminator
from pcadv.gan.generator import Generator, stack_geometries
from pcadv.gan.losses import discriminator_loss, generator_loss
from pcadv.gradcheck import finite_difference_check
from pcadv.models import PointNetClassifier, PointNetPPClassifier

# ---------------------------------------------------------------------------
# benchmark configuration (fixed seeds; budgets from the criteria)

BENCH = dict(n_classes=4, n_points=256, train_per_class=200, test_per_class=50, seed=0)
VICTIM_CFG = dict(epochs=30, batch_size=32, lr=1e-3, seed=0)
VICTIM_BUDGET_S = 15 * 60
LGGAN_CFG = dict(alpha=5.0, warmup_epochs=5, epochs=22, batch_size=4, seed=0)
LGGAN_BUDGET_S = 60 * 60
IFGM_CFG = dict(eps=1.0, steps=10)
FGSM_CFG = dict(eps=0.1)
CW_CFG = dict(initial_const=1.0, steps=200, lr=0.01, binary_search_rounds=5)
CW_LIMIT = 25

ORDERING_SEEDS = (1, 2, 3)
ORDER_BENCH = dict(n_classes=4, n_points=256, train_per_class=60, test_per_class=15)
ORDER_VICTIM_EPOCHS = 20
ORDER_LGGAN = dict(warmup_epochs=4, epochs=14, batch_size=4)
ORDER_CW_LIMIT = 15
SWEEP_ALPHAS = (0.1, 1.0, 10.0, 100.0)
# "monotone within noise": seed-averaged ASR may dip at most 2 points per
# step; seed-averaged distances at most 10% (relative) per step
ASR_SLACK_POINTS = 2.0
DIST_SLACK_REL = 0.10


def note(criterion, passed, detail):
    status = "PASS" if passed else "FAIL"
    print(f"\n[ACCEPTANCE] criterion {criterion}: {status} - {detail}")
    assert passed, f"criterion {criterion}: {detail}"


# ---------------------------------------------------------------------------
# shared artifacts

@pytest.fixture(scope="session")
def bench_data():
    return make_toy_dataset(**BENCH)


@pytest.fixture(scope="session")
def victim(bench_data):
    train, test = bench_data
    model = PointNetClassifier(**VICTIM_CFG)
    start = time.perf_counter()
    model.fit(list(train.points), train.labels)
    model.fit_seconds_ = time.perf_counter() - start
    model.test_accuracy_ = model.score(list(test.points), test.labels)
    return model


@pytest.fixture(scope="session")
def lggan(bench_data, victim):
    train, test = bench_data
    attack = LGGANAttack(victim=victim, **LGGAN_CFG)
    start = time.perf_counter()
    attack.fit(
        list(train.points), train.labels, validation=(list(test.points), test.labels)
    )
    attack.fit_seconds_ = time.perf_counter() - start
    return attack


@pytest.fixture(scope="session")
def bench_eval(bench_data, victim, lggan):
    """Seed-0 attack records over the full test split (CW capped)."""
    _, test = bench_data
    targets = evaluation_targets(test.labels, test.n_classes, seed=BENCH["seed"])
    out = {"targets": targets}
    out["lggan_adv"] = lggan.generate(list(test.points), targets)
    out["lggan_pred"] = victim.predict(list(out["lggan_adv"]))
    out["ifgm"] = [
        IFGMAttack(victim, **IFGM_CFG).attack(test.points[i], int(targets[i]))
        for i in range(len(test))
    ]
    out["fgsm"] = [
        FGSMAttack(victim, **FGSM_CFG).attack(test.points[i], int(targets[i]))
        for i in range(len(test))
    ]
    out["cw"] = [
        CWAttack(victim, **CW_CFG).attack(test.points[i], int(targets[i]))
        for i in range(CW_LIMIT)
    ]
    return out


def _ordering_pipeline(seed):
    """Reduced benchmark + victim + alpha-sweep generators + attack records
    for one ordering seed. Feeds criteria 5, 6, and 8."""
    train, test = make_toy_dataset(seed=seed, **ORDER_BENCH)
    victim = PointNetClassifier(
        epochs=ORDER_VICTIM_EPOCHS, batch_size=32, lr=1e-3, seed=seed
    ).fit(list(train.points), train.labels)
    targets = evaluation_targets(test.labels, test.n_classes, seed=seed)
    srs = SRSDefense(drop_ratio=0.75, seed=seed)
    sor = SORDefense(k=12, alpha=0.9)

    sweep = {}
    for alpha in SWEEP_ALPHAS:
        gan = LGGANAttack(victim=victim, alpha=alpha, seed=seed, **ORDER_LGGAN)
        gan.fit(list(train.points), train.labels)
        adv = gan.generate(list(test.points), targets)
        preds = victim.predict(list(adv))
        sweep[alpha] = {
            "asr": 100.0 * float(np.mean(preds == targets)),
            "l2": float(np.mean([geo.paired_l2_distance(c, a) for c, a in zip(test.points, adv)])),
            "chamfer": float(np.mean([geo.chamfer_distance(c, a) for c, a in zip(test.points, adv)])),
            "kurtosis": float(np.mean([geo.kurtosis_metric(a) for a in adv])),
            "adv": adv,
        }

    def defended_asr(adv_clouds, defense, limit=None):
        hits, total = 0, 0
        for i, adv in enumerate(adv_clouds):
            if limit is not None and i >= limit:
                break
            purified = defense.apply(adv, np.random.default_rng([seed, 11, i]))
            hits += int(victim.predict([purified])[0]) == int(targets[i])
            total += 1
        return 100.0 * hits / total

    # the alpha=10 sweep model doubles as this seed's "LG-GAN" instance
    lggan_adv = sweep[10.0]["adv"]
    cw_results = [
        CWAttack(victim, **CW_CFG).attack(test.points[i], int(targets[i]))
        for i in range(ORDER_CW_LIMIT)
    ]
    ifgm_results = [
        IFGMAttack(victim, **IFGM_CFG).attack(test.points[i], int(targets[i]))
        for i in range(len(test))
    ]
    return {
        "seed": seed,
        "test": test,
        "targets": targets,
        "sweep": sweep,
        "lggan_srs_asr": defended_asr(lggan_adv, srs),
        "lggan_sor_asr": defended_asr(lggan_adv, sor),
        "cw_srs_asr": defended_asr([r.points for r in cw_results], srs),
        "ifgm_sor_asr": defended_asr([r.points for r in ifgm_results], sor),
        "clean_kurtosis": float(np.mean([geo.kurtosis_metric(c) for c in test.points])),
        "cw_kurtosis": float(np.mean([r.kurtosis for r in cw_results])),
        "ifgm_kurtosis": float(np.mean([r.kurtosis for r in ifgm_results])),
        "lggan_kurtosis": float(np.mean([geo.kurtosis_metric(a) for a in lggan_adv])),
    }


@pytest.fixture(scope="session")
def ordering_runs():
    return [_ordering_pipeline(seed) for seed in ORDERING_SEEDS]


# ---------------------------------------------------------------------------
# criterion 1: gradient suite (< 2 min)

def test_criterion_1_gradient_suite():
    start = time.perf_counter()
    failures = []

    def check(name, fn, inputs):
        report = finite_difference_check(fn, inputs, tolerance=1e-4)
        if not report.passed:
            failures.append(f"{name}: {report}")

    # diffnet primitives on randomized small shapes
    mlp = ops.PointwiseMLP((3, 6, 4), np.random.default_rng(0)).double()
    x = torch.randn(5, 3, dtype=torch.float64, requires_grad=True)
    params = {f"mlp_p{i}": p for i, p in enumerate(mlp.parameters())}
    check("pointwise_mlp", lambda: mlp(x).pow(2).sum(), {"x": x, **params})

    g = torch.randn(2, 4, 3, dtype=torch.float64, requires_grad=True)
    check("max_pool_group", lambda: ops.max_pool_group(g).pow(2).sum(), {"g": g})

    logits = torch.randn(6, dtype=torch.float64, requires_grad=True)
    check("softmax_cross_entropy", lambda: ops.softmax_cross_entropy(logits, 2), {"logits": logits})

    a = torch.randn(1, 5, 3, dtype=torch.float64, requires_grad=True)
    b = torch.randn(1, 6, 3, dtype=torch.float64)
    check("chamfer", lambda: ops.chamfer(a, b), {"a": a})
    check("paired_l2", lambda: ops.paired_l2(a, b[:, :5]), {"a": a})
    check("hausdorff", lambda: ops.hausdorff(a, b), {"a": a})

    # full generator loss (classification + reconstruction + realism path)
    tiny_levels = ((1, 0.6, (4, 8)), (2, 0.8, (8, 16)))
    rng = np.random.default_rng(1)
    gen = Generator(n_classes=2, rng=np.random.default_rng(2), level_params=tiny_levels).double()
    disc = Discriminator(np.random.default_rng(3), k=4).double()
    victim_net = ops.PointwiseMLP((3, 8), np.random.default_rng(4)).double()
    head = torch.nn.Linear(8, 2).double()
    coords = torch.from_numpy(rng.uniform(-0.5, 0.5, (1, 8, 3)))

    def gen_loss():
        adv = gen(coords, [1])
        logits = head(ops.max_pool_group(victim_net(adv)))
        total, _ = generator_loss(logits, [1], adv, coords, disc(adv).reshape(()), alpha=3.0, beta=0.7)
        return total

    gen_inputs = {
        "enc_w0": gen.encoder.blocks[0].mlp.layers[0].weight,
        "enc_b0": gen.encoder.blocks[0].mlp.layers[0].bias,
        "dec_last_w": gen.decoder.fc[-1].weight,
        "dec_last_b": gen.decoder.fc[-1].bias,
    }
    for t in gen_inputs.values():
        t.requires_grad_(True)
    check("generator_loss", gen_loss, gen_inputs)

    # discriminator loss (Eq.-8-shaped real/fake objective)
    real = torch.from_numpy(rng.uniform(-0.5, 0.5, (1, 8, 3)))
    fake = torch.from_numpy(rng.uniform(-0.5, 0.5, (1, 8, 3)))
    disc_inputs = {
        "gc_self": disc.blocks[0].conv1.self_weight.weight,
        "gc_nbr": disc.blocks[0].conv1.neighbor_weight.weight,
        "score_w": disc.score.weight,
    }
    check("discriminator_loss", lambda: discriminator_loss(disc(real), disc(fake)), disc_inputs)

    # victim input gradients for both architectures
    for arch_cls, kwargs in (
        (PointNetClassifier, dict(point_widths=(8, 16), head_widths=(8,))),
        (PointNetPPClassifier, dict(levels=((4, 0.6, (8,), 4),), global_widths=(8,), head_widths=())),
    ):
        model = arch_cls(epochs=0, seed=5, **kwargs)
        data = rng.uniform(-0.5, 0.5, (2, 8, 3)).astype(np.float32)
        model.fit(data, np.array([0, 1]))
        net = model.net_.double()
        pts = torch.from_numpy(data[0].astype(np.float64)).clone().requires_grad_(True)
        check(
            f"input_gradient[{model.arch}]",
            lambda net=net, pts=pts: ops.softmax_cross_entropy(net(pts.unsqueeze(0))[0], 1),
            {"coords": pts},
        )

    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120.0
    note(1, ok, f"{10} gradient checks, max tolerance 1e-4, {elapsed:.1f}s "
                f"(budget 120s); failures: {failures or 'none'}")


# ---------------------------------------------------------------------------
# criterion 2: geometry oracle suite (< 1 min)

def test_criterion_2_geometry_oracles():
    start = time.perf_counter()
    problems = []

    def oracle_fps(points, m, seed):
        chosen = [seed]
        while len(chosen) < m:
            best, best_d = None, -1.0
            for i in range(len(points)):
                if i in chosen:
                    continue
                d = min(np.linalg.norm(points[i] - points[j]) for j in chosen)
                if d > best_d:
                    best, best_d = i, d
            chosen.append(best)
        return chosen

    for trial in range(6):
        rng = np.random.default_rng(trial)
        n = int(rng.integers(4, 33))
        cloud = rng.uniform(-0.5, 0.5, (n, 3))
        m = int(rng.integers(2, n + 1))
        s = int(rng.integers(0, n))
        if list(geo.farthest_point_sample(cloud, m, s)) != oracle_fps(cloud, m, s):
            problems.append(f"fps trial {trial}")

    for trial in range(4):
        rng = np.random.default_rng(100 + trial)
        a = rng.uniform(-0.5, 0.5, (int(rng.integers(8, 65)), 3))
        b = rng.uniform(-0.5, 0.5, (int(rng.integers(8, 65)), 3))
        d = geo.pairwise_distances(a, b)
        brute_chamfer = 0.5 * (
            np.mean([min(d[i]) for i in range(len(a))])
            + np.mean([min(d[:, j]) for j in range(len(b))])
        )
        brute_hausdorff = max(
            max(min(d[i]) for i in range(len(a))), max(min(d[:, j]) for j in range(len(b)))
        )
        if abs(geo.chamfer_distance(a, b) - brute_chamfer) > 1e-9:
            problems.append(f"chamfer trial {trial}")
        if abs(geo.hausdorff_distance(a, b) - brute_hausdorff) > 1e-9:
            problems.append(f"hausdorff trial {trial}")

    rng = np.random.default_rng(7)
    query, source = rng.uniform(size=(30, 3)), rng.uniform(size=(50, 3))
    _, weights = geo.interpolation_weights(query, source)
    if np.abs(weights.sum(axis=1) - 1.0).max() > 1e-9:
        problems.append("partition of unity")
    const = geo.interpolate_features(query, source, np.full((50, 4), 3.25))
    if np.abs(const - 3.25).max() > 1e-9:
        problems.append("constant-feature fixed point")

    cloud = rng.uniform(size=(24, 3))
    base = geo.kurtosis_metric(cloud)
    if abs(geo.kurtosis_metric(cloud * 17.0) - base) > 1e-9 * abs(base):
        problems.append("kurtosis scale invariance")
    if abs(geo.kurtosis_metric(cloud[rng.permutation(24)]) - base) > 1e-9 * abs(base):
        problems.append("kurtosis permutation invariance")

    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 60.0
    note(2, ok, f"fps maximin, chamfer/hausdorff exact to 1e-9, interpolation, "
                f"kurtosis invariances in {elapsed:.1f}s; problems: {problems or 'none'}")


# ---------------------------------------------------------------------------
# criterion 3: architecture shape law

def test_criterion_3_shape_law():
    rng = np.random.default_rng(11)
    cloud = rng.uniform(-0.5, 0.5, (256, 3))
    gen = Generator(n_classes=4, rng=np.random.default_rng(0))
    geom = stack_geometries([gen.geometry(cloud)])
    pyramid = gen.encoder(torch.from_numpy(cloud.astype(np.float32)).unsqueeze(0), geom[0])
    shapes = [(int(f.shape[1]), int(f.shape[2])) for _, f in pyramid]
    expected = [(256, 64), (128, 128), (64, 256), (32, 512)]
    concat_width = gen.decoder.fc[0].in_features - gen.n_classes
    ok = shapes == expected and concat_width == 259
    note(3, ok, f"levels {shapes} (want {expected}), decoder concat width {concat_width} (want 259)")


# ---------------------------------------------------------------------------
# criterion 4: toy end-to-end benchmark

def test_criterion_4a_victim_accuracy(victim):
    ok = victim.test_accuracy_ >= 0.95 and victim.fit_seconds_ < VICTIM_BUDGET_S
    note("4a", ok, f"pointnet test accuracy {victim.test_accuracy_:.3f} (>= 0.95) "
                   f"in {victim.fit_seconds_:.0f}s (budget {VICTIM_BUDGET_S}s)")


def test_criterion_4b_lggan_asr_and_chamfer(bench_data, victim, lggan, bench_eval):
    _, test = bench_data
    targets = bench_eval["targets"]
    asr = float(np.mean(bench_eval["lggan_pred"] == targets))
    chamfer = float(
        np.mean(
            [geo.chamfer_distance(c, a) for c, a in zip(test.points, bench_eval["lggan_adv"])]
        )
    )
    ok = lggan.fit_seconds_ < LGGAN_BUDGET_S and asr >= 0.80 and chamfer <= 0.10
    note("4b", ok, f"lggan trained {lggan.fit_seconds_:.0f}s (budget {LGGAN_BUDGET_S}s), "
                   f"targeted ASR {asr:.3f} (>= 0.80), mean chamfer {chamfer:.4f} (<= 0.10)")


def test_criterion_4c_ifgm_asr(bench_eval):
    asr = float(np.mean([r.success for r in bench_eval["ifgm"]]))
    ok = asr >= 0.70
    note("4c", ok, f"ifgm (10 steps) targeted ASR {asr:.3f} (>= 0.70)")


def test_criterion_4d_fgsm_below_ifgm(bench_eval):
    fgsm = float(np.mean([r.success for r in bench_eval["fgsm"]]))
    ifgm = float(np.mean([r.success for r in bench_eval["ifgm"]]))
    ok = fgsm < ifgm
    note("4d", ok, f"fgsm ASR {fgsm:.3f} < ifgm ASR {ifgm:.3f}")


def test_criterion_4e_cw_asr_and_time(bench_eval, lggan, bench_data):
    _, test = bench_data
    cw_asr = float(np.mean([r.success for r in bench_eval["cw"]]))
    cw_median_s = float(np.median([r.seconds for r in bench_eval["cw"]]))
    single_pass = [lggan.attack(test.points[i], int(bench_eval["targets"][i])).seconds for i in range(5)]
    lggan_s = float(np.median(single_pass))
    ok = cw_asr >= 0.95 and cw_median_s >= 10.0 * lggan_s
    note("4e", ok, f"cw-l2 ASR {cw_asr:.3f} (>= 0.95), median {cw_median_s:.2f}s/object "
                   f">= 10x lggan single pass {lggan_s:.3f}s")


# ---------------------------------------------------------------------------
# criterion 5: defense orderings over 3 seeds

def test_criterion_5_defense_orderings(ordering_runs):
    details, ok = [], True
    for run in ordering_runs:
        srs_ok = run["lggan_srs_asr"] > run["cw_srs_asr"]
        sor_ok = run["lggan_sor_asr"] > run["ifgm_sor_asr"]
        ok = ok and srs_ok and sor_ok
        details.append(
            f"seed {run['seed']}: SRS lggan {run['lggan_srs_asr']:.1f}% > cw {run['cw_srs_asr']:.1f}% "
            f"[{srs_ok}]; SOR lggan {run['lggan_sor_asr']:.1f}% > ifgm {run['ifgm_sor_asr']:.1f}% [{sor_ok}]"
        )
    note(5, ok, "; ".join(details))


# ---------------------------------------------------------------------------
# criterion 6: kurtosis orderings over 3 seeds

def test_criterion_6_kurtosis_orderings(ordering_runs):
    details, ok = [], True
    for run in ordering_runs:
        clean, cw = run["clean_kurtosis"], run["cw_kurtosis"]
        ifgm, lg = run["ifgm_kurtosis"], run["lggan_kurtosis"]
        this = clean < ifgm and clean < cw and lg <= cw
        ok = ok and this
        details.append(
            f"seed {run['seed']}: clean {clean:.1f} < ifgm {ifgm:.1f} & < cw {cw:.1f}; "
            f"lggan {lg:.1f} <= cw {cw:.1f} [{this}]"
        )
    note(6, ok, "; ".join(details))


# ---------------------------------------------------------------------------
# criterion 7: translation attack trend + recenter restoration

def test_criterion_7_translation_trend(bench_data, victim):
    _, test = bench_data
    eps_grid = (0.0, 0.01, 0.1, 0.5, 1.0, 2.0)
    raw_acc, defended_acc = [], []
    for eps in eps_grid:
        attack = TranslationAttack(victim, eps=eps)
        translated = [
            attack.attack(test.points[i], rng=np.random.default_rng([0, 7, i])).points
            for i in range(len(test))
        ]
        raw_acc.append(100.0 * float(np.mean(victim.predict(translated) == test.labels)))
        defended = [recenter_defense(c) for c in translated]
        defended_acc.append(100.0 * float(np.mean(victim.predict(defended) == test.labels)))
    monotone = all(
        raw_acc[i + 1] <= raw_acc[i] + 3.0 for i in range(len(eps_grid) - 1)
    )
    restored = all(acc == defended_acc[0] for acc in defended_acc)
    ok = monotone and restored
    note(7, ok, f"accuracies {[f'{a:.1f}' for a in raw_acc]} non-increasing within 3 pts "
                f"[{monotone}]; recenter-defended {[f'{a:.1f}' for a in defended_acc]} "
                f"constant == eps=0 value [{restored}]")


# ---------------------------------------------------------------------------
# criterion 8: alpha sweep shape + plot emission

def test_criterion_8_alpha_sweep(ordering_runs, tmp_path):
    mean = {
        alpha: {
            key: float(np.mean([run["sweep"][alpha][key] for run in ordering_runs]))
            for key in ("asr", "l2", "chamfer")
        }
        for alpha in SWEEP_ALPHAS
    }
    asr_ok = all(
        mean[SWEEP_ALPHAS[i + 1]]["asr"] >= mean[SWEEP_ALPHAS[i]]["asr"] - ASR_SLACK_POINTS
        for i in range(len(SWEEP_ALPHAS) - 1)
    )
    dist_ok = all(
        mean[SWEEP_ALPHAS[i + 1]][key] >= mean[SWEEP_ALPHAS[i]][key] * (1.0 - DIST_SLACK_REL)
        for key in ("l2", "chamfer")
        for i in range(len(SWEEP_ALPHAS) - 1)
    )

    rows = []
    for run in ordering_runs:
        for alpha in SWEEP_ALPHAS:
            stats = run["sweep"][alpha]
            rows.append(
                {
                    "attack": "lggan",
                    "victim": "pointnet",
                    "defense": "none",
                    "n": len(run["test"]),
                    "asr": stats["asr"],
                    "accuracy": 0.0,
                    "mean_l2": stats["l2"],
                    "mean_chamfer": stats["chamfer"],
                    "mean_kurtosis": stats["kurtosis"],
                    "mean_seconds": 0.0,
                    "alpha": alpha,
                    "seed": run["seed"],
                }
            )
    report_path = tmp_path / "sweep_report.json"
    report_path.write_text(json.dumps(aggregate_sweep_rows(rows), indent=2))
    code = cli_main(
        ["report", "--results", str(report_path), "--out", str(tmp_path / "report")]
    )
    plot = tmp_path / "report" / "alpha_sweep.png"
    plot_ok = code == 0 and plot.exists() and plot.stat().st_size > 0
    ok = asr_ok and dist_ok and plot_ok
    trace = {a: (round(mean[a]["asr"], 1), round(mean[a]["l2"], 3), round(mean[a]["chamfer"], 3)) for a in SWEEP_ALPHAS}
    note(8, ok, f"seed-averaged (ASR, l2, chamfer) by alpha {trace}; ASR non-decreasing "
                f"[{asr_ok}], distances non-decreasing [{dist_ok}], plot emitted [{plot_ok}]")


def aggregate_sweep_rows(rows):
    """Average the per-seed sweep rows per alpha for the report plot."""
    out = []
    for alpha in SWEEP_ALPHAS:
        group = [r for r in rows if r["alpha"] == alpha]
        merged = dict(group[0])
        merged["seed"] = -1
        for key in ("asr", "accuracy", "mean_l2", "mean_chamfer", "mean_kurtosis"):
            merged[key] = float(np.mean([r[key] for r in group]))
        merged["n"] = int(np.sum([r["n"] for r in group]))
        out.append(merged)
    return out


# ---------------------------------------------------------------------------
# criterion 9: CLI determinism

DETERMINISM_CONFIG = {
    "data": {"n_classes": 3, "n_points": 64, "train_per_class": 8, "test_per_class": 4},
    "victim": {"epochs": 6, "batch_size": 8, "point_widths": [16, 32], "head_widths": [16]},
    "lggan": {"epochs": 2, "batch_size": 4, "alpha": 5.0},
    "attacks": {"ifgm": {"eps": 0.5, "steps": 3}},
    "eval": {"attacks": ["identity", "ifgm"], "defenses": ["srs"], "limit": 8},
    "report": {"plot": False},
}


def test_criterion_9_cli_determinism(tmp_path):
    config_path = tmp_path / "config.yaml"
    config_path.write_text(yaml.safe_dump(DETERMINISM_CONFIG))

    def run_pipeline(tag):
        base = tmp_path / tag
        for argv in (
            ["make-data", "--config", str(config_path), "--out", str(base / "data")],
            ["train-victim", "--config", str(config_path), "--data", str(base / "data"),
             "--out", str(base / "victim")],
            ["train-lggan", "--config", str(config_path), "--data", str(base / "data"),
             "--victim", str(base / "victim" / "victim_pointnet.ckpt"), "--out", str(base / "gan")],
            ["evaluate", "--config", str(config_path), "--data", str(base / "data"),
             "--victim", str(base / "victim" / "victim_pointnet.ckpt"),
             "--generator", str(base / "gan" / "lggan_generator.ckpt"), "--out", str(base / "eval")],
        ):
            assert cli_main(argv) == 0, argv
        return base

    a = run_pipeline("run_a")
    b = run_pipeline("run_b")
    checks = {
        "dataset bytes": (a / "data" / "train.pcad").read_bytes()
        == (b / "data" / "train.pcad").read_bytes(),
        "victim checkpoint bytes": (a / "victim" / "victim_pointnet.ckpt").read_bytes()
        == (b / "victim" / "victim_pointnet.ckpt").read_bytes(),
        "generator checkpoint bytes": (a / "gan" / "lggan_generator.ckpt").read_bytes()
        == (b / "gan" / "lggan_generator.ckpt").read_bytes(),
        "resolved config bytes": (a / "eval" / "resolved_config.yaml").read_bytes()
        == (b / "eval" / "resolved_config.yaml").read_bytes(),
    }
    rows_a = json.loads((a / "eval" / "report.json").read_text())
    rows_b = json.loads((b / "eval" / "report.json").read_text())
    strip = lambda rows: [{k: v for k, v in r.items() if k != "mean_seconds"} for r in rows]
    checks["report rows (timing excluded)"] = strip(rows_a) == strip(rows_b)
    ok = all(checks.values())
    note(9, ok, ", ".join(f"{name} [{flag}]" for name, flag in checks.items()))


# ---------------------------------------------------------------------------
# criterion 10: LS-GAN loss identities (exact)

def test_criterion_10_lsgan_identities():
    clouds = torch.rand(2, 6, 3)
    _, comps = generator_loss(
        torch.zeros(2, 3), [0, 1], clouds, clouds.clone(), d_score=torch.ones(2)
    )
    dis_zero = comps["dis"] == 0.0
    d_zero = float(discriminator_loss(score_real=torch.ones(3), score_fake=torch.zeros(3))) == 0.0
    d_worst = float(discriminator_loss(score_real=torch.zeros(1), score_fake=torch.ones(1))) == 1.0
    ok = dis_zero and d_zero and d_worst
    note(10, ok, f"L_dis(D=1)=0 [{dis_zero}], L_D(fake=0, real=1)=0 [{d_zero}], "
                 f"L_D(fake=1, real=0)=1 [{d_worst}]")
