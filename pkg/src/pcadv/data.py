"""Dataset ingestion and the procedural toy benchmark.

Packed binary layout (little-endian): magic "PCAD", u32 version, u32 cloud
count, u32 points-per-cloud, u32 class count, then per cloud a u32 label
followed by N x 3 float32 coordinates. The ascii-dir format is one cloud
per file ("x y z" per line) plus a labels.txt mapping "filename label".

Every cloud is unit-cube normalized on load; clouds that already satisfy
the normalized invariant are passed through untouched so that saving and
reloading a normalized dataset round-trips bit-identically.
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import is_unit_cube_normalized, normalize_unit_cube
from .validation import check_labels

MAGIC = b"PCAD"
VERSION = 1

TOY_CLASSES = ("sphere", "cube", "cone", "plane", "torus", "cylinder", "helix", "cross")


@dataclass
class PointCloudDataset:
    points: np.ndarray  # (n_clouds, N, 3) float32
    labels: np.ndarray  # (n_clouds,) int64
    class_names: tuple
    split: str = "train"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float32)
        if self.points.ndim != 3 or self.points.shape[2] != 3:
            raise ValueError(f"points must be (n, N, 3), got {self.points.shape}")
        self.labels = check_labels(self.labels, len(self.points), len(self.class_names))

    def __len__(self):
        return len(self.points)

    @property
    def n_points(self):
        return self.points.shape[1]

    @property
    def n_classes(self):
        return len(self.class_names)


def _normalize_loaded(points):
    if is_unit_cube_normalized(points):
        return np.asarray(points, dtype=np.float32)
    return normalize_unit_cube(points).astype(np.float32)


# ---------------------------------------------------------------------------
# toy benchmark

def _sample_sphere(rng, n, jitter):
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return 0.5 * direction + rng.uniform(-jitter, jitter, size=(n, 3))


def _sample_cube(rng, n, jitter):
    face = rng.integers(0, 6, size=n)
    uv = rng.uniform(-0.5, 0.5, size=(n, 2))
    pts = np.empty((n, 3))
    axis = face % 3
    side = np.where(face < 3, 0.5, -0.5)
    for i in range(n):
        others = [a for a in range(3) if a != axis[i]]
        pts[i, axis[i]] = side[i]
        pts[i, others[0]] = uv[i, 0]
        pts[i, others[1]] = uv[i, 1]
    return pts + rng.uniform(-jitter, jitter, size=(n, 3))


def _sample_cone(rng, n, jitter):
    # lateral surface, apex at z=0.5, unit-radius base at z=-0.5; area-uniform
    u = np.sqrt(rng.uniform(size=n))
    theta = rng.uniform(0, 2 * np.pi, size=n)
    radius = 0.5 * u
    z = 0.5 - u
    pts = np.stack([radius * np.cos(theta), radius * np.sin(theta), z], axis=1)
    return pts + rng.uniform(-jitter, jitter, size=(n, 3))


def _sample_plane(rng, n, jitter):
    pts = np.zeros((n, 3))
    pts[:, :2] = rng.uniform(-0.5, 0.5, size=(n, 2))
    return pts + rng.uniform(-jitter, jitter, size=(n, 3))


def _sample_torus(rng, n, jitter):
    u = rng.uniform(0, 2 * np.pi, size=n)
    v = rng.uniform(0, 2 * np.pi, size=n)
    r_major, r_minor = 0.35, 0.15
    x = (r_major + r_minor * np.cos(v)) * np.cos(u)
    y = (r_major + r_minor * np.cos(v)) * np.sin(u)
    z = r_minor * np.sin(v)
    return np.stack([x, y, z], axis=1) + rng.uniform(-jitter, jitter, size=(n, 3))


def _sample_cylinder(rng, n, jitter):
    theta = rng.uniform(0, 2 * np.pi, size=n)
    z = rng.uniform(-0.5, 0.5, size=n)
    pts = np.stack([0.35 * np.cos(theta), 0.35 * np.sin(theta), z], axis=1)
    return pts + rng.uniform(-jitter, jitter, size=(n, 3))


def _sample_helix(rng, n, jitter):
    t = rng.uniform(0, 4 * np.pi, size=n)
    pts = np.stack([0.4 * np.cos(t), 0.4 * np.sin(t), t / (4 * np.pi) - 0.5], axis=1)
    return pts + rng.uniform(-jitter, jitter, size=(n, 3))


def _sample_cross(rng, n, jitter):
    axis = rng.integers(0, 3, size=n)
    pts = rng.uniform(-0.1, 0.1, size=(n, 3))
    span = rng.uniform(-0.5, 0.5, size=n)
    pts[np.arange(n), axis] = span
    return pts + rng.uniform(-jitter, jitter, size=(n, 3))


_SAMPLERS = {
    "sphere": _sample_sphere,
    "cube": _sample_cube,
    "cone": _sample_cone,
    "plane": _sample_plane,
    "torus": _sample_torus,
    "cylinder": _sample_cylinder,
    "helix": _sample_helix,
    "cross": _sample_cross,
}


def random_rotation(rng):
    """Uniform random rotation matrix (QR of a Gaussian with sign fix)."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def make_toy_dataset(
    n_classes=4,
    n_points=256,
    train_per_class=200,
    test_per_class=50,
    jitter=0.02,
    seed=0,
):
    """Procedural shape-classification benchmark: per-cloud random rotation
    and bounded uniform jitter, unit-cube normalized, deterministic under
    the seed. Returns (train, test) PointCloudDataset pair."""
    if not 2 <= n_classes <= len(TOY_CLASSES):
        raise ValueError(f"n_classes must be in [2, {len(TOY_CLASSES)}], got {n_classes}")
    if n_points < 64:
        raise ValueError(f"n_points must be >= 64, got {n_points}")
    names = TOY_CLASSES[:n_classes]
    rng = np.random.default_rng(seed)
    splits = {}
    for split, per_class in (("train", train_per_class), ("test", test_per_class)):
        clouds, labels = [], []
        for label, name in enumerate(names):
            sampler = _SAMPLERS[name]
            for _ in range(per_class):
                raw = sampler(rng, n_points, jitter) @ random_rotation(rng).T
                clouds.append(normalize_unit_cube(raw).astype(np.float32))
                labels.append(label)
        splits[split] = PointCloudDataset(
            np.stack(clouds), np.array(labels), names, split=split
        )
    return splits["train"], splits["test"]


# ---------------------------------------------------------------------------
# packed binary format

def save_packed(dataset, path):
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(
            struct.pack(
                "<IIII", VERSION, len(dataset), dataset.n_points, dataset.n_classes
            )
        )
        for label, cloud in zip(dataset.labels, dataset.points):
            fh.write(struct.pack("<I", int(label)))
            fh.write(np.ascontiguousarray(cloud, dtype="<f4").tobytes())


def load_packed(path, split="train"):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a packed point-cloud file (bad magic)")
    if len(data) < 20:
        raise ValueError(f"{path}: truncated header")
    version, n_clouds, n_points, n_classes = struct.unpack("<IIII", data[4:20])
    if version != VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    record = 4 + n_points * 12
    expected = 20 + n_clouds * record
    if len(data) != expected:
        raise ValueError(
            f"{path}: malformed payload ({len(data)} bytes, expected {expected})"
        )
    clouds = np.empty((n_clouds, n_points, 3), dtype=np.float32)
    labels = np.empty(n_clouds, dtype=np.int64)
    offset = 20
    for i in range(n_clouds):
        (label,) = struct.unpack_from("<I", data, offset)
        if label >= n_classes:
            raise ValueError(f"{path}: cloud {i} label {label} out of range")
        labels[i] = label
        raw = np.frombuffer(data, dtype="<f4", count=n_points * 3, offset=offset + 4)
        clouds[i] = _normalize_loaded(raw.reshape(n_points, 3).astype(np.float64))
        offset += record
    names = tuple(f"class_{i}" for i in range(n_classes))
    return PointCloudDataset(clouds, labels, names, split=split)


# ---------------------------------------------------------------------------
# ascii directory format

def save_ascii_dir(dataset, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, (label, cloud) in enumerate(zip(dataset.labels, dataset.points)):
        name = f"cloud_{i:05d}.xyz"
        np.savetxt(directory / name, cloud, fmt="%.8f")
        lines.append(f"{name} {int(label)}")
    (directory / "labels.txt").write_text("\n".join(lines) + "\n")


def load_ascii_dir(directory, split="train"):
    directory = Path(directory)
    index = directory / "labels.txt"
    if not index.exists():
        raise ValueError(f"{directory}: missing labels.txt index")
    clouds, labels = [], []
    for line in index.read_text().splitlines():
        if not line.strip():
            continue
        try:
            name, label = line.split()
        except ValueError as exc:
            raise ValueError(f"{index}: malformed line {line!r}") from exc
        raw = np.loadtxt(directory / name, dtype=np.float64)
        if raw.ndim == 1:
            raw = raw.reshape(1, 3)
        clouds.append(_normalize_loaded(raw))
        labels.append(int(label))
    if not clouds:
        raise ValueError(f"{directory}: no clouds listed in labels.txt")
    sizes = {c.shape[0] for c in clouds}
    if len(sizes) != 1:
        raise ValueError(f"{directory}: clouds must share a point count, got {sorted(sizes)}")
    labels = np.asarray(labels)
    names = tuple(f"class_{i}" for i in range(int(labels.max()) + 1))
    return PointCloudDataset(np.stack(clouds), labels, names, split=split)


def load_dataset(path, fmt="packed", split="train"):
    if fmt == "packed":
        return load_packed(path, split=split)
    if fmt == "ascii-dir":
        return load_ascii_dir(path, split=split)
    raise ValueError(f"unknown dataset format {fmt!r}")
