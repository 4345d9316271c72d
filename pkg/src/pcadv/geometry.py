"""Deterministic point-set kernels: sampling, neighbor queries, interpolation
weights, set distances, and the nearest-distance kurtosis metric.

All functions are pure, operate on (N, 3) float arrays, and do brute-force
O(N^2) neighbor search, which is fine at desk scale (N <= 2048). Everything
is deterministic; ties break to the lowest index.
"""

import numpy as np


def _as_points(points, name="points", min_points=1):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"{name} must have shape (N, 3), got {pts.shape}")
    if pts.shape[0] < min_points:
        raise ValueError(f"{name} needs at least {min_points} points, got {pts.shape[0]}")
    if not np.isfinite(pts).all():
        raise ValueError(f"{name} contains non-finite coordinates")
    return pts


def pairwise_distances(a, b):
    """Euclidean distance matrix (len(a), len(b)).

    Uses the broadcast-difference form so coincident points come out at
    exactly 0.0 (the quadratic expansion does not).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def normalize_unit_cube(points):
    """Center the bounding-box midpoint at the origin and scale the longest
    bounding-box edge to 1, so every coordinate lands in [-0.5, 0.5].

    Degenerate (zero-extent) clouds are translated only. Aspect ratio is
    preserved.
    """
    pts = _as_points(points)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    mid = (lo + hi) / 2.0
    extent = float((hi - lo).max())
    out = pts - mid
    if extent > 0.0:
        out = out / extent
    return out


def is_unit_cube_normalized(points, tol=1e-6):
    """True if normalize_unit_cube would be a no-op up to `tol`."""
    pts = _as_points(points)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    mid = (lo + hi) / 2.0
    extent = float((hi - lo).max())
    if np.abs(mid).max() > tol:
        return False
    return extent <= tol or abs(extent - 1.0) <= tol


def farthest_point_sample(points, m, seed_index=0):
    """Greedy maximin subset selection: starting from `seed_index`, each new
    index maximizes the minimum distance to the already-selected set.

    Returns int64 indices of length m. Ties break to the lowest index, so
    the result is deterministic given the seed.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}], got {m}")
    if not 0 <= seed_index < n:
        raise ValueError(f"seed_index out of range: {seed_index}")
    selected = np.empty(m, dtype=np.int64)
    selected[0] = seed_index
    # squared distances preserve the maximin argmax and avoid sqrt in the loop
    diff = pts - pts[seed_index]
    min_sq = np.einsum("ij,ij->i", diff, diff)
    for i in range(1, m):
        nxt = int(np.argmax(min_sq))
        selected[i] = nxt
        diff = pts - pts[nxt]
        np.minimum(min_sq, np.einsum("ij,ij->i", diff, diff), out=min_sq)
    return selected


def centroid_seed_index(points):
    """Canonical FPS seed: index of the point closest to the centroid
    (ties to the lowest index). Permutation-covariant, so networks seeded
    this way pick the same geometric point regardless of input order.
    """
    pts = _as_points(points)
    centroid = pts.mean(axis=0)
    diff = pts - centroid
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))


def knn(query, source, k):
    """k nearest source points per query point, by Euclidean distance.

    Returns (indices (nq, k) int64, distances (nq, k)) with distances
    non-decreasing along each row; ties break to the lowest source index.
    A query point that is also a source point finds itself at distance 0.
    """
    q = _as_points(query, "query")
    s = _as_points(source, "source")
    if k > s.shape[0]:
        raise ValueError(f"k={k} exceeds source size {s.shape[0]}")
    if k < 1:
        raise ValueError("k must be >= 1")
    d = pairwise_distances(q, s)
    idx = np.argsort(d, axis=1, kind="stable")[:, :k]
    return idx.astype(np.int64), np.take_along_axis(d, idx, axis=1)


def ball_query(query, source, radius, max_k):
    """Up to max_k source points within `radius` of each query point,
    nearest first.

    Queries with an empty ball fall back to their single nearest neighbor.
    Groups shorter than max_k are padded by repeating the first (nearest)
    index so downstream group tensors stay rectangular; `counts` gives the
    number of real members per row.

    Returns (indices (nq, max_k) int64, distances (nq, max_k), counts (nq,)).
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if max_k < 1:
        raise ValueError("max_k must be >= 1")
    q = _as_points(query, "query")
    s = _as_points(source, "source")
    d = pairwise_distances(q, s)
    masked = np.where(d <= radius, d, np.inf)
    k_eff = min(max_k, s.shape[0])
    order = np.argsort(masked, axis=1, kind="stable")[:, :k_eff]
    ordered_d = np.take_along_axis(masked, order, axis=1)
    counts = np.isfinite(ordered_d).sum(axis=1).astype(np.int64)
    empty_rows = np.flatnonzero(counts == 0)
    if empty_rows.size:
        nearest = np.argmin(d[empty_rows], axis=1)
        order[empty_rows, 0] = nearest
        ordered_d[empty_rows, 0] = d[empty_rows, nearest]
        counts[empty_rows] = 1
    # pad short rows (and the k_eff..max_k tail) with the first (nearest) member
    idx = np.repeat(order[:, :1], max_k, axis=1)
    dist = np.repeat(ordered_d[:, :1], max_k, axis=1)
    cols = np.arange(k_eff)[None, :]
    keep = cols < counts[:, None]
    idx[:, :k_eff][keep] = order[keep]
    dist[:, :k_eff][keep] = ordered_d[keep]
    return idx.astype(np.int64), dist, counts


def interpolation_weights(query, source, eps=1e-8):
    """Inverse-distance weights over each query point's 3 nearest source
    points, normalized to sum to 1 (w_j proportional to 1/d_j).

    A query closer than `eps` to a source point snaps to it exactly
    (weight vector (1, 0, 0)), which removes the 1/d singularity.

    Returns (indices (nq, 3) int64, weights (nq, 3)).
    """
    s = np.asarray(source, dtype=np.float64)
    if s.shape[0] < 3:
        raise ValueError(f"interpolation needs >= 3 source points, got {s.shape[0]}")
    idx, dist = knn(query, source, 3)
    snap = dist[:, 0] < eps
    inv = 1.0 / np.maximum(dist, eps)
    weights = inv / inv.sum(axis=1, keepdims=True)
    weights[snap] = np.array([1.0, 0.0, 0.0])
    return idx, weights


def interpolate_features(query, source, source_features):
    """Inverse-distance weighted 3-NN interpolation of per-point features
    from `source` points onto `query` points."""
    feats = np.asarray(source_features, dtype=np.float64)
    s = np.asarray(source, dtype=np.float64)
    if feats.shape[0] != s.shape[0]:
        raise ValueError("source_features rows must align with source points")
    idx, weights = interpolation_weights(query, source)
    return np.einsum("qk,qkc->qc", weights, feats[idx])


def paired_l2_distance(a, b):
    """Mean per-point Euclidean displacement between index-corresponding
    clouds (the reported 'l2 distance per object')."""
    pa = _as_points(a, "a")
    pb = _as_points(b, "b")
    if pa.shape != pb.shape:
        raise ValueError(f"size mismatch: {pa.shape} vs {pb.shape}")
    return float(np.linalg.norm(pa - pb, axis=1).mean())


def chamfer_distance(a, b):
    """Symmetric Chamfer distance: average of the two directed mean
    nearest-neighbor (non-squared) distances."""
    pa = _as_points(a, "a")
    pb = _as_points(b, "b")
    d = pairwise_distances(pa, pb)
    return float(0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean()))


def hausdorff_distance(a, b):
    """Max of the two directed Hausdorff distances max_x min_y ||x - y||."""
    pa = _as_points(a, "a")
    pb = _as_points(b, "b")
    d = pairwise_distances(pa, pb)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def nearest_neighbor_distances(points):
    """Each point's distance to its nearest other point, sorted ascending."""
    pts = _as_points(points, min_points=2)
    d = pairwise_distances(pts, pts)
    np.fill_diagonal(d, np.inf)
    return np.sort(d.min(axis=1))


def pearson_kurtosis(values):
    """Pearson (non-excess) kurtosis m4 / m2^2 of a sample."""
    v = np.asarray(values, dtype=np.float64)
    dev = v - v.mean()
    m2 = np.mean(dev**2)
    if m2 == 0.0:
        raise ValueError("kurtosis undefined: sample has zero variance")
    m4 = np.mean(dev**4)
    return float(m4 / m2**2)


def kurtosis_metric(points):
    """Kurtosis of a cloud's nearest-neighbor distance distribution.

    Spikes when a cloud grows isolated outlier points, which is what makes
    it a perturbation detector. Scale-free; undefined (raises) on perfectly
    regular clouds whose nearest distances all coincide.
    """
    pts = _as_points(points, min_points=4)
    return pearson_kurtosis(nearest_neighbor_distances(pts))
