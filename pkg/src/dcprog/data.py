"""Instance generation, dataset ingestion, and the clustering baseline."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

__all__ = [
    "KsparseInstanceSpec",
    "Dataset",
    "gen_ksparse",
    "load_csv",
    "save_csv",
    "export_instance",
    "load_instance",
    "kmedians_baseline",
    "l1_clustering_objective",
]


@dataclass
class KsparseInstanceSpec:
    """Shape and seed of a synthetic sparse-regression instance."""

    m: int
    n: int
    K: int
    noise_std: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if min(self.m, self.n, self.K) < 1 or self.K >= self.n:
            raise ValueError("need m, n, K >= 1 and K < n")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")


def gen_ksparse(spec, rng=None):
    """Synthetic instance (A, b, x_true) for sparse regression.

    x_true has exactly K standard-normal entries at random positions; A has
    standard-normal entries with columns scaled to unit l2 norm; b is the
    clean signal plus N(0, noise_std^2) noise. Bit-identical per spec.seed
    when no generator is passed.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    support = rng.choice(spec.n, size=spec.K, replace=False)
    x_true = np.zeros(spec.n)
    x_true[support] = rng.standard_normal(spec.K)
    A = rng.standard_normal((spec.m, spec.n))
    A /= np.linalg.norm(A, axis=0)
    b = A @ x_true + spec.noise_std * rng.standard_normal(spec.m)
    return A, b, x_true


@dataclass
class Dataset:
    """Numeric point cloud with optional labels (ignored by solvers)."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] < 1:
            raise ValueError("points must be an n x d matrix with d >= 1")
        if not np.isfinite(self.points).all():
            raise ValueError("points contain missing or non-finite values")

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]


def load_csv(path, has_header=False, label_column=None, name=None):
    """Read a comma-separated numeric table into a Dataset.

    `label_column` (0-based, negatives allowed) is split out of the feature
    matrix; row order is preserved. Parse failures report the 1-based row and
    column of the offending field.
    """
    path = Path(path)
    rows = []
    labels = []
    width = None
    skipped_header = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if has_header and not skipped_header:
                skipped_header = True
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ValueError(
                    f"{path}: row {lineno} has {len(fields)} fields, expected {width}"
                )
            lbl_idx = None
            if label_column is not None:
                lbl_idx = label_column % width
            vals = []
            for col, tok in enumerate(fields):
                if col == lbl_idx:
                    labels.append(tok.strip())
                    continue
                try:
                    vals.append(float(tok))
                except ValueError as exc:
                    raise ValueError(
                        f"{path}: cannot parse row {lineno}, column {col + 1}: {tok!r}"
                    ) from exc
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    points = np.asarray(rows, dtype=float)
    lab = np.asarray(labels) if label_column is not None else None
    return Dataset(points=points, labels=lab, name=name or path.stem)


def save_csv(dataset, path):
    """Write the feature matrix back out; round-trips exactly via repr floats."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in dataset.points:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def export_instance(path, A, b, x_true):
    """Persist a generated instance as a compressed columnar binary."""
    np.savez_compressed(path, A=A, b=b, x_true=x_true)


def load_instance(path):
    with np.load(path) as z:
        return z["A"], z["b"], z["x_true"]


def l1_clustering_objective(points, centers):
    """(1/n) sum_i min_l ||mu_l - a_i||_1."""
    d = np.abs(centers[None, :, :] - points[:, None, :]).sum(axis=2)
    return float(d.min(axis=1).mean())


def _lower_median(col):
    """Lower median: element at index (m-1)//2 of the sorted column."""
    k = (col.size - 1) // 2
    return np.partition(col, k)[k]


def kmedians_baseline(data, K, replicates=5, seed=0, max_sweeps=100):
    """Alternating k-medians initializer (stand-in for a medoid-swap library).

    Each replicate restarts from K distinct random points and alternates
    assigning points to their l1-nearest center with resetting every center
    coordinate to the lower coordinatewise median of its cluster, which never
    increases the clustering objective. Empty clusters are re-seeded at the
    point farthest from its current center. Returns the centers of the best
    replicate.
    """
    points = data.points if isinstance(data, Dataset) else np.asarray(data, float)
    n, d = points.shape
    if not 1 <= K <= n:
        raise ValueError("need 1 <= K <= n")
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    best_centers = None
    best_obj = np.inf
    for rep in range(replicates):
        rng = np.random.default_rng([seed, rep])
        centers = points[rng.choice(n, size=K, replace=False)].copy()
        prev_assign = None
        for _ in range(max_sweeps):
            dist = np.abs(centers[None, :, :] - points[:, None, :]).sum(axis=2)
            assign = dist.argmin(axis=1)
            if prev_assign is not None and np.array_equal(assign, prev_assign):
                break
            prev_assign = assign
            for l in range(K):
                members = points[assign == l]
                if members.size == 0:
                    far = int(dist[np.arange(n), assign].argmax())
                    centers[l] = points[far]
                    continue
                for r in range(d):
                    centers[l, r] = _lower_median(members[:, r])
        obj = l1_clustering_objective(points, centers)
        if obj < best_obj:
            best_obj, best_centers = obj, centers.copy()
    return best_centers
