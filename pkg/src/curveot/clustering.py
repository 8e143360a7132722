"""Pairwise distance matrices, agglomerative clustering, and the
Procrustes baseline.

Clustering is plain Lance-Williams agglomeration with a deterministic
tie-break, so dendrograms are reproducible across platforms and dataset
orderings.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb

import numpy as np

from .curves import Curve2D, resample_arc_length
from .errors import PairComputationError, SymmetryViolation
from .pipeline import PipelineConfig, curve_distance

LINKAGES = ("single", "complete", "average", "ward")


@dataclass(frozen=True)
class DistanceMatrix:
    entries: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        e = np.ascontiguousarray(np.asarray(self.entries, dtype=float))
        labels = tuple(self.labels)
        n = len(labels)
        if e.shape != (n, n):
            raise SymmetryViolation(f"matrix {e.shape} does not fit {n} labels")
        if not np.isfinite(e).all():
            raise SymmetryViolation("matrix has non-finite entries")
        if (e < 0).any():
            raise SymmetryViolation(
                "matrix has negative entries (penalized objectives are not distances)"
            )
        if np.abs(e - e.T).max(initial=0.0) > 1e-9:
            raise SymmetryViolation("matrix is not symmetric within 1e-9")
        if np.abs(np.diag(e)).max(initial=0.0) > 0.0:
            raise SymmetryViolation("matrix diagonal is not zero")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Merge:
    a: int
    b: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge tree; leaves are 0..N-1 in label order, the t-th merge
    creates cluster id N+t."""

    merges: tuple[Merge, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.merges) != len(self.labels) - 1:
            raise ValueError(
                f"{len(self.labels)} leaves need {len(self.labels) - 1} merges, "
                f"got {len(self.merges)}"
            )

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "merges": [[m.a, m.b, m.height, m.size] for m in self.merges],
        }

    @staticmethod
    def from_json(obj: dict) -> "Dendrogram":
        return Dendrogram(
            merges=tuple(Merge(int(a), int(b), float(h), int(s)) for a, b, h, s in obj["merges"]),
            labels=tuple(obj["labels"]),
        )


def pairwise_matrix(
    curves: list[Curve2D],
    config: PipelineConfig,
    jobs: int = 1,
    progress=None,
) -> DistanceMatrix:
    """Pipeline distance for every unordered pair.

    Each pair is computed once and mirrored, so the matrix is symmetric by
    construction and independent of the worker count. `progress` is called
    with (done, total) after each pair.
    """
    n = len(curves)
    if n < 2:
        raise ValueError("need at least two curves")
    labels = tuple(c.id for c in curves)
    if len(set(labels)) != n:
        raise ValueError("curve ids must be unique")
    entries = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def compute(pair):
        i, j = pair
        try:
            return i, j, curve_distance(curves[i], curves[j], config)
        except Exception as e:  # noqa: BLE001 - wrapped with pair identity
            raise PairComputationError(labels[i], labels[j], e) from e

    done = 0
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for i, j, d in pool.map(compute, pairs):
                entries[i, j] = entries[j, i] = d
                done += 1
                if progress:
                    progress(done, len(pairs))
    else:
        for pair in pairs:
            i, j, d = compute(pair)
            entries[i, j] = entries[j, i] = d
            done += 1
            if progress:
                progress(done, len(pairs))
    return DistanceMatrix(entries=entries, labels=labels)


def hierarchical_cluster(dm: DistanceMatrix, linkage: str = "average") -> Dendrogram:
    """Lance-Williams agglomeration.

    Ties between merge candidates break on the lexicographically smallest
    (smallest leaf, largest-of-pair smallest leaf) representatives, making
    the tree deterministic and dataset-order invariant.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}")
    n = len(dm)
    # ward's recurrence operates on squared dissimilarities
    work = dm.entries.astype(float) ** 2 if linkage == "ward" else dm.entries.astype(float)
    d = work.copy()
    np.fill_diagonal(d, np.inf)

    active = list(range(n))
    ids = {i: i for i in range(n)}  # slot -> cluster id
    sizes = {i: 1 for i in range(n)}
    reps = {i: i for i in range(n)}  # smallest leaf in the cluster, for ties
    merges: list[Merge] = []

    for step in range(n - 1):
        v = d.min()
        tied = np.argwhere(d == v)
        best = None
        for i, j in tied:
            if i >= j:
                continue
            key = tuple(sorted((reps[int(i)], reps[int(j)])))
            if best is None or key < best[0]:
                best = (key, int(i), int(j))
        _, x, y = best
        height = float(np.sqrt(d[x, y])) if linkage == "ward" else float(d[x, y])
        na, nb = sizes[x], sizes[y]
        a_id, b_id = sorted((ids[x], ids[y]))
        merges.append(Merge(a=a_id, b=b_id, height=height, size=na + nb))

        for z in active:
            if z in (x, y):
                continue
            if linkage == "single":
                new = min(d[x, z], d[y, z])
            elif linkage == "complete":
                new = max(d[x, z], d[y, z])
            elif linkage == "average":
                new = (na * d[x, z] + nb * d[y, z]) / (na + nb)
            else:  # ward, on squared distances
                nz = sizes[z]
                new = (
                    (na + nz) * d[x, z] + (nb + nz) * d[y, z] - nz * d[x, y]
                ) / (na + nb + nz)
            d[x, z] = d[z, x] = new
        active.remove(y)
        d[y, :] = np.inf
        d[:, y] = np.inf
        sizes[x] = na + nb
        ids[x] = n + step
        reps[x] = min(reps[x], reps[y])
    return Dendrogram(merges=tuple(merges), labels=dm.labels)


def cut_clusters(dend: Dendrogram, k: int) -> list[int]:
    """Labels (0..k-1) per leaf from cutting the tree into k clusters.

    Applies the first N-k merges; cluster numbering follows the smallest
    leaf index in each cluster.
    """
    n = len(dend.labels)
    if not (1 <= k <= n):
        raise ValueError(f"k must be in 1..{n}, got {k}")
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for step, m in enumerate(dend.merges[: n - k]):
        members[n + step] = members.pop(m.a) + members.pop(m.b)
    groups = sorted(members.values(), key=min)
    labels = [0] * n
    for g, leaves in enumerate(groups):
        for leaf in leaves:
            labels[leaf] = g
    return labels


def adjusted_rand_index(x, y) -> float:
    """Chance-corrected agreement between two flat partitions."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError("partitions must have equal length")
    n = x.size
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    contingency = np.zeros((xi.max() + 1, yi.max() + 1), dtype=int)
    np.add.at(contingency, (xi, yi), 1)
    sum_cells = sum(comb(int(v), 2) for v in contingency.ravel())
    sum_rows = sum(comb(int(v), 2) for v in contingency.sum(axis=1))
    sum_cols = sum(comb(int(v), 2) for v in contingency.sum(axis=0))
    total = comb(n, 2)
    expected = sum_rows * sum_cols / total if total else 0.0
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        return 1.0 if np.array_equal(xi, yi) else 0.0
    return (sum_cells - expected) / (max_index - expected)


def to_newick(dend: Dendrogram) -> str:
    """Newick rendering with ultrametric branch lengths derived from the
    merge heights (child branch = parent height - child height)."""
    n = len(dend.labels)
    heights = {i: 0.0 for i in range(n)}
    children: dict[int, tuple[int, int]] = {}
    for step, m in enumerate(dend.merges):
        node = n + step
        children[node] = (m.a, m.b)
        heights[node] = m.height
    root = n + len(dend.merges) - 1 if dend.merges else 0

    def render(node: int, parent_height: float) -> str:
        length = max(0.0, parent_height - heights[node])
        if node < n:
            return f"{dend.labels[node]}:{length:.12g}"
        a, b = children[node]
        h = heights[node]
        return f"({render(a, h)},{render(b, h)}):{length:.12g}"

    if not dend.merges:
        return f"{dend.labels[0]};"
    a, b = children[root]
    h = heights[root]
    return f"({render(a, h)},{render(b, h)});"


def procrustes_distance(a: Curve2D, b: Curve2D, k: int = 128) -> float:
    """Shape difference after removing translation, uniform scale, and
    rotation (no reflection) between arc-length resamplings of the curves.

    Returns the residual disparity 1 - s^2, the minimal sum of squared
    differences between the unit-normalized point sets over rotations and
    rescaling; 0 for similarity-equivalent curves.
    """
    A = resample_arc_length(a, k).points
    B = resample_arc_length(b, k).points
    A = A - A.mean(axis=0)
    B = B - B.mean(axis=0)
    A /= np.linalg.norm(A)
    B /= np.linalg.norm(B)
    dot = float((A * B).sum())
    cross = float((A[:, 1] * B[:, 0] - A[:, 0] * B[:, 1]).sum())
    s2 = dot * dot + cross * cross
    return float(max(0.0, 1.0 - s2))
