"""2D curve representation and geometric preprocessing.

A curve is an ordered polyline of (x1, x2) points. Preprocessing covers the
external-half cut, pairwise common-centroid alignment, and arc-length
resampling used by the Procrustes baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHalf, EmptyCurve, NonFiniteCoordinate, ZeroLengthCurve


@dataclass(frozen=True)
class Curve2D:
    """Immutable ordered sequence of 2D points with an identifying label."""

    points: np.ndarray  # (n, 2) float64, read-only
    id: str = "curve"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise EmptyCurve(f"expected (n, 2) points, got shape {pts.shape}")
        pts = np.ascontiguousarray(pts)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def x1(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def x2(self) -> np.ndarray:
        return self.points[:, 1]

    def with_points(self, points: np.ndarray, id: str | None = None) -> "Curve2D":
        return Curve2D(points=points, id=self.id if id is None else id)


@dataclass(frozen=True)
class Centroid:
    u: float
    w: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.w])


def validate_curve(raw, id: str = "curve") -> Curve2D:
    """Build a Curve2D from raw point pairs, checking the basic invariants.

    Raises EmptyCurve for fewer than two points and NonFiniteCoordinate
    (with the 1-based offending index) for NaN/inf entries.
    """
    pts = np.asarray(raw, dtype=float)
    if pts.size == 0:
        raise EmptyCurve("curve has no points")
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise EmptyCurve(f"expected (n, 2) points, got shape {pts.shape}")
    if pts.shape[0] < 2:
        raise EmptyCurve(f"curve needs at least 2 points, got {pts.shape[0]}")
    finite = np.isfinite(pts).all(axis=1)
    if not finite.all():
        raise NonFiniteCoordinate(int(np.argmin(finite)) + 1)
    return Curve2D(points=pts, id=id)


def centroid(c: Curve2D) -> Centroid:
    """Unweighted mean of the curve's points."""
    u, w = c.points.mean(axis=0)
    return Centroid(float(u), float(w))


def extract_external_half(c: Curve2D) -> Curve2D:
    """Suffix of the curve starting at the first point of minimal height.

    The cut keeps points from the first index attaining min x2 through the
    end. Raises DegenerateHalf when that suffix would be a single point.
    """
    i_min = int(np.argmin(c.x2))  # first index on ties
    if i_min == len(c) - 1:
        raise DegenerateHalf(
            f"curve {c.id!r}: minimum height at the last point leaves a 1-point suffix"
        )
    return c.with_points(c.points[i_min:])


def align_centroids(a: Curve2D, b: Curve2D) -> tuple[Curve2D, Curve2D]:
    """Translate both curves so their centroids coincide at the midpoint.

    The common target is the average of the two centroids; each curve is
    shifted rigidly, so point counts and in-curve geometry are unchanged.
    """
    ca = centroid(a).as_array()
    cb = centroid(b).as_array()
    common = 0.5 * (ca + cb)
    return (
        a.with_points(a.points + (common - ca)),
        b.with_points(b.points + (common - cb)),
    )


def arc_length(c: Curve2D) -> float:
    """Total polyline length."""
    seg = np.diff(c.points, axis=0)
    return float(np.hypot(seg[:, 0], seg[:, 1]).sum())


def resample_arc_length(c: Curve2D, k: int) -> Curve2D:
    """Place k points at equal arc-length spacing along the polyline.

    Endpoints are preserved exactly. Raises ZeroLengthCurve when the
    polyline has zero total length.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    pts = c.points
    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    total = seg_len.sum()
    if total <= 0.0:
        raise ZeroLengthCurve(f"curve {c.id!r} has zero arc length")

    # drop zero-length segments so the cumulative abscissa is strictly increasing
    keep = np.concatenate([[True], seg_len > 0.0])
    pts = pts[keep]
    cum = np.concatenate([[0.0], np.cumsum(seg_len[seg_len > 0.0])])

    targets = np.linspace(0.0, total, k)
    x = np.interp(targets, cum, pts[:, 0])
    y = np.interp(targets, cum, pts[:, 1])
    out = np.column_stack([x, y])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return c.with_points(out)


def translate(c: Curve2D, dx: float, dy: float) -> Curve2D:
    return c.with_points(c.points + np.array([dx, dy]))


def scale(c: Curve2D, s: float) -> Curve2D:
    return c.with_points(c.points * float(s))


def invert_height(c: Curve2D) -> Curve2D:
    """Flip the curve vertically within its own height range (x2 -> max - x2).

    Keeps coordinates nonnegative for height-driven weight schemes; under
    centroid alignment the per-curve shift is absorbed, so pairwise geometry
    matches a global flip.
    """
    pts = c.points.copy()
    pts[:, 1] = pts[:, 1].max() - pts[:, 1]
    return c.with_points(pts)


def truncate_to_indices(c: Curve2D, k1: int, k2: int) -> Curve2D:
    """Keep points k1..k2 (1-based, inclusive)."""
    if not (1 <= k1 < k2 <= len(c)):
        raise ValueError(f"invalid index window ({k1}, {k2}) for n={len(c)}")
    return c.with_points(c.points[k1 - 1 : k2])
