"""Discrete probability measures over curve points.

Each weight scheme turns a curve into a probability vector, one weight per
point, that steers where the transport distance concentrates its attention.
Schemes are either index-driven, coordinate-driven, or restricted to a
support window of indices outside of which the weight is exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .curves import Curve2D
from .errors import (
    DegenerateDenominator,
    NegativeCoordinateForScheme,
    UnresolvableSupport,
)

KINDS = (
    "uniform",
    "binomial",
    "index_increasing",
    "index_decreasing",
    "first_coordinate",
    "second_coordinate",
    "second_coordinate_reversed",
    "support_uniform",
    "support_first_coordinate",
    "support_second_coordinate",
    "support_second_coordinate_reversed",
)

SUPPORT_KINDS = tuple(k for k in KINDS if k.startswith("support_"))

# schemes that read raw coordinate values and therefore need nonnegative data
_NONNEGATIVE_KINDS = (
    "first_coordinate",
    "second_coordinate",
    "support_first_coordinate",
    "support_second_coordinate",
    "support_second_coordinate_reversed",
)

# binomial parameters anchoring the distribution mean at n/6 resp. n/3
BINOMIAL_PRESETS = {"sharp": 1.0 / 6.0, "soft": 1.0 / 3.0}


@dataclass(frozen=True)
class SupportSpec:
    """How to resolve a support window: 'index_fraction', 'height_fraction'
    (both with a fraction in value) or 'explicit' with value (k1, k2)."""

    mode: str
    value: float | tuple[int, int]

    def __post_init__(self):
        if self.mode not in ("index_fraction", "height_fraction", "explicit"):
            raise UnresolvableSupport(f"unknown support mode {self.mode!r}")
        if self.mode == "explicit":
            k1, k2 = self.value
            object.__setattr__(self, "value", (int(k1), int(k2)))
        else:
            f = float(self.value)
            if not (0.0 < f <= 1.0):
                raise UnresolvableSupport(f"fraction must be in (0, 1], got {f}")
            object.__setattr__(self, "value", f)

    def to_json(self) -> dict:
        v = list(self.value) if self.mode == "explicit" else self.value
        return {"mode": self.mode, "value": v}

    @staticmethod
    def from_json(obj: dict) -> "SupportSpec":
        value = obj["value"]
        if obj.get("mode") == "explicit":
            value = tuple(value)
        return SupportSpec(mode=obj.get("mode", ""), value=value)


@dataclass(frozen=True)
class WeightScheme:
    """Selects one weight distribution plus its parameters."""

    kind: str
    p: float | None = None
    support: SupportSpec | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "binomial":
            if self.p is None or not (0.0 < self.p < 1.0):
                raise ValueError(f"binomial requires p strictly in (0, 1), got {self.p}")
        if self.kind in SUPPORT_KINDS and self.support is None:
            raise ValueError(f"{self.kind} requires a support specification")

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.p is not None:
            out["p"] = self.p
        if self.support is not None:
            out["support"] = self.support.to_json()
        return out

    @staticmethod
    def from_json(obj: dict) -> "WeightScheme":
        known = {"kind", "p", "support"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown scheme fields: {sorted(unknown)}")
        support = obj.get("support")
        return WeightScheme(
            kind=obj.get("kind", ""),
            p=obj.get("p"),
            support=SupportSpec.from_json(support) if support is not None else None,
        )


def binomial_scheme(preset: str) -> WeightScheme:
    """Named binomial presets: 'sharp' focuses the first ~1/6 of the curve,
    'soft' the first ~1/3."""
    return WeightScheme(kind="binomial", p=BINOMIAL_PRESETS[preset])


@dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative weights aligned index-for-index with a curve's points."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.shape[0]

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def resolve_support(c: Curve2D, spec: SupportSpec) -> tuple[int, int]:
    """Resolve a support window to 1-based inclusive indices (k1, k2).

    Height mode keeps the maximal prefix run of points whose height stays
    within the fraction of the curve's height range above its minimum;
    index mode keeps the first ceil(f*n) points.
    """
    n = len(c)
    if spec.mode == "explicit":
        k1, k2 = spec.value
        if not (1 <= k1 < k2 <= n):
            raise UnresolvableSupport(f"explicit window ({k1}, {k2}) invalid for n={n}")
        return k1, k2
    if spec.mode == "index_fraction":
        k2 = min(n, math.ceil(spec.value * n))
        if k2 < 2:
            raise UnresolvableSupport(f"index fraction {spec.value} keeps {k2} < 2 points")
        return 1, k2
    # height_fraction
    x2 = c.x2
    lo, hi = float(x2.min()), float(x2.max())
    threshold = lo + spec.value * (hi - lo)
    below = x2 <= threshold
    k2 = int(np.argmin(below)) if not below.all() else n
    if k2 < 2:
        raise UnresolvableSupport(
            f"height fraction {spec.value} keeps a prefix of {k2} < 2 points"
        )
    return 1, k2


def _require_nonnegative(values: np.ndarray, kind: str, axis_name: str):
    if (values < 0).any():
        raise NegativeCoordinateForScheme(
            f"{kind} needs nonnegative {axis_name} coordinates"
        )


def build_measure(c: Curve2D, scheme: WeightScheme) -> DiscreteMeasure:
    """Evaluate a weight scheme on a curve's raw (pre-alignment) coordinates.

    Returns a probability measure: weights >= 0 summing to 1, exactly zero
    outside the support window for support-restricted kinds.
    """
    n = len(c)
    kind = scheme.kind

    if kind in SUPPORT_KINDS:
        k1, k2 = resolve_support(c, scheme.support)
        return _support_measure(c, kind, k1, k2)

    if kind == "uniform":
        w = np.full(n, 1.0 / n)
    elif kind == "binomial":
        # pmf over outcomes 0..n-1 mapped to points 1..n; the missing n-th
        # outcome makes the raw vector sum to 1 - p^n, hence the renormalize
        w = binom.pmf(np.arange(n), n, scheme.p)
        w = w / w.sum()
    elif kind == "index_increasing":
        idx = np.arange(1, n + 1, dtype=float)
        w = idx / idx.sum()
    elif kind == "index_decreasing":
        idx = np.arange(1, n + 1, dtype=float)
        w = (1.0 - idx / idx.sum()) / (n - 1)
    elif kind == "first_coordinate":
        _require_nonnegative(c.x1, kind, "first")
        s = c.x1.sum()
        if s <= 0.0:
            raise DegenerateDenominator(f"{kind}: all first coordinates are zero")
        w = c.x1 / s
    elif kind == "second_coordinate":
        _require_nonnegative(c.x2, kind, "second")
        s = c.x2.sum()
        if s <= 0.0:
            raise DegenerateDenominator(f"{kind}: all second coordinates are zero")
        w = c.x2 / s
    elif kind == "second_coordinate_reversed":
        gap = c.x2.max() - c.x2
        s = gap.sum()
        if s <= 0.0:
            raise DegenerateDenominator(f"{kind}: all second coordinates are equal")
        w = gap / s
    else:  # pragma: no cover - KINDS is exhaustive
        raise ValueError(f"unhandled kind {kind!r}")
    return DiscreteMeasure(weights=w)


def _support_measure(c: Curve2D, kind: str, k1: int, k2: int) -> DiscreteMeasure:
    n = len(c)
    size = k2 - k1 + 1
    if size < 2:
        raise UnresolvableSupport(f"support window ({k1}, {k2}) has {size} < 2 points")
    sl = slice(k1 - 1, k2)
    w = np.zeros(n)

    if kind == "support_uniform":
        w[sl] = 1.0 / size
    elif kind == "support_first_coordinate":
        vals = c.x1[sl]
        _require_nonnegative(vals, kind, "first")
        s = vals.sum()
        if s <= 0.0:
            raise DegenerateDenominator(f"{kind}: window first coordinates sum to zero")
        w[sl] = vals / s
    elif kind == "support_second_coordinate":
        vals = c.x2[sl]
        _require_nonnegative(vals, kind, "second")
        s = vals.sum()
        if s <= 0.0:
            raise DegenerateDenominator(f"{kind}: window second coordinates sum to zero")
        w[sl] = vals / s
    elif kind == "support_second_coordinate_reversed":
        vals = c.x2[sl]
        _require_nonnegative(vals, kind, "second")
        s = vals.sum()
        if s <= 0.0:
            raise DegenerateDenominator(f"{kind}: window second coordinates sum to zero")
        base = vals / s
        # (1 - base_i) summed over the window is size - 1, so dividing by
        # size - 1 yields a probability vector favoring the window's start
        w[sl] = (1.0 - base) / (size - 1)
    else:  # pragma: no cover
        raise ValueError(f"unhandled support kind {kind!r}")
    return DiscreteMeasure(weights=w)
