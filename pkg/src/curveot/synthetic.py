"""Parametric vessel-profile curves for tests and demos.

Profiles are generated rim-first (height increases along the curve, so
the external-half cut is a no-op) with the radius as the first
coordinate. Families differ in gross shape; the two `jar_rim_*`
families share one body-generation process and differ only inside the
first sixth of the height range, which is what windowed weight schemes
are meant to catch. Their per-sample body variation is damped to zero
inside that window so the rim region carries the family signal alone.
"""

from __future__ import annotations

import numpy as np

from .curves import Curve2D

_RIM_FRACTION = 1.0 / 6.0
_RIM_FLARE = 0.35
_BODY_RAMP = 0.18  # height fraction over which body variation fades in

_JAR_BODY = ("jar", "jar_rim_straight", "jar_rim_flared")


def family_names() -> tuple[str, ...]:
    return ("beaker", "bowl", "jar", "jar_rim_straight", "jar_rim_flared")


def _radius(family: str, t: np.ndarray, body_amp: float, body_skew: float) -> np.ndarray:
    if family == "beaker":
        return 0.6 * (0.9 + 0.15 * t)
    if family == "bowl":
        return 2.2 * (0.35 + 0.9 * np.sqrt(t))
    if family in _JAR_BODY:
        base = 1.4 * (0.55 + 0.5 * np.sin(np.pi * t))
        varied = 1.4 * (0.55 + body_amp * np.sin(np.pi * t**body_skew))
        ramp = np.clip((t - _RIM_FRACTION) / _BODY_RAMP, 0.0, 1.0)
        deviation = (varied - base) * ramp
        # recenter the deviation inside the body so per-sample variation
        # does not move the curve centroid and leak into aligned rims
        if ramp.sum() > 0.0:
            deviation -= deviation.mean() * ramp * (len(t) / ramp.sum())
        r = base + deviation
        if family == "jar_rim_flared":
            rim = np.clip(1.0 - t / _RIM_FRACTION, 0.0, 1.0)
            r = r + 1.4 * _RIM_FLARE * rim
        return r
    raise ValueError(f"unknown family {family!r}; choose from {family_names()}")


def _height(family: str) -> float:
    return {"beaker": 3.2, "bowl": 1.6}.get(family, 2.4)


def profile_curve(
    family: str,
    *,
    n: int = 48,
    scale: float = 1.0,
    noise: float = 0.0,
    body_amp: float = 0.5,
    body_skew: float = 1.0,
    rng: np.random.Generator | None = None,
    id: str = "profile",
) -> Curve2D:
    """One discretized profile: n points, rim at height 0."""
    t = np.linspace(0.0, 1.0, n)
    r = _radius(family, t, body_amp, body_skew)
    if noise > 0.0:
        if rng is None:
            rng = np.random.default_rng(0)
        r = r * (1.0 + rng.normal(0.0, noise, n))
    pts = np.column_stack([np.abs(r) * scale, t * _height(family) * scale])
    return Curve2D(points=pts, id=id)


def family_dataset(
    families,
    *,
    samples: int = 8,
    n: int = 48,
    size_jitter: float = 0.05,
    body_jitter: float = 0.30,
    noise: float = 0.01,
    seed: int = 0,
) -> tuple[list[Curve2D], list[int]]:
    """`samples` per family with size and body-shape jitter; returns the
    curves and their integer family labels."""
    rng = np.random.default_rng(seed)
    curves: list[Curve2D] = []
    labels: list[int] = []
    for fi, family in enumerate(families):
        for s in range(samples):
            curves.append(
                profile_curve(
                    family,
                    n=n,
                    scale=1.0 + rng.uniform(-size_jitter, size_jitter),
                    body_amp=0.5 + rng.uniform(-body_jitter, body_jitter),
                    body_skew=float(np.exp(rng.uniform(-0.5, 0.5))),
                    noise=noise,
                    rng=rng,
                    id=f"{family}-{s + 1:02d}",
                )
            )
            labels.append(fi)
    return curves, labels
