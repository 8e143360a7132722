"""The pair-distance pipeline: preprocessing, weighting, alignment, solve.

A PipelineConfig captures one complete recipe; the eight numbered presets
reproduce the standard experiment configurations (whole curve vs cut
curve, the weight scheme, and zero-weighting outside a window).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .curves import (
    Curve2D,
    align_centroids,
    extract_external_half,
    invert_height,
    truncate_to_indices,
)
from .errors import ConfigError
from .measures import (
    BINOMIAL_PRESETS,
    DiscreteMeasure,
    SupportSpec,
    WeightScheme,
    resolve_support,
    build_measure,
)
from .transport import (
    PenaltyVectors,
    TransportPlan,
    construct_penalties,
    euclidean_cost,
    solve_balanced,
    solve_partial,
    solve_relaxed,
)

CONFIG_VERSION = 1

VARIANTS = ("balanced", "relaxed", "partial")
LINKAGES = ("single", "complete", "average", "ward")


@dataclass(frozen=True)
class PenaltySpec:
    """Where partial-variant penalties come from: explicit vectors, or a
    separating construction for an active rectangle of the cost matrix."""

    mode: str  # "explicit" | "rectangle"
    nu: tuple[float, ...] | None = None
    mu: tuple[float, ...] | None = None
    t: int | None = None
    k: int | None = None
    margin: float = 0.99

    def __post_init__(self):
        if self.mode == "explicit":
            if self.nu is None or self.mu is None:
                raise ConfigError("explicit penalties need both nu and mu")
            object.__setattr__(self, "nu", tuple(float(x) for x in self.nu))
            object.__setattr__(self, "mu", tuple(float(x) for x in self.mu))
        elif self.mode == "rectangle":
            if self.t is None or self.k is None:
                raise ConfigError("rectangle penalties need t and k")
        else:
            raise ConfigError(f"unknown penalty mode {self.mode!r}")

    def resolve(self, cost: np.ndarray) -> PenaltyVectors:
        if self.mode == "explicit":
            return PenaltyVectors(nu=np.array(self.nu), mu=np.array(self.mu))
        return construct_penalties(cost, self.t, self.k, margin=self.margin)

    def to_json(self) -> dict:
        if self.mode == "explicit":
            return {"mode": "explicit", "nu": list(self.nu), "mu": list(self.mu)}
        return {"mode": "rectangle", "t": self.t, "k": self.k, "margin": self.margin}

    @staticmethod
    def from_json(obj: dict) -> "PenaltySpec":
        known = {"mode", "nu", "mu", "t", "k", "margin"}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown penalty fields: {sorted(unknown)}")
        return PenaltySpec(
            mode=obj.get("mode", ""),
            nu=obj.get("nu"),
            mu=obj.get("mu"),
            t=obj.get("t"),
            k=obj.get("k"),
            margin=obj.get("margin", 0.99),
        )


@dataclass(frozen=True)
class PipelineConfig:
    scheme: WeightScheme = WeightScheme(kind="uniform")
    external_half: bool = True
    align: bool = True
    invert_y: bool = False
    cost_order: float = 1.0
    variant: str = "balanced"
    penalties: PenaltySpec | None = None
    linkage: str = "average"
    truncate: SupportSpec | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.linkage not in LINKAGES:
            raise ConfigError(f"unknown linkage {self.linkage!r}")
        if self.cost_order < 1.0:
            raise ConfigError(f"cost_order must be >= 1, got {self.cost_order}")
        if self.variant == "partial" and self.penalties is None:
            raise ConfigError("partial variant requires a penalties source")

    def to_json(self) -> dict:
        out: dict = {
            "version": CONFIG_VERSION,
            "scheme": self.scheme.to_json(),
            "external_half": self.external_half,
            "align": self.align,
            "invert_y": self.invert_y,
            "cost_order": self.cost_order,
            "variant": self.variant,
            "linkage": self.linkage,
        }
        if self.penalties is not None:
            out["penalties"] = self.penalties.to_json()
        if self.truncate is not None:
            out["truncate"] = self.truncate.to_json()
        return out

    @staticmethod
    def from_json(obj: dict) -> "PipelineConfig":
        known = {
            "version",
            "scheme",
            "external_half",
            "align",
            "invert_y",
            "cost_order",
            "variant",
            "penalties",
            "linkage",
            "truncate",
        }
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        version = obj.get("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version}")
        try:
            scheme = WeightScheme.from_json(obj.get("scheme", {"kind": "uniform"}))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        pen = obj.get("penalties")
        trunc = obj.get("truncate")
        return PipelineConfig(
            scheme=scheme,
            external_half=bool(obj.get("external_half", True)),
            align=bool(obj.get("align", True)),
            invert_y=bool(obj.get("invert_y", False)),
            cost_order=float(obj.get("cost_order", 1.0)),
            variant=obj.get("variant", "balanced"),
            penalties=PenaltySpec.from_json(pen) if pen is not None else None,
            linkage=obj.get("linkage", "average"),
            truncate=SupportSpec.from_json(trunc) if trunc is not None else None,
        )


@dataclass(frozen=True)
class PairResult:
    """Everything the solve produced for one pair, for plan inspection."""

    distance: float
    plan: TransportPlan
    curve_a: Curve2D
    curve_b: Curve2D
    measure_a: DiscreteMeasure
    measure_b: DiscreteMeasure
    cost: np.ndarray
    penalties: PenaltyVectors | None = None


def preprocess(c: Curve2D, config: PipelineConfig) -> Curve2D:
    """Per-curve geometry steps that precede weighting."""
    if config.invert_y:
        c = invert_height(c)
    if config.external_half:
        c = extract_external_half(c)
    if config.truncate is not None:
        k1, k2 = resolve_support(c, config.truncate)
        c = truncate_to_indices(c, k1, k2)
    return c


def transport_pair(a: Curve2D, b: Curve2D, config: PipelineConfig) -> PairResult:
    """Run the full pipeline on one curve pair.

    Weights are evaluated on the preprocessed but unaligned coordinates;
    centroid alignment afterwards only moves the cost geometry.
    """
    pa, pb = preprocess(a, config), preprocess(b, config)
    ma = build_measure(pa, config.scheme)
    mb = build_measure(pb, config.scheme)
    if config.align:
        pa, pb = align_centroids(pa, pb)
    cost = euclidean_cost(pa, pb, order=config.cost_order)

    pen = None
    if config.variant == "balanced":
        plan = solve_balanced(cost, ma, mb)
    elif config.variant == "relaxed":
        plan = solve_relaxed(cost, ma, mb)
    else:
        pen = config.penalties.resolve(cost)
        plan = solve_partial(cost, ma, mb, pen)
    return PairResult(
        distance=plan.objective,
        plan=plan,
        curve_a=pa,
        curve_b=pb,
        measure_a=ma,
        measure_b=mb,
        cost=cost,
        penalties=pen,
    )


def curve_distance(a: Curve2D, b: Curve2D, config: PipelineConfig) -> float:
    return transport_pair(a, b, config).distance


def experiment_config(number: int) -> PipelineConfig:
    """Numbered presets 1..8 over the common base recipe (external half,
    common-centroid alignment, plain Euclidean cost, exact balanced solve).

    1 whole curve, uniform weights
    2 curve cut to the lowest sixth of its height, uniform weights
    3 whole curve, uniform weights inside that window, zero outside
    4 whole curve, binomial weights focused on the first ~1/6 (sharp)
    5 whole curve, binomial weights focused on the first ~1/3 (soft)
    6 whole curve, weights decreasing with point index
    7 whole curve, weights decreasing with point height
    8 window of preset 3, weights decreasing with height inside it
    """
    sixth = SupportSpec(mode="height_fraction", value=1.0 / 6.0)
    base = PipelineConfig()
    table = {
        1: base,
        2: replace(base, truncate=sixth),
        3: replace(base, scheme=WeightScheme(kind="support_uniform", support=sixth)),
        4: replace(base, scheme=WeightScheme(kind="binomial", p=BINOMIAL_PRESETS["sharp"])),
        5: replace(base, scheme=WeightScheme(kind="binomial", p=BINOMIAL_PRESETS["soft"])),
        6: replace(base, scheme=WeightScheme(kind="index_decreasing")),
        7: replace(base, scheme=WeightScheme(kind="second_coordinate_reversed")),
        8: replace(
            base,
            scheme=WeightScheme(
                kind="support_second_coordinate_reversed", support=sixth
            ),
        ),
    }
    if number not in table:
        raise ConfigError(f"experiment presets are 1..8, got {number}")
    return table[number]
