"""Weighted discrete optimal-transport distances and clustering for 2D curves."""

from .curves import (
    Curve2D,
    align_centroids,
    arc_length,
    centroid,
    extract_external_half,
    invert_height,
    resample_arc_length,
    validate_curve,
)
from .measures import (
    BINOMIAL_PRESETS,
    DiscreteMeasure,
    SupportSpec,
    WeightScheme,
    binomial_scheme,
    build_measure,
    resolve_support,
)
from .clustering import (
    Dendrogram,
    DistanceMatrix,
    adjusted_rand_index,
    cut_clusters,
    hierarchical_cluster,
    pairwise_matrix,
    procrustes_distance,
    to_newick,
)
from .oracle import oracle_solve, verify_against_oracle
from .pipeline import (
    PenaltySpec,
    PipelineConfig,
    curve_distance,
    experiment_config,
    transport_pair,
)
from .synthetic import family_dataset, profile_curve
from .transport import (
    DualReport,
    DualSolution,
    PenaltyVectors,
    TransportPlan,
    construct_penalties,
    dual_feasibility_check,
    euclidean_cost,
    reduced_cost,
    solve_balanced,
    solve_partial,
    solve_relaxed,
)

__version__ = "0.1.0"

__all__ = [
    "Curve2D",
    "validate_curve",
    "centroid",
    "extract_external_half",
    "align_centroids",
    "resample_arc_length",
    "arc_length",
    "invert_height",
    "WeightScheme",
    "SupportSpec",
    "DiscreteMeasure",
    "build_measure",
    "resolve_support",
    "binomial_scheme",
    "BINOMIAL_PRESETS",
    "euclidean_cost",
    "reduced_cost",
    "construct_penalties",
    "solve_balanced",
    "solve_relaxed",
    "solve_partial",
    "dual_feasibility_check",
    "oracle_solve",
    "verify_against_oracle",
    "TransportPlan",
    "PenaltyVectors",
    "DualSolution",
    "DualReport",
    "PipelineConfig",
    "PenaltySpec",
    "curve_distance",
    "transport_pair",
    "experiment_config",
    "DistanceMatrix",
    "Dendrogram",
    "pairwise_matrix",
    "hierarchical_cluster",
    "cut_clusters",
    "adjusted_rand_index",
    "to_newick",
    "procrustes_distance",
    "family_dataset",
    "profile_curve",
    "__version__",
]
