"""Command-line entry point.

Three subcommands: `distance` for one curve pair, `matrix` for a whole
dataset, `cluster` to turn a saved matrix into a dendrogram. Experiment
presets 1..8 configure the standard recipes; individual flags override
preset fields. Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .clustering import hierarchical_cluster, pairwise_matrix, to_newick
from .errors import CurveOTError
from .io_formats import (
    dendrogram_svg,
    load_config,
    load_curve_csv,
    load_dataset,
    load_matrix,
    save_dendrogram,
    save_matrix,
    save_plan_csv,
)
from .measures import BINOMIAL_PRESETS, SupportSpec, WeightScheme
from .oracle import ORACLE_CAP, verify_against_oracle
from .pipeline import PenaltySpec, PipelineConfig, experiment_config, transport_pair


def _parse_support(text: str) -> SupportSpec:
    mode, _, value = text.partition(":")
    if mode == "explicit":
        k1, _, k2 = value.partition(",")
        return SupportSpec(mode=mode, value=(int(k1), int(k2)))
    return SupportSpec(mode=mode, value=float(value))


def _build_config(args) -> PipelineConfig:
    if args.config and args.experiment:
        raise CurveOTError("--config and --experiment are mutually exclusive")
    if args.config:
        config = load_config(args.config)
    elif args.experiment:
        config = experiment_config(args.experiment)
    else:
        config = PipelineConfig()

    # collect scheme parts before constructing, since support kinds only
    # validate once their window specification is attached
    kind, p, support = config.scheme.kind, config.scheme.p, config.scheme.support
    if args.scheme_file:
        obj = json.loads(Path(args.scheme_file).read_text())
        parsed = WeightScheme.from_json(obj)
        kind, p, support = parsed.kind, parsed.p, parsed.support
    elif args.scheme:
        text = args.scheme.strip()
        if text.startswith("{"):
            parsed = WeightScheme.from_json(json.loads(text))
            kind, p, support = parsed.kind, parsed.p, parsed.support
        else:
            kind = text
    if args.p is not None:
        kind = "binomial"
        preset = BINOMIAL_PRESETS.get(args.p)
        p = preset if preset is not None else float(args.p)
    if args.support:
        support = _parse_support(args.support)
        if not kind.startswith("support_"):
            kind = f"support_{kind}"
    if kind == "binomial" and p is None:
        p = 0.5
    try:
        scheme = WeightScheme(
            kind=kind,
            p=p if kind == "binomial" else None,
            support=support if kind.startswith("support_") else None,
        )
    except ValueError as e:
        raise CurveOTError(str(e)) from e

    overrides: dict = {"scheme": scheme}
    if args.external_half is not None:
        overrides["external_half"] = args.external_half
    if args.align is not None:
        overrides["align"] = args.align
    if args.invert_y:
        overrides["invert_y"] = True
    if args.cost_order is not None:
        overrides["cost_order"] = args.cost_order
    if args.variant:
        overrides["variant"] = args.variant
    if args.linkage:
        overrides["linkage"] = args.linkage
    if args.truncate:
        overrides["truncate"] = _parse_support(args.truncate)
    if args.penalties:
        obj = json.loads(Path(args.penalties).read_text())
        overrides["penalties"] = PenaltySpec.from_json(obj)
    return replace(config, **overrides)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="pipeline config JSON file")
    p.add_argument("--experiment", type=int, help="preset number 1..8")
    p.add_argument("--scheme", help="weight scheme kind or inline JSON")
    p.add_argument("--scheme-file", help="weight scheme JSON file")
    p.add_argument("--p", help="binomial parameter (number, 'sharp' or 'soft')")
    p.add_argument("--support", help="support window MODE:VALUE, e.g. height_fraction:0.1667")
    p.add_argument("--truncate", help="geometric cut window MODE:VALUE")
    p.add_argument("--variant", choices=["balanced", "relaxed", "partial"])
    p.add_argument("--penalties", help="penalties JSON file (partial variant)")
    p.add_argument("--cost-order", type=float, help="cost exponent r >= 1")
    p.add_argument(
        "--external-half",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="keep only the curve suffix from its lowest point",
    )
    p.add_argument(
        "--align",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="move each pair to a common centroid",
    )
    p.add_argument("--invert-y", action="store_true", help="flip curves vertically")
    p.add_argument("--linkage", choices=["single", "complete", "average", "ward"])


def cmd_distance(args) -> int:
    a = load_curve_csv(args.curve_a)
    b = load_curve_csv(args.curve_b)
    config = _build_config(args)
    result = transport_pair(a, b, config)
    print(f"{result.distance:.6f}")
    if args.dump_plan:
        save_plan_csv(result.plan.pi, args.dump_plan)
    if args.dump_reduced:
        if result.penalties is None:
            raise CurveOTError("--dump-reduced requires the partial variant")
        from .transport import reduced_cost

        save_plan_csv(reduced_cost(result.cost, result.penalties), args.dump_reduced)
    if args.verify:
        n, m = result.cost.shape
        if n * m > ORACLE_CAP:
            raise CurveOTError(f"instance too large to verify ({n * m} > {ORACLE_CAP})")
        report = verify_against_oracle(
            result.plan,
            result.cost,
            result.measure_a,
            result.measure_b,
            config.variant,
            result.penalties,
        )
        print(json.dumps(report, indent=2))
    return 0


def cmd_matrix(args) -> int:
    curves = load_dataset(args.manifest)
    config = _build_config(args)
    dm = pairwise_matrix(curves, config, jobs=args.jobs)
    save_matrix(dm, args.out)
    print(f"wrote {len(dm)}x{len(dm)} matrix to {args.out}")
    return 0


def cmd_cluster(args) -> int:
    dm = load_matrix(args.matrix)
    dend = hierarchical_cluster(dm, args.linkage or "average")
    out = Path(args.out)
    save_dendrogram(dend, out.with_suffix(".json"))
    out.with_suffix(".newick").write_text(to_newick(dend) + "\n", encoding="utf-8")
    out.with_suffix(".svg").write_text(dendrogram_svg(dend), encoding="utf-8")
    print(f"wrote {out.with_suffix('.json')}, .newick, .svg")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curveot",
        description="Weighted transport distances and clustering for 2D profile curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("distance", help="distance between two curve files")
    p_dist.add_argument("curve_a")
    p_dist.add_argument("curve_b")
    _add_config_flags(p_dist)
    p_dist.add_argument("--dump-plan", help="write the coupling matrix CSV here")
    p_dist.add_argument("--dump-reduced", help="write the penalized cost matrix CSV here")
    p_dist.add_argument("--verify", action="store_true", help="cross-check with the reference solver")
    p_dist.set_defaults(func=cmd_distance)

    p_mat = sub.add_parser("matrix", help="pairwise distance matrix for a dataset")
    p_mat.add_argument("manifest")
    _add_config_flags(p_mat)
    p_mat.add_argument("--jobs", type=int, default=1, help="parallel pair workers")
    p_mat.add_argument("--out", required=True, help="output matrix CSV path")
    p_mat.set_defaults(func=cmd_matrix)

    p_clu = sub.add_parser("cluster", help="dendrogram from a saved matrix")
    p_clu.add_argument("matrix")
    p_clu.add_argument("--linkage", choices=["single", "complete", "average", "ward"])
    p_clu.add_argument("--out", required=True, help="output path prefix")
    p_clu.set_defaults(func=cmd_cluster)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CurveOTError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
