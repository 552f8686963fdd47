"""Command-line front end.

Subcommands mirror the library layers: ``construct`` builds and checks a
cross-block specification, ``generate`` samples a graph from one,
``infer`` runs posterior sampling on a graph file, ``sweep`` executes a
grid experiment from a key=value config, ``analyze`` recomputes summary
tables from raw sweep results at any overlap threshold, and ``plot``
renders an SVG heatmap of a summary metric.

Exit codes: 0 success, 2 usage error, 1 runtime failure.  The SCBM_SEED
environment variable supplies the base seed when no flag or config value
does.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import fields

import numpy as np

from .core import read_graph_file, write_graph_file
from .generate import (
    GeneratorConfig,
    planted_partition,
    round_edge_counts,
    sample_canonical,
    sample_microcanonical_dc,
    sample_mmsbm,
)
from .infer import McmcConfig, sample_posterior, write_posterior_file
from .metrics import partition_overlap  # noqa: F401  (re-export convenience)
from .numeric import sample_power_law_degrees
from .plotting import METRICS, PlotSpec, emit_heatmap
from .scbm import (
    CrossSpec,
    beta_from_degree,
    consistency_check,
    cross_block_matrix_equal,
    cross_block_matrix_general,
    make_theta_bicommunity,
    make_theta_coreperiphery,
    mmsbm_normalizers_per_combination,
    rho_from_degree,
)
from .sweep import (
    SweepConfig,
    read_results_csv,
    run_grid,
    summarize_records,
)

__all__ = ["main", "build_parser", "load_sweep_config"]


def _env_seed(default: int = 0) -> int:
    raw = os.environ.get("SCBM_SEED")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"SCBM_SEED must be an integer, got {raw!r}") from exc


class UsageError(ValueError):
    pass


def _strength(text: str) -> float:
    v = float(text)
    if not 0.0 < v <= 0.5:
        raise argparse.ArgumentTypeError(f"strength must lie in (0, 0.5], got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossblock",
        description="Networks with two coexisting planted partitions: build, sample, infer, sweep.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a cross-block specification file")
    p.add_argument("--mu", type=_strength, required=True, help="bi-community strength in (0, 0.5]")
    p.add_argument("--lambda", dest="lam", type=_strength, required=True, help="core-periphery strength")
    p.add_argument("--n", type=int, default=400, help="number of nodes")
    p.add_argument("--c", type=float, default=10.0, help="expected mean degree")
    p.add_argument("--sizes", help="comma-separated cross-block sizes for the general solver")
    p.add_argument("--out", help="write the specification JSON here")

    p = sub.add_parser("generate", help="sample a graph from a specification file")
    p.add_argument("--spec", required=True, help="CrossSpec JSON file from `construct`")
    p.add_argument("--variant", default="canonical", choices=("canonical", "microcanonical_dc", "mmsbm"))
    p.add_argument("--gamma", type=float, default=3.0, help="degree exponent (microcanonical only)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="graph file (tab-separated edge list)")
    p.add_argument("--report", help="also write the generation report JSON here")

    p = sub.add_parser("infer", help="sample partitions from the posterior of a graph")
    p.add_argument("--graph", required=True, help="graph file")
    p.add_argument("--variant", required=True, choices=("ndc", "dc"))
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--spacing", type=int, default=10)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="posterior partitions file")

    p = sub.add_parser("sweep", help="run a (lambda, mu) grid experiment")
    p.add_argument("--config", help="key=value config file with SweepConfig field names")
    p.add_argument("--out", required=True, help="output directory (resumable)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--base-seed", type=int, default=None)
    p.add_argument("--generator", choices=("canonical", "microcanonical_dc", "mmsbm"))
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--samples-per-graph", type=int, default=None)

    p = sub.add_parser("analyze", help="recompute per-cell summaries at a chosen threshold")
    p.add_argument("--results", required=True, help="raw results CSV from `sweep`")
    p.add_argument("--omega-t", type=float, default=0.75)
    p.add_argument("--out", help="summary CSV (default: stdout)")

    p = sub.add_parser("plot", help="render an SVG heatmap from sweep output")
    p.add_argument("--results", required=True, help="raw results CSV from `sweep`")
    p.add_argument("--metric", required=True, choices=METRICS)
    p.add_argument("--omega-t", type=float, default=0.75)
    p.add_argument("--out", required=True, help="SVG path")

    return parser


def _cmd_construct(args) -> int:
    t1 = make_theta_bicommunity(args.mu, beta_from_degree(args.n, args.c))
    t2 = make_theta_coreperiphery(args.lam, beta_from_degree(args.n, args.c))
    if args.sizes:
        sizes = [int(t) for t in args.sizes.split(",")]
        spec = cross_block_matrix_general(t1, t2, sizes)
    else:
        spec = cross_block_matrix_equal(t1, t2, rho_from_degree(args.n, args.c), args.n)
    report = consistency_check(spec)
    print(f"cross-blocks: {spec.n_cross_blocks}, sizes: {spec.cross_sizes.tolist()}")
    print(f"max relative consistency residual: {report.max_rel:.3e}")
    norm = np.atleast_1d(np.asarray(spec.normalizers, dtype=float))
    print(f"normalizers: min {norm.min():.6g}, max {norm.max():.6g}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(spec.to_json())
        print(f"wrote {args.out}")
    return 0


def _cmd_generate(args) -> int:
    with open(args.spec) as fh:
        spec = CrossSpec.from_json(fh.read())
    mem = planted_partition(spec)
    seed = args.seed if args.seed is not None else _env_seed()
    if args.variant == "canonical":
        g, report = sample_canonical(spec, mem, GeneratorConfig(), seed=seed)
    elif args.variant == "microcanonical_dc":
        from .core import EdgeCountMatrix, project_partition  # local to keep imports light

        nu = spec.cross_sizes.astype(float)
        b_int, _ = round_edge_counts(EdgeCountMatrix(np.outer(nu, nu) * spec.theta_scbm.entries))
        n = int(spec.cross_sizes.sum())
        c = b_int.total() / n
        deg = sample_power_law_degrees(n, args.gamma, c, rng_seed=seed)
        cfg = GeneratorConfig(variant="microcanonical_dc", gamma=args.gamma)
        g, report = sample_microcanonical_dc(b_int, mem, deg, cfg, seed=seed)
    else:
        from .core import project_partition

        t1, t2 = spec.factor_thetas
        p1 = project_partition(mem, spec.cross_index, 1)
        p2 = project_partition(mem, spec.cross_index, 2)
        res = mmsbm_normalizers_per_combination(t1, t2)
        g, report = sample_mmsbm(t1, t2, p1, p2, res, seed=seed)
    write_graph_file(g, args.out)
    print(f"wrote {args.out}: {g.n_nodes} nodes, {g.n_edges} edges")
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.to_text())
        print(f"wrote {args.report}")
    return 0


def _cmd_infer(args) -> int:
    g = read_graph_file(args.graph)
    cfg = McmcConfig(
        n_samples=args.samples,
        burn_in_sweeps=args.burn_in,
        sweeps_between_samples=args.spacing,
        k_max=args.k_max,
        seed=args.seed if args.seed is not None else _env_seed(),
    )
    samples = sample_posterior(g, args.variant, cfg)
    write_posterior_file(samples, args.out, metadata={"graph": os.path.basename(args.graph)})
    ks = sorted({s.partition.n_blocks for s in samples})
    dls = [s.description_length for s in samples]
    print(f"wrote {args.out}: {len(samples)} partitions, K in {ks}, mean DL {np.mean(dls):.2f}")
    return 0


_TUPLE_FLOAT_FIELDS = {"c_list", "mu_values", "lambda_values", "omega_thresholds"}
_TUPLE_STR_FIELDS = {"variants"}


def load_sweep_config(path=None, **overrides) -> SweepConfig:
    """Key=value config file; unspecified values fall back to the defaults.

    Keyword overrides (typically from flags) win over the file; the base
    seed additionally falls back to the SCBM_SEED environment variable.
    """
    known = {f.name: f for f in fields(SweepConfig)}
    kwargs = {}
    if path:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, val = line.partition("=")
                key, val = key.strip(), val.strip()
                if key not in known:
                    raise UsageError(f"{path}:{lineno}: unknown field {key!r}")
                if key in _TUPLE_FLOAT_FIELDS:
                    kwargs[key] = tuple(float(t) for t in val.split(",") if t)
                elif key in _TUPLE_STR_FIELDS:
                    kwargs[key] = tuple(t.strip() for t in val.split(",") if t.strip())
                elif key == "generator":
                    kwargs[key] = val
                elif key == "gamma":
                    kwargs[key] = float(val)
                else:
                    kwargs[key] = int(val)
    for key, val in overrides.items():
        if val is not None:
            kwargs[key] = val
    if "base_seed" not in kwargs:
        kwargs["base_seed"] = _env_seed()
    try:
        return SweepConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _cmd_sweep(args) -> int:
    cfg = load_sweep_config(
        args.config,
        base_seed=args.base_seed,
        generator=args.generator,
        replicas=args.replicas,
        samples_per_graph=args.samples_per_graph,
    )
    grid = run_grid(cfg, out_dir=args.out, jobs=args.jobs)
    print(f"completed {len(grid.cells)} cells into {args.out}")
    if grid.failed:
        for lam, mu, c, msg in grid.failed:
            print(f"failed: {msg}", file=sys.stderr)
        return 1
    return 0


def _cmd_analyze(args) -> int:
    rows = read_results_csv(args.results)
    table = summarize_records(rows, args.omega_t)
    columns = (
        "lambda", "mu", "c", "generator", "omega_t", "q1", "q2", "alpha",
        "mean_omega_cross", "mean_omega_p1", "mean_omega_p2",
    )
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(columns)
        for entry in table:
            writer.writerow(
                ["" if entry[k] is None else entry[k] for k in columns]
            )
    finally:
        if args.out:
            out.close()
            print(f"wrote {args.out}: {len(table)} cells at omega_T={args.omega_t}")
    return 0


def _cmd_plot(args) -> int:
    spec = PlotSpec(metric=args.metric, omega_t=args.omega_t)
    emit_heatmap(args.results, spec, args.out)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "construct": _cmd_construct,
    "generate": _cmd_generate,
    "infer": _cmd_infer,
    "sweep": _cmd_sweep,
    "analyze": _cmd_analyze,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: report, do not traceback
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
