"""Grid experiments over the structural-strength plane.

A sweep walks a rectangle of (lambda, mu) cells at one or more mean
degrees.  Each cell plants both structures at the requested strengths,
generates replica graphs, runs posterior sampling for every configured
inference variant, and records per-sample overlaps against the planted
cross-partition and both factor partitions, plus per-cell diagnostics.

Persistence is plain CSV: a raw results table (one row per posterior
sample) and a per-cell summary table, with a key=value metadata file
alongside.  Cell seeds derive from a stable hash of the base seed and
the cell coordinates, so any cell can be recomputed independently and a
partial run can resume without disturbing finished cells.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import EdgeCountMatrix, Partition, project_partition, realized_block_matrix
from .generate import (
    GeneratorConfig,
    planted_partition,
    round_edge_counts,
    sample_canonical,
    sample_microcanonical_dc,
    sample_mmsbm,
)
from .infer import McmcConfig, log_evidence, sample_posterior
from .metrics import (
    frobenius_deviation,
    js_distance_degree_distributions,
    normalized_degree_variance,
    partition_overlap,
)
from .numeric import sample_power_law_degrees
from .scbm import (
    beta_from_degree,
    cross_block_matrix_equal,
    factor_block_sums,
    make_theta_bicommunity,
    make_theta_coreperiphery,
    mmsbm_normalizers_per_combination,
    rho_from_degree,
)

__all__ = [
    "SweepConfig",
    "SampleRecord",
    "CellResult",
    "SweepGrid",
    "SweepCellError",
    "desk_profile",
    "full_profile",
    "derive_seed",
    "run_cell",
    "coexistence_fraction",
    "run_grid",
    "read_results_csv",
    "summarize_records",
    "RESULTS_COLUMNS",
]

RESULTS_COLUMNS = (
    "lambda",
    "mu",
    "c",
    "generator",
    "variant",
    "replica",
    "sample_index",
    "omega_cross",
    "omega_p1",
    "omega_p2",
    "dl",
    "inferred_k",
)


class SweepCellError(RuntimeError):
    """Generation or inference failure, tagged with its cell coordinates."""


def _steps(lo: float, hi: float, step: float) -> tuple[float, ...]:
    n = int(round((hi - lo) / step)) + 1
    return tuple(round(lo + i * step, 10) for i in range(n))


@dataclass(frozen=True)
class SweepConfig:
    """Grid layout plus per-cell workload.

    The strength ranges must exclude zero: at mu=0 or lambda=0 one factor
    is a hard bipartition with no randomness and the construction algebra
    degenerates.
    """

    n_nodes: int = 400
    c_list: tuple[float, ...] = (10.0,)
    mu_values: tuple[float, ...] = field(default_factory=lambda: _steps(0.05, 0.5, 0.05))
    lambda_values: tuple[float, ...] = field(default_factory=lambda: _steps(0.05, 0.5, 0.05))
    replicas: int = 2
    samples_per_graph: int = 10
    generator: str = "canonical"
    gamma: float = 3.0
    variants: tuple[str, ...] = ("ndc", "dc")
    omega_thresholds: tuple[float, ...] = (0.75, 0.85, 0.95)
    base_seed: int = 0
    burn_in_sweeps: int = 600
    sweeps_between_samples: int = 10

    def __post_init__(self):
        for name, vals in (("mu_values", self.mu_values), ("lambda_values", self.lambda_values)):
            arr = np.asarray(vals, dtype=float)
            if arr.size == 0 or arr.min() <= 0.0 or arr.max() > 0.5:
                raise ValueError(f"{name} must lie in (0, 0.5]")
        if self.replicas < 1 or self.samples_per_graph < 1:
            raise ValueError("replicas and samples_per_graph must be positive")
        if self.generator not in ("canonical", "microcanonical_dc", "mmsbm"):
            raise ValueError(f"unknown generator {self.generator!r}")
        for v in self.variants:
            if v not in ("ndc", "dc"):
                raise ValueError(f"unknown inference variant {v!r}")


def desk_profile(**overrides) -> SweepConfig:
    """Coarse grid sized for a workstation run (0.05 steps, 2x10 partitions)."""
    return replace(SweepConfig(), **overrides) if overrides else SweepConfig()


def full_profile(**overrides) -> SweepConfig:
    """The full experiment layout: 0.01 steps, three densities, 8x50 partitions."""
    cfg = SweepConfig(
        c_list=(5.0, 10.0, 20.0),
        mu_values=_steps(0.01, 0.5, 0.01),
        lambda_values=_steps(0.01, 0.5, 0.01),
        replicas=8,
        samples_per_graph=50,
        burn_in_sweeps=1000,
    )
    return replace(cfg, **overrides) if overrides else cfg


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from the textual form of the parts."""
    text = "|".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class SampleRecord:
    variant: str
    replica: int
    sample_index: int
    omega_cross: float
    omega_p1: float
    omega_p2: float
    dl: float
    inferred_k: int


@dataclass(frozen=True)
class CellResult:
    lam: float
    mu: float
    c: float
    generator: str
    records: tuple[SampleRecord, ...]
    log_evidence: dict
    degree_variance: float
    js_distance: float
    frob_dev_p1: float
    frob_dev_p2: float

    def mean_omega(self) -> tuple[float, float, float]:
        oc = float(np.mean([r.omega_cross for r in self.records]))
        o1 = float(np.mean([r.omega_p1 for r in self.records]))
        o2 = float(np.mean([r.omega_p2 for r in self.records]))
        return oc, o1, o2

    def threshold_counts(self, omega_t: float) -> tuple[int, int]:
        q1 = sum(1 for r in self.records if r.omega_p1 >= omega_t)
        q2 = sum(1 for r in self.records if r.omega_p2 >= omega_t)
        return q1, q2


def coexistence_fraction(cell: CellResult, omega_t: float):
    """alpha = q1 / (q1 + q2); None (undefined) when neither structure is found."""
    q1, q2 = cell.threshold_counts(omega_t)
    if q1 + q2 == 0:
        return None
    return q1 / (q1 + q2)


def _generate_replica(spec, mem, p1, p2, cfg: SweepConfig, c: float, seed: int):
    if cfg.generator == "canonical":
        g, _ = sample_canonical(spec, mem, GeneratorConfig(), seed=seed)
        return g
    if cfg.generator == "microcanonical_dc":
        nu = spec.cross_sizes.astype(float)
        targets = EdgeCountMatrix(np.outer(nu, nu) * spec.theta_scbm.entries)
        b_int, _ = round_edge_counts(targets)
        deg = sample_power_law_degrees(cfg.n_nodes, cfg.gamma, c, rng_seed=seed)
        gen_cfg = GeneratorConfig(variant="microcanonical_dc", gamma=cfg.gamma)
        g, _ = sample_microcanonical_dc(b_int, mem, deg, gen_cfg, seed=seed)
        return g
    t1, t2 = spec.factor_thetas
    res = mmsbm_normalizers_per_combination(t1, t2)
    g, _ = sample_mmsbm(t1, t2, p1, p2, res, seed=seed)
    return g


def run_cell(lam: float, mu: float, c: float, cfg: SweepConfig, cell_seed=None) -> CellResult:
    """Generate, infer, and score one (lambda, mu, c) cell."""
    if cell_seed is None:
        cell_seed = derive_seed(cfg.base_seed, lam, mu, c)
    try:
        beta = beta_from_degree(cfg.n_nodes, c)
        rho = rho_from_degree(cfg.n_nodes, c)
        spec = cross_block_matrix_equal(
            make_theta_bicommunity(mu, beta),
            make_theta_coreperiphery(lam, beta),
            rho,
            cfg.n_nodes,
        )
        mem = planted_partition(spec)
        p1 = project_partition(mem, spec.cross_index, 1)
        p2 = project_partition(mem, spec.cross_index, 2)
        targets = [
            EdgeCountMatrix(np.asarray(factor_block_sums(spec, f))) for f in (1, 2)
        ]

        records = []
        evidences = {v: [] for v in cfg.variants}
        diag_dv, diag_js, diag_f1, diag_f2 = [], [], [], []
        for replica in range(cfg.replicas):
            g = _generate_replica(
                spec, mem, p1, p2, cfg, c, derive_seed(cell_seed, "gen", replica)
            )
            diag_dv.append(normalized_degree_variance(g))
            diag_js.append(js_distance_degree_distributions(g, p2))
            diag_f1.append(frobenius_deviation(targets[0], realized_block_matrix(g, p1)))
            diag_f2.append(frobenius_deviation(targets[1], realized_block_matrix(g, p2)))
            for variant in cfg.variants:
                mcfg = McmcConfig(
                    n_samples=cfg.samples_per_graph,
                    burn_in_sweeps=cfg.burn_in_sweeps,
                    sweeps_between_samples=cfg.sweeps_between_samples,
                    seed=derive_seed(cell_seed, variant, replica),
                )
                samples = sample_posterior(g, variant, mcfg)
                evidences[variant].append(log_evidence(samples))
                for idx, s in enumerate(samples):
                    records.append(
                        SampleRecord(
                            variant=variant,
                            replica=replica,
                            sample_index=idx,
                            omega_cross=partition_overlap(s.partition, mem).omega,
                            omega_p1=partition_overlap(s.partition, p1).omega,
                            omega_p2=partition_overlap(s.partition, p2).omega,
                            dl=s.description_length,
                            inferred_k=s.partition.n_blocks,
                        )
                    )
        return CellResult(
            lam=lam,
            mu=mu,
            c=c,
            generator=cfg.generator,
            records=tuple(records),
            log_evidence={v: float(np.mean(e)) for v, e in evidences.items()},
            degree_variance=float(np.mean(diag_dv)),
            js_distance=float(np.mean(diag_js)),
            frob_dev_p1=float(np.mean(diag_f1)),
            frob_dev_p2=float(np.mean(diag_f2)),
        )
    except Exception as exc:
        raise SweepCellError(f"cell (lambda={lam}, mu={mu}, c={c}): {exc}") from exc


@dataclass(frozen=True)
class SweepGrid:
    config: SweepConfig
    cells: tuple[CellResult, ...]
    failed: tuple[tuple[float, float, float, str], ...] = ()

    def cell(self, lam: float, mu: float, c: float) -> CellResult:
        for cell in self.cells:
            if cell.lam == lam and cell.mu == mu and cell.c == c:
                return cell
        raise KeyError(f"no cell (lambda={lam}, mu={mu}, c={c})")


def _fmt(x: float) -> str:
    return repr(float(x))


def _threshold_tag(t: float) -> str:
    return format(t, "g")


def _summary_columns(cfg: SweepConfig) -> tuple[str, ...]:
    cols = [
        "lambda",
        "mu",
        "c",
        "generator",
        "mean_omega_cross",
        "mean_omega_p1",
        "mean_omega_p2",
    ]
    cols += [f"alpha_{_threshold_tag(t)}" for t in cfg.omega_thresholds]
    cols += [f"q1_{_threshold_tag(t)}" for t in cfg.omega_thresholds]
    cols += [f"q2_{_threshold_tag(t)}" for t in cfg.omega_thresholds]
    cols += [
        "log_evidence_ndc",
        "log_evidence_dc",
        "degree_variance",
        "js_distance",
        "frob_dev_p1",
        "frob_dev_p2",
        "rmi",
    ]
    return tuple(cols)


def _results_rows(cell: CellResult):
    for r in cell.records:
        yield (
            _fmt(cell.lam),
            _fmt(cell.mu),
            _fmt(cell.c),
            cell.generator,
            r.variant,
            str(r.replica),
            str(r.sample_index),
            _fmt(r.omega_cross),
            _fmt(r.omega_p1),
            _fmt(r.omega_p2),
            _fmt(r.dl),
            str(r.inferred_k),
        )


def _summary_row(cell: CellResult, cfg: SweepConfig):
    oc, o1, o2 = cell.mean_omega()
    row = [_fmt(cell.lam), _fmt(cell.mu), _fmt(cell.c), cell.generator, _fmt(oc), _fmt(o1), _fmt(o2)]
    alphas, q1s, q2s = [], [], []
    for t in cfg.omega_thresholds:
        q1, q2 = cell.threshold_counts(t)
        alpha = coexistence_fraction(cell, t)
        alphas.append("" if alpha is None else _fmt(alpha))
        q1s.append(str(q1))
        q2s.append(str(q2))
    row += alphas + q1s + q2s
    for v in ("ndc", "dc"):
        row.append(_fmt(cell.log_evidence[v]) if v in cell.log_evidence else "")
    row += [
        _fmt(cell.degree_variance),
        _fmt(cell.js_distance),
        _fmt(cell.frob_dev_p1),
        _fmt(cell.frob_dev_p2),
        "",  # reserved for reduced mutual information
    ]
    return tuple(row)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _write_metadata(path, cfg: SweepConfig, failed):
    with open(path, "w") as fh:
        fh.write("# sweep metadata\n")
        fh.write(f"n_nodes={cfg.n_nodes}\n")
        fh.write(f"c_list={','.join(_fmt(c) for c in cfg.c_list)}\n")
        fh.write(f"mu_values={','.join(_fmt(v) for v in cfg.mu_values)}\n")
        fh.write(f"lambda_values={','.join(_fmt(v) for v in cfg.lambda_values)}\n")
        fh.write(f"replicas={cfg.replicas}\n")
        fh.write(f"samples_per_graph={cfg.samples_per_graph}\n")
        fh.write(f"generator={cfg.generator}\n")
        fh.write(f"gamma={_fmt(cfg.gamma)}\n")
        fh.write(f"variants={','.join(cfg.variants)}\n")
        fh.write(f"omega_thresholds={','.join(_fmt(t) for t in cfg.omega_thresholds)}\n")
        fh.write(f"base_seed={cfg.base_seed}\n")
        fh.write(f"burn_in_sweeps={cfg.burn_in_sweeps}\n")
        fh.write(f"sweeps_between_samples={cfg.sweeps_between_samples}\n")
        for lam, mu, c, msg in failed:
            fh.write(f"failed_cell={_fmt(lam)},{_fmt(mu)},{_fmt(c)}: {msg}\n")


def _cell_order(cfg: SweepConfig):
    for c in cfg.c_list:
        for mu in cfg.mu_values:
            for lam in cfg.lambda_values:
                yield lam, mu, c


def _load_finished_cells(out_dir, cfg: SweepConfig) -> dict:
    """Rebuild CellResults for cells already present in a partial output."""
    results_path = os.path.join(out_dir, "results.csv")
    summary_path = os.path.join(out_dir, "summary.csv")
    if not (os.path.exists(results_path) and os.path.exists(summary_path)):
        return {}
    by_cell = {}
    for row in read_results_csv(results_path):
        key = (row["lambda"], row["mu"], row["c"])
        by_cell.setdefault(key, []).append(
            SampleRecord(
                variant=row["variant"],
                replica=int(row["replica"]),
                sample_index=int(row["sample_index"]),
                omega_cross=row["omega_cross"],
                omega_p1=row["omega_p1"],
                omega_p2=row["omega_p2"],
                dl=row["dl"],
                inferred_k=int(row["inferred_k"]),
            )
        )
    finished = {}
    with open(summary_path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (float(row["lambda"]), float(row["mu"]), float(row["c"]))
            if key not in by_cell:
                continue
            evid = {}
            for v in ("ndc", "dc"):
                if row.get(f"log_evidence_{v}"):
                    evid[v] = float(row[f"log_evidence_{v}"])
            finished[key] = CellResult(
                lam=key[0],
                mu=key[1],
                c=key[2],
                generator=row["generator"],
                records=tuple(by_cell[key]),
                log_evidence=evid,
                degree_variance=float(row["degree_variance"]),
                js_distance=float(row["js_distance"]),
                frob_dev_p1=float(row["frob_dev_p1"]),
                frob_dev_p2=float(row["frob_dev_p2"]),
            )
    return finished


def _run_cell_task(args):
    lam, mu, c, cfg = args
    return lam, mu, c, run_cell(lam, mu, c, cfg)


def run_grid(cfg: SweepConfig, out_dir=None, jobs: int = 1) -> SweepGrid:
    """Evaluate every cell; persist and resume from ``out_dir`` when given.

    Failed cells are recorded in the metadata file and skipped in the
    result tables; the rest of the grid still completes.  Output bytes
    depend only on the config, never on worker scheduling, because the
    tables are rewritten in fixed cell order at the end.
    """
    finished = _load_finished_cells(out_dir, cfg) if out_dir else {}
    pending = [key for key in _cell_order(cfg) if key not in finished]
    failed = []

    if jobs > 1 and pending:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            tasks = [(lam, mu, c, cfg) for lam, mu, c in pending]
            for (lam, mu, c), outcome in zip(
                pending, pool.map(_run_cell_task_safe, tasks)
            ):
                if isinstance(outcome, str):
                    failed.append((lam, mu, c, outcome))
                else:
                    finished[(lam, mu, c)] = outcome[3]
                _persist(out_dir, cfg, finished, failed)
    else:
        for lam, mu, c in pending:
            try:
                finished[(lam, mu, c)] = run_cell(lam, mu, c, cfg)
            except SweepCellError as exc:
                failed.append((lam, mu, c, str(exc)))
            _persist(out_dir, cfg, finished, failed)

    cells = tuple(finished[key] for key in _cell_order(cfg) if key in finished)
    grid = SweepGrid(config=cfg, cells=cells, failed=tuple(failed))
    _persist(out_dir, cfg, finished, failed)
    return grid


def _run_cell_task_safe(args):
    try:
        return _run_cell_task(args)
    except SweepCellError as exc:
        return str(exc)


def _persist(out_dir, cfg, finished, failed):
    if out_dir is None:
        return
    os.makedirs(out_dir, exist_ok=True)
    ordered = [finished[key] for key in _cell_order(cfg) if key in finished]
    _write_csv(
        os.path.join(out_dir, "results.csv"),
        RESULTS_COLUMNS,
        (row for cell in ordered for row in _results_rows(cell)),
    )
    _write_csv(
        os.path.join(out_dir, "summary.csv"),
        _summary_columns(cfg),
        (_summary_row(cell, cfg) for cell in ordered),
    )
    _write_metadata(os.path.join(out_dir, "metadata.txt"), cfg, failed)


def read_results_csv(path) -> list[dict]:
    """Raw result rows with numeric fields parsed."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = dict(row)
            for key in ("lambda", "mu", "c", "omega_cross", "omega_p1", "omega_p2", "dl"):
                parsed[key] = float(parsed[key])
            for key in ("replica", "sample_index", "inferred_k"):
                parsed[key] = int(parsed[key])
            out.append(parsed)
    return out


def summarize_records(rows: list[dict], omega_t: float) -> list[dict]:
    """Per-cell q1/q2/alpha at an arbitrary threshold, from raw result rows."""
    by_cell = {}
    for row in rows:
        key = (row["lambda"], row["mu"], row["c"], row["generator"])
        by_cell.setdefault(key, []).append(row)
    out = []
    for key in sorted(by_cell):
        cell_rows = by_cell[key]
        q1 = sum(1 for r in cell_rows if r["omega_p1"] >= omega_t)
        q2 = sum(1 for r in cell_rows if r["omega_p2"] >= omega_t)
        out.append(
            {
                "lambda": key[0],
                "mu": key[1],
                "c": key[2],
                "generator": key[3],
                "omega_t": omega_t,
                "q1": q1,
                "q2": q2,
                "alpha": (q1 / (q1 + q2)) if q1 + q2 else None,
                "mean_omega_cross": float(np.mean([r["omega_cross"] for r in cell_rows])),
                "mean_omega_p1": float(np.mean([r["omega_p1"] for r in cell_rows])),
                "mean_omega_p2": float(np.mean([r["omega_p2"] for r in cell_rows])),
            }
        )
    return out
