"""Samplers that turn a planted cross-block specification into graphs.

Three generative processes: independent Bernoulli edges (canonical), exact
edge counts with degree-weighted endpoints (microcanonical, degree
corrected), and the constrained mixed-membership process used to
cross-validate the cross-block construction.

Every sampler is a pure function of (inputs, seed) and returns the graph
together with a generation report (realized counts, shortfalls, deviation
norms).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import EdgeCountMatrix, Graph, Partition, realized_block_matrix
from .numeric import DegreeSequence
from .scbm import CrossSpec, NormalizerResult

__all__ = [
    "GeneratorConfig",
    "GenerationReport",
    "GenerationError",
    "planted_partition",
    "sample_canonical",
    "round_edge_counts",
    "sample_microcanonical_dc",
    "sample_mmsbm",
]

VARIANTS = ("canonical", "microcanonical_dc", "mmsbm")


class GenerationError(RuntimeError):
    """Sampling could not satisfy its structural constraints."""


@dataclass(frozen=True)
class GeneratorConfig:
    """Sampler selection and variant-specific knobs.

    ``gamma`` is the power-law degree exponent and applies only to the
    degree-corrected microcanonical sampler; ``max_rejections`` bounds the
    redraw attempts per edge in simple mode.
    """

    variant: str = "canonical"
    simple_mode: bool = True
    allow_self_loops: bool = False
    gamma: float | None = None
    max_rejections: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.variant == "microcanonical_dc":
            if self.gamma is not None and self.gamma <= 1:
                raise ValueError("gamma must exceed 1")
        elif self.gamma is not None:
            raise ValueError(f"gamma applies only to microcanonical_dc, not {self.variant}")
        if self.max_rejections < 0:
            raise ValueError("max_rejections must be nonnegative")


@dataclass
class GenerationReport:
    """Sidecar record of what a sampler actually produced."""

    variant: str
    seed: int
    n_nodes: int
    n_edges: int
    realized_counts: np.ndarray
    target_counts: np.ndarray | None = None
    deviation_norm: float | None = None
    shortfall: dict = field(default_factory=dict)
    cap_fraction: float = 0.0
    warnings: list = field(default_factory=list)

    def to_text(self) -> str:
        payload = {
            "variant": self.variant,
            "seed": self.seed,
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "realized_counts": np.asarray(self.realized_counts).tolist(),
            "target_counts": (
                None if self.target_counts is None else np.asarray(self.target_counts).tolist()
            ),
            "deviation_norm": self.deviation_norm,
            "shortfall": {f"{u},{v}": n for (u, v), n in self.shortfall.items()},
            "cap_fraction": self.cap_fraction,
            "warnings": self.warnings,
        }
        return json.dumps(payload, indent=2)


def planted_partition(spec: CrossSpec) -> Partition:
    """Contiguous node-to-cross-block assignment matching the spec's sizes."""
    return Partition(np.repeat(np.arange(spec.n_cross_blocks), spec.cross_sizes))


def _check_memberships(spec: CrossSpec, memberships: Partition) -> None:
    sizes = np.bincount(memberships.labels, minlength=spec.n_cross_blocks)
    if not np.array_equal(sizes, spec.cross_sizes):
        raise ValueError(
            f"membership block sizes {sizes.tolist()} do not match the planted "
            f"sizes {spec.cross_sizes.tolist()}"
        )


def sample_canonical(
    spec: CrossSpec,
    memberships: Partition,
    cfg: GeneratorConfig,
    seed: int | None = None,
) -> tuple[Graph, GenerationReport]:
    """Independent Bernoulli edges with the planted pair probabilities.

    Self-loops, when allowed, appear with half the within-block probability
    so the doubled diagonal of the expected count matrix is exact.
    """
    if seed is None:
        seed = cfg.seed
    theta = spec.theta_scbm.entries
    if theta.max() > 1.0:
        raise ValueError(f"edge probability {theta.max():.6f} exceeds 1")
    _check_memberships(spec, memberships)
    rng = np.random.default_rng(seed)
    n = len(memberships)
    lab = memberships.labels
    iu, ju = np.triu_indices(n, k=1)
    p = theta[lab[iu], lab[ju]]
    keep = rng.random(p.size) < p
    edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
    if cfg.allow_self_loops:
        nodes = np.arange(n)
        keep_loops = rng.random(n) < theta[lab, lab] / 2.0
        edges.extend((int(i), int(i)) for i in nodes[keep_loops])
    g = Graph(
        n_nodes=n,
        edges=tuple(sorted(edges)),
        simple_mode=cfg.simple_mode,
        allow_self_loops=cfg.allow_self_loops,
    )
    realized = realized_block_matrix(g, memberships)
    nu = spec.cross_sizes.astype(float)
    target = np.outer(nu, nu) * theta
    report = GenerationReport(
        variant="canonical",
        seed=seed,
        n_nodes=n,
        n_edges=g.n_edges,
        realized_counts=realized.entries,
        target_counts=target,
        deviation_norm=float(np.linalg.norm(realized.entries - target)),
    )
    return g, report


def round_edge_counts(b: EdgeCountMatrix) -> tuple[EdgeCountMatrix, float]:
    """Integer edge-count targets closest to the expected counts.

    Off-diagonal entries round half to even.  Diagonal entries are rounded
    on the within-block count (half the stored value) and re-doubled, so
    the diagonal stays even.  Also returns the Frobenius norm of the
    rounding deviation.
    """
    entries = b.entries
    rounded = np.round(entries)
    within = np.round(np.diag(entries) / 2.0)
    np.fill_diagonal(rounded, 2.0 * within)
    return EdgeCountMatrix(rounded), float(np.linalg.norm(rounded - entries))


def _draw_endpoints(rng, nodes, probs, count):
    return rng.choice(nodes, size=count, p=probs)


def sample_microcanonical_dc(
    b_int: EdgeCountMatrix,
    memberships: Partition,
    degrees: DegreeSequence,
    cfg: GeneratorConfig,
    seed: int | None = None,
) -> tuple[Graph, GenerationReport]:
    """Place exactly the target number of edges per cross-pair.

    Each endpoint is drawn from its block with probability proportional to
    the node's target degree, so the degree sequence is matched on average
    (soft constraint).  In simple mode, collisions (duplicate pairs,
    disallowed loops) are redrawn up to ``max_rejections`` times and then
    dropped; dropped edges are reported, and a shortfall above 1% of any
    cross-pair's target is an error.
    """
    if seed is None:
        seed = cfg.seed
    k = b_int.dim
    if memberships.n_blocks != k:
        raise ValueError(f"memberships have {memberships.n_blocks} blocks, matrix is {k}x{k}")
    target = b_int.entries
    if not np.allclose(target, np.round(target)):
        raise ValueError("edge-count targets must be integers (round_edge_counts first)")
    if (np.diag(target) % 2 != 0).any():
        raise ValueError("diagonal targets must be even (doubled within-block counts)")
    deg = np.asarray(degrees.degrees, dtype=float)
    if deg.size != len(memberships):
        raise ValueError("degree sequence length does not match memberships")
    rng = np.random.default_rng(seed)

    block_nodes = [np.flatnonzero(memberships.labels == u) for u in range(k)]
    block_probs = []
    for u, nodes in enumerate(block_nodes):
        w = deg[nodes]
        if w.sum() == 0:
            w = np.ones_like(w)
        block_probs.append(w / w.sum())

    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    shortfall: dict[tuple[int, int], int] = {}

    for u in range(k):
        for v in range(u, k):
            count = int(target[u, u] // 2) if u == v else int(target[u, v])
            if count == 0:
                continue
            # draw endpoint batches, keep the valid ones, redraw the rest
            needed = count
            attempts_left = cfg.max_rejections + 1
            while needed > 0 and attempts_left > 0:
                attempts_left -= 1
                ii = _draw_endpoints(rng, block_nodes[u], block_probs[u], needed)
                jj = _draw_endpoints(rng, block_nodes[v], block_probs[v], needed)
                for i, j in zip(ii.tolist(), jj.tolist()):
                    if i > j:
                        i, j = j, i
                    if i == j and not cfg.allow_self_loops:
                        continue
                    if cfg.simple_mode and (i, j) in seen:
                        continue
                    edges.append((i, j))
                    if cfg.simple_mode:
                        seen.add((i, j))
                    needed -= 1
            if needed:
                shortfall[(u, v)] = needed
                if needed > 0.01 * count:
                    raise GenerationError(
                        f"cross-pair ({u}, {v}): dropped {needed} of {count} edges, "
                        "beyond the 1% shortfall budget"
                    )

    g = Graph(
        n_nodes=len(memberships),
        edges=tuple(sorted(edges)),
        simple_mode=cfg.simple_mode,
        allow_self_loops=cfg.allow_self_loops,
    )
    realized = realized_block_matrix(g, memberships)
    report = GenerationReport(
        variant="microcanonical_dc",
        seed=seed,
        n_nodes=g.n_nodes,
        n_edges=g.n_edges,
        realized_counts=realized.entries,
        target_counts=target,
        deviation_norm=float(np.linalg.norm(realized.entries - target)),
        shortfall=shortfall,
    )
    return g, report


_PAIR_INDEX = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}


def sample_mmsbm(
    theta1,
    theta2,
    memberships1: Partition,
    memberships2: Partition,
    normalizers,
    seed: int = 0,
    simple_mode: bool = True,
) -> tuple[Graph, GenerationReport]:
    """Constrained mixed-membership sampler (validation path).

    Each node of a pair activates its block in one of the two planted
    partitions with equal probability; mixed activations never connect,
    and same-partition activations connect with probability 4 x theta of
    the drawn block pair (the factor 4 undoes the 1/4 chance of the
    same-partition draw that the normalizer equations already average
    over).  Probabilities are capped at 1; capping more than 0.1% of the
    pairs is reported as a warning.
    """
    if isinstance(normalizers, NormalizerResult):
        if not normalizers.feasible or normalizers.x is None:
            raise ValueError("infeasible normalizers: no valid sampler exists for these factors")
        x = np.asarray(normalizers.x, dtype=float)
    else:
        x = np.asarray(normalizers, dtype=float)
    if x.shape != (9,):
        raise ValueError(f"need 9 per-combination normalizers, got shape {x.shape}")
    if not np.isfinite(x).all() or x.min() < 0:
        raise ValueError("infeasible normalizers: entries must be finite and nonnegative")
    if len(memberships1) != len(memberships2):
        raise ValueError("membership vectors differ in length")
    if memberships1.n_blocks != 2 or memberships2.n_blocks != 2:
        raise ValueError("both factor partitions must have exactly two blocks")

    t1 = np.asarray(theta1.entries if hasattr(theta1, "entries") else theta1, dtype=float)
    t2 = np.asarray(theta2.entries if hasattr(theta2, "entries") else theta2, dtype=float)
    n = len(memberships1)
    l1, l2 = memberships1.labels, memberships2.labels
    rng = np.random.default_rng(seed)

    iu, ju = np.triu_indices(n, k=1)
    pair1 = np.minimum(l1[iu] + l1[ju], 2)  # index into (aa, ab, bb)
    pair2 = np.minimum(l2[iu] + l2[ju], 2)
    xv = x[3 * pair1 + pair2]

    side_i = rng.integers(0, 2, size=iu.size)
    side_j = rng.integers(0, 2, size=iu.size)
    same = side_i == side_j
    theta_drawn = np.where(side_i == 0, t1[l1[iu], l1[ju]], t2[l2[iu], l2[ju]])
    p = 4.0 * xv * theta_drawn
    capped = p > 1.0
    p = np.where(same, np.minimum(p, 1.0), 0.0)
    keep = rng.random(p.size) < p
    edges = tuple(sorted(zip(iu[keep].tolist(), ju[keep].tolist())))

    g = Graph(n_nodes=n, edges=edges, simple_mode=simple_mode, allow_self_loops=False)
    cap_fraction = float((capped & same).mean())
    cross = Partition(l1 * 2 + l2)
    report = GenerationReport(
        variant="mmsbm",
        seed=seed,
        n_nodes=n,
        n_edges=g.n_edges,
        realized_counts=realized_block_matrix(g, cross).entries,
        cap_fraction=cap_fraction,
        warnings=(
            [f"probability cap hit on {cap_fraction:.2%} of pairs"]
            if cap_fraction > 0.001
            else []
        ),
    )
    return g, report
