"""Partition-similarity measures and graph-structure diagnostics.

Unit conventions: variation of information is reported in nats; the
Jensen-Shannon distance uses base-2 logarithms so it is bounded by 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import EdgeCountMatrix, Graph, Partition

__all__ = [
    "OverlapResult",
    "partition_overlap",
    "variation_of_information",
    "normalized_degree_variance",
    "js_distance_degree_distributions",
    "degree_threshold_cp_classification",
    "frobenius_deviation",
]


@dataclass(frozen=True)
class OverlapResult:
    """Maximum fraction of identically labeled nodes over label bijections."""

    omega: float
    matching: tuple[tuple[int, int], ...]


def _contingency(p: Partition, q: Partition) -> np.ndarray:
    m = np.zeros((p.n_blocks, q.n_blocks), dtype=np.int64)
    np.add.at(m, (p.labels, q.labels), 1)
    return m


def partition_overlap(p: Partition, q: Partition) -> OverlapResult:
    """Maximum partition overlap via maximum-weight bipartite matching.

    Builds the contingency matrix between the two label sets and matches
    blocks with the Kuhn-Munkres algorithm; the overlap is the matched
    node count divided by N.
    """
    if len(p) != len(q):
        raise ValueError(f"partition lengths differ: {len(p)} vs {len(q)}")
    m = _contingency(p, q)
    rows, cols = linear_sum_assignment(m, maximize=True)
    matched = int(m[rows, cols].sum())
    return OverlapResult(
        omega=matched / len(p),
        matching=tuple((int(r), int(c)) for r, c in zip(rows, cols)),
    )


def variation_of_information(p: Partition, q: Partition) -> float:
    """VI = H(p) + H(q) - 2 I(p;q), in nats; 0 iff equal up to relabeling."""
    if len(p) != len(q):
        raise ValueError(f"partition lengths differ: {len(p)} vs {len(q)}")
    n = len(p)
    joint = _contingency(p, q) / n
    pr = joint.sum(axis=1)
    qr = joint.sum(axis=0)

    def entropy(dist):
        nz = dist[dist > 0]
        return float(-(nz * np.log(nz)).sum())

    h_joint = entropy(joint.ravel())
    # VI = 2 H(p,q) - H(p) - H(q)
    return max(0.0, 2.0 * h_joint - entropy(pr) - entropy(qr))


def normalized_degree_variance(g: Graph) -> float:
    """Var(k) / <k>^2, the squared coefficient of variation of the degrees."""
    if g.n_nodes < 2:
        raise ValueError("need at least two nodes")
    deg = g.degrees().astype(float)
    mean = deg.mean()
    if mean == 0:
        raise ValueError("graph has no edges")
    return float(deg.var() / mean**2)


def js_distance_degree_distributions(g: Graph, cp: Partition) -> float:
    """Jensen-Shannon distance (base 2) between the two blocks' degree PMFs."""
    if cp.n_blocks != 2:
        raise ValueError(f"need exactly 2 blocks, got {cp.n_blocks}")
    if len(cp) != g.n_nodes:
        raise ValueError("partition length mismatch")
    deg = g.degrees()
    pmfs = []
    kmax = int(deg.max(initial=0))
    for b in (0, 1):
        block_deg = deg[cp.labels == b]
        if block_deg.size == 0:
            raise ValueError(f"block {b} is empty")
        pmfs.append(np.bincount(block_deg, minlength=kmax + 1) / block_deg.size)
    pa, pb = pmfs
    mix = 0.5 * (pa + pb)

    def kl(p, m):
        nz = p > 0
        return float((p[nz] * np.log2(p[nz] / m[nz])).sum())

    divergence = 0.5 * kl(pa, mix) + 0.5 * kl(pb, mix)
    return float(np.sqrt(max(0.0, min(1.0, divergence))))


def degree_threshold_cp_classification(
    g: Graph, planted_cp: Partition, threshold_degree: float
) -> float:
    """Fraction of nodes classified correctly by a pure degree threshold.

    Nodes with degree strictly above the threshold go to the core
    (block 0), ties and lower degrees to the periphery.
    """
    if planted_cp.n_blocks != 2:
        raise ValueError(f"need exactly 2 blocks, got {planted_cp.n_blocks}")
    deg = g.degrees()
    predicted = np.where(deg > threshold_degree, 0, 1)
    return float((predicted == planted_cp.labels).mean())


def frobenius_deviation(b_planted: EdgeCountMatrix, m_realized: EdgeCountMatrix) -> float:
    """Frobenius norm of the elementwise difference of two count matrices."""
    if b_planted.dim != m_realized.dim:
        raise ValueError(f"dimension mismatch: {b_planted.dim} vs {m_realized.dim}")
    return float(np.linalg.norm(b_planted.entries - m_realized.entries))
