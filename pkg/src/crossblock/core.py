"""Graph, partition and block-matrix domain types shared by all other modules.

Conventions used throughout the package:

* graphs are undirected and unweighted; a self-loop contributes 2 to the
  degree of its node,
* diagonal entries of edge-count matrices hold *twice* the number of
  within-block edges (a self-loop therefore also counts twice),
* partition labels are dense integers ``0..K-1``; sparse labelings are
  canonicalized on construction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Graph",
    "Partition",
    "BlockMatrix",
    "EdgeCountMatrix",
    "graph_from_edges",
    "realized_block_matrix",
    "project_partition",
    "write_graph_file",
    "read_graph_file",
    "write_partition_file",
    "read_partition_file",
]


class GraphError(ValueError):
    """Invalid graph construction input."""


@dataclass(frozen=True)
class Graph:
    """Undirected node/edge container.

    ``edges`` is a tuple of normalized (i <= j) node pairs; in multigraph
    mode a pair may appear more than once.
    """

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    simple_mode: bool = True
    allow_self_loops: bool = False

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        """Degree sequence; each self-loop adds 2 to its node."""
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def edge_multiplicities(self) -> Counter:
        return Counter(self.edges)


@dataclass(frozen=True)
class Partition:
    """Node-to-block assignment with dense labels ``0..n_blocks-1``."""

    labels: np.ndarray
    n_blocks: int = field(default=0)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        canon = canonicalize_labels(labels)
        object.__setattr__(self, "labels", canon)
        object.__setattr__(self, "n_blocks", int(canon.max()) + 1 if canon.size else 0)
        self.labels.setflags(write=False)

    def __len__(self) -> int:
        return len(self.labels)

    def block_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_blocks)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __hash__(self) -> int:
        return hash(self.labels.tobytes())


def canonicalize_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel to dense integers in order of first appearance."""
    labels = np.asarray(labels, dtype=np.int64)
    order = {}
    out = np.empty_like(labels)
    nxt = 0
    for idx, lab in enumerate(labels):
        key = int(lab)
        if key not in order:
            order[key] = nxt
            nxt += 1
        out[idx] = order[key]
    return out


def _check_square_symmetric(entries: np.ndarray, what: str) -> np.ndarray:
    entries = np.asarray(entries, dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"{what} must be square, got shape {entries.shape}")
    if not np.allclose(entries, entries.T, rtol=0, atol=1e-12):
        raise ValueError(f"{what} must be symmetric")
    if (entries < 0).any():
        raise ValueError(f"{what} entries must be nonnegative")
    return entries


@dataclass(frozen=True)
class BlockMatrix:
    """Symmetric K x K matrix of edge probabilities (doubled-diagonal algebra)."""

    entries: np.ndarray

    def __post_init__(self):
        entries = _check_square_symmetric(self.entries, "BlockMatrix")
        object.__setattr__(self, "entries", entries)
        self.entries.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def entry_sum(self) -> float:
        return float(self.entries.sum())


@dataclass(frozen=True)
class EdgeCountMatrix:
    """Symmetric K x K matrix of (expected or realized) edge counts.

    Diagonal entries hold twice the within-block count; the total over all
    entries equals 2E.
    """

    entries: np.ndarray

    def __post_init__(self):
        entries = _check_square_symmetric(self.entries, "EdgeCountMatrix")
        object.__setattr__(self, "entries", entries)
        self.entries.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def total(self) -> float:
        """Sum over all entries; equals 2E."""
        return float(self.entries.sum())


def graph_from_edges(
    n_nodes: int,
    edge_list: Iterable[tuple[int, int]],
    simple_mode: bool = True,
    allow_self_loops: bool = False,
) -> Graph:
    """Build a validated Graph from an edge list.

    Pairs are normalized to (i <= j).  Raises GraphError on out-of-range
    ids, duplicate pairs in simple mode, or disallowed self-loops.
    """
    if n_nodes <= 0:
        raise GraphError(f"n_nodes must be positive, got {n_nodes}")
    edges = []
    seen = set()
    for i, j in edge_list:
        i, j = int(i), int(j)
        if not (0 <= i < n_nodes and 0 <= j < n_nodes):
            raise GraphError(f"node id out of range [0, {n_nodes}): ({i}, {j})")
        if i > j:
            i, j = j, i
        if i == j and not allow_self_loops:
            raise GraphError(f"self-loop ({i}, {i}) not allowed")
        if simple_mode:
            if (i, j) in seen:
                raise GraphError(f"duplicate pair ({i}, {j}) in simple mode")
            seen.add((i, j))
        edges.append((i, j))
    return Graph(
        n_nodes=n_nodes,
        edges=tuple(edges),
        simple_mode=simple_mode,
        allow_self_loops=allow_self_loops,
    )


def realized_block_matrix(g: Graph, p: Partition) -> EdgeCountMatrix:
    """Count edges between the blocks of ``p`` (doubled diagonal, loops count 2)."""
    if len(p) != g.n_nodes:
        raise ValueError(f"partition length {len(p)} != n_nodes {g.n_nodes}")
    k = p.n_blocks
    m = np.zeros((k, k), dtype=float)
    lab = p.labels
    for i, j in g.edges:
        r, s = lab[i], lab[j]
        if r == s:
            m[r, r] += 2.0
        else:
            m[r, s] += 1.0
            m[s, r] += 1.0
    return EdgeCountMatrix(m)


def project_partition(
    cross: Partition,
    cross_index: Mapping[int, tuple],
    factor: int,
) -> Partition:
    """Extract the implicit factor partition from a cross-partition.

    ``cross_index`` maps each cross label to its tuple of factor blocks and
    ``factor`` selects the coordinate (1-based, matching the factor order).
    """
    if factor < 1:
        raise ValueError("factor index is 1-based")
    out = np.empty(len(cross), dtype=np.int64)
    for i, lab in enumerate(cross.labels):
        key = int(lab)
        if key not in cross_index:
            raise KeyError(f"cross label {key} missing from index map")
        out[i] = cross_index[key][factor - 1]
    return Partition(out)


# ---------------------------------------------------------------------------
# file formats


def write_graph_file(g: Graph, path) -> None:
    """Tab-separated edge list with #-prefixed header lines."""
    with open(path, "w") as fh:
        fh.write(f"# n_nodes={g.n_nodes}\n")
        fh.write(f"# simple_mode={str(g.simple_mode).lower()}\n")
        fh.write(f"# allow_self_loops={str(g.allow_self_loops).lower()}\n")
        for i, j in g.edges:
            fh.write(f"{i}\t{j}\n")


def read_graph_file(path) -> Graph:
    n_nodes = None
    simple_mode = True
    allow_self_loops = False
    edges = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    key, val = (t.strip() for t in body.split("=", 1))
                    if key == "n_nodes":
                        n_nodes = int(val)
                    elif key == "simple_mode":
                        simple_mode = val.lower() == "true"
                    elif key == "allow_self_loops":
                        allow_self_loops = val.lower() == "true"
                continue
            i, j = line.split("\t")
            edges.append((int(i), int(j)))
    if n_nodes is None:
        raise GraphError(f"{path}: missing n_nodes header")
    return graph_from_edges(n_nodes, edges, simple_mode, allow_self_loops)


def write_partition_file(p: Partition, path) -> None:
    """One integer label per line."""
    with open(path, "w") as fh:
        for lab in p.labels:
            fh.write(f"{int(lab)}\n")


def read_partition_file(path) -> Partition:
    """Accepts one-label-per-line or a single bracketed array."""
    with open(path) as fh:
        text = fh.read().strip()
    if text.startswith("["):
        body = text.strip("[]")
        parts = [t for t in body.replace(",", " ").split() if t]
        labels = [int(t) for t in parts]
    else:
        labels = [int(line) for line in text.splitlines() if line.strip() and not line.startswith("#")]
    return Partition(np.asarray(labels, dtype=np.int64))
