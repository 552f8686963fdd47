"""Cross-block matrix construction for networks with several planted partitions.

A cross-block is the intersection cell of one block from each planted
factor partition.  The constructors here build the cross-block probability
matrix so that the expected edge counts of every factor partition are
reproduced exactly, either with the closed-form constant normalizer (equal
block sizes) or by solving the underdetermined count-matching system for
per-pair normalizers (general sizes).

Also included: the mixed-membership normalization analysis (per-pair and
per-combination normalizer systems plus the closed-form infeasibility
predicate for the symmetric case).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, nnls

from .core import BlockMatrix
from .numeric import LinearSystem, min_norm_solve, nonneg_feasible

__all__ = [
    "CrossSpec",
    "ResidualReport",
    "NormalizerResult",
    "InfeasibleConstructionError",
    "beta_from_degree",
    "rho_from_degree",
    "make_theta_bicommunity",
    "make_theta_coreperiphery",
    "cross_block_matrix_equal",
    "cross_block_matrix_general",
    "cross_block_matrix_multi",
    "consistency_check",
    "factor_block_sums",
    "farkas_infeasible",
    "mmsbm_per_pair_system",
    "mmsbm_per_combination_system",
    "mmsbm_normalizers_per_pair",
    "mmsbm_normalizers_per_combination",
]


class InfeasibleConstructionError(ValueError):
    """No valid cross-block probability matrix exists for the inputs."""


def beta_from_degree(n_nodes: int, c: float) -> float:
    """Factor-matrix scale for two equal blocks of size n = N/2.

    Set so that each factor's expected-count entries total 2E, which the
    constant-normalizer construction requires and which yields mean degree
    exactly ``c``.
    """
    e_total = c * n_nodes / 2.0
    n = n_nodes / 2.0
    return e_total / n**2


def rho_from_degree(n_nodes: int, c: float) -> float:
    """Overall expected density 2E / N^2 (self-loops allowed)."""
    return c / n_nodes


def make_theta_bicommunity(mu: float, beta: float) -> BlockMatrix:
    """Two equal communities; ``mu`` trades within- for between-block density."""
    if not (0.0 < mu <= 0.5):
        raise ValueError(f"mu must lie in (0, 0.5], got {mu} "
                         "(mu=0 would disconnect the graph)")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return BlockMatrix(beta * np.array([[1.0 - mu, mu], [mu, 1.0 - mu]]))


def make_theta_coreperiphery(lam: float, beta: float) -> BlockMatrix:
    """Core-periphery pair; for lam < 0.5 the core is densest, the periphery sparsest."""
    if not (0.0 < lam <= 0.5):
        raise ValueError(f"lambda must lie in (0, 0.5], got {lam}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return BlockMatrix(beta * np.array([[1.0 - lam, 0.5], [0.5, lam]]))


@dataclass(frozen=True)
class ResidualReport:
    """Factor block-sum residuals of a cross-block matrix."""

    per_factor_abs: tuple[np.ndarray, ...]
    max_abs: float
    max_rel: float

    def ok(self, tol: float) -> bool:
        return self.max_rel <= tol


@dataclass(frozen=True)
class CrossSpec:
    """A planted cross-partition: index, sizes and probability matrix.

    ``cross_index`` maps each cross label u to the tuple of factor blocks
    it intersects, in row-major order over the factors.  ``normalizers``
    is a scalar for the constant-normalizer construction or a symmetric
    K x K array of per-pair constants.
    """

    factor_block_counts: tuple[int, ...]
    cross_index: dict
    cross_sizes: np.ndarray
    theta_scbm: BlockMatrix
    rho: float
    normalizers: object
    factor_thetas: tuple[BlockMatrix, ...]

    def __post_init__(self):
        sizes = np.asarray(self.cross_sizes, dtype=np.int64)
        object.__setattr__(self, "cross_sizes", sizes)

    @property
    def n_nodes(self) -> int:
        return int(self.cross_sizes.sum())

    @property
    def n_cross_blocks(self) -> int:
        return len(self.cross_sizes)

    def factor_sizes(self, factor: int) -> np.ndarray:
        """Node counts of the blocks of factor ``factor`` (1-based)."""
        kp = self.factor_block_counts[factor - 1]
        out = np.zeros(kp, dtype=np.int64)
        for u, coords in self.cross_index.items():
            out[coords[factor - 1]] += self.cross_sizes[u]
        return out

    def to_json(self) -> str:
        report = consistency_check(self)
        payload = {
            "factor_block_counts": list(self.factor_block_counts),
            "cross_index": {str(u): list(coords) for u, coords in self.cross_index.items()},
            "cross_sizes": self.cross_sizes.tolist(),
            "theta_scbm": self.theta_scbm.entries.tolist(),
            "rho": self.rho,
            "normalizers": (
                self.normalizers
                if np.isscalar(self.normalizers)
                else np.asarray(self.normalizers).tolist()
            ),
            "factor_thetas": [t.entries.tolist() for t in self.factor_thetas],
            "residual_report": {"max_abs": report.max_abs, "max_rel": report.max_rel},
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CrossSpec":
        d = json.loads(text)
        normalizers = d["normalizers"]
        if isinstance(normalizers, list):
            normalizers = np.asarray(normalizers, dtype=float)
        return cls(
            factor_block_counts=tuple(d["factor_block_counts"]),
            cross_index={int(u): tuple(coords) for u, coords in d["cross_index"].items()},
            cross_sizes=np.asarray(d["cross_sizes"], dtype=np.int64),
            theta_scbm=BlockMatrix(np.asarray(d["theta_scbm"], dtype=float)),
            rho=float(d["rho"]),
            normalizers=normalizers,
            factor_thetas=tuple(
                BlockMatrix(np.asarray(t, dtype=float)) for t in d["factor_thetas"]
            ),
        )


def _row_major_cross_index(block_counts: tuple[int, ...]) -> dict:
    return {
        u: coords
        for u, coords in enumerate(itertools.product(*(range(k) for k in block_counts)))
    }


def _check_probability_range(theta: np.ndarray) -> None:
    if theta.min() < -1e-12:
        u, v = np.unravel_index(int(theta.argmin()), theta.shape)
        raise InfeasibleConstructionError(
            f"negative edge probability {theta[u, v]:.3e} at cross-pair ({u}, {v})"
        )
    if theta.max() > 1.0 + 1e-12:
        u, v = np.unravel_index(int(theta.argmax()), theta.shape)
        raise InfeasibleConstructionError(
            f"edge probability {theta[u, v]:.6f} > 1 at cross-pair ({u}, {v})"
        )


def cross_block_matrix_equal(
    theta1: BlockMatrix, theta2: BlockMatrix, rho: float, n_nodes: int
) -> CrossSpec:
    """Constant-normalizer construction for equal block sizes.

    theta_scbm[u][v] = (1/rho) * theta1[r][s] * theta2[r'][s'] for
    u = (r, r'), v = (s, s'); valid because each factor's entry sums equal
    2E (checked) so every factor block sum is reproduced exactly.
    """
    return cross_block_matrix_multi((theta1, theta2), rho, n_nodes)


def cross_block_matrix_multi(
    thetas: tuple[BlockMatrix, ...] | list, rho: float, n_nodes: int
) -> CrossSpec:
    """Equal-block-size construction for two or more factor partitions."""
    thetas = tuple(thetas)
    if len(thetas) < 2:
        raise ValueError("need at least two factor partitions")
    sums = [t.entry_sum() for t in thetas]
    ref = sums[0]
    for s in sums[1:]:
        if abs(s - ref) > 1e-12 * max(abs(ref), 1.0):
            raise InfeasibleConstructionError(
                f"factor entry sums differ: {sums} (both planted structures "
                "must imply the same edge count)"
            )
    counts = tuple(t.dim for t in thetas)
    k_cross = int(np.prod(counts))
    if n_nodes % k_cross != 0:
        raise ValueError(f"n_nodes {n_nodes} not divisible by {k_cross} cross-blocks")
    theta = thetas[0].entries
    for t in thetas[1:]:
        theta = np.kron(theta, t.entries)
    p = len(thetas)
    theta = theta * rho ** (1 - p)
    _check_probability_range(theta)
    nu = np.full(k_cross, n_nodes // k_cross, dtype=np.int64)
    return CrossSpec(
        factor_block_counts=counts,
        cross_index=_row_major_cross_index(counts),
        cross_sizes=nu,
        theta_scbm=BlockMatrix(theta),
        rho=rho,
        normalizers=float(rho ** (1 - p)),
        factor_thetas=thetas,
    )


def _count_matching_system(
    theta1: BlockMatrix,
    theta2: BlockMatrix,
    cross_index: dict,
    cross_sizes: np.ndarray,
) -> tuple[LinearSystem, list[tuple[int, int]]]:
    """Build the block-sum matching system for per-pair normalizers.

    Unknowns are x_uv for unordered cross-pairs (u <= v); one equation per
    unordered factor block pair of each factor, matching the factor's
    expected count (doubled on the diagonal).
    """
    k = len(cross_sizes)
    theta_prod = np.empty((k, k))
    for u in range(k):
        r, rp = cross_index[u]
        for v in range(k):
            s, sp = cross_index[v]
            theta_prod[u, v] = theta1.entries[r, s] * theta2.entries[rp, sp]
    pairs = [(u, v) for u in range(k) for v in range(u, k)]
    pair_idx = {p: i for i, p in enumerate(pairs)}
    bhat = np.array(
        [cross_sizes[u] * cross_sizes[v] * theta_prod[u, v] for u, v in pairs]
    )

    factor_sizes = []
    for f, kp in ((0, theta1.dim), (1, theta2.dim)):
        sizes = np.zeros(kp, dtype=np.int64)
        for u, coords in cross_index.items():
            sizes[coords[f]] += cross_sizes[u]
        factor_sizes.append(sizes)

    rows, targets = [], []
    for f, theta_f in ((0, theta1), (1, theta2)):
        kp = theta_f.dim
        members = [
            [u for u, coords in cross_index.items() if coords[f] == r] for r in range(kp)
        ]
        for r in range(kp):
            for s in range(r, kp):
                row = np.zeros(len(pairs))
                if r == s:
                    for i, u in enumerate(members[r]):
                        for v in members[r][i:]:
                            w = 1.0 if u == v else 2.0
                            idx = pair_idx[(u, v)]
                            row[idx] += w * bhat[idx]
                else:
                    for u in members[r]:
                        for v in members[s]:
                            idx = pair_idx[(min(u, v), max(u, v))]
                            row[idx] += bhat[idx]
                rows.append(row)
                targets.append(
                    factor_sizes[f][r] * factor_sizes[f][s] * theta_f.entries[r, s]
                )
    return LinearSystem(np.array(rows), np.array(targets)), pairs


def cross_block_matrix_general(
    theta1: BlockMatrix,
    theta2: BlockMatrix,
    cross_sizes,
    tol: float = 1e-10,
) -> CrossSpec:
    """Per-pair normalizer construction for arbitrary cross-block sizes.

    Solves the underdetermined block-sum matching system for the minimum
    norm normalizer vector and verifies the resulting probabilities.
    """
    cross_sizes = np.asarray(cross_sizes, dtype=np.int64)
    k1, k2 = theta1.dim, theta2.dim
    if len(cross_sizes) != k1 * k2:
        raise ValueError(f"need {k1 * k2} cross sizes, got {len(cross_sizes)}")
    cross_index = _row_major_cross_index((k1, k2))

    sizes1 = np.zeros(k1, dtype=np.int64)
    sizes2 = np.zeros(k2, dtype=np.int64)
    for u, (r, rp) in cross_index.items():
        sizes1[r] += cross_sizes[u]
        sizes2[rp] += cross_sizes[u]
    total1 = float(sizes1 @ theta1.entries @ sizes1)
    total2 = float(sizes2 @ theta2.entries @ sizes2)
    if abs(total1 - total2) > 1e-9 * max(abs(total1), 1.0):
        raise InfeasibleConstructionError(
            f"factor expected-count totals differ: {total1} vs {total2}"
        )

    system, pairs = _count_matching_system(theta1, theta2, cross_index, cross_sizes)
    x = min_norm_solve(system, tol=tol)

    k = k1 * k2
    norm = np.zeros((k, k))
    for (u, v), xv in zip(pairs, x):
        norm[u, v] = norm[v, u] = xv
    theta = np.empty((k, k))
    for u in range(k):
        r, rp = cross_index[u]
        for v in range(k):
            s, sp = cross_index[v]
            theta[u, v] = norm[u, v] * theta1.entries[r, s] * theta2.entries[rp, sp]
    _check_probability_range(theta)
    theta = np.clip(theta, 0.0, 1.0)

    spec = CrossSpec(
        factor_block_counts=(k1, k2),
        cross_index=cross_index,
        cross_sizes=cross_sizes,
        theta_scbm=BlockMatrix(theta),
        rho=float(total1 / (cross_sizes.sum() ** 2)),
        normalizers=norm,
        factor_thetas=(theta1, theta2),
    )
    report = consistency_check(spec)
    if report.max_rel > 1e-9:
        raise InfeasibleConstructionError(
            f"construction residual {report.max_rel:.3e} exceeds 1e-9"
        )
    return spec


def factor_block_sums(spec: CrossSpec, factor: int) -> np.ndarray:
    """Expected edge counts of factor ``factor`` (1-based) implied by the spec.

    Entry (r, s) sums nu_u nu_v theta[u][v] over contributing cross pairs;
    the diagonal follows the doubled convention.
    """
    f = factor - 1
    kp = spec.factor_block_counts[f]
    k = spec.n_cross_blocks
    weights = np.zeros((k, kp))
    for u, coords in spec.cross_index.items():
        weights[u, coords[f]] = spec.cross_sizes[u]
    return weights.T @ spec.theta_scbm.entries @ weights


def consistency_check(
    spec: CrossSpec,
    theta1: BlockMatrix | None = None,
    theta2: BlockMatrix | None = None,
) -> ResidualReport:
    """Compare the spec's implied factor block sums with the planted targets."""
    thetas = list(spec.factor_thetas)
    if theta1 is not None:
        thetas[0] = theta1
    if theta2 is not None:
        thetas[1] = theta2
    per_factor = []
    max_abs = 0.0
    max_rel = 0.0
    for f, theta_f in enumerate(thetas, start=1):
        sizes = spec.factor_sizes(f)
        target = np.outer(sizes, sizes) * theta_f.entries
        got = factor_block_sums(spec, f)
        resid = np.abs(got - target)
        per_factor.append(resid)
        max_abs = max(max_abs, float(resid.max()))
        denom = np.where(np.abs(target) > 0, np.abs(target), 1.0)
        max_rel = max(max_rel, float((resid / denom).max()))
    return ResidualReport(
        per_factor_abs=tuple(per_factor), max_abs=max_abs, max_rel=max_rel
    )


# ---------------------------------------------------------------------------
# mixed-membership (additive-probability) normalization analysis


def farkas_infeasible(theta1: BlockMatrix, theta2: BlockMatrix, rho: float) -> bool:
    """Closed-form infeasibility of per-pair additive normalizers.

    Valid only in the symmetric case theta_aa == theta_bb and
    theta_cc == theta_dd; no nonnegative per-pair normalizer exists iff
    |theta_aa - theta_ab| + |theta_cc - theta_cd| > 2 rho.
    """
    t1, t2 = theta1.entries, theta2.entries
    scale = max(t1.max(), t2.max(), 1e-300)
    if abs(t1[0, 0] - t1[1, 1]) > 1e-12 * scale or abs(t2[0, 0] - t2[1, 1]) > 1e-12 * scale:
        raise ValueError(
            "closed-form predicate requires theta_aa == theta_bb and "
            "theta_cc == theta_dd; use nonneg_feasible on the full system"
        )
    diff = abs(t1[0, 0] - t1[0, 1]) + abs(t2[0, 0] - t2[0, 1])
    bound = 2.0 * rho
    return diff > bound * (1.0 + 1e-9)


def mmsbm_per_pair_system(theta1: BlockMatrix, theta2: BlockMatrix) -> LinearSystem:
    """Equations for one additive normalizer per same-partition block pair.

    Unknowns ordered (x_aa, x_ab, x_bb, x_cc, x_cd, x_dd); each target
    density must equal a quarter of its own rescaled density plus a
    sixteenth of the rescaled densities of the other partition, summed
    over ordered block pairs.
    """
    t1, t2 = theta1.entries, theta2.entries
    if theta1.dim != 2 or theta2.dim != 2:
        raise ValueError("per-pair normalization is defined for 2x2 factors")
    p1 = [t1[0, 0], t1[0, 1], t1[1, 1]]
    p2 = [t2[0, 0], t2[0, 1], t2[1, 1]]
    mult = np.array([1.0, 2.0, 1.0])
    a = np.zeros((6, 6))
    b = np.zeros(6)
    for i, th in enumerate(p1):
        a[i, i] = th / 4.0
        a[i, 3:6] = mult * np.asarray(p2) / 16.0
        b[i] = th
    for j, th in enumerate(p2):
        a[3 + j, 3 + j] += th / 4.0
        a[3 + j, 0:3] += mult * np.asarray(p1) / 16.0
        b[3 + j] = th
    return LinearSystem(a, b)


def mmsbm_per_combination_system(
    theta1: BlockMatrix, theta2: BlockMatrix
) -> LinearSystem:
    """Equations for one normalizer per combination of block pairs.

    Unknowns x[(rs), (r's')] in row-major order over (aa, ab, bb) x
    (cc, cd, dd); each target density must equal a quarter of the sum over
    ordered other-partition pairs of x times the two densities' sum.
    """
    t1, t2 = theta1.entries, theta2.entries
    if theta1.dim != 2 or theta2.dim != 2:
        raise ValueError("per-combination normalization is defined for 2x2 factors")
    p1 = [t1[0, 0], t1[0, 1], t1[1, 1]]
    p2 = [t2[0, 0], t2[0, 1], t2[1, 1]]
    mult = [1.0, 2.0, 1.0]
    a = np.zeros((6, 9))
    b = np.zeros(6)
    for i, th in enumerate(p1):
        for j, th2 in enumerate(p2):
            a[i, 3 * i + j] = mult[j] * (th + th2) / 4.0
        b[i] = th
    for j, th2 in enumerate(p2):
        for i, th in enumerate(p1):
            a[3 + j, 3 * i + j] = mult[i] * (th + th2) / 4.0
        b[3 + j] = th2
    return LinearSystem(a, b)


@dataclass(frozen=True)
class NormalizerResult:
    feasible: bool
    x: np.ndarray | None
    method: str
    residual: float


def mmsbm_normalizers_per_pair(
    theta1: BlockMatrix, theta2: BlockMatrix, tol: float = 1e-9
) -> NormalizerResult:
    """Solve the per-pair system; infeasibility is a result, not an exception."""
    system = mmsbm_per_pair_system(theta1, theta2)
    x = min_norm_solve(system, tol=1e-10)
    resid = float(np.linalg.norm(system.A @ x - system.b))
    if x.min() >= -tol:
        return NormalizerResult(True, np.clip(x, 0.0, None), "min_norm", resid)
    if not nonneg_feasible(system, tol=tol):
        return NormalizerResult(False, None, "lp_infeasible", resid)
    res = linprog(
        np.zeros(system.A.shape[1]),
        A_eq=system.A,
        b_eq=system.b,
        bounds=(0, None),
        method="highs",
    )
    resid = float(np.linalg.norm(system.A @ res.x - system.b))
    return NormalizerResult(True, res.x, "lp", resid)


def mmsbm_normalizers_per_combination(
    theta1: BlockMatrix, theta2: BlockMatrix, tol: float = 1e-9
) -> NormalizerResult:
    """Min-norm, then nonnegative least squares, then LP for strict positivity."""
    system = mmsbm_per_combination_system(theta1, theta2)
    # each unknown stands for mult_i * mult_j ordered pair combinations; the
    # norm is weighted accordingly so symmetric inputs get symmetric solutions
    mult = np.array([1.0, 2.0, 1.0])
    w = np.sqrt(np.outer(mult, mult).ravel())
    scaled = LinearSystem(system.A / w, system.b)
    x = min_norm_solve(scaled, tol=1e-10) / w
    resid = float(np.linalg.norm(system.A @ x - system.b))
    if x.min() >= -tol and resid <= tol:
        return NormalizerResult(True, x, "min_norm", resid)

    x_nn, rn = nnls(system.A, system.b)
    if rn <= tol:
        return NormalizerResult(True, x_nn, "nnls", float(rn))

    # maximize the smallest component subject to Ax = b, x >= t >= 0
    n = system.A.shape[1]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_eq = np.hstack([system.A, np.zeros((system.A.shape[0], 1))])
    a_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = linprog(
        c,
        A_eq=a_eq,
        b_eq=system.b,
        A_ub=a_ub,
        b_ub=np.zeros(n),
        bounds=[(0, None)] * n + [(0, None)],
        method="highs",
    )
    if res.success and res.x[-1] > 0:
        xs = res.x[:n]
        return NormalizerResult(
            True, xs, "lp", float(np.linalg.norm(system.A @ xs - system.b))
        )
    return NormalizerResult(False, None, "infeasible", resid)
