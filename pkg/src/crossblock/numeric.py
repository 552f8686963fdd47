"""Linear-algebra and sampling primitives.

Minimum-norm least squares (SVD pseudoinverse), nonnegative LP feasibility
and power-law degree sampling with mean calibration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "LinearSystem",
    "DegreeSequence",
    "InconsistentSystemError",
    "min_norm_solve",
    "nonneg_feasible",
    "sample_power_law_degrees",
]


class InconsistentSystemError(ValueError):
    """Ax = b has no solution (rank of A differs from rank of [A|b])."""

    def __init__(self, residual: float):
        super().__init__(f"inconsistent linear system, residual {residual:.3e}")
        self.residual = residual


@dataclass(frozen=True)
class LinearSystem:
    """Coefficients A (m x n) and targets b (length m)."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class DegreeSequence:
    degrees: np.ndarray
    target_mean: float

    def __post_init__(self):
        degrees = np.asarray(self.degrees, dtype=np.int64)
        if degrees.sum() % 2 != 0:
            raise ValueError("degree sum must be even")
        object.__setattr__(self, "degrees", degrees)


def min_norm_solve(sys: LinearSystem, tol: float = 1e-10) -> np.ndarray:
    """Unique minimum-Euclidean-norm solution of a consistent system.

    Singular values below ``tol * sigma_max`` are treated as zero.  Raises
    InconsistentSystemError (carrying the residual) when rank([A|b]) exceeds
    rank(A) within tolerance.
    """
    A, b = sys.A, sys.b
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        if np.linalg.norm(b) > 0:
            raise InconsistentSystemError(float(np.linalg.norm(b)))
        return np.zeros(A.shape[1])
    cutoff = tol * s[0]
    sinv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    x = vt.T @ (sinv * (u.T @ b))
    residual = float(np.linalg.norm(A @ x - b))
    bnorm = float(np.linalg.norm(b))
    if residual > max(tol, tol * bnorm) * 10:
        raise InconsistentSystemError(residual)
    return x


def nonneg_feasible(sys: LinearSystem, tol: float = 1e-9) -> bool:
    """True iff some x >= 0 satisfies Ax = b within ``tol`` (LP feasibility phase)."""
    A, b = sys.A, sys.b
    m, n = A.shape
    # minimize sum of violation slacks s+ + s- subject to Ax + s+ - s- = b
    c = np.concatenate([np.zeros(n), np.ones(2 * m)])
    A_eq = np.hstack([A, np.eye(m), -np.eye(m)])
    res = linprog(c, A_eq=A_eq, b_eq=b, bounds=(0, None), method="highs")
    if not res.success:
        return False
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    return float(res.fun) <= tol * scale


def sample_power_law_degrees(
    n: int,
    gamma: float,
    target_mean: float,
    k_min: int = 1,
    k_max: int | None = None,
    rng_seed: int | np.random.Generator = 0,
    mean_tol: float = 0.05,
) -> DegreeSequence:
    """Draw n degrees from a truncated discrete power law P(k) ~ k^-gamma.

    The lower cutoff is tuned by integer search (starting from ``k_min``)
    until the distribution mean is within ``mean_tol`` of ``target_mean``.
    The mean jumps discretely with the integer cutoff, so when no integer
    lands inside the tolerance the lowest atom of the bracketing cutoff is
    given a fractional weight that makes the mean exact (the discrete
    analog of truncating a density at a non-integer point).  The sampled
    sequence is forced to an even sum by incrementing one uniformly chosen
    node.
    """
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    if k_max is None:
        k_max = n - 1
    if k_min < 1 or k_min > k_max:
        raise ValueError(f"need 1 <= k_min <= k_max, got {k_min}, {k_max}")
    rng = np.random.default_rng(rng_seed) if not isinstance(rng_seed, np.random.Generator) else rng_seed

    def weights(lo):
        ks = np.arange(lo, k_max + 1, dtype=float)
        # normalize weights at lo so very steep exponents do not underflow
        return ks.astype(np.int64), np.exp(-gamma * (np.log(ks) - np.log(lo)))

    best = None
    means = {}
    for lo in range(k_min, k_max + 1):
        ks, w = weights(lo)
        mean = float((ks * w).sum() / w.sum())
        means[lo] = mean
        err = abs(mean - target_mean) / target_mean
        if best is None or err < best[0]:
            best = (err, lo, ks, w / w.sum())
        if mean > target_mean * (1 + mean_tol):
            break  # mean only grows with the cutoff
    err, lo, ks, probs = best
    if err > mean_tol:
        # bracketing cutoffs lo < lo+1 with means straddling the target:
        # scale the atom at lo by f in (0, 1) so the mean hits the target
        lo = max((l for l, m in means.items() if m < target_mean), default=None)
        if lo is None or lo + 1 not in means:
            raise ValueError(
                f"no lower cutoff in [{k_min}, {k_max}] brings the mean within "
                f"{mean_tol:.0%} of {target_mean} (best error {err:.1%})"
            )
        ks, w = weights(lo)
        s0 = float(w[1:].sum())
        s1 = float((ks[1:] * w[1:]).sum())
        frac = (target_mean * s0 - s1) / (w[0] * (ks[0] - target_mean))
        w = w.copy()
        w[0] *= frac
        probs = w / w.sum()
    degrees = rng.choice(ks, size=n, p=probs)
    if degrees.sum() % 2 != 0:
        degrees[rng.integers(n)] += 1
    return DegreeSequence(degrees=degrees, target_mean=target_mean)
