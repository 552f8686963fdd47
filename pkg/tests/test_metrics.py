import itertools

import numpy as np
import pytest

from crossblock.core import EdgeCountMatrix, Partition, graph_from_edges
from crossblock.metrics import (
    degree_threshold_cp_classification,
    frobenius_deviation,
    js_distance_degree_distributions,
    normalized_degree_variance,
    partition_overlap,
    variation_of_information,
)


def brute_force_overlap(p: Partition, q: Partition) -> float:
    """Exhaustive maximization over injective label maps (small inputs only)."""
    kp, kq = p.n_blocks, q.n_blocks
    k = max(kp, kq)
    best = 0
    for perm in itertools.permutations(range(k)):
        matched = sum(
            1 for a, b in zip(p.labels, q.labels) if perm[b] == a
        )
        best = max(best, matched)
    return best / len(p)


def test_overlap_identity():
    p = Partition(np.array([0, 1, 0, 2]))
    assert partition_overlap(p, p).omega == 1.0


def test_overlap_label_permutation():
    p = Partition(np.array([0, 0, 1, 1]))
    q = Partition(np.array([1, 1, 0, 0]))
    assert partition_overlap(p, q).omega == 1.0


def test_overlap_orthogonal_two_block():
    p = Partition(np.array([0, 0, 1, 1]))
    q = Partition(np.array([0, 1, 0, 1]))
    assert partition_overlap(p, q).omega == 0.5


def test_overlap_unequal_block_counts():
    p = Partition(np.array([0, 1, 2, 3]))
    q = Partition(np.array([0, 0, 1, 1]))
    assert partition_overlap(p, q).omega == 0.5


def test_overlap_matches_brute_force():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = int(rng.integers(2, 11))
        p = Partition(rng.integers(0, 3, size=n))
        q = Partition(rng.integers(0, 3, size=n))
        assert partition_overlap(p, q).omega == pytest.approx(brute_force_overlap(p, q))


def test_overlap_symmetry_and_relabel_invariance():
    rng = np.random.default_rng(23)
    for _ in range(50):
        n = int(rng.integers(4, 12))
        p = Partition(rng.integers(0, 3, size=n))
        q = Partition(rng.integers(0, 3, size=n))
        assert partition_overlap(p, q).omega == partition_overlap(q, p).omega
        relabeled = Partition((q.labels + 1) % max(q.n_blocks, 1))
        assert partition_overlap(p, relabeled).omega == partition_overlap(p, q).omega


def test_vi_identical_zero():
    p = Partition(np.array([0, 1, 1, 2]))
    assert variation_of_information(p, p) == 0.0


def test_vi_orthogonal_two_block():
    p = Partition(np.array([0, 0, 1, 1]))
    q = Partition(np.array([0, 1, 0, 1]))
    assert variation_of_information(p, q) == pytest.approx(2 * np.log(2))


def test_vi_against_single_block():
    p = Partition(np.array([0, 0, 1, 1]))
    q = Partition(np.zeros(4))
    assert variation_of_information(p, q) == pytest.approx(np.log(2))


def test_vi_triangle_inequality():
    rng = np.random.default_rng(31)
    for _ in range(100):
        n = int(rng.integers(3, 15))
        p, q, r = (Partition(rng.integers(0, 4, size=n)) for _ in range(3))
        assert variation_of_information(p, r) <= (
            variation_of_information(p, q) + variation_of_information(q, r) + 1e-12
        )


def test_degree_variance_regular():
    g = graph_from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert normalized_degree_variance(g) == 0.0


def test_degree_variance_hand_cases():
    g = graph_from_edges(2, [(1, 1)], allow_self_loops=True)  # degrees [0, 2]
    assert normalized_degree_variance(g) == 1.0
    star = graph_from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    assert normalized_degree_variance(star) == pytest.approx(0.5625)


def test_js_identical_blocks():
    g = graph_from_edges(4, [(0, 1), (2, 3)])
    cp = Partition(np.array([0, 0, 1, 1]))
    assert js_distance_degree_distributions(g, cp) == 0.0


def test_js_disjoint_supports():
    g = graph_from_edges(4, [(0, 1), (2, 3), (2, 3)], simple_mode=False)
    cp = Partition(np.array([0, 0, 1, 1]))
    assert js_distance_degree_distributions(g, cp) == pytest.approx(1.0)


def test_js_hand_oracle():
    # block 0 degrees {1,1}; block 1 degrees {1,3}
    g = graph_from_edges(4, [(0, 1), (2, 3), (3, 3)], allow_self_loops=True)
    cp = Partition(np.array([0, 0, 1, 1]))
    pa = np.array([0.0, 1.0, 0.0, 0.0])
    pb = np.array([0.0, 0.5, 0.0, 0.5])
    mix = 0.5 * (pa + pb)

    def kl(p, m):
        nz = p > 0
        return (p[nz] * np.log2(p[nz] / m[nz])).sum()

    expected = np.sqrt(0.5 * kl(pa, mix) + 0.5 * kl(pb, mix))
    assert js_distance_degree_distributions(g, cp) == pytest.approx(expected)


def test_js_symmetric_and_bounded():
    rng = np.random.default_rng(37)
    for _ in range(20):
        n = 10
        pairs = {(int(rng.integers(n)), int(rng.integers(n))) for _ in range(12)}
        pairs = [(i, j) for i, j in pairs if i != j]
        if not pairs:
            continue
        g = graph_from_edges(n, pairs, simple_mode=False)
        cp = Partition(np.r_[np.zeros(5, int), np.ones(5, int)])
        flipped = Partition(1 - cp.labels)
        d = js_distance_degree_distributions(g, cp)
        assert 0.0 <= d <= 1.0
        assert d == pytest.approx(js_distance_degree_distributions(g, flipped))


def test_threshold_classifier_separable():
    star = graph_from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    planted = Partition(np.array([0, 1, 1, 1, 1]))
    assert degree_threshold_cp_classification(star, planted, 2.0) == 1.0


def test_threshold_above_max_degree():
    star = graph_from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    planted = Partition(np.array([0, 0, 1, 1, 1]))
    # everything lands in the periphery, so only periphery labels match
    assert degree_threshold_cp_classification(star, planted, 100.0) == pytest.approx(0.6)


def test_threshold_random_labels_near_half():
    rng = np.random.default_rng(41)
    n = 2000
    pairs = set()
    while len(pairs) < 4000:
        i, j = sorted(rng.integers(0, n, size=2))
        if i != j:
            pairs.add((int(i), int(j)))
    g = graph_from_edges(n, sorted(pairs))
    planted = Partition(rng.integers(0, 2, size=n))
    frac = degree_threshold_cp_classification(g, planted, 4.0)
    assert abs(frac - 0.5) < 0.05


def test_frobenius_cases():
    a = EdgeCountMatrix(np.array([[3.0, 4.0], [4.0, 0.0]]))
    zero = EdgeCountMatrix(np.zeros((2, 2)))
    assert frobenius_deviation(a, a) == 0.0
    assert frobenius_deviation(a, zero) == pytest.approx(np.sqrt(41))
    one = EdgeCountMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert frobenius_deviation(one, zero) == 1.0


def test_length_and_dim_mismatches():
    with pytest.raises(ValueError):
        partition_overlap(Partition(np.zeros(3)), Partition(np.zeros(4)))
    with pytest.raises(ValueError):
        variation_of_information(Partition(np.zeros(3)), Partition(np.zeros(4)))
    with pytest.raises(ValueError):
        frobenius_deviation(
            EdgeCountMatrix(np.zeros((2, 2))), EdgeCountMatrix(np.zeros((3, 3)))
        )
