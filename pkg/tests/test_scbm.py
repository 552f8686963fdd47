import numpy as np
import pytest

from crossblock.core import BlockMatrix
from crossblock.numeric import nonneg_feasible
from crossblock.scbm import (
    CrossSpec,
    InfeasibleConstructionError,
    beta_from_degree,
    consistency_check,
    cross_block_matrix_equal,
    cross_block_matrix_general,
    cross_block_matrix_multi,
    factor_block_sums,
    farkas_infeasible,
    make_theta_bicommunity,
    make_theta_coreperiphery,
    mmsbm_normalizers_per_combination,
    mmsbm_normalizers_per_pair,
    mmsbm_per_pair_system,
    rho_from_degree,
)

# reference configuration used throughout: N=400, two equal factors of
# n=200, four cross-blocks of 100, E=2000 (mean degree 10)
N = 400
BETA = beta_from_degree(N, 10.0)
RHO = rho_from_degree(N, 10.0)


def test_reference_scales():
    assert BETA == pytest.approx(0.05)
    assert RHO == pytest.approx(0.025)


def test_theta_bicommunity_values():
    t = make_theta_bicommunity(0.1, BETA)
    assert np.allclose(t.entries, [[0.045, 0.005], [0.005, 0.045]])


def test_theta_bicommunity_random_graph_limit():
    t = make_theta_bicommunity(0.5, BETA)
    assert np.allclose(t.entries, BETA / 2)


def test_theta_bicommunity_entry_sum():
    for mu in (0.05, 0.2, 0.5):
        assert make_theta_bicommunity(mu, BETA).entry_sum() == pytest.approx(2 * BETA)


def test_theta_bicommunity_rejects_mu_zero():
    with pytest.raises(ValueError):
        make_theta_bicommunity(0.0, BETA)


def test_theta_coreperiphery_values_and_ordering():
    t = make_theta_coreperiphery(0.1, BETA)
    assert np.allclose(t.entries, [[0.045, 0.025], [0.025, 0.005]])
    t49 = make_theta_coreperiphery(0.49, BETA).entries
    assert t49[0, 0] > t49[0, 1] > t49[1, 1]


def test_theta_coreperiphery_random_graph_limit():
    assert np.allclose(make_theta_coreperiphery(0.5, BETA).entries, BETA / 2)


def s1_spec():
    t1 = make_theta_bicommunity(0.1, BETA)
    t2 = make_theta_coreperiphery(0.1, BETA)
    return cross_block_matrix_equal(t1, t2, RHO, N)


def test_equal_sizes_hand_entry():
    spec = s1_spec()
    assert spec.theta_scbm.entries[0, 0] == pytest.approx(40 * 0.045 * 0.045)


def test_equal_sizes_factor_block_sums():
    spec = s1_spec()
    b1 = factor_block_sums(spec, 1)
    b2 = factor_block_sums(spec, 2)
    assert np.allclose(b1, [[1800.0, 200.0], [200.0, 1800.0]], atol=1e-9)
    assert np.allclose(b2, [[1800.0, 1000.0], [1000.0, 200.0]], atol=1e-9)
    assert consistency_check(spec).max_rel <= 1e-12


def test_equal_sizes_uniform_factors_give_random_graph():
    t = BlockMatrix(np.full((2, 2), BETA / 2))
    spec = cross_block_matrix_equal(t, t, RHO, N)
    # uniform pair probability rho reproduces mean degree c exactly
    assert np.allclose(spec.theta_scbm.entries, RHO)


def test_equal_sizes_entry_sum_mismatch_rejected():
    t1 = make_theta_bicommunity(0.1, BETA)
    t2 = make_theta_bicommunity(0.1, BETA * 1.01)
    with pytest.raises(InfeasibleConstructionError):
        cross_block_matrix_equal(t1, t2, RHO, N)


def test_multi_reduces_to_two_factor():
    t1 = make_theta_bicommunity(0.2, BETA)
    t2 = make_theta_coreperiphery(0.3, BETA)
    a = cross_block_matrix_equal(t1, t2, RHO, N)
    b = cross_block_matrix_multi((t1, t2), RHO, N)
    assert np.allclose(a.theta_scbm.entries, b.theta_scbm.entries)


def test_multi_three_uniform_factors():
    t = BlockMatrix(np.full((2, 2), BETA / 2))
    spec = cross_block_matrix_multi((t, t, t), RHO, N)
    assert spec.n_cross_blocks == 8
    assert np.allclose(spec.theta_scbm.entries, RHO)


def test_multi_three_structured_factors():
    t1 = make_theta_bicommunity(0.2, BETA)
    t2 = make_theta_bicommunity(0.2, BETA)
    t3 = make_theta_coreperiphery(0.2, BETA)
    spec = cross_block_matrix_multi((t1, t2, t3), RHO, N)
    assert consistency_check(spec).max_rel <= 1e-12


def test_grid_consistency_residuals():
    # every (mu, lambda) cell at three densities reproduces both factors
    for c in (5.0, 10.0, 20.0):
        beta = beta_from_degree(N, c)
        rho = rho_from_degree(N, c)
        for mu in np.arange(0.01, 0.51, 0.01):
            for lam in np.arange(0.01, 0.51, 0.01):
                spec = cross_block_matrix_equal(
                    make_theta_bicommunity(mu, beta),
                    make_theta_coreperiphery(lam, beta),
                    rho,
                    N,
                )
                assert consistency_check(spec).max_rel <= 1e-12
                assert spec.theta_scbm.entries.min() >= 0.0
                assert spec.theta_scbm.entries.max() <= 1.0


def test_general_matches_equal_on_equal_sizes():
    t1 = make_theta_bicommunity(0.1, BETA)
    t2 = make_theta_coreperiphery(0.1, BETA)
    spec_eq = cross_block_matrix_equal(t1, t2, RHO, N)
    spec_gen = cross_block_matrix_general(t1, t2, [100, 100, 100, 100])
    for f in (1, 2):
        assert np.allclose(
            factor_block_sums(spec_eq, f), factor_block_sums(spec_gen, f), atol=1e-9
        )


def test_general_unequal_sizes():
    t1 = make_theta_bicommunity(0.1, BETA)
    t2 = make_theta_coreperiphery(0.1, BETA)
    spec = cross_block_matrix_general(t1, t2, [120, 80, 80, 120])
    assert np.asarray(spec.normalizers).min() > 0
    assert consistency_check(spec).max_rel <= 1e-9
    sizes1 = spec.factor_sizes(1)
    target1 = np.outer(sizes1, sizes1) * t1.entries
    assert np.allclose(factor_block_sums(spec, 1), target1, rtol=1e-9)


def test_general_total_mismatch_rejected():
    t1 = make_theta_bicommunity(0.1, BETA)
    t2 = make_theta_coreperiphery(0.1, BETA)
    # unequal factor-1 block sizes change the factor totals away from each other
    with pytest.raises(InfeasibleConstructionError):
        cross_block_matrix_general(t1, t2, [150, 150, 50, 50])


def test_consistency_check_perturbation_locality():
    spec = s1_spec()
    theta = spec.theta_scbm.entries.copy()
    theta[0, 0] += 0.01
    bumped = CrossSpec(
        factor_block_counts=spec.factor_block_counts,
        cross_index=spec.cross_index,
        cross_sizes=spec.cross_sizes,
        theta_scbm=BlockMatrix(theta),
        rho=spec.rho,
        normalizers=spec.normalizers,
        factor_thetas=spec.factor_thetas,
    )
    report = consistency_check(bumped)
    # cross-block 0 is (block 0 of factor 1, block 0 of factor 2): only the
    # (0,0) factor sums move
    for resid in report.per_factor_abs:
        assert resid[0, 0] > 1.0
        assert resid[0, 1] < 1e-9
        assert resid[1, 1] < 1e-9


def test_spec_json_round_trip():
    spec = s1_spec()
    back = CrossSpec.from_json(spec.to_json())
    assert np.allclose(back.theta_scbm.entries, spec.theta_scbm.entries)
    assert back.cross_index == spec.cross_index
    assert back.to_json() == spec.to_json()


def test_farkas_hand_cases():
    t1 = BlockMatrix([[0.045, 0.005], [0.005, 0.045]])
    t2 = BlockMatrix([[0.0475, 0.0025], [0.0025, 0.0475]])
    assert farkas_infeasible(t1, t2, RHO)  # 0.04 + 0.045 > 0.05
    uni = BlockMatrix(np.full((2, 2), BETA / 2))
    assert not farkas_infeasible(uni, uni, RHO)
    t1w = make_theta_bicommunity(0.45, BETA)  # diff 0.005
    t2w = BlockMatrix([[0.03, 0.02], [0.02, 0.03]])  # diff 0.01
    assert not farkas_infeasible(t2w, t1w, RHO)


def test_farkas_rejects_asymmetric_input():
    cp = make_theta_coreperiphery(0.1, BETA)
    bi = make_theta_bicommunity(0.1, BETA)
    with pytest.raises(ValueError):
        farkas_infeasible(bi, cp, RHO)


def test_farkas_agrees_with_lp_on_grid():
    # symmetric-case sweep over two bicommunity factors
    for mu1 in np.linspace(0.01, 0.5, 15):
        for mu2 in np.linspace(0.01, 0.5, 15):
            t1 = make_theta_bicommunity(mu1, BETA)
            t2 = make_theta_bicommunity(mu2, BETA)
            closed = farkas_infeasible(t1, t2, RHO)
            lp = nonneg_feasible(mmsbm_per_pair_system(t1, t2), tol=1e-9)
            assert closed == (not lp)


def test_per_pair_uniform_factors():
    uni = BlockMatrix(np.full((2, 2), BETA / 2))
    res = mmsbm_normalizers_per_pair(uni, uni)
    assert res.feasible
    assert np.allclose(res.x, 2.0)


def test_per_pair_infeasible_case():
    t1 = BlockMatrix([[0.045, 0.005], [0.005, 0.045]])
    t2 = BlockMatrix([[0.0475, 0.0025], [0.0025, 0.0475]])
    res = mmsbm_normalizers_per_pair(t1, t2)
    assert not res.feasible
    assert res.x is None


def test_per_pair_weak_structures_feasible():
    t1 = BlockMatrix([[0.0275, 0.0225], [0.0225, 0.0275]])  # diff 0.005
    t2 = BlockMatrix([[0.03, 0.02], [0.02, 0.03]])  # diff 0.01
    res = mmsbm_normalizers_per_pair(t1, t2)
    assert res.feasible
    assert res.x.min() >= 0
    assert res.residual <= 1e-9


def test_per_combination_uniform_factors_equal_components():
    uni = BlockMatrix(np.full((2, 2), BETA / 2))
    res = mmsbm_normalizers_per_combination(uni, uni)
    assert res.feasible
    assert np.allclose(res.x, res.x[0])
    assert res.residual <= 1e-9


def test_per_combination_reference_factors():
    t1 = make_theta_bicommunity(0.1, BETA)
    t2 = make_theta_coreperiphery(0.1, BETA)
    res = mmsbm_normalizers_per_combination(t1, t2)
    assert res.feasible
    assert np.isfinite(res.x).all()
    assert res.residual <= 1e-9


def test_per_combination_inconsistent_totals():
    from crossblock.numeric import InconsistentSystemError

    t1 = make_theta_bicommunity(0.1, BETA)
    t2 = make_theta_bicommunity(0.1, BETA * 2)
    res_or_exc = None
    try:
        res_or_exc = mmsbm_normalizers_per_combination(t1, t2)
    except InconsistentSystemError:
        return
    assert res_or_exc is None or res_or_exc.residual > 1e-9 or not res_or_exc.feasible
