import numpy as np
import pytest

from lambdaq.hamiltonian import MOHamiltonian
from lambdaq.norms import (DFFactorization, NormError, df_factorize,
                           jw_oracle_norm, resource_estimate, sparse_norm)
from lambdaq.correlation import run_ci

from conftest import one_orbital_ham


def test_zero_hamiltonian():
    ham = MOHamiltonian(2, 2, 0.0, np.zeros((2, 2)), np.zeros((2, 2, 2, 2)))
    rep = sparse_norm(ham)
    assert rep.lambda_c == 0.0
    assert rep.lambda_t == 0.0
    assert rep.lambda_v == 0.0
    assert rep.lambda_q == 0.0
    assert rep.lambda_eff == 0.0


def test_single_orbital_closed_forms():
    a, v, e_core = -1.1, 0.7, 0.3
    rep = sparse_norm(one_orbital_ham(a, v, e_core))
    assert rep.lambda_t == pytest.approx(abs(a + v / 2), abs=1e-15)
    assert rep.lambda_v == pytest.approx(v / 4, abs=1e-15)
    assert rep.lambda_c == pytest.approx(abs(e_core + a + v / 4), abs=1e-15)


def test_component_sums():
    rep = sparse_norm(one_orbital_ham(-0.8, 0.5, 0.2))
    assert rep.lambda_q == pytest.approx(
        rep.lambda_c + rep.lambda_t + rep.lambda_v, abs=1e-15)
    assert rep.lambda_eff == pytest.approx(rep.lambda_t + rep.lambda_v,
                                           abs=1e-15)


def test_norm_scales_linearly(system):
    ham = system("h2", "sto-3g")[4]
    rep = sparse_norm(ham)
    scaled = MOHamiltonian(ham.n, ham.n_elec, 3.0 * ham.e_core,
                           3.0 * ham.h, 3.0 * ham.v)
    rep3 = sparse_norm(scaled)
    assert rep3.lambda_c == pytest.approx(3 * rep.lambda_c, rel=1e-12)
    assert rep3.lambda_t == pytest.approx(3 * rep.lambda_t, rel=1e-12)
    assert rep3.lambda_v == pytest.approx(3 * rep.lambda_v, rel=1e-12)


def test_jw_oracle_h2_term_count(system):
    ham = system("h2", "sto-3g")[4]
    lam_with, lam_without, count = jw_oracle_norm(ham)
    assert count == 14
    assert lam_with > lam_without > 0


def test_sparse_matches_jw_oracle(system):
    for geom in ("h2", "h4", "lih"):
        ham = system(geom, "sto-3g")[4]
        rep = sparse_norm(ham)
        lam_with, lam_without, _ = jw_oracle_norm(ham)
        assert abs(rep.lambda_q - lam_with) < 1e-10
        assert abs(rep.lambda_eff - lam_without) < 1e-10


def test_jw_oracle_scaling(system):
    ham = system("h2", "sto-3g")[4]
    w1, wo1, c1 = jw_oracle_norm(ham)
    doubled = MOHamiltonian(ham.n, ham.n_elec, 2 * ham.e_core,
                            2 * ham.h, 2 * ham.v)
    w2, wo2, c2 = jw_oracle_norm(doubled)
    assert w2 == pytest.approx(2 * w1, rel=1e-12)
    assert wo2 == pytest.approx(2 * wo1, rel=1e-12)
    assert c2 == c1


def test_jw_oracle_size_cap():
    n = 9
    ham = MOHamiltonian(n, 2, 0.0, np.zeros((n, n)), np.zeros((n,) * 4))
    with pytest.raises(NormError):
        jw_oracle_norm(ham)


def test_df_hand_case():
    # h = 0, V = 4 on one orbital: T = -2, f = 2, single leaf w = (2),
    # so lambda_DF = |2| + (1/4) * 2^2 = 3 with zero truncation error
    ham = one_orbital_ham(a=0.0, v=4.0)
    df = df_factorize(ham)
    assert df.n_df == 1
    assert df.f0[0] == pytest.approx(2.0, abs=1e-14)
    assert df.w_t[0, 0] == pytest.approx(2.0, abs=1e-14)
    assert df.lambda_df == pytest.approx(3.0, abs=1e-13)
    assert df.reconstruction_error == pytest.approx(0.0, abs=1e-14)
    assert df.leaf(0)[0, 0] == pytest.approx(2.0, abs=1e-14)
    assert df.v_approx()[0, 0, 0, 0] == pytest.approx(4.0, abs=1e-13)


def test_df_eigenbases_orthogonal(system):
    ham = system("lih", "sto-3g")[4]
    df = df_factorize(ham)
    eye = np.eye(ham.n)
    for t in range(df.n_df):
        assert np.max(np.abs(df.u_t[t] @ df.u_t[t].T - eye)) < 1e-12
    assert np.max(np.abs(df.u0 @ df.u0.T - eye)) < 1e-12


def test_df_full_rank_exact(system):
    for geom in ("h2", "h4", "lih"):
        ham = system(geom, "sto-3g")[4]
        df = df_factorize(ham, ham.n * ham.n)
        assert df.reconstruction_error < 1e-12
        assert np.max(np.abs(df.v_approx() - ham.v)) < 1e-8


def test_df_reconstruction_monotone(system):
    ham = system("lih", "sto-3g")[4]
    errs = [df_factorize(ham, k).reconstruction_error
            for k in range(1, ham.n * ham.n + 1)]
    for prev, cur in zip(errs, errs[1:]):
        assert cur <= prev + 1e-12
    assert errs[-1] < 1e-12


def test_df_rank_validation(system):
    ham = system("h2", "sto-3g")[4]
    with pytest.raises(NormError):
        df_factorize(ham, 0)
    with pytest.raises(NormError):
        df_factorize(ham, ham.n * ham.n + 1)
    assert df_factorize(ham).n_df == min(5 * ham.n, ham.n * ham.n)


def test_df_rejects_indefinite_tensor():
    ham = one_orbital_ham(a=0.0, v=-1.0)
    with pytest.raises(NormError):
        df_factorize(ham)


def test_df_energy_fidelity(system):
    # FCI on the DF-reconstructed tensor at default rank stays within
    # 2 mHa of the exact answer
    for geom in ("lih", "h2o"):
        ham = system(geom, "sto-3g")[4]
        df = df_factorize(ham)
        approx = MOHamiltonian(ham.n, ham.n_elec, ham.e_core, ham.h,
                               df.v_approx())
        e_exact = run_ci(ham, "fci").e_total
        e_approx = run_ci(approx, "fci").e_total
        assert abs(e_approx - e_exact) < 2e-3


def test_df_norm_decreases_with_rank(system):
    # dropping eigenlines can only shrink the two-body norm term
    ham = system("lih", "sto-3g")[4]
    full = df_factorize(ham, ham.n * ham.n)
    half = df_factorize(ham, ham.n * ham.n // 2)
    lam2_full = full.lambda_df - np.abs(full.f0).sum()
    lam2_half = half.lambda_df - np.abs(half.f0).sum()
    assert lam2_half <= lam2_full + 1e-12


def test_resource_estimate_arithmetic():
    est = resource_estimate(1.0, np.pi / 2, 4, 16)
    assert est.walk_calls == 1
    assert est.c_w == 64
    est2 = resource_estimate(2.0, np.pi / 2, 4, 16)
    assert est2.walk_calls == 2
    big = resource_estimate(543.5, 1e-3, 38, 190)
    assert big.walk_calls == int(np.ceil(np.pi * 543.5 / 2e-3))
    with pytest.raises(NormError):
        resource_estimate(0.0, 1e-3, 4, 16)
    with pytest.raises(NormError):
        resource_estimate(1.0, 0.0, 4, 16)
