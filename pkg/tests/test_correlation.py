import numpy as np
import pytest

import lambdaq.correlation as corr
from lambdaq.correlation import (CISpaceError, CorrelationError,
                                 DegeneracyError, MP2Result,
                                 natural_orbitals, run_ci, run_mp2,
                                 semicanonicalize)
from lambdaq.hamiltonian import MOHamiltonian

from conftest import one_orbital_ham
from oracles import block_rotation, fci_energy, random_orthogonal, spinorb_mp2


def two_level_ham(eo, ev, g):
    v = np.zeros((2, 2, 2, 2))
    for p, q, r, s in ((0, 1, 0, 1), (1, 0, 0, 1), (0, 1, 1, 0), (1, 0, 1, 0)):
        v[p, q, r, s] = g
    h = np.diag([eo, ev])
    return MOHamiltonian(2, 2, 0.0, h, v)


def test_mp2_no_virtuals():
    res = run_mp2(one_orbital_ham(-1.0, 0.5), np.array([-0.75]))
    assert res.e_corr == 0.0
    assert res.n_virt == 0


def test_mp2_two_level_closed_form():
    eo, ev, g = -0.6, 0.4, 0.3
    res = run_mp2(two_level_ham(eo, ev, g), np.array([eo, ev]))
    assert res.e_corr == pytest.approx(g * g / (2 * (eo - ev)), rel=1e-14)
    assert res.t2[0, 0, 0, 0] == pytest.approx(g / (2 * (eo - ev)), rel=1e-14)
    assert res.e_corr < 0


def test_mp2_matches_spinorb_oracle(system):
    for geom in ("h2o", "lih"):
        mol, bs, ints, scf, ham = system(geom, "sto-3g")
        res = run_mp2(ham, scf.mo_energy)
        e_ref, d_ref = spinorb_mp2(ham, scf.mo_energy)
        assert res.e_corr == pytest.approx(e_ref, abs=1e-12)
        assert np.max(np.abs(res.d_vv - d_ref)) < 1e-12


def test_mp2_reference_values(system):
    assert run_mp2(system("h2o", "sto-3g")[4],
                   system("h2o", "sto-3g")[3].mo_energy).e_corr \
        == pytest.approx(-0.0354926390, abs=1e-8)
    assert run_mp2(system("lih", "sto-3g")[4],
                   system("lih", "sto-3g")[3].mo_energy).e_corr \
        == pytest.approx(-0.0128638524, abs=1e-8)


def test_mp2_density_well_behaved(system):
    mol, bs, ints, scf, ham = system("h2o", "sto-3g")
    res = run_mp2(ham, scf.mo_energy)
    w = np.linalg.eigvalsh(res.d_vv)
    assert w.min() >= -1e-12
    assert w.max() <= 2.0
    assert np.trace(res.d_vv) > 0


def test_mp2_input_validation(system):
    mol, bs, ints, scf, ham = system("h2o", "sto-3g")
    with pytest.raises(CorrelationError):
        run_mp2(ham, scf.mo_energy[:-1])
    eps = scf.mo_energy.copy()
    eps[ham.n_occ] = eps[ham.n_occ - 1]    # close the gap
    with pytest.raises(DegeneracyError):
        run_mp2(ham, eps)


def test_mp2_vanishing_denominator():
    # gap check passes but one virtual sits below an occupied level
    n = 4
    ham = MOHamiltonian(n, 4, 0.0, np.zeros((n, n)),
                        np.full((n, n, n, n), 1e-3))
    eps = np.array([-1.0, 0.5, 0.6, 0.4])
    with pytest.raises(DegeneracyError):
        run_mp2(ham, eps)


def test_natural_orbitals_hand_case():
    d = np.array([[0.3, 0.1], [0.1, 0.2]])
    mp2 = MP2Result(0.0, np.zeros((1, 1, 2, 2)), d, 1, 2)
    nos = natural_orbitals(mp2, source="toy")
    disc = np.sqrt(0.05 ** 2 + 0.1 ** 2)
    assert nos.noon[0] == pytest.approx(0.25 + disc, abs=1e-14)
    assert nos.noon[1] == pytest.approx(0.25 - disc, abs=1e-14)
    assert np.all(np.diff(nos.noon) <= 0)
    r = nos.rotation
    assert np.max(np.abs(r @ r.T - np.eye(2))) < 1e-13
    assert np.max(np.abs(r @ np.diag(nos.noon) @ r.T - d)) < 1e-13
    assert nos.source == "toy"
    # sign convention: dominant component of each column positive
    for k in range(2):
        assert r[np.argmax(np.abs(r[:, k])), k] > 0


def test_natural_orbitals_trace(system):
    mol, bs, ints, scf, ham = system("lih", "sto-3g")
    res = run_mp2(ham, scf.mo_energy)
    nos = natural_orbitals(res)
    assert np.sum(nos.noon) == pytest.approx(np.trace(res.d_vv), abs=1e-12)
    assert nos.n_virt == res.n_virt


def test_ci_matches_dense_oracle(system):
    for geom in ("h2", "h4", "lih"):
        ham = system(geom, "sto-3g")[4]
        assert run_ci(ham, "fci").e_total == pytest.approx(
            fci_energy(ham), abs=1e-9)


def test_ci_reference_energies(system):
    assert run_ci(system("h2", "sto-3g")[4], "fci").e_total \
        == pytest.approx(-1.137270175410, abs=1e-8)
    assert run_ci(system("h4", "sto-3g")[4], "cisd").e_total \
        == pytest.approx(-2.165031861127, abs=1e-8)
    assert run_ci(system("lih", "sto-3g")[4], "cisd").e_total \
        == pytest.approx(-7.882390110116, abs=1e-8)


def test_cisd_equals_fci_for_two_electrons(system):
    ham = system("h2", "sto-3g")[4]
    ci = run_ci(ham, "cisd")
    fci = run_ci(ham, "fci")
    assert ci.n_det == fci.n_det == 4
    assert ci.e_total == pytest.approx(fci.e_total, abs=1e-10)


def test_variational_ordering(system):
    mol, bs, ints, scf, ham = system("h2o", "sto-3g")
    e_cisd = run_ci(ham, "cisd").e_total
    e_fci = run_ci(ham, "fci").e_total
    assert scf.e_hf > e_cisd > e_fci - 1e-12
    assert e_cisd == pytest.approx(e_fci, abs=5e-3)    # small molecule


def test_davidson_agrees_with_dense(system, monkeypatch):
    ham = system("lih", "sto-3g")[4]
    e_dense = run_ci(ham, "fci").e_total
    monkeypatch.setattr(corr, "DENSE_DET_LIMIT", 0)
    res = run_ci(ham, "fci")
    assert res.n_iter > 1
    assert res.e_total == pytest.approx(e_dense, abs=1e-8)


def test_davidson_nonconvergence(system, monkeypatch):
    ham = system("lih", "sto-3g")[4]
    monkeypatch.setattr(corr, "DENSE_DET_LIMIT", 0)
    with pytest.raises(CorrelationError, match="Davidson not converged"):
        run_ci(ham, "fci", max_iter=1)


def test_space_caps(system, monkeypatch):
    ham = system("lih", "sto-3g")[4]
    monkeypatch.setattr(corr, "FCI_DET_CAP", 10)
    with pytest.raises(CISpaceError):
        run_ci(ham, "fci")
    monkeypatch.setattr(corr, "CISD_DET_CAP", 10)
    with pytest.raises(CISpaceError):
        run_ci(ham, "cisd")
    monkeypatch.setattr(corr, "MAX_ORBITALS", 3)
    with pytest.raises(CISpaceError):
        run_ci(ham, "fci")


def test_unknown_ci_level(system):
    with pytest.raises(CorrelationError):
        run_ci(system("h2", "sto-3g")[4], "ccsd")


def test_semicanonicalize_identity_on_canonical(system):
    mol, bs, ints, scf, ham = system("h2o", "sto-3g")
    ham2, eps = semicanonicalize(ham)
    assert np.max(np.abs(eps - scf.mo_energy)) < 1e-8
    assert np.max(np.abs(np.abs(ham2.h) - np.abs(ham.h))) < 1e-8


def test_semicanonicalize_rejects_bad_rotation(system):
    ham = system("h2o", "sto-3g")[4]
    n, no = ham.n, ham.n_occ
    mixing = np.eye(n)
    mixing[0, no] = 0.5
    with pytest.raises(CorrelationError):
        semicanonicalize(ham, mixing)
    with pytest.raises(CorrelationError):
        semicanonicalize(ham, np.eye(n - 1))


def test_mp2_block_rotation_invariance(system):
    # MP2 energy only depends on the occupied/virtual split
    for geom in ("h2o", "lih"):
        mol, bs, ints, scf, ham = system(geom, "sto-3g")
        e_ref = run_mp2(ham, scf.mo_energy).e_corr
        u = block_rotation(ham.n_occ, ham.n - ham.n_occ, seed=13)
        ham2, eps2 = semicanonicalize(ham, u)
        assert run_mp2(ham2, eps2).e_corr == pytest.approx(e_ref, abs=1e-8)


def test_fci_rotation_invariance(system):
    ham = system("lih", "sto-3g")[4]
    e_ref = run_ci(ham, "fci").e_total
    u = random_orthogonal(ham.n, seed=17)
    e_rot = run_ci(ham.rotated(u), "fci").e_total
    assert e_rot == pytest.approx(e_ref, abs=1e-8)
