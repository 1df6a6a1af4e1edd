import numpy as np
import pytest

from lambdaq.chem import builtin_geometry, load_basis
from lambdaq.correlation import run_ci, run_mp2
from lambdaq.hamiltonian import MOHamiltonian
from lambdaq.integrals import compute_integrals
from lambdaq.scf import run_rhf, transform_to_mo

_CACHE = {}


def build_system(geometry: str, basis: str):
    """Full pipeline for a shipped geometry/basis pair, cached for the
    whole session. Returns (mol, basis_set, ints, scf, ham)."""
    key = (geometry, basis)
    if key not in _CACHE:
        mol = builtin_geometry(geometry)
        bs = load_basis(basis)
        ints = compute_integrals(mol, bs)
        scf = run_rhf(ints, mol.n_electrons)
        ham = transform_to_mo(ints, scf)
        _CACHE[key] = (mol, bs, ints, scf, ham)
    return _CACHE[key]


@pytest.fixture(scope="session")
def system():
    return build_system


def one_orbital_ham(a: float, v: float, e_core: float = 0.0) -> MOHamiltonian:
    return MOHamiltonian(1, 2, e_core,
                         np.array([[a]]), np.full((1, 1, 1, 1), v))


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile every hot kernel on a trivial system so timed tests never
    # pay the one-off JIT cost
    _, _, _, scf, ham = build_system("h2", "sto-3g")
    run_ci(ham, "fci")
    run_mp2(ham, scf.mo_energy)
