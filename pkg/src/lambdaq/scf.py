"""Restricted Hartree-Fock with DIIS and canonical orthogonalization."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import MOHamiltonian
from .integrals import LINDEP_THRESHOLD, IntegralSet


@dataclass(frozen=True)
class SCFResult:
    """Converged (or last-iterate) restricted Hartree-Fock state.

    mo_coeff has one column per kept orbital; orbitals dropped by the
    linear-dependence filter never appear. energies/errors trace the
    iteration history.
    """

    e_hf: float
    mo_coeff: np.ndarray
    mo_energy: np.ndarray
    n_occ: int
    converged: bool
    n_iter: int
    n_dropped: int
    energies: tuple = field(default_factory=tuple)
    errors: tuple = field(default_factory=tuple)

    @property
    def n_mo(self) -> int:
        return self.mo_coeff.shape[1]


class SCFConvergenceError(RuntimeError):
    """SCF ran out of iterations; .result holds the last iterate."""

    def __init__(self, message: str, result: SCFResult):
        super().__init__(message)
        self.result = result


def _orthogonalizer(s: np.ndarray):
    vals, vecs = np.linalg.eigh(s)
    keep = vals > LINDEP_THRESHOLD
    x = vecs[:, keep] / np.sqrt(vals[keep])
    return x, int(np.sum(~keep))


def run_rhf(ints: IntegralSet, n_electrons: int, max_iter: int = 200,
            energy_tol: float = 1e-9, diis_tol: float = 1e-9,
            diis_depth: int = 8) -> SCFResult:
    """Solve restricted Hartree-Fock for a closed-shell electron count.

    Core-Hamiltonian guess, Pulay DIIS on the orbital-gradient residual
    X^T (FDS - SDF) X, canonical orthogonalization dropping overlap
    eigenvalues below 1e-10. Raises SCFConvergenceError (carrying the
    last iterate) if max_iter is exhausted.
    """
    if n_electrons <= 0 or n_electrons % 2 != 0:
        raise ValueError(f"restricted reference needs a positive even "
                         f"electron count, got {n_electrons}")
    s = ints.overlap
    h = ints.core_hamiltonian
    x, n_dropped = _orthogonalizer(s)
    n_occ = n_electrons // 2
    if x.shape[1] < n_occ:
        raise ValueError(f"only {x.shape[1]} independent orbitals for "
                         f"{n_occ} occupied")
    eri = ints.eri

    def fock(d):
        j = np.einsum("pqrs,rs->pq", eri, d, optimize=True)
        k = np.einsum("prqs,rs->pq", eri, d, optimize=True)
        return h + j - 0.5 * k

    def diag(f):
        fo = x.T @ f @ x
        eps, cp = np.linalg.eigh(fo)
        return eps, x @ cp

    fock_hist: list = []
    err_hist: list = []
    energies: list = []
    errors: list = []
    f = h.copy()
    e_prev = 0.0
    eps, c = diag(f)
    converged = False
    n_iter = 0
    for it in range(1, max_iter + 1):
        n_iter = it
        c_occ = c[:, :n_occ]
        d = 2.0 * c_occ @ c_occ.T
        f_raw = fock(d)
        e = 0.5 * np.sum(d * (h + f_raw)) + ints.e_nuc
        err_mat = x.T @ (f_raw @ d @ s - s @ d @ f_raw) @ x
        err = float(np.abs(err_mat).max())
        energies.append(float(e))
        errors.append(err)
        if it > 1 and abs(e - e_prev) <= energy_tol and err <= diis_tol:
            converged = True
            eps, c = diag(f_raw)
            e_prev = e
            break
        e_prev = e
        fock_hist.append(f_raw)
        err_hist.append(err_mat.ravel())
        if len(fock_hist) > diis_depth:
            fock_hist.pop(0)
            err_hist.pop(0)
        nd = len(fock_hist)
        if nd > 1:
            b = np.empty((nd + 1, nd + 1))
            b[-1, :] = -1.0
            b[:, -1] = -1.0
            b[-1, -1] = 0.0
            for a in range(nd):
                for bb in range(a, nd):
                    b[a, bb] = b[bb, a] = float(err_hist[a] @ err_hist[bb])
            rhs = np.zeros(nd + 1)
            rhs[-1] = -1.0
            try:
                coef = np.linalg.solve(b, rhs)[:nd]
                f = sum(cc * ff for cc, ff in zip(coef, fock_hist))
            except np.linalg.LinAlgError:
                f = f_raw
        else:
            f = f_raw
        eps, c = diag(f)

    result = SCFResult(e_hf=float(e_prev), mo_coeff=c, mo_energy=eps,
                       n_occ=n_occ, converged=converged, n_iter=n_iter,
                       n_dropped=n_dropped, energies=tuple(energies),
                       errors=tuple(errors))
    if not converged:
        de = energies[-1] - energies[-2] if len(energies) > 1 else float("nan")
        err_last = errors[-1] if errors else float("nan")
        raise SCFConvergenceError(
            f"SCF not converged after {n_iter} iterations "
            f"(dE={de:.3e}, err={err_last:.3e})", result)
    return result


def transform_to_mo(ints: IntegralSet, scf: SCFResult) -> MOHamiltonian:
    """Four-index transform of the AO tensors into the SCF orbital basis;
    chemist-notation MOHamiltonian with E_core = E_nuc."""
    c = scf.mo_coeff
    if c.shape[0] != ints.n_ao:
        raise ValueError(f"SCF orbitals over {c.shape[0]} AOs do not match "
                         f"integral set with {ints.n_ao} AOs")
    h = c.T @ ints.core_hamiltonian @ c
    v = np.einsum("pqrs,pi->iqrs", ints.eri, c, optimize=True)
    v = np.einsum("iqrs,qj->ijrs", v, c, optimize=True)
    v = np.einsum("ijrs,rk->ijks", v, c, optimize=True)
    v = np.einsum("ijks,sl->ijkl", v, c, optimize=True)
    return MOHamiltonian(c.shape[1], 2 * scf.n_occ, float(ints.e_nuc), h, v)
