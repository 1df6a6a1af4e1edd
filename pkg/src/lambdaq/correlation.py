"""MP2, natural orbitals, and determinant CISD/FCI solvers.

These serve both as correlation proxies in the FNO and basis-optimization
pipelines and as variational oracles in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from . import _cikern
from .hamiltonian import MOHamiltonian

MAX_ORBITALS = 63
FCI_DET_CAP = 2_000_000
CISD_DET_CAP = 500_000
DENSE_DET_LIMIT = 1200
GAP_TOL = 1e-6


class CorrelationError(RuntimeError):
    pass


class DegeneracyError(CorrelationError):
    """Vanishing MP2 denominator or HOMO-LUMO gap."""


class CISpaceError(CorrelationError):
    """Determinant space exceeds the solver's size limits."""


# --------------------------------------------------------------------------
# MP2


@dataclass(frozen=True)
class MP2Result:
    e_corr: float
    t2: np.ndarray
    d_vv: np.ndarray
    n_occ: int
    n_virt: int


def run_mp2(ham: MOHamiltonian, eps: np.ndarray) -> MP2Result:
    """Closed-shell MP2 from canonical orbital energies.

    t2[i,j,a,b] = (ia|jb)/(e_i + e_j - e_a - e_b); the unrelaxed
    virtual-virtual density is D_ab = 2 sum_ijc t^{ac}_ij (2t^{bc}_ij -
    t^{bc}_ji).
    """
    no = ham.n_occ
    nv = ham.n - no
    eps = np.asarray(eps, dtype=np.float64)
    if eps.shape != (ham.n,):
        raise CorrelationError(f"need {ham.n} orbital energies, got {eps.shape}")
    if nv == 0:
        return MP2Result(0.0, np.zeros((no, no, 0, 0)), np.zeros((0, 0)), no, 0)
    if eps[no] - eps[no - 1] <= GAP_TOL:
        raise DegeneracyError(
            f"HOMO-LUMO gap {eps[no] - eps[no - 1]:.3e} below {GAP_TOL}")
    ovov = ham.v[:no, no:, :no, no:]
    g = ovov.transpose(0, 2, 1, 3)
    denom = (eps[:no, None, None, None] + eps[None, :no, None, None]
             - eps[None, None, no:, None] - eps[None, None, None, no:])
    if denom.max() > -1e-12:
        raise DegeneracyError(
            f"vanishing MP2 denominator (max {denom.max():.3e})")
    t2 = g / denom
    e_corr = float(np.einsum("ijab,ijab->", t2, 2.0 * g - g.transpose(0, 1, 3, 2)))
    u = 2.0 * t2 - t2.transpose(1, 0, 2, 3)
    d_vv = 2.0 * np.einsum("ijac,ijbc->ab", t2, u, optimize=True)
    d_vv = 0.5 * (d_vv + d_vv.T)
    return MP2Result(e_corr, t2, d_vv, no, nv)


@dataclass(frozen=True)
class NaturalOrbitalSet:
    """Virtual-space natural orbitals sorted by occupation number."""

    rotation: np.ndarray
    noon: np.ndarray
    source: str = ""
    sigma: float | None = None

    @property
    def n_virt(self) -> int:
        return self.rotation.shape[0]


def natural_orbitals(mp2: MP2Result, source: str = "") -> NaturalOrbitalSet:
    """Eigendecompose D_vv; NOON descending with deterministic signs."""
    vals, vecs = np.linalg.eigh(mp2.d_vv)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    for k in range(vecs.shape[1]):
        j = int(np.argmax(np.abs(vecs[:, k])))
        if vecs[j, k] < 0:
            vecs[:, k] = -vecs[:, k]
    return NaturalOrbitalSet(vecs, vals, source)


# --------------------------------------------------------------------------
# semicanonicalization


def semicanonicalize(ham: MOHamiltonian, rotation: np.ndarray | None = None):
    """Apply an occupied/virtual block rotation and rediagonalize the Fock
    operator within each block. Returns (MOHamiltonian, orbital energies).
    """
    no = ham.n_occ
    n = ham.n
    if rotation is None:
        rotation = np.eye(n)
    if rotation.shape != (n, n):
        raise CorrelationError("rotation dimension mismatch")
    if (np.abs(rotation[:no, no:]).max(initial=0.0) > 1e-12
            or np.abs(rotation[no:, :no]).max(initial=0.0) > 1e-12):
        raise CorrelationError("rotation mixes occupied and virtual orbitals")
    ham2 = ham.rotated(rotation)
    o = slice(0, no)
    f = ham2.h + 2.0 * np.einsum("pqii->pq", ham2.v[:, :, o, o]) \
        - np.einsum("piiq->pq", ham2.v[:, o, o, :])
    f = 0.5 * (f + f.T)
    eps = np.empty(n)
    u = np.zeros((n, n))
    eo, uo = np.linalg.eigh(f[o, o])
    ev, uv = np.linalg.eigh(f[no:, no:])
    eps[:no] = eo
    eps[no:] = ev
    u[:no, :no] = uo
    u[no:, no:] = uv
    return ham2.rotated(u), eps


# --------------------------------------------------------------------------
# determinant CI


@dataclass(frozen=True)
class CIResult:
    level: str
    e_total: float
    n_det: int
    converged: bool
    n_iter: int
    residual: float


class _DetSpace:
    """Alpha-grouped determinant basis with sorted per-group beta lists."""

    def __init__(self, astr, bstart, bflat):
        self.astr = astr
        self.bstart = bstart
        self.bflat = bflat
        self.n_det = int(len(bflat))


def _strings_by_excitation(n: int, no: int, max_exc: int):
    """All no-electron strings grouped by excitation level from the
    aufbau reference, as one ascending-sorted int64 array per level."""
    ref_occ = list(range(no))
    ref_virt = list(range(no, n))
    out = []
    for e in range(min(max_exc, no, n - no) + 1):
        masks = []
        for holes in combinations(ref_occ, e):
            for parts in combinations(ref_virt, e):
                m = (1 << no) - 1
                for h in holes:
                    m ^= 1 << h
                for p in parts:
                    m |= 1 << p
                masks.append(m)
        out.append(np.sort(np.array(masks, dtype=np.int64)))
    return out


def _build_space(n: int, no: int, level: str) -> _DetSpace:
    if level == "fci":
        strings = np.sort(np.array(
            [_mask(c) for c in combinations(range(n), no)], dtype=np.int64))
        na = len(strings)
        bstart = np.arange(na + 1, dtype=np.int64) * na
        bflat = np.tile(strings, na)
        return _DetSpace(strings, bstart, bflat)
    if level != "cisd":
        raise CorrelationError(f"unknown CI level {level!r}")
    by_exc = _strings_by_excitation(n, no, 2)
    astr, blists = [], []
    for ea in range(len(by_exc)):
        allowed = [by_exc[eb] for eb in range(min(2 - ea, len(by_exc) - 1) + 1)]
        betas = np.sort(np.concatenate(allowed))
        for a in by_exc[ea]:
            astr.append(a)
            blists.append(betas)
    astr = np.array(astr, dtype=np.int64)
    bstart = np.zeros(len(astr) + 1, dtype=np.int64)
    for i, b in enumerate(blists):
        bstart[i + 1] = bstart[i] + len(b)
    bflat = np.concatenate(blists)
    return _DetSpace(astr, bstart, bflat)


def _mask(orbs) -> int:
    m = 0
    for p in orbs:
        m |= 1 << p
    return m


def _davidson(matvec, diag, n_det, tol, max_iter=200, max_space=24):
    """Lowest eigenpair by Davidson iteration with diagonal
    preconditioning and thick restarts."""
    rng_free = np.argsort(diag, kind="stable")
    v0 = np.zeros(n_det)
    v0[rng_free[0]] = 1.0
    basis = [v0]
    sigma = [matvec(v0)]
    theta = float(v0 @ sigma[0])
    x = v0
    for it in range(1, max_iter + 1):
        m = len(basis)
        hmat = np.empty((m, m))
        for i in range(m):
            for j in range(m):
                hmat[i, j] = basis[i] @ sigma[j]
        hmat = 0.5 * (hmat + hmat.T)
        w, z = np.linalg.eigh(hmat)
        theta = float(w[0])
        x = sum(z[i, 0] * basis[i] for i in range(m))
        hx = sum(z[i, 0] * sigma[i] for i in range(m))
        r = hx - theta * x
        rnorm = float(np.linalg.norm(r))
        if rnorm <= tol:
            return theta, x, True, it, rnorm
        if m >= max_space:
            basis = [x]
            sigma = [hx]
        precond = diag - theta
        precond = np.where(np.abs(precond) < 1e-8,
                           np.copysign(1e-8, precond), precond)
        t = r / precond
        for _ in range(2):
            for b in basis:
                t -= (b @ t) * b
        nt = np.linalg.norm(t)
        if nt < 1e-14:
            return theta, x, True, it, rnorm
        t /= nt
        basis.append(t)
        sigma.append(matvec(t))
    return theta, x, False, max_iter, rnorm


def run_ci(ham: MOHamiltonian, level: str = "cisd", tol: float = 1e-8,
           max_iter: int = 200, max_space: int = 24) -> CIResult:
    """Lowest eigenvalue of H in the Sz=0 determinant space (HF reference
    plus singles and doubles for CISD; the full space for FCI).

    Small spaces are diagonalized densely; larger ones use Davidson with
    the matvec kernel.
    """
    level = level.lower()
    n, no = ham.n, ham.n_occ
    if n > MAX_ORBITALS:
        raise CISpaceError(
            f"{n} orbitals exceed the {MAX_ORBITALS}-orbital determinant "
            "bitmask limit")
    space = _build_space(n, no, level)
    cap = FCI_DET_CAP if level == "fci" else CISD_DET_CAP
    if space.n_det > cap:
        raise CISpaceError(
            f"{level.upper()} space of {space.n_det} determinants exceeds "
            f"cap {cap}")
    h = np.ascontiguousarray(ham.h)
    v = np.ascontiguousarray(ham.v)
    diag = np.empty(space.n_det)
    _cikern.ci_diagonal(space.astr, space.bstart, space.bflat, h, v, n, diag)

    def matvec(c):
        out = np.empty(space.n_det)
        _cikern.ci_matvec(space.astr, space.bstart, space.bflat, h, v, n,
                          diag, c, out)
        return out

    if space.n_det <= DENSE_DET_LIMIT:
        hmat = np.empty((space.n_det, space.n_det))
        for i in range(space.n_det):
            e = np.zeros(space.n_det)
            e[i] = 1.0
            hmat[:, i] = matvec(e)
        vals = scipy.linalg.eigh(hmat, eigvals_only=True,
                                 subset_by_index=[0, 0])
        return CIResult(level, float(vals[0]) + ham.e_core, space.n_det,
                        True, 1, 0.0)
    theta, _, ok, its, rnorm = _davidson(matvec, diag, space.n_det, tol,
                                         max_iter, max_space)
    if not ok:
        raise CorrelationError(
            f"Davidson not converged after {its} iterations "
            f"(residual {rnorm:.3e})")
    return CIResult(level, float(theta) + ham.e_core, space.n_det,
                    True, its, rnorm)
