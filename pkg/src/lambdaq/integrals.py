"""One- and two-electron Gaussian integrals over contracted spherical AOs.

McMurchie-Davidson Hermite recurrences evaluate all integrals; the Boys
function comes from a tabulated grid with a 7-term Taylor step below the
asymptotic switch. Contracted functions are normalized to unit
self-overlap. Supported angular momenta: s, p, d, f.
"""
from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import _intkern
from .chem import BasisError, BasisSet, Molecule

MAX_L = 3
SCHWARZ_THRESHOLD = 1e-14
LINDEP_THRESHOLD = 1e-10


class IntegralError(ValueError):
    """Unsupported basis content or invalid integral request."""


# --------------------------------------------------------------------------
# Boys function


def _boys_series(m: int, x: float) -> float:
    # cancellation-free ascending series; every term positive
    term = 1.0 / (2.0 * m + 1.0)
    total = term
    k = 0
    while term > total * 1e-18:
        term *= 2.0 * x / (2.0 * m + 2.0 * k + 3.0)
        total += term
        k += 1
    return math.exp(-x) * total


def boys_reference(m: int, x: float) -> float:
    """Series/recursion evaluation used to seed the grid and as a test
    oracle independent of the tabulated fast path."""
    if x < 0:
        raise IntegralError("Boys argument must be nonnegative")
    if x >= 35.0:
        f = 0.5 * math.sqrt(math.pi / x) * math.erf(math.sqrt(x))
        e = math.exp(-x)
        for k in range(m):
            f = ((2.0 * k + 1.0) * f - e) / (2.0 * x)
        return f
    return _boys_series(m, x)


@dataclass(frozen=True)
class BoysTable:
    """Tabulated Boys function F_m on a uniform grid.

    grid[i, m] = F_m(i * dx) for m <= m_max + 6 (the extra orders feed the
    Taylor step); switch_x is the crossover to the closed-form/upward
    branch.
    """

    m_max: int
    dx: float
    switch_x: float
    grid: np.ndarray

    @classmethod
    def build(cls, m_max: int = 14, dx: float = 0.0625,
              switch_x: float = 35.0) -> "BoysTable":
        m_top = m_max + 6
        n = int(round(switch_x / dx)) + 2
        grid = np.empty((n, m_top + 1))
        for i in range(n):
            x = i * dx
            f = _boys_series(m_top, x)
            grid[i, m_top] = f
            e = math.exp(-x)
            for m in range(m_top, 0, -1):
                f = (2.0 * x * f + e) / (2.0 * m - 1.0)
                grid[i, m - 1] = f
        grid.flags.writeable = False
        return cls(m_max, dx, switch_x, grid)

    def eval(self, m: int, x: float) -> float:
        if m < 0 or m > self.m_max:
            raise IntegralError(f"Boys order {m} outside table (m_max={self.m_max})")
        if x < 0:
            raise IntegralError("Boys argument must be nonnegative")
        out = np.empty(m + 1)
        _intkern.boys_fill(out, m, float(x), self.grid, self.dx, self.switch_x)
        return float(out[m])


_DEFAULT_BOYS = None


def default_boys_table() -> BoysTable:
    global _DEFAULT_BOYS
    if _DEFAULT_BOYS is None:
        _DEFAULT_BOYS = BoysTable.build()
    return _DEFAULT_BOYS


def boys(m: int, x: float) -> float:
    """Boys function F_m(x) = integral_0^1 t^{2m} exp(-x t^2) dt."""
    return default_boys_table().eval(m, x)


# --------------------------------------------------------------------------
# Cartesian components and solid-harmonic transforms


def cart_components(l: int):
    """Lexicographic (x-power descending) Cartesian exponent triples."""
    return [(i, j, l - i - j) for i in range(l, -1, -1) for j in range(l - i, -1, -1)]


def _mono_mul(p1: dict, p2: dict) -> dict:
    out = {}
    for (i1, j1, k1), c1 in p1.items():
        for (i2, j2, k2), c2 in p2.items():
            key = (i1 + i2, j1 + j2, k1 + k2)
            out[key] = out.get(key, 0.0 + 0.0j) + c1 * c2
    return out


def _mono_pow(p: dict, n: int) -> dict:
    out = {(0, 0, 0): 1.0 + 0.0j}
    for _ in range(n):
        out = _mono_mul(out, p)
    return out


def solid_harmonic_poly(l: int, m: int) -> dict:
    """Real solid harmonic S_{l,m} as {(ix,iy,iz): coefficient}.

    Built from the Racah complex solid harmonics
    R_l^m = sqrt((l+m)!(l-m)!) * sum_k (-(x+iy)/2)^{m+k} ((x-iy)/2)^k
            z^{l-m-2k} / ((m+k)! k! (l-m-2k)!)
    with S_{l,0} = R_l^0, S_{l,+-|m|} = sqrt(2) (-1)^m Re/Im R_l^{|m|}.
    """
    am = abs(m)
    plus = {(1, 0, 0): -0.5 + 0.0j, (0, 1, 0): -0.5j}
    minus = {(1, 0, 0): 0.5 + 0.0j, (0, 1, 0): -0.5j}
    zed = {(0, 0, 1): 1.0 + 0.0j}
    acc: dict = {}
    norm = math.sqrt(math.factorial(l + am) * math.factorial(l - am))
    for k in range((l - am) // 2 + 1):
        c = norm / (math.factorial(am + k) * math.factorial(k)
                    * math.factorial(l - am - 2 * k))
        term = _mono_mul(_mono_pow(plus, am + k), _mono_pow(minus, k))
        term = _mono_mul(term, _mono_pow(zed, l - am - 2 * k))
        for key, v in term.items():
            acc[key] = acc.get(key, 0.0 + 0.0j) + c * v
    out = {}
    for key, v in acc.items():
        if m == 0:
            w = v.real
        elif m > 0:
            w = math.sqrt(2.0) * (-1.0) ** am * v.real
        else:
            w = math.sqrt(2.0) * (-1.0) ** am * v.imag
        if abs(w) > 1e-14:
            out[key] = w
    return out


def _build_c2s() -> np.ndarray:
    """Packed Cartesian->spherical matrices, c2s[l, m_index, cart_index];
    m ordered -l..l, Cartesian order per cart_components."""
    pack = np.zeros((MAX_L + 1, 2 * MAX_L + 1, (MAX_L + 1) * (MAX_L + 2) // 2))
    for l in range(MAX_L + 1):
        comps = cart_components(l)
        for mi, m in enumerate(range(-l, l + 1)):
            poly = solid_harmonic_poly(l, m)
            for ci, key in enumerate(comps):
                pack[l, mi, ci] = poly.get(key, 0.0)
    pack.flags.writeable = False
    return pack


_C2S = _build_c2s()

_NCART = np.array([(l + 1) * (l + 2) // 2 for l in range(MAX_L + 1)], dtype=np.int64)
_COMP_X = np.zeros((MAX_L + 1, (MAX_L + 1) * (MAX_L + 2) // 2), dtype=np.int64)
_COMP_Y = np.zeros_like(_COMP_X)
_COMP_Z = np.zeros_like(_COMP_X)
for _l in range(MAX_L + 1):
    for _ci, (_i, _j, _k) in enumerate(cart_components(_l)):
        _COMP_X[_l, _ci] = _i
        _COMP_Y[_l, _ci] = _j
        _COMP_Z[_l, _ci] = _k
_COMP_X.flags.writeable = False
_COMP_Y.flags.writeable = False
_COMP_Z.flags.writeable = False


def primitive_norm(alpha: float, l: int) -> float:
    """Radial normalization of a primitive solid-harmonic Gaussian
    (normalizes the axis-aligned x^l component; the per-AO rescale after
    assembly removes the residual angular constant)."""
    dfac = 1.0
    for k in range(2 * l - 1, 0, -2):
        dfac *= k
    return (2.0 * alpha / math.pi) ** 0.75 * (4.0 * alpha) ** (l / 2.0) / math.sqrt(dfac)


# --------------------------------------------------------------------------
# shell table


class _ShellTable:
    """Flat-array view of (Molecule, BasisSet) consumed by the kernels."""

    def __init__(self, mol: Molecule, basis: BasisSet):
        sh_l, sh_cx, sh_p0, sh_np, sh_c0, sh_nc, sh_ao0 = [], [], [], [], [], [], []
        pexp, pcoef = [], []
        ao = 0
        for sym, z, pos in mol.atoms:
            for sh in basis.shells_for(sym):
                if sh.l > MAX_L:
                    raise IntegralError(
                        f"angular momentum l={sh.l} unsupported (max {MAX_L})")
                sh_l.append(sh.l)
                sh_cx.append(pos)
                sh_p0.append(len(pexp))
                sh_np.append(sh.n_primitives)
                sh_c0.append(len(pcoef))
                sh_nc.append(sh.n_contracted)
                sh_ao0.append(ao)
                ao += sh.n_contracted * (2 * sh.l + 1)
                for ip in range(sh.n_primitives):
                    a = float(sh.exponents[ip])
                    pexp.append(a)
                    nrm = primitive_norm(a, sh.l)
                    for c in range(sh.n_contracted):
                        pcoef.append(float(sh.coefficients[ip, c]) * nrm)
        self.sh_l = np.array(sh_l, dtype=np.int64)
        self.sh_cx = np.array(sh_cx, dtype=np.float64)
        self.sh_p0 = np.array(sh_p0, dtype=np.int64)
        self.sh_np = np.array(sh_np, dtype=np.int64)
        self.sh_c0 = np.array(sh_c0, dtype=np.int64)
        self.sh_nc = np.array(sh_nc, dtype=np.int64)
        self.sh_ao0 = np.array(sh_ao0, dtype=np.int64)
        self.pexp = np.array(pexp, dtype=np.float64)
        self.pcoef = np.array(pcoef, dtype=np.float64)
        self.n_ao = ao
        self.lmax = int(self.sh_l.max())
        self.blkmax = int(max(int(nc) * int(_NCART[l])
                              for nc, l in zip(self.sh_nc, self.sh_l)))
        ns = len(sh_l)
        pi, pj = [], []
        for s1 in range(ns):
            for s2 in range(s1 + 1):
                pi.append(s1)
                pj.append(s2)
        self.pair_i = np.array(pi, dtype=np.int64)
        self.pair_j = np.array(pj, dtype=np.int64)


# --------------------------------------------------------------------------
# integral set


@dataclass(frozen=True)
class IntegralSet:
    """All AO-basis tensors for one (molecule, basis) pair.

    overlap/kinetic/nuclear are N x N; eri is the N^4 chemist-notation
    (pq|rs) tensor; e_nuc the nuclear repulsion energy.
    """

    n_ao: int
    overlap: np.ndarray
    kinetic: np.ndarray
    nuclear: np.ndarray
    eri: np.ndarray
    e_nuc: float
    geometry_hash: str = ""
    basis_hash: str = ""

    def __post_init__(self):
        for arr in (self.overlap, self.kinetic, self.nuclear, self.eri):
            arr.flags.writeable = False

    @property
    def core_hamiltonian(self) -> np.ndarray:
        return self.kinetic + self.nuclear

    def overlap_spectrum(self):
        return np.linalg.eigvalsh(self.overlap)

    @property
    def n_linear_dependent(self) -> int:
        return int(np.sum(self.overlap_spectrum() < LINDEP_THRESHOLD))


def compute_integrals(mol: Molecule, basis: BasisSet,
                      boys_table: BoysTable | None = None,
                      schwarz_threshold: float = SCHWARZ_THRESHOLD) -> IntegralSet:
    """Build the full IntegralSet for a molecule/basis pair.

    Every contracted AO is rescaled to unit self-overlap after assembly,
    so published contraction coefficients (normalized-primitive
    convention) land on self-overlap 1 +- 1e-12 exactly.
    """
    table = boys_table or default_boys_table()
    st = _ShellTable(mol, basis)
    n = st.n_ao
    smat = np.zeros((n, n))
    tmat = np.zeros((n, n))
    vmat = np.zeros((n, n))
    zval = mol.atomic_numbers.astype(np.float64)
    zpos = np.ascontiguousarray(mol.coords)
    _intkern.oe_kernel(st.sh_l, st.sh_cx, st.sh_p0, st.sh_np, st.sh_c0,
                       st.sh_nc, st.sh_ao0, st.pexp, st.pcoef,
                       _COMP_X, _COMP_Y, _COMP_Z, _NCART, _C2S,
                       table.grid, table.dx, table.switch_x, zval, zpos,
                       st.lmax, st.blkmax, smat, tmat, vmat)
    scale = 1.0 / np.sqrt(np.diag(smat))
    qsp = _intkern.schwarz_kernel(st.sh_l, st.sh_cx, st.sh_p0, st.sh_np,
                                  st.sh_c0, st.sh_nc, st.pexp, st.pcoef,
                                  _COMP_X, _COMP_Y, _COMP_Z, _NCART, _C2S,
                                  table.grid, table.dx, table.switch_x,
                                  st.pair_i, st.pair_j, st.lmax, st.blkmax)
    eri = np.zeros((n, n, n, n))
    _intkern.eri_kernel(st.sh_l, st.sh_cx, st.sh_p0, st.sh_np, st.sh_c0,
                        st.sh_nc, st.sh_ao0, st.pexp, st.pcoef,
                        _COMP_X, _COMP_Y, _COMP_Z, _NCART, _C2S,
                        table.grid, table.dx, table.switch_x,
                        st.pair_i, st.pair_j, qsp, schwarz_threshold,
                        st.lmax, st.blkmax, eri)
    # one rounded multiply per element with a bitwise-symmetric pair scale,
    # so the rescale preserves exact index symmetry
    sc2 = scale[:, None] * scale[None, :]
    smat *= sc2
    tmat *= sc2
    vmat *= sc2
    for p in range(n):
        eri[p] *= sc2[p][:, None, None] * sc2[None, :, :]
    return IntegralSet(n, smat, tmat, vmat, eri, mol.nuclear_repulsion(),
                       mol.hash(), basis.hash())


# --------------------------------------------------------------------------
# binary cache

_CACHE_MAGIC = b"LQIC"
_CACHE_VERSION = 1


def save_integrals(ints: IntegralSet, path: str) -> None:
    """Write the documented little-endian cache format.

    Header: magic 'LQIC', uint32 version, uint32 n_ao, float64 e_nuc,
    64-byte geometry hash, 64-byte basis hash; then overlap, kinetic,
    nuclear, eri as row-major little-endian float64.
    """
    n = ints.n_ao
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<II", _CACHE_VERSION, n))
        fh.write(struct.pack("<d", ints.e_nuc))
        fh.write(ints.geometry_hash.ljust(64)[:64].encode())
        fh.write(ints.basis_hash.ljust(64)[:64].encode())
        for arr in (ints.overlap, ints.kinetic, ints.nuclear, ints.eri):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_integrals(path: str) -> IntegralSet:
    with open(path, "rb") as fh:
        if fh.read(4) != _CACHE_MAGIC:
            raise IntegralError(f"{path}: not an integral cache file")
        version, n = struct.unpack("<II", fh.read(8))
        if version != _CACHE_VERSION:
            raise IntegralError(f"{path}: unsupported cache version {version}")
        (e_nuc,) = struct.unpack("<d", fh.read(8))
        ghash = fh.read(64).decode().strip()
        bhash = fh.read(64).decode().strip()
        mats = []
        for shape in ((n, n), (n, n), (n, n), (n, n, n, n)):
            count = int(np.prod(shape))
            buf = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
            mats.append(buf.astype(np.float64).reshape(shape))
    return IntegralSet(n, mats[0], mats[1], mats[2], mats[3], e_nuc, ghash, bhash)


def cached_integrals(mol: Molecule, basis: BasisSet, cache_dir: str,
                     **kwargs) -> IntegralSet:
    """compute_integrals with a transparent on-disk cache keyed by the
    geometry and basis hashes."""
    os.makedirs(cache_dir, exist_ok=True)
    key = f"{mol.hash()[:16]}_{basis.hash()[:16]}.lqi"
    path = os.path.join(cache_dir, key)
    if os.path.exists(path):
        ints = load_integrals(path)
        if ints.geometry_hash == mol.hash() and ints.basis_hash == basis.hash():
            return ints
    ints = compute_integrals(mol, basis, **kwargs)
    save_integrals(ints, path)
    return ints
