"""Second-quantized Hamiltonian container, orbital-space restriction and
FCIDUMP interchange. All tensors are spatial-orbital, chemist notation."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


class HamiltonianError(ValueError):
    pass


@dataclass(frozen=True)
class MOHamiltonian:
    """Molecular Hamiltonian over N spatial orbitals.

    h is the N x N one-body tensor, v the N^4 chemist-notation (pq|rs)
    two-body tensor, e_core the scalar part (nuclear repulsion plus any
    folded frozen-core contribution).
    """

    n: int
    n_elec: int
    e_core: float
    h: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.h.shape != (self.n, self.n):
            raise HamiltonianError(f"h shape {self.h.shape} != ({self.n}, {self.n})")
        if self.v.shape != (self.n,) * 4:
            raise HamiltonianError(f"v shape {self.v.shape} != {(self.n,) * 4}")
        if self.n < self.n_elec / 2:
            raise HamiltonianError(
                f"{self.n} orbitals cannot hold {self.n_elec} electrons")
        self.h.flags.writeable = False
        self.v.flags.writeable = False

    def validate(self, h_tol: float = 1e-12, v_tol: float = 1e-10) -> None:
        """Check the symmetry invariants (cheap for small N; the v check
        walks all index permutations)."""
        if np.abs(self.h - self.h.T).max() > h_tol:
            raise HamiltonianError("h is not symmetric")
        v = self.v
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if np.abs(v - v.transpose(perm)).max() > v_tol:
                raise HamiltonianError(f"v lacks 8-fold symmetry (perm {perm})")

    @property
    def n_occ(self) -> int:
        return self.n_elec // 2

    def mean_field_energy(self) -> float:
        """Closed-shell determinant energy of the first n_occ orbitals."""
        o = slice(0, self.n_occ)
        e = self.e_core + 2.0 * np.trace(self.h[o, o])
        e += 2.0 * np.einsum("iijj->", self.v[o, o, o, o])
        e -= np.einsum("ijji->", self.v[o, o, o, o])
        return float(e)

    def rotated(self, u: np.ndarray) -> "MOHamiltonian":
        """Transform into the orbital basis defined by columns of u."""
        if u.shape[0] != self.n:
            raise HamiltonianError("rotation dimension mismatch")
        h = u.T @ self.h @ u
        v = np.einsum("pqrs,pi->iqrs", self.v, u, optimize=True)
        v = np.einsum("iqrs,qj->ijrs", v, u, optimize=True)
        v = np.einsum("ijrs,rk->ijks", v, u, optimize=True)
        v = np.einsum("ijks,sl->ijkl", v, u, optimize=True)
        return MOHamiltonian(u.shape[1], self.n_elec, self.e_core, h, v)


def modified_one_body(ham: MOHamiltonian) -> np.ndarray:
    """T_pq = h_pq - 1/2 sum_r V_prrq."""
    t = ham.h - 0.5 * np.einsum("prrq->pq", ham.v)
    return 0.5 * (t + t.T)


def restrict_orbitals(ham: MOHamiltonian, frozen_occupied=(),
                      dropped_virtual=()) -> MOHamiltonian:
    """Freeze doubly-occupied orbitals into E_core and slice away virtuals.

    Frozen indices must lie below n_elec/2 and dropped indices at or above
    it; the two sets cannot overlap. Dropping is pure tensor slicing;
    freezing uses the standard closed-shell folding.
    """
    frozen = sorted(set(int(i) for i in frozen_occupied))
    dropped = sorted(set(int(i) for i in dropped_virtual))
    n_occ = ham.n_occ
    for i in frozen:
        if not 0 <= i < n_occ:
            raise HamiltonianError(
                f"frozen index {i} is not a doubly-occupied orbital "
                f"(occupied range 0..{n_occ - 1})")
    for a in dropped:
        if not n_occ <= a < ham.n:
            raise HamiltonianError(
                f"dropped index {a} is not a virtual orbital "
                f"(virtual range {n_occ}..{ham.n - 1})")
    if set(frozen) & set(dropped):
        raise HamiltonianError("frozen and dropped sets overlap")
    if not frozen and not dropped:
        return ham
    e_core = ham.e_core
    h = ham.h
    if frozen:
        f = np.array(frozen, dtype=np.intp)
        e_core += 2.0 * float(np.sum(ham.h[f, f]))
        vff = ham.v[np.ix_(f, f, f, f)]
        e_core += 2.0 * float(np.einsum("iijj->", vff))
        e_core -= float(np.einsum("ijji->", vff))
        h = h + 2.0 * np.einsum("pqii->pq", ham.v[:, :, f, :][:, :, :, f])
        h = h - np.einsum("piiq->pq", ham.v[:, f, :, :][:, :, f, :])
    removed = set(frozen) | set(dropped)
    keep = np.array([p for p in range(ham.n) if p not in removed], dtype=np.intp)
    h = np.ascontiguousarray(h[np.ix_(keep, keep)])
    v = np.ascontiguousarray(ham.v[np.ix_(keep, keep, keep, keep)])
    return MOHamiltonian(len(keep), ham.n_elec - 2 * len(frozen),
                         float(e_core), h, v)


# --------------------------------------------------------------------------
# FCIDUMP

_TOL_DUP = 1e-12


def write_fcidump(ham: MOHamiltonian, path: str) -> None:
    """Write chemist-notation FCIDUMP (1-based indices, ORBSYM all 1,
    core energy on the 0 0 0 0 line, >= 16 significant digits)."""
    n = ham.n
    with open(path, "w") as fh:
        fh.write(f"&FCI NORB={n}, NELEC={ham.n_elec}, MS2=0,\n")
        fh.write(" ORBSYM=" + ",".join(["1"] * n) + ",\n")
        fh.write(" ISYM=1,\n")
        fh.write("&END\n")
        for p in range(n):
            for q in range(p + 1):
                pq = p * (p + 1) // 2 + q
                for r in range(p + 1):
                    smax = r if r < p else q
                    for s in range(smax + 1):
                        if r * (r + 1) // 2 + s > pq:
                            continue
                        val = ham.v[p, q, r, s]
                        if val != 0.0:
                            fh.write(f"{val:.16E} {p + 1} {q + 1} {r + 1} {s + 1}\n")
        for p in range(n):
            for q in range(p + 1):
                if ham.h[p, q] != 0.0:
                    fh.write(f"{ham.h[p, q]:.16E} {p + 1} {q + 1} 0 0\n")
        fh.write(f"{ham.e_core:.16E} 0 0 0 0\n")


def read_fcidump(path: str) -> MOHamiltonian:
    """Read an FCIDUMP file, reconstructing 8-fold symmetry from the
    stored unique elements. Contradictory duplicate entries are errors."""
    with open(path) as fh:
        text = fh.read()
    m = re.search(r"NORB\s*=\s*(\d+)", text, re.IGNORECASE)
    if not m:
        raise HamiltonianError(f"{path}: missing NORB in FCIDUMP header")
    n = int(m.group(1))
    m = re.search(r"NELEC\s*=\s*(\d+)", text, re.IGNORECASE)
    if not m:
        raise HamiltonianError(f"{path}: missing NELEC in FCIDUMP header")
    n_elec = int(m.group(1))
    end = re.search(r"(&END|/)\s*\n", text, re.IGNORECASE)
    if not end:
        raise HamiltonianError(f"{path}: unterminated FCIDUMP header")
    body = text[end.end():]
    h = np.zeros((n, n))
    v = np.zeros((n, n, n, n))
    seen_h: dict = {}
    seen_v: dict = {}
    e_core = 0.0
    for lineno, line in enumerate(body.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise HamiltonianError(f"{path}: malformed line {lineno}: {line!r}")
        try:
            val = float(parts[0])
            p, q, r, s = (int(x) for x in parts[1:])
        except ValueError as exc:
            raise HamiltonianError(
                f"{path}: malformed line {lineno}: {line!r}") from exc
        for idx in (p, q, r, s):
            if idx < 0 or idx > n:
                raise HamiltonianError(
                    f"{path}: index {idx} exceeds NORB={n} on line {lineno}")
        if p == 0:
            e_core = val
        elif r == 0:
            key = (max(p, q), min(p, q))
            if key in seen_h and abs(seen_h[key] - val) > _TOL_DUP:
                raise HamiltonianError(
                    f"{path}: contradictory duplicate h entry {key}")
            seen_h[key] = val
            h[p - 1, q - 1] = h[q - 1, p - 1] = val
        else:
            if q == 0 or s == 0:
                raise HamiltonianError(
                    f"{path}: malformed index pattern on line {lineno}")
            a, b, c, d = p - 1, q - 1, r - 1, s - 1
            ab = (max(a, b), min(a, b))
            cd = (max(c, d), min(c, d))
            key = (max(ab, cd), min(ab, cd))
            if key in seen_v and abs(seen_v[key] - val) > _TOL_DUP:
                raise HamiltonianError(
                    f"{path}: contradictory duplicate V entry {key}")
            seen_v[key] = val
            for (i, j), (k, l) in (((a, b), (c, d)), ((c, d), (a, b))):
                v[i, j, k, l] = v[j, i, k, l] = v[i, j, l, k] = v[j, i, l, k] = val
    return MOHamiltonian(n, n_elec, e_core, h, v)
