"""Determinant-CI kernels: Slater-Condon matrix elements over bitmask
strings, grouped by alpha string with sorted per-group beta lists.

Determinant index = position in the flat beta array. Spin-orbital
conventions: alpha and beta both use spatial-orbital bitmasks; V is the
chemist-notation (pq|rs) tensor.
"""
import numpy as np

from ._accel import maybe_njit


@maybe_njit(inline="always")
def _popcount(x):
    n = 0
    while x:
        x &= x - 1
        n += 1
    return n


@maybe_njit(inline="always")
def _between_mask(p, q):
    lo = p if p < q else q
    hi = q if p < q else p
    return ((np.int64(1) << hi) - 1) & ~((np.int64(1) << (lo + 1)) - 1)


@maybe_njit(inline="always")
def _bsearch(arr, lo, hi, key):
    # index of key in arr[lo:hi], -1 if absent
    while lo < hi:
        mid = (lo + hi) // 2
        v = arr[mid]
        if v == key:
            return mid
        if v < key:
            lo = mid + 1
        else:
            hi = mid
    return -1


@maybe_njit
def ci_diagonal(astr, bstart, bflat, h, v, nspat, out):
    na = astr.shape[0]
    occ = np.empty(nspat, dtype=np.int64)
    for g in range(na):
        a = astr[g]
        noa = 0
        for p in range(nspat):
            if (a >> p) & 1:
                occ[noa] = p
                noa += 1
        ea = 0.0
        for i in range(noa):
            p = occ[i]
            ea += h[p, p]
            for j in range(noa):
                q = occ[j]
                ea += 0.5 * (v[p, p, q, q] - v[p, q, q, p])
        for kb in range(bstart[g], bstart[g + 1]):
            b = bflat[kb]
            e = ea
            for p in range(nspat):
                if not (b >> p) & 1:
                    continue
                e += h[p, p]
                for q in range(nspat):
                    if not (b >> q) & 1:
                        continue
                    e += 0.5 * (v[p, p, q, q] - v[p, q, q, p])
                for i in range(noa):
                    e += v[p, p, occ[i], occ[i]]
            out[kb] = e


@maybe_njit(inline="always")
def _single_base(p, q, common, h, v, nspat):
    # one-body plus same-spin field of the shared occupied set
    e = h[p, q]
    for r in range(nspat):
        if (common >> r) & 1:
            e += v[p, q, r, r] - v[p, r, r, q]
    return e


@maybe_njit(inline="always")
def _double_elem(a1, a2, v):
    # same-spin double excitation <D1|H|D2>, strings differ in 4 bits
    x = a1 ^ a2
    h1 = h2 = p1 = p2 = -1
    for r in range(64):
        if (x >> r) & 1:
            if (a1 >> r) & 1:
                if h1 < 0:
                    h1 = r
                else:
                    h2 = r
            else:
                if p1 < 0:
                    p1 = r
                else:
                    p2 = r
    sgn = 1.0
    if _popcount(a1 & _between_mask(h1, p1)) & 1:
        sgn = -sgn
    a1p = (a1 ^ (np.int64(1) << h1)) | (np.int64(1) << p1)
    if _popcount(a1p & _between_mask(h2, p2)) & 1:
        sgn = -sgn
    return sgn * (v[h1, p1, h2, p2] - v[h1, p2, h2, p1])


@maybe_njit(inline="always")
def _single_parts(a1, a2):
    # hole p in a1, particle q in a2, sign from shared occupancy
    x = a1 ^ a2
    p = q = -1
    for r in range(64):
        if (x >> r) & 1:
            if (a1 >> r) & 1:
                p = r
            else:
                q = r
    common = a1 & a2
    sgn = -1.0 if _popcount(common & _between_mask(p, q)) & 1 else 1.0
    return p, q, sgn, common


@maybe_njit
def ci_matvec(astr, bstart, bflat, h, v, nspat, diag, c, out):
    """out = H @ c over the packed determinant space."""
    na = astr.shape[0]
    nd = bflat.shape[0]
    for i in range(nd):
        out[i] = diag[i] * c[i]

    # same alpha string: pure-beta excitations
    for g in range(na):
        a = astr[g]
        lo = bstart[g]
        hi = bstart[g + 1]
        for k1 in range(lo, hi):
            b1 = bflat[k1]
            for k2 in range(k1 + 1, hi):
                b2 = bflat[k2]
                d = _popcount(b1 ^ b2)
                if d == 2:
                    p, q, sgn, common = _single_parts(b1, b2)
                    e = _single_base(p, q, common, h, v, nspat)
                    for r in range(nspat):
                        if (a >> r) & 1:
                            e += v[p, q, r, r]
                    w = sgn * e
                    out[k1] += w * c[k2]
                    out[k2] += w * c[k1]
                elif d == 4:
                    w = _double_elem(b1, b2, v)
                    out[k1] += w * c[k2]
                    out[k2] += w * c[k1]

    # distinct alpha strings
    for g1 in range(na):
        a1 = astr[g1]
        lo1 = bstart[g1]
        hi1 = bstart[g1 + 1]
        for g2 in range(g1 + 1, na):
            a2 = astr[g2]
            d = _popcount(a1 ^ a2)
            if d == 4:
                # alpha double: only identical beta strings connect
                w = _double_elem(a1, a2, v)
                k1 = lo1
                k2 = bstart[g2]
                hi2 = bstart[g2 + 1]
                while k1 < hi1 and k2 < hi2:
                    b1 = bflat[k1]
                    b2 = bflat[k2]
                    if b1 == b2:
                        out[k1] += w * c[k2]
                        out[k2] += w * c[k1]
                        k1 += 1
                        k2 += 1
                    elif b1 < b2:
                        k1 += 1
                    else:
                        k2 += 1
            elif d == 2:
                p, q, sgn, common = _single_parts(a1, a2)
                base = _single_base(p, q, common, h, v, nspat)
                lo2 = bstart[g2]
                hi2 = bstart[g2 + 1]
                # alpha single with identical beta
                k1 = lo1
                k2 = lo2
                while k1 < hi1 and k2 < hi2:
                    b1 = bflat[k1]
                    b2 = bflat[k2]
                    if b1 == b2:
                        e = base
                        for r in range(nspat):
                            if (b1 >> r) & 1:
                                e += v[p, q, r, r]
                        w = sgn * e
                        out[k1] += w * c[k2]
                        out[k2] += w * c[k1]
                        k1 += 1
                        k2 += 1
                    elif b1 < b2:
                        k1 += 1
                    else:
                        k2 += 1
                # alpha single x beta single; iterate the smaller side
                # (orientation is immaterial: V and the parity are
                # symmetric under swapping hole and particle roles)
                if hi1 - lo1 <= hi2 - lo2:
                    slo, shi, olo, ohi = lo1, hi1, lo2, hi2
                else:
                    slo, shi, olo, ohi = lo2, hi2, lo1, hi1
                for ks in range(slo, shi):
                    b1 = bflat[ks]
                    for r in range(nspat):
                        if not (b1 >> r) & 1:
                            continue
                        for s in range(nspat):
                            if (b1 >> s) & 1:
                                continue
                            b2 = b1 ^ (np.int64(1) << r) | (np.int64(1) << s)
                            ko = _bsearch(bflat, olo, ohi, b2)
                            if ko < 0:
                                continue
                            sgnb = -1.0 if _popcount(
                                (b1 & b2) & _between_mask(r, s)) & 1 else 1.0
                            w = sgn * sgnb * v[p, q, r, s]
                            out[ks] += w * c[ko]
                            out[ko] += w * c[ks]


@maybe_njit
def mask_from_orbs(orbs):
    m = np.int64(0)
    for i in range(orbs.shape[0]):
        m |= np.int64(1) << orbs[i]
    return m
