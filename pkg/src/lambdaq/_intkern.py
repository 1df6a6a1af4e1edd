"""Hot kernels for the Gaussian integral engine.

Everything here is njit-compatible and compiled through _accel.maybe_njit;
with LAMBDAQ_NO_NUMBA=1 the same functions run as plain Python. Shell data
arrives as flat arrays (see integrals module). All loops are sequential so
results are bitwise reproducible.

Index conventions: chemist-notation ERI (s1 s2 | s3 s4); combined block
index within a shell = contraction_column * n_cart + cart_component;
Cartesian components ordered lexicographically with x-power descending.
"""
import math

import numpy as np

from ._accel import maybe_njit

# inverse factorials for the 7-term Boys Taylor step
_IF2 = 1.0 / 2.0
_IF3 = 1.0 / 6.0
_IF4 = 1.0 / 24.0
_IF5 = 1.0 / 120.0
_IF6 = 1.0 / 720.0


@maybe_njit
def boys_fill(out, mmax, x, grid, dx, switch):
    """Fill out[0..mmax] with Boys F_m(x).

    x < switch: 7-term Taylor step off the nearest grid point (grid rows
    carry orders up to mmax+6, so truncation is ~ (dx/2)^7/7! relative).
    x >= switch: closed-form F_0 plus upward recursion, stable there
    because x > m for every tabulated order.
    """
    if x < switch:
        i = int(x / dx + 0.5)
        d = x - i * dx
        d2 = d * d
        d3 = d2 * d
        for m in range(mmax + 1):
            out[m] = (grid[i, m]
                      - grid[i, m + 1] * d
                      + grid[i, m + 2] * d2 * _IF2
                      - grid[i, m + 3] * d3 * _IF3
                      + grid[i, m + 4] * d2 * d2 * _IF4
                      - grid[i, m + 5] * d2 * d3 * _IF5
                      + grid[i, m + 6] * d3 * d3 * _IF6)
    else:
        e = math.exp(-x)
        inv2x = 0.5 / x
        f = 0.5 * math.sqrt(math.pi / x)
        out[0] = f
        for m in range(1, mmax + 1):
            f = ((2.0 * m - 1.0) * f - e) * inv2x
            out[m] = f


@maybe_njit
def _fill_e(e, li, lj, a, b, ab):
    """Hermite expansion coefficients E_t^{ij} along one axis.

    e[i, j, t] for i <= li, j <= lj, t <= i+j; the Gaussian-product
    prefactor exp(-mu * ab^2) is folded into E_0^{00}.
    """
    p = a + b
    inv2p = 0.5 / p
    pa = -(b / p) * ab
    pb = (a / p) * ab
    for i in range(li + 1):
        for j in range(lj + 1):
            for t in range(li + lj + 1):
                e[i, j, t] = 0.0
    e[0, 0, 0] = math.exp(-(a * b / p) * ab * ab)
    for i in range(li):
        for t in range(i + 2):
            v = pa * e[i, 0, t]
            if t > 0:
                v += inv2p * e[i, 0, t - 1]
            if t + 1 <= i:
                v += (t + 1.0) * e[i, 0, t + 1]
            e[i + 1, 0, t] = v
    for j in range(lj):
        for i in range(li + 1):
            for t in range(i + j + 2):
                v = pb * e[i, j, t]
                if t > 0:
                    v += inv2p * e[i, j, t - 1]
                if t + 1 <= i + j:
                    v += (t + 1.0) * e[i, j, t + 1]
                e[i, j + 1, t] = v


@maybe_njit
def _fill_r(r4, L, alpha, dx, dy, dz, fm):
    """Coulomb Hermite integrals R_{tuv} = r4[0, t, u, v].

    r4[n, t, u, v] is the auxiliary ladder seeded by (-2 alpha)^n F_n(T)
    and descended with the three-direction recursion.
    """
    pw = 1.0
    for n in range(L + 1):
        r4[n, 0, 0, 0] = pw * fm[n]
        pw *= -2.0 * alpha
    for total in range(1, L + 1):
        for n in range(L - total + 1):
            for t in range(total + 1):
                for u in range(total - t + 1):
                    v = total - t - u
                    if t > 0:
                        val = dx * r4[n + 1, t - 1, u, v]
                        if t > 1:
                            val += (t - 1.0) * r4[n + 1, t - 2, u, v]
                    elif u > 0:
                        val = dy * r4[n + 1, t, u - 1, v]
                        if u > 1:
                            val += (u - 1.0) * r4[n + 1, t, u - 2, v]
                    else:
                        val = dz * r4[n + 1, t, u, v - 1]
                        if v > 1:
                            val += (v - 1.0) * r4[n + 1, t, u, v - 2]
                    r4[n, t, u, v] = val


@maybe_njit
def _eri_quartet_cart(s1, s2, s3, s4,
                      sh_l, sh_cx, sh_p0, sh_np, sh_c0, sh_nc,
                      pexp, pcoef,
                      comp_x, comp_y, comp_z, ncart_l,
                      grid, dxb, switch,
                      fm, eax, eay, eaz, ekx, eky, ekz, r4, g, prim, blk):
    """Contracted Cartesian ERI block (s1 s2 | s3 s4) into blk."""
    la, lb, lc, ld = sh_l[s1], sh_l[s2], sh_l[s3], sh_l[s4]
    nca_c, ncb_c = ncart_l[la], ncart_l[lb]
    ncc_c, ncd_c = ncart_l[lc], ncart_l[ld]
    cola, colb, colc, cold = sh_nc[s1], sh_nc[s2], sh_nc[s3], sh_nc[s4]
    bda, bdb = cola * nca_c, colb * ncb_c
    bdc, bdd = colc * ncc_c, cold * ncd_c
    for i in range(bda):
        for j in range(bdb):
            for k in range(bdc):
                for m in range(bdd):
                    blk[i, j, k, m] = 0.0
    abx = sh_cx[s1, 0] - sh_cx[s2, 0]
    aby = sh_cx[s1, 1] - sh_cx[s2, 1]
    abz = sh_cx[s1, 2] - sh_cx[s2, 2]
    cdx = sh_cx[s3, 0] - sh_cx[s4, 0]
    cdy = sh_cx[s3, 1] - sh_cx[s4, 1]
    cdz = sh_cx[s3, 2] - sh_cx[s4, 2]
    L = la + lb + lc + ld
    tb = la + lb + 1
    nbra = tb * tb * tb
    ncd = ncc_c * ncd_c
    twopi52 = 2.0 * math.pi ** 2.5
    for ipa in range(sh_np[s1]):
        a = pexp[sh_p0[s1] + ipa]
        for ipb in range(sh_np[s2]):
            b = pexp[sh_p0[s2] + ipb]
            p = a + b
            px = (a * sh_cx[s1, 0] + b * sh_cx[s2, 0]) / p
            py = (a * sh_cx[s1, 1] + b * sh_cx[s2, 1]) / p
            pz = (a * sh_cx[s1, 2] + b * sh_cx[s2, 2]) / p
            _fill_e(eax, la, lb, a, b, abx)
            _fill_e(eay, la, lb, a, b, aby)
            _fill_e(eaz, la, lb, a, b, abz)
            for ipc in range(sh_np[s3]):
                c = pexp[sh_p0[s3] + ipc]
                for ipd in range(sh_np[s4]):
                    d = pexp[sh_p0[s4] + ipd]
                    q = c + d
                    qx = (c * sh_cx[s3, 0] + d * sh_cx[s4, 0]) / q
                    qy = (c * sh_cx[s3, 1] + d * sh_cx[s4, 1]) / q
                    qz = (c * sh_cx[s3, 2] + d * sh_cx[s4, 2]) / q
                    alpha = p * q / (p + q)
                    dx = px - qx
                    dy = py - qy
                    dz = pz - qz
                    targ = alpha * (dx * dx + dy * dy + dz * dz)
                    boys_fill(fm, L, targ, grid, dxb, switch)
                    _fill_r(r4, L, alpha, dx, dy, dz, fm)
                    _fill_e(ekx, lc, ld, c, d, cdx)
                    _fill_e(eky, lc, ld, c, d, cdy)
                    _fill_e(ekz, lc, ld, c, d, cdz)
                    pref = twopi52 / (p * q * math.sqrt(p + q))
                    for ib in range(nbra):
                        for kc in range(ncd):
                            g[ib, kc] = 0.0
                    for mc in range(ncc_c):
                        icx = comp_x[lc, mc]
                        icy = comp_y[lc, mc]
                        icz = comp_z[lc, mc]
                        for nd in range(ncd_c):
                            jdx = comp_x[ld, nd]
                            jdy = comp_y[ld, nd]
                            jdz = comp_z[ld, nd]
                            kc = mc * ncd_c + nd
                            for tau in range(icx + jdx + 1):
                                ex = ekx[icx, jdx, tau]
                                if ex == 0.0:
                                    continue
                                for nu in range(icy + jdy + 1):
                                    exy = ex * eky[icy, jdy, nu]
                                    if exy == 0.0:
                                        continue
                                    for ph in range(icz + jdz + 1):
                                        w = exy * ekz[icz, jdz, ph]
                                        if w == 0.0:
                                            continue
                                        if (tau + nu + ph) & 1:
                                            w = -w
                                        ib = 0
                                        for t in range(tb):
                                            for u in range(tb):
                                                for v in range(tb):
                                                    g[ib, kc] += w * r4[0, t + tau, u + nu, v + ph]
                                                    ib += 1
                    for ma in range(nca_c):
                        iax = comp_x[la, ma]
                        iay = comp_y[la, ma]
                        iaz = comp_z[la, ma]
                        for nb in range(ncb_c):
                            jbx = comp_x[lb, nb]
                            jby = comp_y[lb, nb]
                            jbz = comp_z[lb, nb]
                            kb = ma * ncb_c + nb
                            for kc in range(ncd):
                                acc = 0.0
                                for t in range(iax + jbx + 1):
                                    etx = eax[iax, jbx, t]
                                    if etx == 0.0:
                                        continue
                                    for u in range(iay + jby + 1):
                                        etxy = etx * eay[iay, jby, u]
                                        if etxy == 0.0:
                                            continue
                                        for v in range(iaz + jbz + 1):
                                            w = etxy * eaz[iaz, jbz, v]
                                            if w != 0.0:
                                                acc += w * g[(t * tb + u) * tb + v, kc]
                                prim[kb, kc] = pref * acc
                    for ca in range(cola):
                        wa = pcoef[sh_c0[s1] + ipa * cola + ca]
                        for cb in range(colb):
                            wab = wa * pcoef[sh_c0[s2] + ipb * colb + cb]
                            for cc in range(colc):
                                wabc = wab * pcoef[sh_c0[s3] + ipc * colc + cc]
                                for cd in range(cold):
                                    w = wabc * pcoef[sh_c0[s4] + ipd * cold + cd]
                                    if w == 0.0:
                                        continue
                                    for ma in range(nca_c):
                                        ia = ca * nca_c + ma
                                        for nb in range(ncb_c):
                                            kb = ma * ncb_c + nb
                                            jb = cb * ncb_c + nb
                                            for mc in range(ncc_c):
                                                ic = cc * ncc_c + mc
                                                for nd in range(ncd_c):
                                                    blk[ia, jb, ic, cd * ncd_c + nd] += (
                                                        w * prim[kb, mc * ncd_c + nd])


@maybe_njit
def _sph_axis(src, dst, n0, n1, n2, n3, axis, l, ncols, c2s):
    """Cartesian -> spherical transform of one axis of a 4D block.

    The transformed axis has length ncols * ncart(l) in src and
    ncols * (2l+1) in dst; the other axis lengths (n0..n3, with the
    transformed slot ignored) pass through unchanged.
    """
    ncart = (l + 1) * (l + 2) // 2
    nsph = 2 * l + 1
    if axis == 0:
        for c in range(ncols):
            for m in range(nsph):
                for j in range(n1):
                    for k in range(n2):
                        for q in range(n3):
                            acc = 0.0
                            for mu in range(ncart):
                                w = c2s[l, m, mu]
                                if w != 0.0:
                                    acc += w * src[c * ncart + mu, j, k, q]
                            dst[c * nsph + m, j, k, q] = acc
    elif axis == 1:
        for i in range(n0):
            for c in range(ncols):
                for m in range(nsph):
                    for k in range(n2):
                        for q in range(n3):
                            acc = 0.0
                            for mu in range(ncart):
                                w = c2s[l, m, mu]
                                if w != 0.0:
                                    acc += w * src[i, c * ncart + mu, k, q]
                            dst[i, c * nsph + m, k, q] = acc
    elif axis == 2:
        for i in range(n0):
            for j in range(n1):
                for c in range(ncols):
                    for m in range(nsph):
                        for q in range(n3):
                            acc = 0.0
                            for mu in range(ncart):
                                w = c2s[l, m, mu]
                                if w != 0.0:
                                    acc += w * src[i, j, c * ncart + mu, q]
                            dst[i, j, c * nsph + m, q] = acc
    else:
        for i in range(n0):
            for j in range(n1):
                for k in range(n2):
                    for c in range(ncols):
                        for m in range(nsph):
                            acc = 0.0
                            for mu in range(ncart):
                                w = c2s[l, m, mu]
                                if w != 0.0:
                                    acc += w * src[i, j, k, c * ncart + mu]
                            dst[i, j, k, c * nsph + m] = acc


@maybe_njit
def _quartet_sph(s1, s2, s3, s4,
                 sh_l, sh_cx, sh_p0, sh_np, sh_c0, sh_nc,
                 pexp, pcoef, comp_x, comp_y, comp_z, ncart_l, c2s,
                 grid, dxb, switch,
                 fm, eax, eay, eaz, ekx, eky, ekz, r4, g, prim, blk, tmp):
    """Spherical contracted ERI block for one quartet; result left in tmp.

    Returns the four spherical block dimensions.
    """
    _eri_quartet_cart(s1, s2, s3, s4, sh_l, sh_cx, sh_p0, sh_np, sh_c0, sh_nc,
                      pexp, pcoef, comp_x, comp_y, comp_z, ncart_l,
                      grid, dxb, switch,
                      fm, eax, eay, eaz, ekx, eky, ekz, r4, g, prim, blk)
    la, lb, lc, ld = sh_l[s1], sh_l[s2], sh_l[s3], sh_l[s4]
    ca, cb, cc, cd = sh_nc[s1], sh_nc[s2], sh_nc[s3], sh_nc[s4]
    d0c = ca * ncart_l[la]
    d1c = cb * ncart_l[lb]
    d2c = cc * ncart_l[lc]
    d3c = cd * ncart_l[ld]
    d0 = ca * (2 * la + 1)
    d1 = cb * (2 * lb + 1)
    d2 = cc * (2 * lc + 1)
    d3 = cd * (2 * ld + 1)
    _sph_axis(blk, tmp, d0c, d1c, d2c, d3c, 0, la, ca, c2s)
    _sph_axis(tmp, blk, d0, d1c, d2c, d3c, 1, lb, cb, c2s)
    _sph_axis(blk, tmp, d0, d1, d2c, d3c, 2, lc, cc, c2s)
    _sph_axis(tmp, blk, d0, d1, d2, d3c, 3, ld, cd, c2s)
    for i in range(d0):
        for j in range(d1):
            for k in range(d2):
                for m in range(d3):
                    tmp[i, j, k, m] = blk[i, j, k, m]
    return d0, d1, d2, d3


@maybe_njit
def schwarz_kernel(sh_l, sh_cx, sh_p0, sh_np, sh_c0, sh_nc,
                   pexp, pcoef, comp_x, comp_y, comp_z, ncart_l, c2s,
                   grid, dxb, switch, pair_i, pair_j, lmax, blkmax):
    """Per-shell-pair Schwarz factors sqrt(max |(ab|ab)|)."""
    npair = pair_i.shape[0]
    lq = 4 * lmax
    fm = np.zeros(lq + 7)
    edim = (lmax + 1, lmax + 1, 2 * lmax + 1)
    eax = np.zeros(edim)
    eay = np.zeros(edim)
    eaz = np.zeros(edim)
    ekx = np.zeros(edim)
    eky = np.zeros(edim)
    ekz = np.zeros(edim)
    r4 = np.zeros((lq + 1, lq + 1, lq + 1, lq + 1))
    tbm = 2 * lmax + 1
    g = np.zeros((tbm * tbm * tbm, blkmax * blkmax))
    prim = np.zeros((blkmax * blkmax, blkmax * blkmax))
    blk = np.zeros((blkmax, blkmax, blkmax, blkmax))
    tmp = np.zeros((blkmax, blkmax, blkmax, blkmax))
    qsp = np.zeros(npair)
    for sp in range(npair):
        s1 = pair_i[sp]
        s2 = pair_j[sp]
        d0, d1, d2, d3 = _quartet_sph(
            s1, s2, s1, s2, sh_l, sh_cx, sh_p0, sh_np, sh_c0, sh_nc,
            pexp, pcoef, comp_x, comp_y, comp_z, ncart_l, c2s,
            grid, dxb, switch,
            fm, eax, eay, eaz, ekx, eky, ekz, r4, g, prim, blk, tmp)
        top = 0.0
        for i in range(d0):
            for j in range(d1):
                v = abs(tmp[i, j, i, j])
                if v > top:
                    top = v
        qsp[sp] = math.sqrt(top)
    return qsp


@maybe_njit
def eri_kernel(sh_l, sh_cx, sh_p0, sh_np, sh_c0, sh_nc, sh_ao0,
               pexp, pcoef, comp_x, comp_y, comp_z, ncart_l, c2s,
               grid, dxb, switch, pair_i, pair_j, qsp, thresh,
               lmax, blkmax, out):
    """Full spherical-AO ERI tensor (chemist notation), 8-fold symmetric.

    Canonical quartets only (s1>=s2, s3>=s4, bra pair >= ket pair); each
    block is mirrored to the eight symmetry positions, so overlapping
    writes always carry identical values.
    """
    npair = pair_i.shape[0]
    lq = 4 * lmax
    fm = np.zeros(lq + 7)
    edim = (lmax + 1, lmax + 1, 2 * lmax + 1)
    eax = np.zeros(edim)
    eay = np.zeros(edim)
    eaz = np.zeros(edim)
    ekx = np.zeros(edim)
    eky = np.zeros(edim)
    ekz = np.zeros(edim)
    r4 = np.zeros((lq + 1, lq + 1, lq + 1, lq + 1))
    tbm = 2 * lmax + 1
    g = np.zeros((tbm * tbm * tbm, blkmax * blkmax))
    prim = np.zeros((blkmax * blkmax, blkmax * blkmax))
    blk = np.zeros((blkmax, blkmax, blkmax, blkmax))
    tmp = np.zeros((blkmax, blkmax, blkmax, blkmax))
    for sp1 in range(npair):
        s1 = pair_i[sp1]
        s2 = pair_j[sp1]
        o1 = sh_ao0[s1]
        o2 = sh_ao0[s2]
        for sp2 in range(sp1 + 1):
            if qsp[sp1] * qsp[sp2] < thresh:
                continue
            s3 = pair_i[sp2]
            s4 = pair_j[sp2]
            o3 = sh_ao0[s3]
            o4 = sh_ao0[s4]
            d0, d1, d2, d3 = _quartet_sph(
                s1, s2, s3, s4, sh_l, sh_cx, sh_p0, sh_np, sh_c0, sh_nc,
                pexp, pcoef, comp_x, comp_y, comp_z, ncart_l, c2s,
                grid, dxb, switch,
                fm, eax, eay, eaz, ekx, eky, ekz, r4, g, prim, blk, tmp)
            for i in range(d0):
                for j in range(d1):
                    for k in range(d2):
                        for m in range(d3):
                            p = o1 + i
                            q = o2 + j
                            r = o3 + k
                            s = o4 + m
                            # keep one representative per symmetry orbit so
                            # mirror writes never clobber each other
                            if s1 == s2 and q > p:
                                continue
                            if s3 == s4 and s > r:
                                continue
                            if sp1 == sp2 and (r * (r + 1)) // 2 + s > (p * (p + 1)) // 2 + q:
                                continue
                            v = tmp[i, j, k, m]
                            out[p, q, r, s] = v
                            out[q, p, r, s] = v
                            out[p, q, s, r] = v
                            out[q, p, s, r] = v
                            out[r, s, p, q] = v
                            out[s, r, p, q] = v
                            out[r, s, q, p] = v
                            out[s, r, q, p] = v


@maybe_njit
def oe_kernel(sh_l, sh_cx, sh_p0, sh_np, sh_c0, sh_nc, sh_ao0,
              pexp, pcoef, comp_x, comp_y, comp_z, ncart_l, c2s,
              grid, dxb, switch, zval, zpos,
              lmax, blkmax, smat, tmat, vmat):
    """Overlap, kinetic, and nuclear-attraction matrices over spherical AOs.

    Kinetic uses the one-dimensional l+/-2 ladder on the ket exponent;
    nuclear attraction loops the Hermite-Coulomb R ladder per nucleus.
    """
    ns = sh_l.shape[0]
    lq = 2 * lmax
    fm = np.zeros(lq + 7)
    # ket index needs l+2 for the kinetic ladder
    ex = np.zeros((lmax + 1, lmax + 3, 2 * lmax + 3))
    ey = np.zeros((lmax + 1, lmax + 3, 2 * lmax + 3))
    ez = np.zeros((lmax + 1, lmax + 3, 2 * lmax + 3))
    r4 = np.zeros((lq + 1, lq + 1, lq + 1, lq + 1))
    sblk = np.zeros((blkmax, blkmax))
    tblk = np.zeros((blkmax, blkmax))
    vblk = np.zeros((blkmax, blkmax))
    s4 = np.zeros((blkmax, blkmax, 1, 1))
    t4 = np.zeros((blkmax, blkmax, 1, 1))
    v4 = np.zeros((blkmax, blkmax, 1, 1))
    w4 = np.zeros((blkmax, blkmax, 1, 1))
    natom = zval.shape[0]
    for s1 in range(ns):
        la = sh_l[s1]
        nca = ncart_l[la]
        cola = sh_nc[s1]
        for s2 in range(s1 + 1):
            lb = sh_l[s2]
            ncb = ncart_l[lb]
            colb = sh_nc[s2]
            bda = cola * nca
            bdb = colb * ncb
            for i in range(bda):
                for j in range(bdb):
                    sblk[i, j] = 0.0
                    tblk[i, j] = 0.0
                    vblk[i, j] = 0.0
            abx = sh_cx[s1, 0] - sh_cx[s2, 0]
            aby = sh_cx[s1, 1] - sh_cx[s2, 1]
            abz = sh_cx[s1, 2] - sh_cx[s2, 2]
            L = la + lb
            for ipa in range(sh_np[s1]):
                a = pexp[sh_p0[s1] + ipa]
                for ipb in range(sh_np[s2]):
                    b = pexp[sh_p0[s2] + ipb]
                    p = a + b
                    px = (a * sh_cx[s1, 0] + b * sh_cx[s2, 0]) / p
                    py = (a * sh_cx[s1, 1] + b * sh_cx[s2, 1]) / p
                    pz = (a * sh_cx[s1, 2] + b * sh_cx[s2, 2]) / p
                    _fill_e(ex, la, lb + 2, a, b, abx)
                    _fill_e(ey, la, lb + 2, a, b, aby)
                    _fill_e(ez, la, lb + 2, a, b, abz)
                    sq = math.sqrt(math.pi / p)
                    for ma in range(nca):
                        iax = comp_x[la, ma]
                        iay = comp_y[la, ma]
                        iaz = comp_z[la, ma]
                        for nb in range(ncb):
                            jx = comp_x[lb, nb]
                            jy = comp_y[lb, nb]
                            jz = comp_z[lb, nb]
                            sx = ex[iax, jx, 0] * sq
                            sy = ey[iay, jy, 0] * sq
                            sz = ez[iaz, jz, 0] * sq
                            txx = -2.0 * b * b * ex[iax, jx + 2, 0] * sq \
                                + b * (2.0 * jx + 1.0) * sx
                            tyy = -2.0 * b * b * ey[iay, jy + 2, 0] * sq \
                                + b * (2.0 * jy + 1.0) * sy
                            tzz = -2.0 * b * b * ez[iaz, jz + 2, 0] * sq \
                                + b * (2.0 * jz + 1.0) * sz
                            if jx > 1:
                                txx -= 0.5 * jx * (jx - 1.0) * ex[iax, jx - 2, 0] * sq
                            if jy > 1:
                                tyy -= 0.5 * jy * (jy - 1.0) * ey[iay, jy - 2, 0] * sq
                            if jz > 1:
                                tzz -= 0.5 * jz * (jz - 1.0) * ez[iaz, jz - 2, 0] * sq
                            sval = sx * sy * sz
                            tval = txx * sy * sz + sx * tyy * sz + sx * sy * tzz
                            vval = 0.0
                            for ia in range(natom):
                                dx = px - zpos[ia, 0]
                                dy = py - zpos[ia, 1]
                                dz = pz - zpos[ia, 2]
                                targ = p * (dx * dx + dy * dy + dz * dz)
                                boys_fill(fm, L, targ, grid, dxb, switch)
                                _fill_r(r4, L, p, dx, dy, dz, fm)
                                acc = 0.0
                                for t in range(iax + jx + 1):
                                    etx = ex[iax, jx, t]
                                    if etx == 0.0:
                                        continue
                                    for u in range(iay + jy + 1):
                                        etxy = etx * ey[iay, jy, u]
                                        if etxy == 0.0:
                                            continue
                                        for v in range(iaz + jz + 1):
                                            w = etxy * ez[iaz, jz, v]
                                            if w != 0.0:
                                                acc += w * r4[0, t, u, v]
                                vval -= zval[ia] * acc
                            vval *= 2.0 * math.pi / p
                            for ca in range(cola):
                                wa = pcoef[sh_c0[s1] + ipa * cola + ca]
                                for cb in range(colb):
                                    w = wa * pcoef[sh_c0[s2] + ipb * colb + cb]
                                    if w == 0.0:
                                        continue
                                    i = ca * nca + ma
                                    j = cb * ncb + nb
                                    sblk[i, j] += w * sval
                                    tblk[i, j] += w * tval
                                    vblk[i, j] += w * vval
            # spherical transform (two axes) and symmetric scatter
            d0 = cola * (2 * la + 1)
            d1 = colb * (2 * lb + 1)
            for i in range(bda):
                for j in range(bdb):
                    s4[i, j, 0, 0] = sblk[i, j]
                    t4[i, j, 0, 0] = tblk[i, j]
                    v4[i, j, 0, 0] = vblk[i, j]
            o1 = sh_ao0[s1]
            o2 = sh_ao0[s2]
            _sph_axis(s4, w4, bda, bdb, 1, 1, 0, la, cola, c2s)
            _sph_axis(w4, s4, d0, bdb, 1, 1, 1, lb, colb, c2s)
            _sph_axis(t4, w4, bda, bdb, 1, 1, 0, la, cola, c2s)
            _sph_axis(w4, t4, d0, bdb, 1, 1, 1, lb, colb, c2s)
            _sph_axis(v4, w4, bda, bdb, 1, 1, 0, la, cola, c2s)
            _sph_axis(w4, v4, d0, bdb, 1, 1, 1, lb, colb, c2s)
            for i in range(d0):
                for j in range(d1):
                    smat[o1 + i, o2 + j] = s4[i, j, 0, 0]
                    smat[o2 + j, o1 + i] = s4[i, j, 0, 0]
                    tmat[o1 + i, o2 + j] = t4[i, j, 0, 0]
                    tmat[o2 + j, o1 + i] = t4[i, j, 0, 0]
                    vmat[o1 + i, o2 + j] = v4[i, j, 0, 0]
                    vmat[o2 + j, o1 + i] = v4[i, j, 0, 0]
