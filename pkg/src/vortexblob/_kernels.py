"""Jitted O(N^2) pairwise kernels, specialized to the unit disk.

Every target's source sum runs in ascending source order with Kahan
compensation, so results are bit-identical no matter how targets are
chunked across threads.  fastmath stays off: it would license the compiler
to delete the compensation terms and reassociate sums.

Notation inside the kernels: A accumulates the free-space log-kernel
gradient sum, B the regular-part gradient sum, C the regular-part value
sum (needed only where grad theta is nonzero).  The returned velocity is

    v = (1/2pi) * J(-A + theta * B + 0.5 * C * grad_theta)

with J(p, q) = (q, -p).  The disk regular part uses
q = |x|^2 |y|^2 - 2 x.y + 1, grad_x h = -(x |y|^2 - y) / (2 pi q),
h = -ln(q) / (4 pi).  Sources with chi = 0 are skipped before any q math:
for points outside the closed disk q can vanish at image points.
"""

import numpy as np
from numba import njit

INV_2PI = 1.0 / (2.0 * np.pi)


@njit(cache=True, nogil=True, error_model="numpy")
def _theta_disk(dist, lo, hi):
    if dist <= lo:
        return 0.0
    if dist >= hi:
        return 1.0
    t = (dist - lo) / (hi - lo)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


@njit(cache=True, nogil=True, error_model="numpy")
def vel_cutoff(src, w, wchi, syy, tgt, skip, rho0, t0, t1, out, minr2):
    lo = rho0 / 3.0
    hi = rho0 / 2.0
    band = hi - lo
    n = src.shape[0]
    for i in range(t0, t1):
        xt = tgt[i, 0]
        yt = tgt[i, 1]
        xx = xt * xt + yt * yt
        dist = 1.0 - np.sqrt(xx)
        th = _theta_disk(dist, lo, hi)
        need_h = dist > lo
        in_band = lo < dist < hi
        sk = skip[i]
        ax = 0.0
        ay = 0.0
        cax = 0.0
        cay = 0.0
        bx = 0.0
        by = 0.0
        cbx = 0.0
        cby = 0.0
        cc = 0.0
        ccc = 0.0
        mr2 = np.inf
        for j in range(n):
            xs = src[j, 0]
            ys = src[j, 1]
            wj = w[j]
            wc = wchi[j]
            if j == sk:
                # a particle's own log-kernel term is skipped, but its
                # smooth boundary contribution stays in
                if need_h and wc != 0.0:
                    yyj = syy[j]
                    q = xx * yyj - 2.0 * (xt * xs + yt * ys) + 1.0
                    iq = 1.0 / q
                    v = wc * (xt * yyj - xs) * iq - cbx
                    t_ = bx + v
                    cbx = (t_ - bx) - v
                    bx = t_
                    v = wc * (yt * yyj - ys) * iq - cby
                    t_ = by + v
                    cby = (t_ - by) - v
                    by = t_
                    if in_band:
                        v = wc * np.log(q) - ccc
                        t_ = cc + v
                        ccc = (t_ - cc) - v
                        cc = t_
                continue
            dx = xt - xs
            dy = yt - ys
            r2 = dx * dx + dy * dy
            if r2 < mr2:
                mr2 = r2
            if need_h and wc != 0.0:
                yyj = syy[j]
                q = xx * yyj - 2.0 * (xt * xs + yt * ys) + 1.0
                inv = 1.0 / (r2 * q)
                ir2 = inv * q
                iq = inv * r2
                v = wj * dx * ir2 - cax
                t_ = ax + v
                cax = (t_ - ax) - v
                ax = t_
                v = wj * dy * ir2 - cay
                t_ = ay + v
                cay = (t_ - ay) - v
                ay = t_
                v = wc * (xt * yyj - xs) * iq - cbx
                t_ = bx + v
                cbx = (t_ - bx) - v
                bx = t_
                v = wc * (yt * yyj - ys) * iq - cby
                t_ = by + v
                cby = (t_ - by) - v
                by = t_
                if in_band:
                    v = wc * np.log(q) - ccc
                    t_ = cc + v
                    ccc = (t_ - cc) - v
                    cc = t_
            else:
                ir2 = 1.0 / r2
                v = wj * dx * ir2 - cax
                t_ = ax + v
                cax = (t_ - ax) - v
                ax = t_
                v = wj * dy * ir2 - cay
                t_ = ay + v
                cay = (t_ - ay) - v
                ay = t_
        px = -ax + th * bx
        py = -ay + th * by
        if in_band:
            t = (dist - lo) / band
            u = 1.0 - t
            sp = 30.0 * t * t * u * u / band
            rad = np.sqrt(xx)
            gtx = -sp * xt / rad
            gty = -sp * yt / rad
            px += 0.5 * cc * gtx
            py += 0.5 * cc * gty
        out[i, 0] = INV_2PI * py
        out[i, 1] = -INV_2PI * px
        minr2[i] = mr2


@njit(cache=True, nogil=True, error_model="numpy")
def vel_exact(src, w, syy, tgt, skip, t0, t1, out, minr2):
    # full Green function, no cutoffs; valid only for points inside the disk
    n = src.shape[0]
    for i in range(t0, t1):
        xt = tgt[i, 0]
        yt = tgt[i, 1]
        xx = xt * xt + yt * yt
        sk = skip[i]
        ax = 0.0
        ay = 0.0
        cax = 0.0
        cay = 0.0
        bx = 0.0
        by = 0.0
        cbx = 0.0
        cby = 0.0
        mr2 = np.inf
        for j in range(n):
            xs = src[j, 0]
            ys = src[j, 1]
            wj = w[j]
            yyj = syy[j]
            if j == sk:
                q = xx * yyj - 2.0 * (xt * xs + yt * ys) + 1.0
                iq = 1.0 / q
                v = wj * (xt * yyj - xs) * iq - cbx
                t_ = bx + v
                cbx = (t_ - bx) - v
                bx = t_
                v = wj * (yt * yyj - ys) * iq - cby
                t_ = by + v
                cby = (t_ - by) - v
                by = t_
                continue
            dx = xt - xs
            dy = yt - ys
            r2 = dx * dx + dy * dy
            if r2 < mr2:
                mr2 = r2
            q = xx * yyj - 2.0 * (xt * xs + yt * ys) + 1.0
            inv = 1.0 / (r2 * q)
            ir2 = inv * q
            iq = inv * r2
            v = wj * dx * ir2 - cax
            t_ = ax + v
            cax = (t_ - ax) - v
            ax = t_
            v = wj * dy * ir2 - cay
            t_ = ay + v
            cay = (t_ - ay) - v
            ay = t_
            v = wj * (xt * yyj - xs) * iq - cbx
            t_ = bx + v
            cbx = (t_ - bx) - v
            bx = t_
            v = wj * (yt * yyj - ys) * iq - cby
            t_ = by + v
            cby = (t_ - by) - v
            by = t_
        th = 1.0
        px = -ax + th * bx
        py = -ay + th * by
        out[i, 0] = INV_2PI * py
        out[i, 1] = -INV_2PI * px
        minr2[i] = mr2


@njit(cache=True, nogil=True, error_model="numpy")
def vel_kblob(src, w, wchi, syy, sblob, tgt, tblob, skip, rho0, cut2, t0, t1, out, minr2):
    # intra-blob pairs use the exact log kernel, inter-blob pairs the
    # smoothed one (gradient 1/max(r^2, cut^2)); the boundary term sums
    # over all blobs
    lo = rho0 / 3.0
    hi = rho0 / 2.0
    band = hi - lo
    n = src.shape[0]
    for i in range(t0, t1):
        xt = tgt[i, 0]
        yt = tgt[i, 1]
        bi = tblob[i]
        xx = xt * xt + yt * yt
        dist = 1.0 - np.sqrt(xx)
        th = _theta_disk(dist, lo, hi)
        need_h = dist > lo
        in_band = lo < dist < hi
        sk = skip[i]
        ax = 0.0
        ay = 0.0
        cax = 0.0
        cay = 0.0
        bx = 0.0
        by = 0.0
        cbx = 0.0
        cby = 0.0
        cc = 0.0
        ccc = 0.0
        mr2 = np.inf
        for j in range(n):
            xs = src[j, 0]
            ys = src[j, 1]
            wj = w[j]
            wc = wchi[j]
            if j == sk:
                if need_h and wc != 0.0:
                    yyj = syy[j]
                    q = xx * yyj - 2.0 * (xt * xs + yt * ys) + 1.0
                    iq = 1.0 / q
                    v = wc * (xt * yyj - xs) * iq - cbx
                    t_ = bx + v
                    cbx = (t_ - bx) - v
                    bx = t_
                    v = wc * (yt * yyj - ys) * iq - cby
                    t_ = by + v
                    cby = (t_ - by) - v
                    by = t_
                    if in_band:
                        v = wc * np.log(q) - ccc
                        t_ = cc + v
                        ccc = (t_ - cc) - v
                        cc = t_
                continue
            dx = xt - xs
            dy = yt - ys
            r2 = dx * dx + dy * dy
            same = sblob[j] == bi
            if same:
                dg = r2
                if r2 < mr2:
                    mr2 = r2
            else:
                dg = r2 if r2 > cut2 else cut2
            if need_h and wc != 0.0:
                yyj = syy[j]
                q = xx * yyj - 2.0 * (xt * xs + yt * ys) + 1.0
                inv = 1.0 / (dg * q)
                ig = inv * q
                iq = inv * dg
                v = wj * dx * ig - cax
                t_ = ax + v
                cax = (t_ - ax) - v
                ax = t_
                v = wj * dy * ig - cay
                t_ = ay + v
                cay = (t_ - ay) - v
                ay = t_
                v = wc * (xt * yyj - xs) * iq - cbx
                t_ = bx + v
                cbx = (t_ - bx) - v
                bx = t_
                v = wc * (yt * yyj - ys) * iq - cby
                t_ = by + v
                cby = (t_ - by) - v
                by = t_
                if in_band:
                    v = wc * np.log(q) - ccc
                    t_ = cc + v
                    ccc = (t_ - cc) - v
                    cc = t_
            else:
                ig = 1.0 / dg
                v = wj * dx * ig - cax
                t_ = ax + v
                cax = (t_ - ax) - v
                ax = t_
                v = wj * dy * ig - cay
                t_ = ay + v
                cay = (t_ - ay) - v
                ay = t_
        px = -ax + th * bx
        py = -ay + th * by
        if in_band:
            t = (dist - lo) / band
            u = 1.0 - t
            sp = 30.0 * t * t * u * u / band
            rad = np.sqrt(xx)
            gtx = -sp * xt / rad
            gty = -sp * yt / rad
            px += 0.5 * cc * gtx
            py += 0.5 * cc * gty
        out[i, 0] = INV_2PI * py
        out[i, 1] = -INV_2PI * px
        minr2[i] = mr2


@njit(cache=True, nogil=True, error_model="numpy")
def force_cutoff(src, wchi, syy, tgt, rho0, t0, t1, out):
    # boundary force alone: F = J grad(theta(x) * sum_j wchi_j h(x, p_j))
    lo = rho0 / 3.0
    hi = rho0 / 2.0
    band = hi - lo
    n = src.shape[0]
    for i in range(t0, t1):
        xt = tgt[i, 0]
        yt = tgt[i, 1]
        xx = xt * xt + yt * yt
        dist = 1.0 - np.sqrt(xx)
        th = _theta_disk(dist, lo, hi)
        need_h = dist > lo
        in_band = lo < dist < hi
        if not need_h:
            out[i, 0] = 0.0
            out[i, 1] = 0.0
            continue
        bx = 0.0
        by = 0.0
        cbx = 0.0
        cby = 0.0
        cc = 0.0
        ccc = 0.0
        for j in range(n):
            wc = wchi[j]
            if wc == 0.0:
                continue
            xs = src[j, 0]
            ys = src[j, 1]
            yyj = syy[j]
            q = xx * yyj - 2.0 * (xt * xs + yt * ys) + 1.0
            iq = 1.0 / q
            v = wc * (xt * yyj - xs) * iq - cbx
            t_ = bx + v
            cbx = (t_ - bx) - v
            bx = t_
            v = wc * (yt * yyj - ys) * iq - cby
            t_ = by + v
            cby = (t_ - by) - v
            by = t_
            if in_band:
                v = wc * np.log(q) - ccc
                t_ = cc + v
                ccc = (t_ - cc) - v
                cc = t_
        fpx = th * bx
        fpy = th * by
        if in_band:
            t = (dist - lo) / band
            u = 1.0 - t
            sp = 30.0 * t * t * u * u / band
            rad = np.sqrt(xx)
            gtx = -sp * xt / rad
            gty = -sp * yt / rad
            fpx += 0.5 * cc * gtx
            fpy += 0.5 * cc * gty
        out[i, 0] = -INV_2PI * fpy
        out[i, 1] = INV_2PI * fpx


@njit(cache=True, nogil=True, error_model="numpy")
def gamma_momentum(src, w):
    """Log-kernel part of d/dt sum_j w_j p_j, over all ordered pairs.

    Pair products are formed as (w_i * w_j) * dx * (1/r^2), so the (i, j)
    and (j, i) terms are exact bitwise negatives; a Neumaier sum in fixed
    order leaves only compensation-level residue.
    """
    n = src.shape[0]
    sx = 0.0
    sy = 0.0
    cx = 0.0
    cy = 0.0
    for i in range(n):
        xi = src[i, 0]
        yi = src[i, 1]
        wi = w[i]
        for j in range(n):
            if j == i:
                continue
            dx = xi - src[j, 0]
            dy = yi - src[j, 1]
            inv = 1.0 / (dx * dx + dy * dy)
            ww = wi * w[j]
            tx = ww * dx * inv
            ty = ww * dy * inv
            t_ = sx + tx
            if abs(sx) >= abs(tx):
                cx += (sx - t_) + tx
            else:
                cx += (tx - t_) + sx
            sx = t_
            t_ = sy + ty
            if abs(sy) >= abs(ty):
                cy += (sy - t_) + ty
            else:
                cy += (ty - t_) + sy
            sy = t_
    gx = -INV_2PI * (sx + cx)
    gy = -INV_2PI * (sy + cy)
    # J(gx, gy)
    return np.array([gy, -gx])


@njit(cache=True, nogil=True, error_model="numpy")
def min_pair_dist2(src):
    n = src.shape[0]
    m = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            dx = src[i, 0] - src[j, 0]
            dy = src[i, 1] - src[j, 1]
            r2 = dx * dx + dy * dy
            if r2 < m:
                m = r2
    return m


@njit(cache=True, nogil=True, error_model="numpy")
def lipschitz_quotient(pos, f):
    """max over point pairs of |f_i - f_j| / |p_i - p_j|."""
    n = pos.shape[0]
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            r2 = dx * dx + dy * dy
            if r2 < 1e-30:
                continue
            fx = f[i, 0] - f[j, 0]
            fy = f[i, 1] - f[j, 1]
            q2 = (fx * fx + fy * fy) / r2
            if q2 > best:
                best = q2
    return np.sqrt(best)
