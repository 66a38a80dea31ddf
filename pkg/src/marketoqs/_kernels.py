"""Numba kernels for the banded dissipator and the fixed-step integrators."""
import numba
import numpy as np


@numba.njit(cache=True, fastmath={"contract"})
def banded_dissipator(rho, out, p_ob, p_oc, p_b, p_c, p_coef, k_off, k_dat):
    """out = sum_p coef_p * B_p rho C_p + K rho + rho K   (K already holds the -1/2).

    Row-indexed bands: ``B[i, i+ob] = p_b[p, i]``, ``C[l, l+oc] = p_c[p, l]``,
    ``K[l, l+o] = k_dat[k, l]``.  Each output row is finished before the next
    one starts, so rows could be split across workers without changing bits.
    """
    n = rho.shape[0]
    npairs = p_ob.shape[0]
    nk = k_off.shape[0]
    for i in range(n):
        orow = out[i]
        for j in range(n):
            orow[j] = 0.0
        for p in range(npairs):
            r = i + p_ob[p]
            if r < 0 or r >= n:
                continue
            bi = p_coef[p] * p_b[p, i]
            if bi == 0.0:
                continue
            oc = p_oc[p]
            lo = max(0, -oc)
            hi = min(n, n - oc)
            # shifted views keep offset arithmetic out of the loop so it vectorises
            dst = orow[lo + oc:hi + oc]
            src = rho[r, lo:hi]
            wgt = p_c[p, lo:hi]
            for l in range(hi - lo):
                dst[l] += bi * (src[l] * wgt[l])
        irow = rho[i]
        for k in range(nk):
            o = k_off[k]
            r = i + o
            if 0 <= r < n:
                kv = k_dat[k, i]
                if kv != 0.0:
                    rrow = rho[r]
                    for j in range(n):
                        orow[j] += kv * rrow[j]
            lo = max(0, -o)
            hi = min(n, n - o)
            dst = orow[lo + o:hi + o]
            src = irow[lo:hi]
            wgt = k_dat[k, lo:hi]
            for l in range(hi - lo):
                dst[l] += src[l] * wgt[l]


@numba.njit(cache=True, fastmath={"contract"})
def axpy_into(out, y, a, k):
    """out = y + a * k"""
    n, m = y.shape
    for i in range(n):
        for j in range(m):
            out[i, j] = y[i, j] + a * k[i, j]


@numba.njit(cache=True, fastmath={"contract"})
def rk4_combine(y, h, k1, k2, k3, k4):
    """y += h/6 * (k1 + 2 k2 + 2 k3 + k4), in place."""
    n, m = y.shape
    c = h / 6.0
    for i in range(n):
        for j in range(m):
            y[i, j] += c * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])


@numba.njit(cache=True)
def trace_of(y):
    s = y[0, 0] * 0.0
    for i in range(y.shape[0]):
        s += y[i, i]
    return s


@numba.njit(cache=True)
def hermitian_defect(y):
    n = y.shape[0]
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = abs(y[i, j] - np.conj(y[j, i]))
            if d > worst:
                worst = d
        d = abs(y[i, i] - np.conj(y[i, i]))
        if d > worst:
            worst = d
    return worst
