# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in :mod:`tilecocycle._fallback`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, log, fabs, sqrt, M_PI

cnp.import_array()


def fourier_level(const long long[:] parent, const long long[:] child, const double[:, :] offsets,
                  const double[:] lam, int M):
    cdef Py_ssize_t E = parent.shape[0], d = lam.shape[0], e, a
    cdef double ph
    out_np = np.zeros((M, M), dtype=np.complex128)
    cdef double[:, :] re = np.zeros((M, M))
    cdef double[:, :] im = np.zeros((M, M))
    for e in range(E):
        ph = 0.0
        for a in range(d):
            ph += offsets[e, a] * lam[a]
        ph = -2.0 * M_PI * ph
        re[parent[e], child[e]] += cos(ph)
        im[parent[e], child[e]] += sin(ph)
    out_np.real = np.asarray(re)
    out_np.imag = np.asarray(im)
    return out_np


cdef void _cmul(Py_ssize_t M, double[:, :] ar, double[:, :] ai, double[:, :] br, double[:, :] bi,
                double[:, :] cr, double[:, :] ci) noexcept nogil:
    cdef Py_ssize_t i, j, l
    cdef double sr, si
    for i in range(M):
        for j in range(M):
            sr = 0.0
            si = 0.0
            for l in range(M):
                sr += ar[i, l] * br[l, j] - ai[i, l] * bi[l, j]
                si += ar[i, l] * bi[l, j] + ai[i, l] * br[l, j]
            cr[i, j] = sr
            ci[i, j] = si


def chain_product(mats, int every):
    cdef Py_ssize_t K = mats.shape[0], M = mats.shape[1], t, i, j
    cdef double[:, :, :] mr = np.ascontiguousarray(np.real(mats), dtype=np.float64)
    cdef double[:, :, :] mi = np.ascontiguousarray(np.imag(mats), dtype=np.float64)
    cdef double[:, :] pr = np.eye(M)
    cdef double[:, :] pi = np.zeros((M, M))
    cdef double[:, :] qr = np.zeros((M, M))
    cdef double[:, :] qi = np.zeros((M, M))
    cdef double s, v, logscale = 0.0
    for t in range(K):
        _cmul(M, mr[t], mi[t], pr, pi, qr, qi)
        pr, qr = qr, pr
        pi, qi = qi, pi
        if (t + 1) % every == 0:
            s = 0.0
            for i in range(M):
                for j in range(M):
                    v = sqrt(pr[i, j] * pr[i, j] + pi[i, j] * pi[i, j])
                    if v > s:
                        s = v
            if s > 0:
                for i in range(M):
                    for j in range(M):
                        pr[i, j] /= s
                        pi[i, j] /= s
                logscale += log(s)
    out = np.asarray(pr) + 1j * np.asarray(pi)
    return out, logscale


def chain_log_norms(mats, marks):
    cdef double[:, :, :] A = np.ascontiguousarray(mats, dtype=np.float64)
    cdef long long[:] mk = np.ascontiguousarray(marks, dtype=np.int64)
    cdef Py_ssize_t n = A.shape[0], M = A.shape[1], t, i, j, l, k = 0
    cdef double[:, :] P = np.eye(M)
    cdef double[:, :] Q = np.zeros((M, M))
    cdef double s, row, acc, logscale = 0.0
    out_np = np.empty(mk.shape[0])
    cdef double[:] out = out_np
    for t in range(n):
        s = 0.0
        for i in range(M):
            row = 0.0
            for j in range(M):
                acc = 0.0
                for l in range(M):
                    acc += A[t, i, l] * P[l, j]
                Q[i, j] = acc
                row += fabs(acc)
            if row > s:
                s = row
        if s == 0.0:
            while k < mk.shape[0]:
                out[k] = -np.inf
                k += 1
            return out_np
        for i in range(M):
            for j in range(M):
                P[i, j] = Q[i, j] / s
        logscale += log(s)
        while k < mk.shape[0] and mk[k] == t + 1:
            out[k] = logscale
            k += 1
    return out_np


def box_transform_sum(lo, hi, weights, lam):
    cdef double[:, :] L0 = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[:, :] H0 = np.ascontiguousarray(hi, dtype=np.float64)
    cdef double complex[:] W = np.ascontiguousarray(weights, dtype=np.complex128)
    cdef double[:] lm = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Py_ssize_t n = L0.shape[0], d = lm.shape[0], k, a
    cdef double tr, ti, fr, fi, width, mid, x, sc, ph, nr, sr = 0.0, si = 0.0
    for k in range(n):
        tr = W[k].real
        ti = W[k].imag
        for a in range(d):
            width = H0[k, a] - L0[k, a]
            mid = 0.5 * (H0[k, a] + L0[k, a])
            x = M_PI * lm[a] * width
            if fabs(x) < 1e-8:
                sc = width * (1.0 - x * x / 6.0)
            else:
                sc = width * sin(x) / x
            ph = -2.0 * M_PI * lm[a] * mid
            fr = sc * cos(ph)
            fi = sc * sin(ph)
            nr = tr * fr - ti * fi
            ti = tr * fi + ti * fr
            tr = nr
        sr += tr
        si += ti
    return complex(sr, si)
