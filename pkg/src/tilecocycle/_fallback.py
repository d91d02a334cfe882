"""Pure numpy versions of the hot loops; same signatures as the compiled core."""

import numpy as np

TWO_PI = 2.0 * np.pi


def fourier_level(parent, child, offsets, lam, M):
    phases = np.exp(-1j * TWO_PI * (np.asarray(offsets, dtype=float) @ np.asarray(lam, dtype=float)))
    out = np.zeros(M * M, dtype=complex)
    np.add.at(out, np.asarray(parent) * M + np.asarray(child), phases)
    return out.reshape(M, M)


def chain_product(mats, every):
    """mats[K-1] @ ... @ mats[0], rescaled by the sup norm every ``every`` factors."""
    mats = np.asarray(mats)
    M = mats.shape[1]
    P = np.eye(M, dtype=mats.dtype)
    logscale = 0.0
    for t in range(mats.shape[0]):
        P = mats[t] @ P
        if (t + 1) % every == 0:
            s = np.max(np.abs(P))
            if s > 0:
                P = P / s
                logscale += np.log(s)
    return P, float(logscale)


def chain_log_norms(mats, marks):
    """log of the max-row-sum norm of A_t ... A_1 at every t in ``marks``."""
    mats = np.asarray(mats, dtype=float)
    M = mats.shape[1]
    P = np.eye(M)
    logscale = 0.0
    out = np.empty(len(marks))
    j = 0
    marks = np.asarray(marks)
    for t in range(mats.shape[0]):
        P = mats[t] @ P
        s = np.max(np.abs(P).sum(axis=1))
        if s == 0:
            out[j:] = -np.inf
            return out
        P = P / s
        logscale += np.log(s)
        while j < len(marks) and marks[j] == t + 1:
            out[j] = logscale
            j += 1
    return out


def box_transform_sum(lo, hi, weights, lam):
    """sum_n w_n prod_axis int_{lo}^{hi} exp(-2 pi i lam t) dt."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if lo.shape[0] == 0:
        return 0j
    L = hi - lo
    mid = 0.5 * (hi + lo)
    factor = L * np.sinc(lam[None, :] * L) * np.exp(-1j * TWO_PI * lam[None, :] * mid)
    return complex(np.sum(np.asarray(weights) * np.prod(factor, axis=1)))
