"""Trace cocycle, Fourier (spectral) cocycle, vertex weights and Lyapunov exponents.

Sign convention: phases are exp(-2 pi i <lambda, tau>) everywhere.

Level-m Fourier matrices use offsets measured in level-0 units, so the
product M_k(lambda) ... M_1(lambda) has (i, j) entry equal to the sum of
exp(-2 pi i <lambda, u>) over the tiles of type j in the level-k supertile
of type i, u being the tile's position relative to the supertile's control
point.  In the per-rule normalization this is the level-m matrix of rule
x_m evaluated at theta_bar_(m-1) lambda.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from . import kernels
from .geometry import int_identity, int_matmul
from .hierarchy import Tower, supertile_tiles
from .substitution import SubstitutionSystem, substitution_matrix

RENORM_EVERY = 16
LOG_FLOOR = float(np.log(np.finfo(float).tiny))


# trace cocycle ----------------------------------------------------------

@dataclass
class TraceProduct:
    matrix: tuple
    m: int
    n: int


def trace_product(sys: SubstitutionSystem, x, m: int, n: int) -> TraceProduct:
    """A_n ... A_{m+1} with A_k = F_{x_k}; exact Python integers."""
    plus = x.plus if hasattr(x, "plus") else x
    if not 0 <= m <= n <= len(plus):
        raise ValueError(f"need 0 <= m <= n <= {len(plus)}")
    prod = int_identity(sys.n_types)
    for k in range(m + 1, n + 1):
        prod = int_matmul(substitution_matrix(sys, int(plus[k - 1])), prod)
    return TraceProduct(prod, m, n)


# Fourier matrices -------------------------------------------------------

@dataclass
class FourierMatrix:
    matrix: np.ndarray
    level: int
    lam: np.ndarray


def fourier_matrix(sys: SubstitutionSystem, rule: int, lam, anchors=None) -> FourierMatrix:
    """Per-rule Fourier matrix with offsets relative to control points.

    ``anchors`` (M x d, relative to lower corners) default to the lower
    corners, which is what the default choice function produces for every
    system whose chosen digits sit at the parent corner.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    M, d = sys.n_types, sys.dim
    anchors = np.zeros((M, d)) if anchors is None else np.asarray(anchors, dtype=float)
    theta = sys.basis.theta[rule]
    parent, child, offs = [], [], []
    for i, digits in enumerate(sys.rules[rule].digits):
        for dg in digits:
            parent.append(i)
            child.append(dg.child)
            offs.append(sys.basis.embed(dg.corner) + anchors[dg.child] - theta * anchors[i])
    mat = kernels.fourier_level(np.asarray(parent, np.int64), np.asarray(child, np.int64),
                                np.asarray(offs, dtype=float).reshape(-1, d), lam, M)
    return FourierMatrix(mat, 1, lam)


def level_fourier(tower: Tower, m: int, lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    lv = tower.level(m)
    return kernels.fourier_level(lv.parent, lv.child, lv.offset_real, lam, tower.sys.n_types)


@dataclass
class SpectralProduct:
    matrix: np.ndarray  # normalized product
    log_scale: float
    k: int
    lam: np.ndarray

    def value(self) -> np.ndarray:
        return self.matrix * np.exp(self.log_scale)


def spectral_product(tower: Tower, k: int, lam, start: int = 0) -> SpectralProduct:
    """M_k(lambda) ... M_{start+1}(lambda), renormalized every 16 factors."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    M = tower.sys.n_types
    if k <= start:
        return SpectralProduct(np.eye(M, dtype=complex), 0.0, k, lam)
    mats = np.stack([level_fourier(tower, m, lam) for m in range(start + 1, k + 1)])
    mat, logscale = kernels.chain_product(mats, RENORM_EVERY)
    return SpectralProduct(mat, logscale, k, lam)


def spectral_products_all(tower: Tower, k: int, lam) -> list[np.ndarray]:
    """[M^(0), M^(1), ..., M^(k)] without renormalization (k small)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    out = [np.eye(tower.sys.n_types, dtype=complex)]
    for m in range(1, k + 1):
        out.append(level_fourier(tower, m, lam) @ out[-1])
    return out


def brute_spectral(tower: Tower, k: int, lam) -> np.ndarray:
    """Nested-sum oracle: sum the phase of every tile of every level-k supertile."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    M = tower.sys.n_types
    out = np.zeros((M, M), dtype=complex)
    for i in range(M):
        types, _, pos = supertile_tiles(tower, k, i)
        ph = np.exp(-2j * np.pi * (pos @ lam))
        for j in range(M):
            out[i, j] = ph[types == j].sum()
    return out


# exact phases -----------------------------------------------------------

class CyclotomicMatrix:
    """Matrix over the group ring Z[Z/D]: entry (i, j) is a length-D integer
    vector of coefficients of zeta^0 .. zeta^(D-1), zeta = exp(-2 pi i / D)."""

    def __init__(self, coeffs: np.ndarray, D: int):
        self.coeffs = coeffs  # object array (M, M, D)
        self.D = D

    @classmethod
    def identity(cls, M: int, D: int) -> "CyclotomicMatrix":
        c = np.zeros((M, M, D), dtype=object)
        c[...] = 0
        for i in range(M):
            c[i, i, 0] = 1
        return cls(c, D)

    def __matmul__(self, other: "CyclotomicMatrix") -> "CyclotomicMatrix":
        D = self.D
        M = self.coeffs.shape[0]
        out = np.zeros((M, M, D), dtype=object)
        out[...] = 0
        for i in range(M):
            for j in range(M):
                acc = [0] * D
                for l in range(M):
                    a = self.coeffs[i, l]
                    b = other.coeffs[l, j]
                    for s in range(D):
                        if a[s]:
                            for t in range(D):
                                if b[t]:
                                    acc[(s + t) % D] += a[s] * b[t]
                out[i, j, :] = acc
        return CyclotomicMatrix(out, D)

    def to_complex(self) -> np.ndarray:
        z = np.exp(-2j * np.pi * np.arange(self.D) / self.D)
        return np.asarray(self.coeffs.astype(float) @ z)

    def integer_part(self) -> tuple | None:
        """The plain integer matrix when every phase is trivial (D = 1)."""
        if self.D != 1:
            return None
        M = self.coeffs.shape[0]
        return tuple(tuple(int(self.coeffs[i, j, 0]) for j in range(M)) for i in range(M))


def _phase_weights(tower: Tower, lam) -> tuple[list[Fraction], int]:
    """Rational <lambda, embed(e_b)> per basis element and their common denominator."""
    items = lam if isinstance(lam, (list, tuple)) else np.atleast_1d(lam).tolist()
    lam = [Fraction(v) for v in items]
    basis = tower.sys.basis
    weights = []
    for b in range(basis.rank):
        if all(v == 0 for v in lam):
            weights.append(Fraction(0))
            continue
        if basis.exact_embedding is None:
            raise ValueError("exact phases need a rational embedding unless lambda = 0")
        weights.append(sum((l * q for l, q in zip(lam, basis.exact_embedding[b])), Fraction(0)))
    D = 1
    for w in weights:
        D = D * w.denominator // gcd(D, w.denominator)
    return weights, D


def spectral_product_exact(tower: Tower, k: int, lam=(0,)) -> CyclotomicMatrix:
    """Spectral product with phases as exact roots of unity."""
    if not tower.exact:
        raise ValueError("exact phases need exact control points")
    weights, D = _phase_weights(tower, lam)
    M = tower.sys.n_types
    prod = CyclotomicMatrix.identity(M, D)
    for m in range(1, k + 1):
        lv = tower.level(m)
        c = np.zeros((M, M, D), dtype=object)
        c[...] = 0
        for e in range(len(lv.parent)):
            ph = sum((int(u) * w for u, w in zip(lv.offset_exact[e], weights)), Fraction(0))
            s = int(ph * D) % D
            c[int(lv.parent[e]), int(lv.child[e]), s] += 1
        prod = CyclotomicMatrix(c, D) @ prod
    return prod


# vertex weights ---------------------------------------------------------

@dataclass
class VertexWeights:
    weights: np.ndarray  # measure of one path through each level-k vertex
    level: int
    residual: float
    converged: bool
    depth: int


def _transport(tower: Tower, k: int, depth: int) -> np.ndarray:
    v = np.ones(tower.sys.n_types)
    top = min(tower.horizon, k + depth)
    for m in range(top, k, -1):
        v = v @ np.asarray(substitution_matrix(tower.sys, int(tower.x.plus[m - 1])), dtype=float)
        v /= v.sum()
    return v


def invariant_weights(tower: Tower, k: int = 0, depth: int = 60, tol: float = 1e-10) -> VertexWeights:
    """Path weights mu(v) on level k, normalized so sum_v mu(v) h_k(v) = 1."""
    if k + depth > tower.horizon:
        depth = tower.horizon - k
    if depth < 2:
        raise ValueError("not enough symbols beyond level k")
    h = np.asarray([float(sum(r)) for r in tower.level(k).counts])
    freq = _transport(tower, k, depth)
    half = _transport(tower, k, depth // 2)
    residual = float(np.max(np.abs(freq - half)))
    w = freq / float(freq @ h)
    return VertexWeights(w, k, residual, residual <= tol, depth)


def tile_frequencies(tower: Tower, depth: int = 60) -> np.ndarray:
    """Frequency of each tile type among all tiles."""
    w = invariant_weights(tower, 0, depth).weights
    return w / w.sum()


# Lyapunov exponents -----------------------------------------------------

@dataclass
class LyapunovEstimate:
    values: list
    stderr: list
    n: int
    method: str
    log: list = field(default_factory=list)
    infinite: list = field(default_factory=list)

    @property
    def top(self) -> float:
        return self.values[0]

    def records(self, name: str) -> list[dict]:
        out = []
        for i, (v, s) in enumerate(zip(self.values, self.stderr)):
            dead = bool(self.infinite and self.infinite[i])
            out.append({"name": name if len(self.values) == 1 else f"{name}[{i}]",
                        "value": float("-inf") if dead else float(v), "stderr": float(s), "n": int(self.n),
                        **({"floor": True} if self.infinite and self.infinite[i] else {})})
        return out


def _segments(n: int, n_seg: int) -> np.ndarray:
    return np.linspace(0, n, n_seg + 1).round().astype(np.int64)


def lyapunov_top(stream, n_steps: int, n_segments: int = 10) -> LyapunovEstimate:
    """(1/n) log ||A_n ... A_1|| with the max-row-sum norm; batch-mean errors."""
    if n_steps < 100:
        raise ValueError("need at least 100 steps")
    mats = _take(stream, n_steps)
    marks = _segments(n_steps, n_segments)
    logs = kernels.chain_log_norms(mats, marks[1:])
    if not np.all(np.isfinite(logs)):
        raise ValueError("degenerate (zero) product")
    total = np.concatenate([[0.0], logs])
    rates = np.diff(total) / np.diff(marks)
    value = total[-1] / n_steps
    se = float(np.std(rates, ddof=1) / np.sqrt(len(rates)))
    return LyapunovEstimate([float(value)], [se], n_steps, "top-only", log=[float(v) for v in logs])


def lyapunov_spectrum(stream, n_steps: int, n_segments: int = 10) -> LyapunovEstimate:
    """All exponents by re-orthonormalizing a frame (QR) after every factor."""
    if n_steps < 100:
        raise ValueError("need at least 100 steps")
    mats = _take(stream, n_steps)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError("dimension mismatch: factors must be square and equal sized")
    r = mats.shape[1]
    Q = np.eye(r)
    acc = np.zeros(r)
    marks = set(_segments(n_steps, n_segments)[1:].tolist())
    checkpoints = [np.zeros(r)]
    dead = np.zeros(r, dtype=bool)
    for t in range(n_steps):
        Z = mats[t] @ Q
        Q, Rm = np.linalg.qr(Z)
        diag = np.abs(np.diag(Rm))
        scale = max(1.0, float(np.max(np.abs(Z))))
        # integer factors keep surviving directions far above rounding level
        zero = diag <= 1e-12 * scale
        dead |= zero
        acc += np.where(zero, LOG_FLOOR, np.log(np.where(zero, 1.0, diag)))
        if t + 1 in marks:
            checkpoints.append(acc.copy())
    seg = _segments(n_steps, n_segments)
    cps = np.asarray(checkpoints)
    rates = np.diff(cps, axis=0) / np.diff(seg)[:, None]
    values = acc / n_steps
    se = np.std(rates, axis=0, ddof=1) / np.sqrt(len(rates))
    order = np.argsort(-values, kind="stable")
    return LyapunovEstimate([float(values[i]) for i in order], [float(se[i]) for i in order], n_steps,
                            "full-spectrum-QR", infinite=[bool(dead[i]) for i in order])


def _take(stream, n: int) -> np.ndarray:
    if isinstance(stream, np.ndarray):
        if len(stream) < n:
            raise ValueError("stream shorter than n_steps")
        return np.asarray(stream[:n], dtype=float)
    out = []
    for A in stream:
        out.append(np.asarray(A, dtype=float))
        if len(out) == n:
            break
    if len(out) < n:
        raise ValueError("stream shorter than n_steps")
    return np.stack(out)


def trace_stream(sys: SubstitutionSystem, x) -> np.ndarray:
    plus = x.plus if hasattr(x, "plus") else x
    mats = np.stack([np.asarray(substitution_matrix(sys, r), dtype=float) for r in range(sys.n_rules)])
    return mats[np.asarray(plus, dtype=np.int64)]


def g_stream(G_by_rule, x) -> np.ndarray:
    plus = x.plus if hasattr(x, "plus") else x
    mats = np.stack([np.asarray(G, dtype=float) for G in G_by_rule])
    return mats[np.asarray(plus, dtype=np.int64)]


def domination_ok(mat: np.ndarray, theta, tol: float = 1e-12) -> bool:
    return bool(np.all(np.abs(mat) <= np.asarray(theta, dtype=float) + tol))
