"""Twisted ergodic integrals, growth fits, the Veech density and spectral bounds.

Convention: S_R^T(f, lambda) is the integral over the box of half-width R
around the origin of T of exp(-2 pi i <lambda, t>) f(T - t), with t measured
from the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .cocycles import spectral_products_all
from .hierarchy import Tiling, Tower, sample_tiling, scale_between, supertile_tiles, walk_window
from .substitution import SubstitutionSystem


# functions --------------------------------------------------------------

@dataclass(frozen=True)
class TLCFunction:
    """Piecewise constant function read off the level-``level`` supertile at a point.

    ``pieces[i]`` is a list of (lo, hi, weight) boxes.  For level 0 the boxes
    are relative to the tile's lower corner, so the function only depends on
    tile geometry.  For level >= 1 they are relative to the supertile's
    control point in a specific tower (see :func:`renormalize`).
    """

    pieces: tuple
    level: int = 0

    @classmethod
    def indicator(cls, sys: SubstitutionSystem, weights) -> "TLCFunction":
        """Weight c_i on the whole of every tile of type i."""
        out = []
        for i in range(sys.n_types):
            c = complex(weights[i])
            out.append(tuple((lo, hi, c) for lo, hi in sys.shapes.cell_boxes(i)) if c != 0 else ())
        return cls(tuple(out), 0)

    @classmethod
    def from_boxes(cls, sys: SubstitutionSystem, boxes: dict) -> "TLCFunction":
        """``boxes[i]`` = [(lo, hi, weight), ...] relative to the tile's lower corner."""
        d = sys.dim
        out = []
        for i in range(sys.n_types):
            row = []
            for lo, hi, w in boxes.get(i, ()):
                lo = np.asarray(lo, dtype=float).reshape(d)
                hi = np.asarray(hi, dtype=float).reshape(d)
                if np.any(hi < lo):
                    raise ValueError(f"box with hi < lo for type {sys.labels[i]}")
                row.append((lo, hi, complex(w)))
            out.append(tuple(row))
        return cls(tuple(out), 0)

    def _arrays(self, label: int, d: int):
        rows = self.pieces[label]
        if not rows:
            return np.zeros((0, d)), np.zeros((0, d)), np.zeros(0, dtype=complex)
        lo = np.stack([np.asarray(r[0], dtype=float).reshape(d) for r in rows])
        hi = np.stack([np.asarray(r[1], dtype=float).reshape(d) for r in rows])
        w = np.asarray([r[2] for r in rows], dtype=complex)
        return lo, hi, w

    def relative_to_control(self, tower: Tower, label: int):
        """Pieces of ``label`` relative to its control point, as arrays."""
        d = tower.sys.dim
        lo, hi, w = self._arrays(label, d)
        if self.level == 0:
            a = tower.cp.anchors[label]
            return lo - a, hi - a, w
        return lo, hi, w

    def transform(self, tower: Tower, label: int, lam) -> complex:
        """Fourier transform of the piece profile, origin at the control point."""
        lo, hi, w = self.relative_to_control(tower, label)
        return kernels.box_transform_sum(lo, hi, w, np.atleast_1d(np.asarray(lam, dtype=float)))

    def integrals(self, tower: Tower) -> np.ndarray:
        d = tower.sys.dim
        out = []
        for i in range(len(self.pieces)):
            lo, hi, w = self._arrays(i, d)
            out.append(complex(np.sum(w * np.prod(hi - lo, axis=1))))
        return np.asarray(out)

    def average(self, tower: Tower, depth: int = 60) -> complex:
        """Spatial mean of the function (tile frequencies times integrals over volume)."""
        from .cocycles import invariant_weights

        k = self.level
        w = invariant_weights(tower, k, depth).weights
        counts = np.asarray(tower.level(k).counts, dtype=float)
        vols = counts @ tower.sys.volumes()
        return complex(np.sum(w * self.integrals(tower)) / np.sum(w * vols))

    def zero_average(self, tower: Tower, tol: float = 1e-10) -> bool:
        return abs(self.average(tower)) <= tol


def profile_transform(lo, hi, weight, lam) -> complex:
    """Closed-form transform of weight * 1_box; the lambda = 0 limit is weight * volume."""
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    return kernels.box_transform_sum(lo, hi, np.asarray([complex(weight)]), np.atleast_1d(np.asarray(lam, dtype=float)))


def renormalize(f: TLCFunction, tower: Tower, n: int) -> TLCFunction:
    """Rewrite a level-0 function as a level-n one on the same tower.

    Each level-n supertile type gets the pieces of all its tiles, relative to
    the supertile's control point.
    """
    if f.level != 0:
        raise ValueError("renormalize expects a level-0 function")
    out = []
    for i in range(tower.sys.n_types):
        types, _, pos = supertile_tiles(tower, n, i)
        row = []
        for t, p in zip(types, pos):
            lo, hi, w = f.relative_to_control(tower, int(t))
            for a, b, c in zip(lo, hi, w):
                row.append((a + p, b + p, complex(c)))
        out.append(tuple(row))
    return TLCFunction(tuple(out), n)


def _level_zero_on_shift(f: TLCFunction, tiling: Tiling) -> tuple[TLCFunction, Tiling, float]:
    """(f', T', theta): f as a level-0 function of the level-y shifted tiling."""
    y = f.level
    shifted = tiling.shifted(y)
    theta = float(scale_between(tiling.tower, y)[0, 0])
    anchors = shifted.tower.cp.anchors
    rows = []
    for i, pieces in enumerate(f.pieces):
        rows.append(tuple((np.asarray(lo) / theta + anchors[i], np.asarray(hi) / theta + anchors[i], c)
                          for lo, hi, c in pieces))
    return TLCFunction(tuple(rows), 0), shifted, theta


# supertile and region integrals -----------------------------------------

def twisted_integral_supertile(tower: Tower, k: int, label: int, lam, f: TLCFunction) -> complex:
    """Integral over the level-k supertile of type ``label``, phase origin at its control point."""
    if f.level != 0:
        raise ValueError("supertile integrals take level-0 functions")
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    psi = np.asarray([f.transform(tower, j, lam) for j in range(tower.sys.n_types)])
    if k == 0:
        return complex(psi[label])
    prod = spectral_products_all(tower, k, lam)[k]
    return complex(prod[label] @ psi)


def _clipped_sum(tower: Tower, f: TLCFunction, types, pos, origin, R, lam) -> complex:
    """Integrals of f over tiles (control points ``pos``) clipped to [-R, R]^d around origin."""
    if len(types) == 0:
        return 0j
    total = 0j
    for label in np.unique(types):
        lo, hi, w = f.relative_to_control(tower, int(label))
        if len(w) == 0:
            continue
        p = pos[types == label] - origin
        L = (p[:, None, :] + lo[None]).reshape(-1, lo.shape[1])
        H = (p[:, None, :] + hi[None]).reshape(-1, hi.shape[1])
        W = np.broadcast_to(w, (len(p), len(w))).reshape(-1)
        L = np.maximum(L, -R)
        H = np.minimum(H, R)
        ok = np.all(H > L, axis=1)
        if np.any(ok):
            total += kernels.box_transform_sum(L[ok], H[ok], W[ok], lam)
    return total


class _Cocycle:
    """Spectral products and profile transforms for one (tower, f, lambda)."""

    def __init__(self, tower: Tower, f: TLCFunction, lam: np.ndarray):
        self.tower = tower
        self.lam = lam
        self.psi = np.asarray([f.transform(tower, j, lam) for j in range(tower.sys.n_types)])
        self.vectors = [self.psi]
        self._prods = [np.eye(tower.sys.n_types, dtype=complex)]

    def vector(self, m: int) -> np.ndarray:
        """M^(m)(lambda) psi."""
        if m >= len(self.vectors):
            prods = spectral_products_all(self.tower, m, self.lam)
            self._prods = prods
            self.vectors = [P @ self.psi for P in prods]
        return self.vectors[m]


def _region_direct(tiling: Tiling, f: TLCFunction, lam: np.ndarray, R: float, method: str,
                   cache: _Cocycle | None = None) -> complex:
    tower = tiling.tower
    if not tiling.fits(R):
        raise ValueError("horizon exhausted: the window leaves the top supertile; sample a larger tiling")
    origin = tiling.origin
    region = tiling.region(R)
    greedy = method == "cocycle"
    inside, boundary = walk_window(tower, tiling.top_level, tiling.top_type, region, greedy=greedy, exact=False)
    total = 0j
    if greedy:
        cache = cache or _Cocycle(tower, f, lam)
        for nodes in inside:
            v = cache.vector(nodes.level)
            ph = np.exp(-2j * np.pi * ((nodes.pos_real - origin) @ lam))
            total += complex(np.sum(ph * v[nodes.types]))
    else:
        for nodes in inside:
            total += _clipped_sum(tower, f, nodes.types, nodes.pos_real, origin, R, lam)
    total += _clipped_sum(tower, f, boundary.types, boundary.pos_real, origin, R, lam)
    return total


def _region_brute_level(tiling: Tiling, f: TLCFunction, lam: np.ndarray, R: float) -> complex:
    """Direct integral of a level-y function: every level-y supertile meeting the window, clipped."""
    tower = tiling.tower
    if not tiling.fits(R):
        raise ValueError("horizon exhausted: the window leaves the top supertile; sample a larger tiling")
    origin = tiling.origin
    inside, boundary = walk_window(tower, tiling.top_level, tiling.top_type, tiling.region(R), greedy=False,
                                   exact=False, floor=f.level)
    total = 0j
    for nodes in inside + [boundary]:
        total += _clipped_sum(tower, f, nodes.types, nodes.pos_real, origin, R, lam)
    return total


def twisted_integral_region(tiling: Tiling, f: TLCFunction, lam, R: float, method: str = "cocycle") -> complex:
    """S_R^T(f, lambda) by the supertile formula (``cocycle``) or tile by tile (``brute``).

    A level-y function is handled by the cocycle method on the level-y
    shifted tiling with lambda scaled up and R scaled down; the brute method
    integrates the level-y profiles directly.
    """
    if method not in ("cocycle", "brute"):
        raise ValueError(f"unknown method {method!r}")
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (tiling.tower.sys.dim,):
        raise ValueError("lambda must have one entry per dimension")
    if f.level == 0:
        return _region_direct(tiling, f, lam, R, method)
    if method == "brute":
        return _region_brute_level(tiling, f, lam, R)
    g, shifted, theta = _level_zero_on_shift(f, tiling)
    d = tiling.tower.sys.dim
    return theta ** d * _region_direct(shifted, g, theta * lam, R / theta, "cocycle")


@dataclass
class TwistedIntegralSeries:
    lam: np.ndarray
    R: np.ndarray
    values: np.ndarray
    method: str
    seed: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        out = []
        for R, v in zip(self.R, self.values):
            row = {f"lambda_{i + 1}": float(l) for i, l in enumerate(self.lam)}
            row.update(R=float(R), re=float(v.real), im=float(v.imag), abs=float(abs(v)), method=self.method,
                       seed=self.seed.get("seed", ""))
            out.append(row)
        return out


def twisted_series(tiling: Tiling, f: TLCFunction, lam, R_grid, method: str = "cocycle",
                   seed: dict | None = None) -> TwistedIntegralSeries:
    """S_R over an ascending R grid, sharing the spectral products between radii."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    R_grid = np.asarray(R_grid, dtype=float)
    if np.any(np.diff(R_grid) <= 0):
        raise ValueError("R grid must be strictly ascending")
    if f.level == 0 and method == "cocycle":
        cache = _Cocycle(tiling.tower, f, lam)
        vals = [_region_direct(tiling, f, lam, R, "cocycle", cache) for R in R_grid]
    else:
        vals = [twisted_integral_region(tiling, f, lam, R, method) for R in R_grid]
    return TwistedIntegralSeries(lam, R_grid, np.asarray(vals, dtype=complex), method, dict(seed or {}))


def l2_series(tower: Tower, f: TLCFunction, lam, R_grid, n_tilings: int, rng: np.random.Generator,
              seed: dict | None = None) -> TwistedIntegralSeries:
    """Root mean square of S_R over independently sampled tilings (method ``l2``)."""
    R_grid = np.asarray(R_grid, dtype=float)
    acc = np.zeros(len(R_grid))
    for _ in range(n_tilings):
        T = sample_tiling(tower, R_grid[-1], rng)
        acc += np.abs(twisted_series(T, f, lam, R_grid).values) ** 2
    rms = np.sqrt(acc / n_tilings)
    return TwistedIntegralSeries(np.atleast_1d(np.asarray(lam, dtype=float)), R_grid, rms.astype(complex), "l2",
                                 dict(seed or {}))


def log_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return np.exp(np.linspace(np.log(lo), np.log(hi), int(count)))


# growth exponent --------------------------------------------------------

@dataclass
class GrowthFit:
    slope: float
    alpha: float
    residual: float
    stderr: float
    band: tuple
    n_points: int
    window: tuple

    def as_dict(self) -> dict:
        return {"slope": self.slope, "alpha_hat": self.alpha, "residual": self.residual, "stderr": self.stderr,
                "band": list(self.band), "n_points": self.n_points, "window": list(self.window)}


def growth_fit(series, d: int | None = None, values=None, envelope: bool | None = None,
               min_points: int = 8) -> GrowthFit:
    """Least-squares slope of log|S_R| against log R over the top decade of R.

    By default the fit uses the running maximum of |S_R| along the grid: the
    exponent bounds growth from above, and the raw modulus has near-zeros
    that make single-window slopes erratic.  Averaged (``l2``) series are
    smooth and are fitted as they are.  When the top decade holds fewer than
    ``min_points`` grid points the window is widened downwards to the
    ``min_points`` largest radii.
    """
    if isinstance(series, TwistedIntegralSeries):
        R, vals = series.R, series.values
        d = len(series.lam) if d is None else d
        if envelope is None:
            envelope = series.method != "l2"
    else:
        R, vals = np.asarray(series, dtype=float), np.asarray(values)
    if envelope is None:
        envelope = True
    if d is None:
        raise ValueError("dimension needed")
    R = np.asarray(R, dtype=float)
    mags = np.abs(np.asarray(vals))
    if envelope:
        mags = np.maximum.accumulate(mags)
    if len(R) < min_points or np.log10(R.max() / R.min()) < 1.5 - 1e-9:
        raise ValueError(f"degenerate grid: need >= {min_points} points spanning >= 1.5 decades")
    if np.any(np.diff(R) <= 0):
        raise ValueError("degenerate grid: radii must be strictly ascending")
    sel = R >= R.max() / 10.0 * (1 - 1e-12)
    if sel.sum() < min_points:
        sel = np.zeros(len(R), dtype=bool)
        sel[-min_points:] = True
    if np.any(mags[sel] <= 0):
        raise ValueError("degenerate series: zero values in the fit window")
    x = np.log(R[sel])
    y = np.log(mags[sel])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    n = len(x)
    s2 = float(res @ res) / max(n - 2, 1)
    se = float(np.sqrt(s2 / np.sum((x - x.mean()) ** 2)))
    slope = float(coef[0])
    return GrowthFit(slope, d - slope, float(np.sqrt(np.mean(res ** 2))), se, (slope - 2 * se, slope + 2 * se), n,
                     (float(R[sel].min()), float(R[sel].max())))


# Veech density ----------------------------------------------------------

@dataclass
class VeechDensitySeries:
    returns: list  # return times k_j
    dist: list
    indicator: list
    density: list  # D_N after each return
    rho: object
    exact: bool

    def rows(self) -> list[dict]:
        return [{"j": j + 1, "k_j": k, "dist": float(dd), "indicator": int(ind), "D_N": float(D)}
                for j, (k, dd, ind, D) in enumerate(zip(self.returns, self.dist, self.indicator, self.density))]

    @property
    def final(self) -> float:
        return float(self.density[-1]) if self.density else float("nan")


def _to_number(v, exact: bool):
    if exact:
        return v if isinstance(v, Fraction) else Fraction(v)
    return float(v)


def _frac_part(v):
    return v - (v.numerator // v.denominator) if isinstance(v, Fraction) else v - np.floor(v)


def transport_start(V, lam, exact: bool):
    """v_0 = V^T lambda (one entry per group generator)."""
    d = len(V)
    r = len(V[0]) if d else 0
    return [sum((_to_number(V[a][k], exact) * _to_number(lam[a], exact) for a in range(d)),
                Fraction(0) if exact else 0.0) for k in range(r)]


def veech_density(x, G_by_rule, V, lam, word, split: int, rho, N: int) -> VeechDensitySeries:
    """Share of return times to [w-.w+] at which the transported vector is rho-close to Z^r.

    ``V`` is the d x r generator matrix (rationals allowed), ``G_by_rule``
    the r x r integer matrices per rule.  Arithmetic is exact when lambda and
    V are rational.
    """
    from .symbolic import return_times

    def rational(v):
        return isinstance(v, (int, Fraction)) or (isinstance(v, str))

    exact = all(rational(v) for v in lam) and all(rational(v) for row in V for v in row)
    lam = [Fraction(v) if exact else float(Fraction(v) if isinstance(v, str) else v) for v in lam]
    V = [[Fraction(v) if exact else float(Fraction(v) if isinstance(v, str) else v) for v in row] for row in V]
    # a float radius is a binary rational, so comparing against it exactly is lossless
    rho = Fraction(rho) if exact else float(Fraction(rho) if isinstance(rho, str) else rho)
    times = return_times(x, word, split, N)
    if not times:
        raise ValueError("no returns to the cylinder within the horizon")
    v = [_frac_part(c) for c in transport_start(V, lam, exact)]
    r = len(v)
    dists, inds, dens = [], [], []
    hits = 0
    k = 0
    plus = x.plus if hasattr(x, "plus") else x
    for j, kj in enumerate(times):
        while k < kj:
            G = G_by_rule[int(plus[k])]
            v = [_frac_part(sum((G[i][c] * v[i] for i in range(r)), Fraction(0) if exact else 0.0)) for c in range(r)]
            k += 1
        dist = max(min(c, 1 - c) for c in v) if r else (Fraction(0) if exact else 0.0)
        ind = dist <= rho
        hits += int(ind)
        dists.append(dist)
        inds.append(ind)
        dens.append(Fraction(hits, j + 1) if exact else hits / (j + 1))
    return VeechDensitySeries(list(times), dists, inds, dens, rho, exact)


# spectral measure bound -------------------------------------------------

def kernel_constant(n_grid: int = 20001) -> float:
    """inf over |u| <= 1/4 of sin^2(2 pi u) / (pi u)^2, the Fejer-type kernel on B_r at R = 1/(4r)."""
    u = np.linspace(-0.25, 0.25, n_grid)
    u = u[u != 0]
    return float(np.min(np.sin(2 * np.pi * u) ** 2 / (np.pi * u) ** 2))


KERNEL_C2 = kernel_constant()


@dataclass
class SpectralBound:
    lam: np.ndarray
    r: float
    R: float
    bound: float
    l2: float
    stderr: float
    n_samples: int

    def as_dict(self) -> dict:
        return {"lambda": [float(v) for v in self.lam], "r": self.r, "R": self.R, "bound": self.bound,
                "l2": self.l2, "stderr": self.stderr, "n_samples": self.n_samples}


def spectral_bound(tower: Tower, f: TLCFunction, lam, r: float, n_samples: int,
                   rng: np.random.Generator) -> SpectralBound:
    """Upper bound on mu_f(B_r(lambda)) from the L^2 mean of |S_R|^2 over sampled tilings."""
    if not 0 < r < 0.5:
        raise ValueError("r must lie in (0, 1/2)")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    d = tower.sys.dim
    R = 1.0 / (4.0 * r)
    sq = np.empty(n_samples)
    for s in range(n_samples):
        T = sample_tiling(tower, R, rng)
        sq[s] = abs(twisted_integral_region(T, f, lam, R)) ** 2
    l2 = float(sq.mean())
    se = float(sq.std(ddof=1) / np.sqrt(n_samples))
    bound = l2 / (KERNEL_C2 * R * R) ** d
    return SpectralBound(lam, float(r), R, bound, l2, se, n_samples)


def decay_slope(bounds: list[SpectralBound]) -> float:
    """Log-log slope of the bound against r."""
    r = np.log([b.r for b in bounds])
    y = np.log([max(b.bound, 1e-300) for b in bounds])
    return float(np.polyfit(r, y, 1)[0])


# correlations -----------------------------------------------------------

def evaluate(tiling: Tiling, f: TLCFunction, points: np.ndarray) -> np.ndarray:
    """f at points given relative to the origin of ``tiling`` (level-0 functions)."""
    if f.level != 0:
        raise ValueError("point evaluation takes level-0 functions")
    tower = tiling.tower
    sys = tower.sys
    d = sys.dim
    points = np.asarray(points, dtype=float).reshape(-1, d)
    origin = tiling.origin
    reach = float(np.max(np.abs(points))) + 1e-9 if len(points) else 0.0
    from .geometry import Region

    region = Region(tuple(origin), reach)
    inside, boundary = walk_window(tower, tiling.top_level, tiling.top_type, region, greedy=False, exact=False)
    types = np.concatenate([n.types for n in inside] + [boundary.types])
    pos = np.concatenate([n.pos_real for n in inside] + [boundary.pos_real]) - origin
    corners = pos - tower.cp.anchors[types]
    out = np.zeros(len(points), dtype=complex)
    if d == 1:
        order = np.argsort(corners[:, 0])
        c = corners[order, 0]
        idx = np.searchsorted(c, points[:, 0], side="right") - 1
        idx = np.clip(idx, 0, len(c) - 1)
        tile = order[idx]
    else:
        # unit cells sit on the integer grid of the top supertile's frame
        lookup = {}
        for t_i, (t, cor) in enumerate(zip(types, corners + origin)):
            for lo, _ in sys.shapes.cell_boxes(int(t)):
                lookup[tuple(np.floor(lo + cor + 0.5).astype(np.int64))] = t_i
        keys = np.floor(points + origin).astype(np.int64)
        tile = np.asarray([lookup.get(tuple(k), -1) for k in keys])
        if np.any(tile < 0):
            raise ValueError("point outside the enumerated patch")
    rel = points - corners[tile]
    for label in range(sys.n_types):
        sel = types[tile] == label
        if not np.any(sel):
            continue
        for lo, hi, w in f.pieces[label]:
            hit = np.all((rel[sel] >= lo) & (rel[sel] < hi), axis=1)
            out[np.nonzero(sel)[0][hit]] += w
    return out


@dataclass
class CorrelationEstimate:
    value: float
    stderr: float
    R: float
    n_samples: int


def correlation_integral(tiling: Tiling, f: TLCFunction, g: TLCFunction, R: float, n_samples: int,
                         rng: np.random.Generator, n_lags: int = 64, window: float | None = None,
                         n_batches: int = 8) -> CorrelationEstimate:
    """Monte Carlo estimate of the integral over C_R of |<f o phi_t, g>| dt.

    Inner products are spatial averages over a large window of ``tiling``
    (unique ergodicity); errors come from batch means over lags.
    """
    if n_samples < 16 or n_lags < n_batches:
        raise ValueError("sample budget too small")
    d = tiling.tower.sys.dim
    W = window if window is not None else 20.0 * max(R, 1.0)
    if not tiling.fits(W + R + 1.0):
        raise ValueError("tiling too small for the averaging window")
    s = rng.uniform(-W, W, size=(n_samples, d))
    t = rng.uniform(-R, R, size=(n_lags, d))
    gs = np.conj(evaluate(tiling, g, s))
    fs = evaluate(tiling, f, (s[None, :, :] + t[:, None, :]).reshape(-1, d)).reshape(n_lags, n_samples)
    corr = np.abs((fs * gs[None, :]).mean(axis=1))
    vol = (2.0 * R) ** d
    batches = np.array_split(corr, n_batches)
    means = np.asarray([b.mean() for b in batches])
    return CorrelationEstimate(float(vol * corr.mean()), float(vol * means.std(ddof=1) / np.sqrt(n_batches)), R,
                               n_samples)
