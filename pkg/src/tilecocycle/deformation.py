"""Shape deformations: new embeddings of the return-vector generators.

A deformation keeps every combinatorial object (digits, counts, G matrices,
addresses) and only changes where the generators of the return group sit in
R^d.  In d = 1 the natural family is "change the tile lengths"; to make it
expressible the system is first rewritten in tile-count coordinates
(:func:`tilecocycle.substitution.count_coordinates`), whose module has one
generator per tile type.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .cocycles import FourierMatrix, tile_frequencies
from .geometry import int_identity, int_matmul, int_matvec
from .hierarchy import Tower
from .returns import NotInGroup, ReturnGroup, address, group_basis, tower_group
from .substitution import SubstitutionSystem, count_coordinates


def group_fingerprint(group: ReturnGroup) -> str:
    """Short hash of the HNF generators, used to pin raw V matrices to a basis."""
    blob = json.dumps([list(map(int, g.coords)) for g in group.generators]).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class DeformationParameter:
    V: np.ndarray  # (d, r) real embeddings of the group generators
    mode: str  # lengths | global-linear | raw-matrix
    lengths: tuple | None = None
    matrix: np.ndarray | None = None
    exact_V: tuple | None = None  # Fractions when the lengths are rational

    @property
    def rank(self) -> int:
        return self.V.shape[1]


def _as_fraction(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return None


def lengths_deformation(sys_counts: SubstitutionSystem, group: ReturnGroup, lengths) -> DeformationParameter:
    """New tile lengths for a system in count coordinates."""
    if sys_counts.dim != 1 or sys_counts.basis.rank != sys_counts.n_types:
        raise ValueError("lengths mode needs a d = 1 system in count coordinates")
    if len(lengths) != sys_counts.n_types:
        raise ValueError(f"need {sys_counts.n_types} lengths")
    fr = [_as_fraction(v) for v in lengths]
    real = np.asarray([float(Fraction(v)) if isinstance(v, str) else float(v) for v in lengths])
    if np.any(real <= 0):
        raise ValueError("deformed lengths must be positive")
    V = np.asarray([[float(real @ np.asarray(g.coords, dtype=float)) for g in group.generators]])
    exact = None
    if all(q is not None for q in fr):
        exact = (tuple(sum((q * c for q, c in zip(fr, g.coords)), Fraction(0)) for g in group.generators),)
    return DeformationParameter(V, "lengths", tuple(lengths), None, exact)


def global_linear(group: ReturnGroup, g) -> DeformationParameter:
    g = np.asarray(g, dtype=float)
    if g.shape != (group.embedding.shape[0],) * 2:
        raise ValueError("global-linear deformation needs a d x d matrix")
    return DeformationParameter(g @ group.embedding, "global-linear", None, g)


def raw_matrix(group: ReturnGroup, V, fingerprint: str | None = None) -> DeformationParameter:
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[1] != group.rank:
        raise ValueError(f"raw V must be d x {group.rank}")
    if fingerprint is not None and fingerprint != group_fingerprint(group):
        raise ValueError("raw V targets a different group basis (fingerprint mismatch)")
    return DeformationParameter(V, "raw-matrix")


# asymptotic cycle -------------------------------------------------------

@dataclass
class AsymptoticCycle:
    matrix: np.ndarray
    det: float
    invertible: bool


def asymptotic_cycle(tower: Tower, param: DeformationParameter, group: ReturnGroup | None = None,
                     depth: int = 60, tol: float = 1e-10) -> AsymptoticCycle:
    """Mean deformed displacement per unit of undeformed displacement."""
    d = tower.sys.dim
    if param.mode == "global-linear":
        C = np.asarray(param.matrix, dtype=float)
    elif d == 1:
        from .cocycles import invariant_weights

        vw = invariant_weights(tower, 0, depth)
        if not vw.converged and vw.residual > 1e-6:
            raise ValueError(f"vertex weights not converged (residual {vw.residual:.2e})")
        freq = tile_frequencies(tower, depth)
        if param.mode == "lengths":
            new = np.asarray([float(Fraction(v)) if isinstance(v, str) else float(v) for v in param.lengths])
        else:
            group = group or tower_group(tower)
            new = np.asarray([float((param.V @ np.asarray(address(group, L), dtype=float))[0])
                              for L in tower.sys.length_vectors()])
        C = np.asarray([[float(freq @ new)]])
    else:
        group = group or tower_group(tower)
        C = param.V @ np.linalg.pinv(group.embedding)
    det = float(np.linalg.det(C))
    return AsymptoticCycle(C, det, abs(det) > tol)


# deformed offsets -------------------------------------------------------

@dataclass
class DeformationResult:
    tower: Tower
    param: DeformationParameter
    group: ReturnGroup
    offsets: dict  # level m -> (E, d) deformed offsets
    rule_offsets: list  # per rule, (E, d) deformed digit offsets
    extended: bool
    offending: list = field(default_factory=list)

    def level_fourier(self, m: int, lam) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        lv = self.tower.level(m)
        return kernels.fourier_level(lv.parent, lv.child, self.level_offsets(m), lam, self.tower.sys.n_types)

    def level_offsets(self, m: int) -> np.ndarray:
        if m not in self.offsets:
            lv = self.tower.level(m)
            self.offsets[m] = self._deform(lv.offset_exact)
        return self.offsets[m]

    def _deform(self, coords) -> np.ndarray:
        out = np.zeros((len(coords), self.param.V.shape[0]))
        for e, c in enumerate(coords):
            out[e] = self.param.V @ np.asarray(address(self.group, tuple(int(v) for v in c)), dtype=float)
        return out


def _rule_offsets(tower: Tower) -> list[list[tuple]]:
    """Exact digit offsets (child control point minus parent control point) per rule."""
    sys = tower.sys
    out = []
    for r, rule in enumerate(sys.rules):
        rows = []
        for i, digits in enumerate(rule.digits):
            chosen = digits[tower.choice.choice[r][i]].corner
            for dg in digits:
                rows.append((i, dg.child, tuple(a - b for a, b in zip(dg.corner.coords, chosen.coords))))
        out.append(rows)
    return out


def apply_deformation(tower: Tower, param: DeformationParameter, group: ReturnGroup | None = None,
                      levels: int = 8, extend: bool = True) -> DeformationResult:
    """Replace every offset tau by V^d address(tau).

    Offsets outside the group trigger a Gamma-extension (recomputed HNF
    basis including them) when ``extend`` is set, otherwise an error.
    """
    if not tower.exact:
        raise ValueError("deformation needs exact control points")
    group = group or tower_group(tower)
    candidates = []
    for rows in _rule_offsets(tower):
        candidates.extend(c for _, _, c in rows)
    for m in range(1, min(levels, tower.horizon) + 1):
        candidates.extend(tuple(int(v) for v in c) for c in tower.level(m).offset_exact)
    offending = []
    for c in candidates:
        if any(c):
            try:
                address(group, c)
            except NotInGroup:
                offending.append(c)
    extended = False
    if offending:
        if not extend:
            raise NotInGroup(f"offset {offending[0]} lies outside the return group")
        group = group_basis([g.coords for g in group.generators] + offending, tower.sys.basis)
        extended = True
        if param.rank != group.rank:
            raise ValueError(f"the extended group has rank {group.rank}; rebuild the deformation for it")
    if param.rank != group.rank:
        raise ValueError(f"deformation has {param.rank} generators, the group has {group.rank}")
    res = DeformationResult(tower, param, group, {}, [], extended, offending)
    for rows in _rule_offsets(tower):
        res.rule_offsets.append(res._deform([c for _, _, c in rows]))
    return res


def deformed_fourier(res: DeformationResult, rule: int, lam) -> FourierMatrix:
    """Per-rule Fourier matrix with phases <lambda, V^d address(tau_e)>."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    rows = _rule_offsets(res.tower)[rule]
    parent = np.asarray([i for i, _, _ in rows], np.int64)
    child = np.asarray([j for _, j, _ in rows], np.int64)
    mat = kernels.fourier_level(parent, child, res.rule_offsets[rule], lam, res.tower.sys.n_types)
    return FourierMatrix(mat, 1, lam)


def deformed_spectral_products(res: DeformationResult, k: int, lam) -> list[np.ndarray]:
    out = [np.eye(res.tower.sys.n_types, dtype=complex)]
    for m in range(1, k + 1):
        out.append(res.level_fourier(m, lam) @ out[-1])
    return out


# deformed towers (d = 1 lengths mode) ------------------------------------

def lift_to_counts(sys: SubstitutionSystem) -> SubstitutionSystem:
    return count_coordinates(sys)


def reembedded_system(sys_counts: SubstitutionSystem, lengths) -> SubstitutionSystem:
    """Same combinatorics, tile i of length ``lengths[i]``."""
    from .geometry import Shapes

    real = [[float(Fraction(v)) if isinstance(v, str) else float(v)] for v in lengths]
    basis = sys_counts.basis.with_embedding(real)
    return SubstitutionSystem(Shapes(basis, sys_counts.shapes.prototiles), sys_counts.rules,
                              f"{sys_counts.name}-deformed")


def deformed_tower(tower_counts: Tower, lengths) -> Tower:
    """Tower of the re-lengthened tiling along the same sequence and choice."""
    return Tower(reembedded_system(tower_counts.sys, lengths), tower_counts.x, tower_counts.choice)


def veech_by_positions(res: DeformationResult, x, lam, word, split: int, rho, N: int):
    """Deformed Veech density from the deformed positions of expanded generators.

    At each return time k the vector with entries <lambda, V^d address(P_k g_c)>
    (P_k the module expansion along x_1..x_k) is reduced mod Z^r directly.
    Exact when lambda and the deformation are rational.
    """
    from .symbolic import return_times
    from .twisted import VeechDensitySeries, _frac_part

    exact = res.param.exact_V is not None and all(_as_fraction(v) is not None for v in lam)
    sys = res.tower.sys
    gens = [g.coords for g in res.group.generators]
    times = return_times(x, word, split, N)
    if not times:
        raise ValueError("no returns to the cylinder within the horizon")
    plus = x.plus if hasattr(x, "plus") else x
    if exact:
        lamq = [Fraction(v) for v in lam]
        Vq = res.param.exact_V
        rho_v = Fraction(rho)
    else:
        lamq = [float(Fraction(v)) if isinstance(v, str) else float(v) for v in lam]
        Vq = res.param.V.tolist()
        rho_v = float(Fraction(rho)) if isinstance(rho, str) else float(rho)
    d = len(Vq)
    P = int_identity(sys.basis.rank)
    images = [tuple(g) for g in gens]
    k = 0
    dists, inds, dens = [], [], []
    hits = 0
    for j, kj in enumerate(times):
        if k < kj:
            while k < kj:
                # the new factor enters next to the generators
                P = int_matmul(P, sys.basis.mult_tables[int(plus[k])])
                k += 1
            images = [int_matvec(P, g) for g in gens]
        vals = []
        for img in images:
            alpha = address(res.group, tuple(img))
            pos = [sum((Vq[a][c] * alpha[c] for c in range(len(alpha))), Fraction(0) if exact else 0.0)
                   for a in range(d)]
            vals.append(_frac_part(sum((l * p for l, p in zip(lamq, pos)), Fraction(0) if exact else 0.0)))
        dist = max(min(v, 1 - v) for v in vals)
        ind = dist <= rho_v
        hits += int(ind)
        dists.append(dist)
        inds.append(ind)
        dens.append(Fraction(hits, j + 1) if exact else hits / (j + 1))
    return VeechDensitySeries(list(times), dists, inds, dens, rho_v, exact)


def combinatorial_fingerprint(tower: Tower, group: ReturnGroup, G_by_rule, k: int) -> dict:
    """Data that a deformation must leave untouched."""
    from .cocycles import trace_product

    return {
        "theta": [list(map(list, trace_product(tower.sys, tower.x, 0, m).matrix)) for m in range(1, k + 1)],
        "G": [list(map(list, G)) for G in G_by_rule],
        "rank": group.rank,
        "offsets_exact": [tower.level(m).offset_exact.tolist() for m in range(1, k + 1)],
    }


__all__ = [
    "AsymptoticCycle", "DeformationParameter", "DeformationResult", "apply_deformation", "asymptotic_cycle",
    "combinatorial_fingerprint", "deformed_fourier", "deformed_spectral_products", "deformed_tower",
    "global_linear", "group_fingerprint", "lengths_deformation", "lift_to_counts", "raw_matrix",
    "reembedded_system", "veech_by_positions",
]
