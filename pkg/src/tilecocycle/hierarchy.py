"""Supertile hierarchies along a symbol sequence.

A :class:`Tower` fixes a system, a sequence x and a choice function.  It
knows, for every level m, where each child supertile sits relative to its
parent's control point (the level offsets), and the bounding box of each
level-m supertile around its control point.  A :class:`Tiling` is a tower
plus a path from a top supertile down to the tile holding the origin.

Tilings are never flattened beyond the window being asked about; the
traversal in :func:`walk_window` descends only into supertiles that cross
the window boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    ExactVector,
    Patch,
    PlacedTile,
    Region,
    int_identity,
    int_matmul,
    int_matvec,
)
from .substitution import SubstitutionSystem, substitution_matrix
from .symbolic import SymbolSequence

_INT64_SAFE = 1 << 56


@dataclass(frozen=True)
class ChoiceFunction:
    """choice[l][i] = index of the chosen digit of parent i under rule l."""

    choice: tuple

    @classmethod
    def default(cls, sys: SubstitutionSystem) -> "ChoiceFunction":
        """Per (rule, parent) the digit whose corner is lexicographically smallest."""
        table = []
        for rule in sys.rules:
            row = []
            for digits in rule.digits:
                keys = [tuple(sys.basis.embed(d.corner)) for d in digits]
                row.append(min(range(len(digits)), key=lambda k: keys[k]))
            table.append(tuple(row))
        return cls(tuple(table))

    def validate(self, sys: SubstitutionSystem) -> None:
        if len(self.choice) != sys.n_rules:
            raise ValueError("choice function needs one row per rule")
        for r, row in enumerate(self.choice):
            if len(row) != sys.n_types:
                raise ValueError(f"choice row {r} needs one entry per prototile")
            for i, k in enumerate(row):
                if not 0 <= k < len(sys.rules[r].digits[i]):
                    raise ValueError(f"rule {r}, parent {sys.labels[i]}: no digit {k}")


@dataclass
class ControlPointTable:
    anchors: np.ndarray  # (M, d) real anchors relative to each prototile's lower corner
    exact: tuple | None  # ExactVector per prototile when the anchors are exact
    depth: int
    residual: float
    on_boundary: tuple
    inside: tuple  # anchor lies in the half-open tile

    @property
    def valid(self) -> bool:
        return all(self.inside)


def control_points(sys: SubstitutionSystem, minus, choice: ChoiceFunction | None = None,
                   tol: float = 1e-13) -> ControlPointTable:
    """Fixed points of the chosen-digit contractions along the past tail.

    ``minus`` lists x_-1, x_-2, ...; the anchor of tile i is
    theta_-1 (c_1 + theta_-2 (c_2 + ...)) where c_m is the corner of the
    chosen child at step m.  When every chosen corner met on the way is zero
    the anchor is exactly the lower corner.
    """
    choice = choice or ChoiceFunction.default(sys)
    choice.validate(sys)
    if any(t <= 1.0 for t in sys.basis.theta):
        raise ValueError("control points need every expansion > 1")
    minus = [int(s) for s in minus]
    M, d = sys.n_types, sys.dim
    diam = max(float(np.max(hi - lo)) for lo, hi in (sys.shapes.bounding_box(i) for i in range(M)))
    anchors = np.zeros((M, d))
    exact_ok = [True] * M
    depth_used = 0
    residual = 0.0
    for i in range(M):
        point = np.zeros(d)
        scale = 1.0
        current = i
        nonzero = False
        depth = 0
        for rule in minus:
            scale /= sys.basis.theta[rule]
            digit = sys.rules[rule].digits[current][choice.choice[rule][current]]
            if not digit.corner.is_zero():
                nonzero = True
            point = point + scale * sys.basis.embed(digit.corner)
            current = digit.child
            depth += 1
            if scale < tol:
                break
        anchors[i] = point
        exact_ok[i] = not nonzero
        depth_used = max(depth_used, depth)
        residual = max(residual, scale * diam)
    exact = tuple(ExactVector.zero(sys.basis.rank) for _ in range(M)) if all(exact_ok) else None
    if all(exact_ok):
        residual = 0.0
    on_boundary, inside = [], []
    for i in range(M):
        hit_edge = False
        contained = False
        for lo, hi in sys.shapes.cell_boxes(i):
            p = anchors[i]
            tol_b = 1e-12 * max(1.0, diam)
            if np.all(p >= lo - tol_b) and np.all(p <= hi + tol_b):
                if np.any(np.abs(p - lo) <= tol_b) or np.any(np.abs(p - hi) <= tol_b):
                    hit_edge = True
                if np.all(p >= lo - tol_b) and np.all(p < hi - tol_b):
                    contained = True
        on_boundary.append(hit_edge)
        inside.append(contained)
    return ControlPointTable(anchors, exact, depth_used, residual, tuple(on_boundary), tuple(inside))


@dataclass(frozen=True)
class PathAddress:
    """A top prototile label and digit indices read from the top level down."""

    top: int
    digits: tuple

    @property
    def level(self) -> int:
        return len(self.digits)


def _as_int_array(rows, width: int) -> np.ndarray:
    arr = np.array(rows, dtype=object).reshape(-1, width)
    if arr.size == 0 or max(abs(int(v)) for v in arr.flat) < _INT64_SAFE:
        return arr.astype(np.int64)
    return arr


@dataclass
class Level:
    """Data of the substitution that builds level-m supertiles from level m-1."""

    m: int
    rule: int
    parent: np.ndarray  # (E,) parent type of each digit
    child: np.ndarray  # (E,) child type
    digit_index: np.ndarray  # (E,) index of the digit within its parent's list
    start: np.ndarray  # (M+1,) CSR offsets of each parent's digits
    offset_exact: np.ndarray  # (E, rank) child control point minus parent control point
    offset_real: np.ndarray  # (E, d)
    box_lo: np.ndarray  # (M, d) level-m supertile box relative to its control point
    box_hi: np.ndarray
    counts: tuple  # Theta^(m), exact
    expansion: tuple  # P_m = Mtheta_{x_1} ... Mtheta_{x_m}


class Tower:
    """Levels 0..K of the supertile hierarchy along ``x``."""

    def __init__(self, sys: SubstitutionSystem, x: SymbolSequence, choice: ChoiceFunction | None = None,
                 tol: float = 1e-13):
        self.sys = sys
        self.x = x
        self.choice = choice or ChoiceFunction.default(sys)
        self.cp = control_points(sys, x.minus, self.choice, tol)
        self.horizon = len(x.plus)
        self._levels: list[Level] = []
        self._init_level0()

    # level 0 ---------------------------------------------------------
    def _init_level0(self):
        sys = self.sys
        M, rank, d = sys.n_types, sys.basis.rank, sys.dim
        anchors = self.cp.anchors
        lo = np.zeros((M, d))
        hi = np.zeros((M, d))
        for i in range(M):
            blo, bhi = sys.shapes.bounding_box(i)
            lo[i], hi[i] = blo - anchors[i], bhi - anchors[i]
        self._cp_exact = [[0] * rank for _ in range(M)]  # exact part of the control point
        self._cp_final = list(range(M))  # level-0 type whose anchor completes it
        eye = int_identity(rank)
        self._levels.append(Level(0, -1, np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64),
                                  np.zeros(M + 1, np.int64), np.zeros((0, rank), np.int64), np.zeros((0, d)),
                                  lo, hi, int_identity(M), eye))

    @property
    def exact(self) -> bool:
        return self.cp.exact is not None

    def level(self, m: int) -> Level:
        if m > self.horizon:
            raise ValueError(f"level {m} exceeds the sequence horizon {self.horizon}")
        while len(self._levels) <= m:
            self._build_next()
        return self._levels[m]

    def _build_next(self):
        sys = self.sys
        basis = sys.basis
        m = len(self._levels)
        prev = self._levels[m - 1]
        rule = int(self.x.plus[m - 1])
        M, rank, d = sys.n_types, basis.rank, sys.dim
        P_prev = prev.expansion
        digits = sys.rules[rule].digits
        # exact control points of the new level
        new_exact, new_final = [], []
        for i in range(M):
            dg = digits[i][self.choice.choice[rule][i]]
            corner = int_matvec(P_prev, dg.corner.coords)
            new_exact.append([a + b for a, b in zip(corner, self._cp_exact[dg.child])])
            new_final.append(self._cp_final[dg.child])
        parent, child, index, offs = [], [], [], []
        start = [0]
        anchors = self.cp.anchors
        corr = []
        for i in range(M):
            for k, dg in enumerate(digits[i]):
                corner = int_matvec(P_prev, dg.corner.coords)
                u = [c + a - b for c, a, b in zip(corner, self._cp_exact[dg.child], new_exact[i])]
                parent.append(i)
                child.append(dg.child)
                index.append(k)
                offs.append(u)
                corr.append(anchors[self._cp_final[dg.child]] - anchors[new_final[i]])
            start.append(len(parent))
        offset_exact = _as_int_array(offs, rank)
        offset_real = basis.embed_many(offset_exact) + np.asarray(corr).reshape(-1, d)
        P = int_matmul(P_prev, basis.mult_tables[rule])
        F = substitution_matrix(sys, rule)
        counts = int_matmul(F, prev.counts)
        box_lo = np.zeros((M, d))
        box_hi = np.zeros((M, d))
        for i in range(M):
            cp_real = basis.embed(new_exact[i]) + anchors[new_final[i]]
            corners = []
            for lo, hi in sys.shapes.prototiles[i].cells:
                corners.append(basis.embed(int_matvec(P, lo.coords)))
                corners.append(basis.embed(int_matvec(P, hi.coords)))
            corners = np.asarray(corners)
            box_lo[i] = corners.min(axis=0) - cp_real
            box_hi[i] = corners.max(axis=0) - cp_real
        self._cp_exact = new_exact
        self._cp_final = new_final
        self._levels.append(Level(m, rule, np.asarray(parent, np.int64), np.asarray(child, np.int64),
                                  np.asarray(index, np.int64), np.asarray(start, np.int64),
                                  offset_exact, offset_real, box_lo, box_hi, counts, P))

    def supertile_extent(self, m: int) -> np.ndarray:
        lv = self.level(m)
        return lv.box_hi - lv.box_lo

    def level_for_radius(self, R: float, factor: float = 4.0) -> int:
        """Smallest level whose every supertile is at least ``factor * R`` wide."""
        m = 0
        while True:
            if np.min(self.supertile_extent(m)) >= factor * R:
                return m
            m += 1
            if m > self.horizon:
                raise ValueError(f"sequence horizon {self.horizon} too short for R = {R}")

    def shifted(self, n: int) -> "Tower":
        """Tower of sigma^n x: level n supertiles become the new tiles."""
        return Tower(self.sys, self.x.shifted(n), self.choice)


def level_offsets(tower: Tower, k: int) -> dict:
    """{(parent, child): [offsets]} of the level-k substitution, in level-0 units.

    Offsets are :class:`ExactVector` when the anchors are exact and real
    arrays otherwise.
    """
    lv = tower.level(k)
    if k == 0:
        return {}
    out: dict = {}
    for e in range(len(lv.parent)):
        key = (int(lv.parent[e]), int(lv.child[e]))
        if tower.exact:
            val = ExactVector(tuple(int(v) for v in lv.offset_exact[e]))
        else:
            val = lv.offset_real[e].copy()
        out.setdefault(key, []).append(val)
    return out


def approximant(tower: Tower, path: PathAddress) -> Patch:
    """All tiles of the level-k supertile on ``path``, with the path's tile at the origin.

    Translations are lower corners in exact module coordinates.
    """
    sys = tower.sys
    k = path.level
    lv_top = tower.level(k)
    # positions are corners; start from the top supertile corner at 0
    types = [path.top]
    corners = [tuple([0] * sys.basis.rank)]
    target = (0,) * sys.basis.rank
    current = path.top
    for m in range(k, 0, -1):
        lv = tower.level(m)
        rule = lv.rule
        P_prev = tower.level(m - 1).expansion
        new_types, new_corners = [], []
        for t, c in zip(types, corners):
            for dg in sys.rules[rule].digits[t]:
                off = int_matvec(P_prev, dg.corner.coords)
                new_types.append(dg.child)
                new_corners.append(tuple(a + b for a, b in zip(c, off)))
        types, corners = new_types, new_corners
        step = path.digits[k - m]
        digits = sys.rules[rule].digits[current]
        if not 0 <= step < len(digits):
            raise ValueError(f"path digit {step} invalid at level {m} for parent {sys.labels[current]}")
        off = int_matvec(P_prev, digits[step].corner.coords)
        target = tuple(a + b for a, b in zip(target, off))
        current = digits[step].child
    del lv_top
    tiles = tuple(PlacedTile(t, ExactVector(tuple(a - b for a, b in zip(c, target)))) for t, c in zip(types, corners))
    return Patch(sys.shapes, tiles)


@dataclass
class Tiling:
    """A tower, a top supertile and the path to the origin tile.

    ``origin`` is the real position of the origin relative to the control
    point of the top supertile.
    """

    tower: Tower
    top_level: int
    top_type: int
    digits: tuple
    offset: np.ndarray  # origin minus the origin tile's control point

    @property
    def origin(self) -> np.ndarray:
        pos = np.zeros(self.tower.sys.dim)
        t = self.top_type
        for m, k in zip(range(self.top_level, 0, -1), self.digits):
            lv = self.tower.level(m)
            e = int(lv.start[t] + k)
            pos = pos + lv.offset_real[e]
            t = int(lv.child[e])
        return pos + np.asarray(self.offset, dtype=float)

    @property
    def origin_type(self) -> int:
        t = self.top_type
        for m, k in zip(range(self.top_level, 0, -1), self.digits):
            lv = self.tower.level(m)
            t = int(lv.child[int(lv.start[t] + k)])
        return t

    def region(self, R: float) -> Region:
        return Region(tuple(self.origin), R)

    def fits(self, R: float) -> bool:
        lv = self.tower.level(self.top_level)
        o = self.origin
        return bool(np.all(o - R >= lv.box_lo[self.top_type]) and np.all(o + R <= lv.box_hi[self.top_type]))

    def path(self) -> PathAddress:
        return PathAddress(self.top_type, tuple(self.digits))

    def shifted(self, n: int) -> "Tiling":
        """The same tiling seen as a tiling by level-n supertiles scaled down.

        The result lives in the tower of sigma^n x, whose unit is theta_(n)
        times the original one, so the origin offset is divided accordingly.
        """
        if n > self.top_level:
            raise ValueError("cannot shift beyond the top level")
        tower = self.tower.shifted(n)
        upper = self.digits[: self.top_level - n]
        # origin relative to the level-n supertile holding it
        pos = np.zeros(self.tower.sys.dim)
        t = self.top_type
        for m, k in zip(range(self.top_level, 0, -1), self.digits):
            lv = self.tower.level(m)
            e = int(lv.start[t] + k)
            if m <= n:
                pos = pos + lv.offset_real[e]
            t = int(lv.child[e])
        rel = pos + np.asarray(self.offset, dtype=float)
        scale = scale_between(self.tower, n)[0, 0]
        return Tiling(tower, self.top_level - n, self.top_type, tuple(upper), rel / scale)


def scale_between(tower: Tower, n: int) -> np.ndarray:
    """Real d x d linear map taking level-n units to level-0 units.

    For uniformly expanding systems this is theta_(n) times the identity.
    """
    return np.eye(tower.sys.dim) * float(np.prod([tower.sys.basis.theta[int(r)] for r in tower.x.plus[:n]]))


def sample_tiling(tower: Tower, R: float, rng: np.random.Generator, level: int | None = None,
                  weights: np.ndarray | None = None) -> Tiling:
    """A tiling whose window C_R(origin) fits inside one top supertile.

    The top type is drawn with probability proportional to frequency times
    volume and the origin is uniform over the part of that supertile where
    the window fits, which is the translation-invariant law conditioned on
    the fit.
    """
    sys = tower.sys
    K = tower.level_for_radius(R) if level is None else level
    lv = tower.level(K)
    if weights is None:
        weights = level_frequencies(tower, K)
    vols = np.asarray([float(v) for v in np.asarray(lv.counts, dtype=object) @ np.asarray(sys.volumes(), dtype=object)])
    p = np.asarray(weights, dtype=float) * vols
    width = lv.box_hi - lv.box_lo - 2 * R
    p = np.where(np.all(width > 0, axis=1), p, 0.0)
    if p.sum() <= 0:
        raise ValueError(f"no level-{K} supertile is wide enough for R = {R}")
    top = int(rng.choice(sys.n_types, p=p / p.sum()))
    point = lv.box_lo[top] + R + rng.random(sys.dim) * width[top]
    digits, offset = locate(tower, K, top, point)
    return Tiling(tower, K, top, digits, offset)


def locate(tower: Tower, K: int, top: int, point: np.ndarray) -> tuple[tuple, np.ndarray]:
    """Digits from level K down to the tile holding ``point`` (relative to the top control point)."""
    sys = tower.sys
    digits = []
    t = top
    pos = np.zeros(sys.dim)
    for m in range(K, 0, -1):
        lv = tower.level(m)
        below = tower.level(m - 1)
        found = None
        for e in range(int(lv.start[t]), int(lv.start[t + 1])):
            c = int(lv.child[e])
            p = pos + lv.offset_real[e]
            if m - 1 == 0:
                inside = _point_in_tile(tower, c, point - p)
            else:
                inside = np.all(point >= p + below.box_lo[c]) and np.all(point < p + below.box_hi[c])
                if inside and len(sys.shapes.prototiles[c].cells) > 1:
                    inside = _point_in_supertile(tower, m - 1, c, point - p)
            if inside:
                found = e
                break
        if found is None:
            raise ValueError("point is not inside the supertile")
        digits.append(int(lv.digit_index[found]))
        pos = pos + lv.offset_real[found]
        t = int(lv.child[found])
    return tuple(digits), point - pos


def _point_in_tile(tower: Tower, label: int, rel: np.ndarray) -> bool:
    anchor = tower.cp.anchors[label]
    for lo, hi in tower.sys.shapes.cell_boxes(label):
        if np.all(rel >= lo - anchor) and np.all(rel < hi - anchor):
            return True
    return False


def _point_in_supertile(tower: Tower, m: int, label: int, rel: np.ndarray) -> bool:
    if m == 0:
        return _point_in_tile(tower, label, rel)
    lv = tower.level(m)
    below = tower.level(m - 1)
    for e in range(int(lv.start[label]), int(lv.start[label + 1])):
        c = int(lv.child[e])
        p = lv.offset_real[e]
        if np.all(rel >= p + below.box_lo[c]) and np.all(rel < p + below.box_hi[c]):
            if _point_in_supertile(tower, m - 1, c, rel - p):
                return True
    return False


def level_frequencies(tower: Tower, k: int, depth: int = 40) -> np.ndarray:
    """Relative frequencies of level-k supertile types seen from level k + depth."""
    top = min(tower.horizon, k + depth)
    v = np.ones(tower.sys.n_types)
    for m in range(top, k, -1):
        F = np.asarray(substitution_matrix(tower.sys, int(tower.x.plus[m - 1])), dtype=float)
        v = v @ F
        v = v / v.sum()
    return v


# window traversal ------------------------------------------------------

@dataclass
class WindowNodes:
    level: int
    types: np.ndarray
    pos_real: np.ndarray
    pos_exact: np.ndarray | None


def _children(tower: Tower, m: int, types: np.ndarray, pos_real: np.ndarray, pos_exact):
    lv = tower.level(m)
    starts = lv.start[types]
    n_kids = lv.start[types + 1] - starts
    total = int(n_kids.sum())
    if total == 0:
        d = tower.sys.dim
        return np.zeros(0, np.int64), np.zeros((0, d)), None if pos_exact is None else pos_exact[:0]
    owner = np.repeat(np.arange(len(types)), n_kids)
    first = np.repeat(np.cumsum(n_kids) - n_kids, n_kids)
    e = starts[owner] + (np.arange(total) - first)
    new_types = lv.child[e]
    new_real = pos_real[owner] + lv.offset_real[e]
    new_exact = None
    if pos_exact is not None:
        new_exact = pos_exact[owner] + lv.offset_exact[e]
    return new_types, new_real, new_exact


def walk_window(tower: Tower, top_level: int, top_type: int, region: Region, greedy: bool = True,
                exact: bool = True, tol: float = 1e-12, floor: int = 0):
    """Classify the supertiles of one top supertile against a box.

    With ``greedy`` the walk stops at supertiles fully inside the box and
    yields them level by level (the top-down decomposition); otherwise every
    level-0 tile meeting the box is reached.  Returns (inside, boundary): a
    list of :class:`WindowNodes` per level for the inside supertiles and the
    level-0 tiles that meet but are not inside the box.  ``floor`` stops the
    descent at that level instead of level 0.
    """
    d = tower.sys.dim
    a = region.lower
    b = region.upper
    slack = tol * (1.0 + region.half_width + float(np.max(np.abs(region.center))))
    keep_exact = exact and tower.exact
    rank = tower.sys.basis.rank
    types = np.array([top_type], dtype=np.int64)
    pos_real = np.zeros((1, d))
    pos_exact = np.zeros((1, rank), dtype=np.int64) if keep_exact else None
    inside_nodes = []
    boundary = None
    for m in range(top_level, floor - 1, -1):
        lv = tower.level(m)
        lo = pos_real + lv.box_lo[types]
        hi = pos_real + lv.box_hi[types]
        disjoint = np.any(hi <= a + slack, axis=1) | np.any(lo >= b - slack, axis=1)
        inside = np.all(lo >= a - slack, axis=1) & np.all(hi <= b + slack, axis=1) & ~disjoint
        if greedy or m == floor:
            sel = inside
            inside_nodes.append(WindowNodes(m, types[sel], pos_real[sel],
                                            None if pos_exact is None else pos_exact[sel]))
            cont = ~inside & ~disjoint
        else:
            cont = ~disjoint
        if m == floor:
            boundary = WindowNodes(m, types[cont], pos_real[cont], None if pos_exact is None else pos_exact[cont])
            break
        types, pos_real, pos_exact = _children(
            tower, m, types[cont], pos_real[cont], None if pos_exact is None else pos_exact[cont])
        if len(types) == 0:
            boundary = WindowNodes(m - 1, types, pos_real, pos_exact)
            break
    if boundary is None:
        boundary = WindowNodes(floor, np.zeros(0, np.int64), np.zeros((0, d)), None)
    inside_nodes = [n for n in inside_nodes if len(n.types)]
    return inside_nodes, boundary


@dataclass
class SupertileDecomposition:
    placements: list  # (level, type, position) with exact positions when available
    counts: dict  # level -> per-type counts kappa_j^(i)
    remainder: list  # (type, position) of level-0 tiles crossing the boundary
    tile_total: int  # level-0 tiles covered by the placements
    top_level: int
    Y: float  # Vol(C_R) / theta_(n)^d with n the highest level used
    H: float  # max_i sum_j kappa_j^(i) / (Vol(boundary) theta_(i)^(1-d)... ) see boundary_ratio
    boundary_ratio: dict  # level -> sum_j kappa_j^(i) / (R^(d-1) theta_(i)^(d-1))


def supertile_decomposition(tiling: Tiling, R: float) -> SupertileDecomposition:
    """Greedy top-down partition of the tiles inside C_R(origin) into supertiles."""
    tower = tiling.tower
    if not tiling.fits(R):
        raise ValueError("insufficient horizon: the window leaves the top supertile")
    region = tiling.region(R)
    inside, boundary = walk_window(tower, tiling.top_level, tiling.top_type, region, greedy=True)
    sys = tower.sys
    d = sys.dim
    placements, counts = [], {}
    total = 0
    highest = 0
    for nodes in inside:
        lv = tower.level(nodes.level)
        kappa = np.bincount(nodes.types, minlength=sys.n_types)
        counts[nodes.level] = kappa.tolist()
        highest = max(highest, nodes.level)
        row_sums = [sum(r) for r in lv.counts]
        total += sum(int(row_sums[t]) for t in nodes.types)
        for k in range(len(nodes.types)):
            pos = tuple(int(v) for v in nodes.pos_exact[k]) if nodes.pos_exact is not None else tuple(nodes.pos_real[k])
            placements.append((nodes.level, int(nodes.types[k]), pos))
    remainder = [(int(t), tuple(p)) for t, p in zip(boundary.types, boundary.pos_real)]
    theta_n = float(scale_between(tower, highest)[0, 0])
    vol = (2 * R) ** d
    Y = vol / theta_n ** d
    boundary_vol = 2 * d * (2 * R) ** (d - 1)
    ratio, H = {}, 0.0
    for lev, kap in counts.items():
        th = float(scale_between(tower, lev)[0, 0])
        ratio[lev] = sum(kap) / (R ** (d - 1) * th ** (d - 1)) if d > 1 else float(sum(kap))
        H = max(H, sum(kap) / (boundary_vol * th ** (1 - d)) if d > 1 else sum(kap) / boundary_vol)
    return SupertileDecomposition(placements, counts, remainder, total, highest, Y, H, ratio)


def window_patch(tiling: Tiling, R: float) -> Patch:
    """Every tile meeting C_R(origin), flattened; exact corners relative to the top control point."""
    tower = tiling.tower
    if not tower.exact:
        raise ValueError("flat patches need exact anchors")
    region = tiling.region(R)
    inside, boundary = walk_window(tower, tiling.top_level, tiling.top_type, region, greedy=False)
    tiles = []
    for nodes in inside + [boundary]:
        for t, p in zip(nodes.types, nodes.pos_exact):
            tiles.append(PlacedTile(int(t), ExactVector(tuple(int(v) for v in p))))
    return Patch(tower.sys.shapes, tuple(tiles))


def supertile_tiles(tower: Tower, m: int, label: int):
    """Flattened level-m supertile of type ``label``.

    Returns (types, exact positions, real positions) of its tiles' control
    points relative to the supertile's control point.
    """
    rank, d = tower.sys.basis.rank, tower.sys.dim
    types = np.array([label], dtype=np.int64)
    pos_real = np.zeros((1, d))
    pos_exact = np.zeros((1, rank), dtype=np.int64)
    for lev in range(m, 0, -1):
        types, pos_real, pos_exact = _children(tower, lev, types, pos_real, pos_exact)
    return types, pos_exact, pos_real
