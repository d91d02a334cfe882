"""Exact module coordinates for tile positions, and patch/box primitives.

Every translation in the package is an integer coordinate vector with
respect to a finitely generated Z-module embedded in R^d.  Floats only
appear when a vector is embedded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


def _horner(poly: Sequence[int], t: float) -> float:
    # poly is given lowest degree first
    acc = 0.0
    for c in reversed(poly):
        acc = acc * t + c
    return acc


def refine_root(poly: Sequence[int], approx: float, tol: float = 1e-15) -> float:
    """Bisect a real root of an integer polynomial near ``approx``.

    ``poly`` lists coefficients from the constant term upwards, so the golden
    mean is ``refine_root([-1, -1, 1], 1.6)``.
    """
    if len(poly) < 2 or poly[-1] == 0:
        raise ValueError("polynomial must have positive degree")
    f0 = _horner(poly, approx)
    if f0 == 0.0:
        return float(approx)
    h = 1e-9 * max(1.0, abs(approx))
    while True:
        lo, hi = approx - h, approx + h
        flo, fhi = _horner(poly, lo), _horner(poly, hi)
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if (flo < 0) != (fhi < 0):
            break
        h *= 2.0
        if h > 1e6 * max(1.0, abs(approx)):
            raise ValueError(f"no sign change of {list(poly)} near {approx}")
    for _ in range(200):
        if hi - lo <= tol * max(1.0, abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = _horner(poly, mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def parse_real(value) -> tuple[float, Fraction | None]:
    """Turn a config real into (float value, exact rational or None).

    Accepted forms: an int, a rational string such as ``"1/3"``, a float
    (kept as its exact binary value), or ``{"poly": [...], "root": r}``.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not reals")
    if isinstance(value, int):
        return float(value), Fraction(value)
    if isinstance(value, str):
        q = Fraction(value)
        return float(q), q
    if isinstance(value, float):
        return value, Fraction(value)
    if isinstance(value, dict):
        poly = [int(c) for c in value["poly"]]
        root = refine_root(poly, float(value["root"]))
        if len(poly) == 2:
            q = Fraction(-poly[0], poly[1])
            return float(q), q
        return root, None
    raise TypeError(f"cannot read a real number from {value!r}")


@dataclass(frozen=True)
class ExactVector:
    """Integer coordinates in a module basis."""

    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @classmethod
    def zero(cls, rank: int) -> "ExactVector":
        return cls((0,) * rank)

    def __len__(self) -> int:
        return len(self.coords)

    def __add__(self, other: "ExactVector") -> "ExactVector":
        _check_rank(self, other)
        return ExactVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "ExactVector") -> "ExactVector":
        _check_rank(self, other)
        return ExactVector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "ExactVector":
        return ExactVector(tuple(-a for a in self.coords))

    def __mul__(self, k: int) -> "ExactVector":
        return ExactVector(tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    def sup(self) -> int:
        return max((abs(c) for c in self.coords), default=0)


def _check_rank(u: ExactVector, v: ExactVector) -> None:
    if len(u.coords) != len(v.coords):
        raise ValueError(f"rank mismatch: {len(u.coords)} vs {len(v.coords)}")


def int_matvec(mat: Sequence[Sequence[int]], v: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(int(a) * int(b) for a, b in zip(row, v)) for row in mat)


def int_matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    cols = list(zip(*b))
    return tuple(tuple(sum(int(x) * int(y) for x, y in zip(row, col)) for col in cols) for row in a)


def int_identity(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


@dataclass(frozen=True, eq=False)
class ModuleBasis:
    """A rank-b Z-module inside R^d with one multiplication table per rule.

    ``embedding`` has shape (rank, d): row k is the real vector of basis
    element k.  ``mult_tables[l]`` is the integer matrix whose column k holds
    the coordinates of ``theta[l] * e_k``.
    """

    dim: int
    embedding: np.ndarray
    mult_tables: tuple
    theta: tuple
    exact_embedding: tuple | None = None

    def __post_init__(self):
        emb = np.asarray(self.embedding, dtype=float).reshape(-1, self.dim)
        object.__setattr__(self, "embedding", emb)
        tables = tuple(tuple(tuple(int(c) for c in row) for row in m) for m in self.mult_tables)
        object.__setattr__(self, "mult_tables", tables)
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        r = emb.shape[0]
        for m in tables:
            if len(m) != r or any(len(row) != r for row in m):
                raise ValueError("multiplication tables must be rank x rank")
        if len(tables) != len(self.theta):
            raise ValueError("need one expansion factor per multiplication table")

    @property
    def rank(self) -> int:
        return self.embedding.shape[0]

    @property
    def n_rules(self) -> int:
        return len(self.mult_tables)

    def embed(self, v) -> np.ndarray:
        coords = v.coords if isinstance(v, ExactVector) else tuple(v)
        if len(coords) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(coords)}")
        return np.asarray(coords, dtype=float) @ self.embedding

    def embed_many(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords)
        if coords.dtype == object:
            coords = coords.astype(float)
        return coords @ self.embedding

    def expand(self, rule: int, v: ExactVector) -> ExactVector:
        return ExactVector(int_matvec(self.mult_tables[rule], v.coords))

    def multiplication_residuals(self) -> list[float]:
        """Largest relative defect of embed(M v) = theta embed(v) per rule."""
        out = []
        for table, th in zip(self.mult_tables, self.theta):
            worst = 0.0
            for k in range(self.rank):
                image = np.asarray([row[k] for row in table], dtype=float) @ self.embedding
                target = th * self.embedding[k]
                scale = max(1.0, float(np.max(np.abs(target))))
                worst = max(worst, float(np.max(np.abs(image - target))) / scale)
            out.append(worst)
        return out

    def spans(self) -> bool:
        return np.linalg.matrix_rank(self.embedding) == self.dim

    def with_embedding(self, embedding, exact_embedding=None) -> "ModuleBasis":
        return ModuleBasis(self.dim, embedding, self.mult_tables, self.theta, exact_embedding)


@dataclass(frozen=True)
class Prototile:
    """A prototile as a union of boxes given by lower/upper module corners."""

    label: str
    cells: tuple  # tuple of (ExactVector lower, ExactVector upper)

    def __post_init__(self):
        if not self.cells:
            raise ValueError(f"prototile {self.label} has no cells")


@dataclass(frozen=True)
class PlacedTile:
    label: int
    translation: ExactVector


@dataclass(frozen=True)
class Region:
    """The closed box of half-width ``half_width`` around ``center``."""

    center: tuple
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half-width must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.center) - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.center) + self.half_width

    def volume(self) -> float:
        return (2.0 * self.half_width) ** len(self.center)


@dataclass(frozen=True, eq=False)
class Shapes:
    """Module basis plus prototile geometry: everything needed to draw a patch."""

    basis: ModuleBasis
    prototiles: tuple

    def cell_boxes(self, label: int, translation=None) -> list[tuple[np.ndarray, np.ndarray]]:
        shift = 0.0 if translation is None else self.basis.embed(translation)
        return [(self.basis.embed(lo) + shift, self.basis.embed(hi) + shift)
                for lo, hi in self.prototiles[label].cells]

    def bounding_box(self, label: int) -> tuple[np.ndarray, np.ndarray]:
        boxes = self.cell_boxes(label)
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        return lo, hi

    def volume(self, label: int) -> float:
        return float(sum(np.prod(hi - lo) for lo, hi in self.cell_boxes(label)))


@dataclass(frozen=True, eq=False)
class Patch:
    shapes: Shapes
    tiles: tuple = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.tiles)

    def __iter__(self):
        return iter(self.tiles)

    def as_set(self) -> set[tuple[int, tuple[int, ...]]]:
        return {(t.label, t.translation.coords) for t in self.tiles}

    def label_counts(self, n_labels: int) -> list[int]:
        counts = [0] * n_labels
        for t in self.tiles:
            counts[t.label] += 1
        return counts

    def has_disjoint_interiors(self) -> bool:
        """Pairwise interior disjointness by a sweep along the first axis."""
        boxes = []
        for t in self.tiles:
            boxes.extend(self.shapes.cell_boxes(t.label, t.translation))
        boxes.sort(key=lambda b: b[0][0])
        tol = 1e-9
        active: list[tuple[np.ndarray, np.ndarray]] = []
        for lo, hi in boxes:
            active = [b for b in active if b[1][0] > lo[0] + tol]
            for alo, ahi in active:
                if np.all(np.minimum(hi, ahi) - np.maximum(lo, alo) > tol):
                    return False
            active.append((lo, hi))
        return True


def embed(basis: ModuleBasis, v: ExactVector) -> np.ndarray:
    return basis.embed(v)


def box_inside(lo: np.ndarray, hi: np.ndarray, region: Region, tol: float = 0.0) -> bool:
    return bool(np.all(lo >= region.lower - tol) and np.all(hi <= region.upper + tol))


def region_clip(patch: Patch, region: Region, tol: float = 1e-12) -> Patch:
    """Tiles of ``patch`` whose closed geometry lies inside ``region``."""
    slack = tol * (1.0 + region.half_width + float(np.max(np.abs(region.center), initial=0.0)))
    kept = []
    for t in patch.tiles:
        if all(box_inside(lo, hi, region, slack) for lo, hi in patch.shapes.cell_boxes(t.label, t.translation)):
            kept.append(t)
    return Patch(patch.shapes, tuple(kept))


def unit_line_patch(positions: Iterable[int], labels: Iterable[int] | None = None) -> Patch:
    """Unit tiles on the integer lattice of the line; handy for tests and demos."""
    basis = ModuleBasis(1, [[1.0]], (((2,),),), (2.0,))
    proto = (Prototile("u", ((ExactVector((0,)), ExactVector((1,))),)),)
    positions = list(positions)
    labels = [0] * len(positions) if labels is None else list(labels)
    shapes = Shapes(basis, proto)
    return Patch(shapes, tuple(PlacedTile(l, ExactVector((p,))) for p, l in zip(positions, labels)))
