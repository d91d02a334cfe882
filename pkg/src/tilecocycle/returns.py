"""Return vectors, the group they generate, and the return-vector cocycle.

All group algebra runs on Python integers, so nothing can overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ExactVector, int_matmul, int_matvec
from .hierarchy import Tower, supertile_tiles
from .substitution import SubstitutionSystem
from .symbolic import fixed_sequence


class NotInGroup(ValueError):
    """The vector is not an integer combination of the generators."""


class InclusionFailure(ValueError):
    """The expanded generators do not lie in the target group."""


# integer normal forms ---------------------------------------------------

def hermite_rows(rows) -> list[list[int]]:
    """Row-style Hermite normal form; returns the nonzero rows.

    Pivots are positive, strictly move right, and every entry above a pivot
    lies in [0, pivot).
    """
    A = [list(map(int, r)) for r in rows]
    if not A:
        return []
    n_cols = len(A[0])
    pivot_row = 0
    for col in range(n_cols):
        # gather a gcd into pivot_row using the rows below
        for r in range(pivot_row + 1, len(A)):
            if A[r][col] == 0:
                continue
            a, b = A[pivot_row][col], A[r][col]
            g, s, t = _xgcd(a, b)
            u, v = a // g, b // g
            top = [s * x + t * y for x, y in zip(A[pivot_row], A[r])]
            bot = [-v * x + u * y for x, y in zip(A[pivot_row], A[r])]
            A[pivot_row], A[r] = top, bot
        if pivot_row < len(A) and A[pivot_row][col] != 0:
            if A[pivot_row][col] < 0:
                A[pivot_row] = [-x for x in A[pivot_row]]
            p = A[pivot_row][col]
            for r in range(pivot_row):
                q = A[r][col] // p
                if q:
                    A[r] = [x - q * y for x, y in zip(A[r], A[pivot_row])]
            pivot_row += 1
            if pivot_row == len(A):
                break
    return [r for r in A[:pivot_row] if any(r)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """g, s, t with s a + t b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def smith_divisors(rows) -> list[int]:
    """Nonzero elementary divisors d_1 | d_2 | ... of an integer matrix."""
    A = [list(map(int, r)) for r in rows if any(r)]
    if not A:
        return []
    m, n = len(A), len(A[0])
    divisors = []
    t = 0
    while t < min(m, n):
        # find a nonzero entry of smallest magnitude in the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            done = True
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // p
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                    if A[i][t]:
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // p
                    for row in A:
                        row[j] -= q * row[t]
                    if A[t][j]:
                        done = False
            if done:
                # divisibility of the trailing block
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if A[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                A[t] = [x + y for x, y in zip(A[t], A[bad])]
                continue
            # move the smallest remaining nonzero of row/column t to the pivot
            best = (t, t)
            for i in range(t, m):
                if A[i][t] and abs(A[i][t]) < abs(A[best[0]][best[1]]):
                    best = (i, t)
            for j in range(t, n):
                if A[t][j] and abs(A[t][j]) < abs(A[best[0]][best[1]]):
                    best = (t, j)
            i, j = best
            A[t], A[i] = A[i], A[t]
            for row in A:
                row[t], row[j] = row[j], row[t]
        divisors.append(abs(A[t][t]))
        t += 1
    return divisors


# return vectors ---------------------------------------------------------

@dataclass
class ReturnVectorSet:
    """vectors[i] maps exact coordinates to a witness (level, supertile type)."""

    vectors: list
    rank_b: int
    complete: bool = True

    def all_vectors(self) -> list[ExactVector]:
        seen = {}
        for per_type in self.vectors:
            for c in per_type:
                seen.setdefault(c, None)
        return [ExactVector(c) for c in seen]

    def __len__(self) -> int:
        return sum(len(v) for v in self.vectors)


def enumerate_return_vectors(tower: Tower, k_max: int, R: float) -> ReturnVectorSet:
    """Differences of same-type tiles inside canonical supertiles of levels <= k_max.

    Vectors are kept when their embedding has sup norm <= R; zero is excluded.
    """
    sys = tower.sys
    M = sys.n_types
    found: list[dict] = [dict() for _ in range(M)]
    tol = 1e-9 * (1.0 + R)
    for k in range(1, min(k_max, tower.horizon) + 1):
        for top in range(M):
            types, pos_exact, pos_real = supertile_tiles(tower, k, top)
            for j in range(M):
                sel = types == j
                if sel.sum() < 2:
                    continue
                pe = np.asarray(pos_exact[sel])
                pr = pos_real[sel]
                seen = found[j]
                batch, pending = [], 0
                for a in range(len(pe)):
                    near = np.max(np.abs(pr - pr[a]), axis=1) <= R + tol
                    near[a] = False
                    batch.append(pe[near] - pe[a])
                    pending += len(batch[-1])
                    if pending > 1 << 20 or a == len(pe) - 1:
                        diffs = np.concatenate(batch)
                        if diffs.dtype != object:
                            diffs = np.unique(diffs, axis=0)
                        batch, pending = [diffs], len(diffs)
                for row in (batch[0] if batch else ()):
                    diff = tuple(int(u) for u in row)
                    if diff not in seen and any(diff):
                        seen[diff] = (k, top)
    complete = k_max <= tower.horizon
    return ReturnVectorSet(found, sys.basis.rank, complete)


@dataclass
class ReturnGroup:
    rank: int
    generators: tuple  # r ExactVectors (the HNF rows)
    embedding: np.ndarray  # (d, r) real generator matrix V
    hnf: tuple

    @property
    def coords_matrix(self) -> tuple:
        """rank_b x r integer matrix whose columns are the generators."""
        if not self.generators:
            return ()
        return tuple(zip(*(g.coords for g in self.generators)))


def group_basis(vectors, basis=None) -> ReturnGroup:
    """HNF basis of the Z-span of the given exact vectors."""
    if isinstance(vectors, ReturnVectorSet):
        vecs = vectors.all_vectors()
    else:
        vecs = [v if isinstance(v, ExactVector) else ExactVector(tuple(v)) for v in vectors]
    if not vecs:
        raise ValueError("no vectors to span")
    rows = hermite_rows([v.coords for v in vecs])
    gens = tuple(ExactVector(tuple(r)) for r in rows)
    if basis is not None and gens:
        emb = np.stack([basis.embed(g) for g in gens], axis=1)
    else:
        emb = np.zeros((0, len(gens)))
    return ReturnGroup(len(gens), gens, emb, tuple(tuple(r) for r in rows))


def address(group: ReturnGroup, tau) -> tuple[int, ...]:
    """Integer coordinates of tau in the generators; raises NotInGroup."""
    coords = list(tau.coords if isinstance(tau, ExactVector) else tau)
    alpha = []
    rows = [list(g.coords) for g in group.generators]
    for row in rows:
        col = next(i for i, v in enumerate(row) if v)
        q, rem = divmod(coords[col], row[col])
        if rem:
            raise NotInGroup(f"{tuple(tau.coords if isinstance(tau, ExactVector) else tau)} is not in the group")
        alpha.append(q)
        if q:
            coords = [c - q * v for c, v in zip(coords, row)]
    if any(coords):
        raise NotInGroup(f"{tuple(tau.coords if isinstance(tau, ExactVector) else tau)} is not in the group")
    return tuple(alpha)


def from_address(group: ReturnGroup, alpha) -> ExactVector:
    out = [0] * len(group.generators[0].coords)
    for a, g in zip(alpha, group.generators):
        out = [o + int(a) * c for o, c in zip(out, g.coords)]
    return ExactVector(tuple(out))


def contains(group: ReturnGroup, tau) -> bool:
    try:
        address(group, tau)
        return True
    except NotInGroup:
        return False


@dataclass
class GMatrix:
    matrix: tuple
    rule: object

    def as_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=object)


def g_matrix(sys: SubstitutionSystem, rule, group_at_x: ReturnGroup, group_at_shift: ReturnGroup) -> GMatrix:
    """Integer G with Mtheta V = V' G, exactly.

    ``rule`` may be a single rule index or a sequence of indices, in which
    case Mtheta is the product Mtheta_{w_1} ... Mtheta_{w_n}.
    """
    word = (rule,) if isinstance(rule, (int, np.integer)) else tuple(rule)
    cols = []
    for g in group_at_x.generators:
        v = g.coords
        for letter in reversed(word):
            v = int_matvec(sys.basis.mult_tables[int(letter)], v)
        try:
            cols.append(address(group_at_shift, v))
        except NotInGroup as exc:
            raise InclusionFailure(f"expanded generator {v} is outside the target group") from exc
    if not cols:
        return GMatrix((), rule)
    G = tuple(tuple(col[i] for col in cols) for i in range(group_at_shift.rank))
    return GMatrix(G, rule)


def g_product(mats) -> tuple:
    prod = None
    for G in mats:
        G = G.matrix if isinstance(G, GMatrix) else G
        prod = G if prod is None else int_matmul(prod, G)
    return prod


@dataclass
class PostalReport:
    postal: bool
    divisors: list
    address_rank: int
    group_rank: int
    n_vectors: int
    positively_simple: bool


def postal_from_addresses(addresses, r: int) -> tuple[bool, list[int]]:
    divs = smith_divisors(addresses) if addresses else []
    return (len(divs) == r and all(d == 1 for d in divs)), divs


def postal_check(sys: SubstitutionSystem, word, split: int, group: ReturnGroup,
                 positively_simple: bool | None = None) -> PostalReport:
    """SNF test that in-supertile return vectors reach every address.

    The canonical level-|w+| supertiles are those built by the rules of w+
    in order.
    """
    word = tuple(word)
    wp = word[split:]
    tower = Tower(sys, fixed_sequence(np.asarray(wp, dtype=np.int64), np.zeros(64, dtype=np.int64) + wp[0]))
    addrs = []
    for top in range(sys.n_types):
        types, pos_exact, _ = supertile_tiles(tower, len(wp), top)
        for j in range(sys.n_types):
            pe = pos_exact[types == j]
            for a in range(len(pe)):
                for b in range(len(pe)):
                    if a != b:
                        tau = tuple(int(u) - int(v) for u, v in zip(pe[b], pe[a]))
                        addrs.append(address(group, tau))
    ok, divs = postal_from_addresses(addrs, group.rank)
    if positively_simple is None:
        from .symbolic import word_check

        positively_simple = word_check(sys, word, split).positively_simple
    return PostalReport(ok, divs, len(divs), group.rank, len(addrs), positively_simple)


def tower_group(tower: Tower, k_max: int = 6, R: float | None = None) -> ReturnGroup:
    """Return group of the tiling from its in-supertile return vectors.

    Without ``R`` every same-type pair inside a canonical supertile counts.
    Pairwise differences span the same lattice as the differences to one
    base tile per type, so only those are formed.
    """
    if R is not None:
        return group_basis(enumerate_return_vectors(tower, k_max, R), tower.sys.basis)
    sys = tower.sys
    chunks = []
    for k in range(1, min(k_max, tower.horizon) + 1):
        for top in range(sys.n_types):
            types, pos_exact, _ = supertile_tiles(tower, k, top)
            for j in range(sys.n_types):
                pe = np.asarray(pos_exact[types == j])
                if len(pe) >= 2:
                    chunks.append(pe[1:] - pe[0])
    if not chunks:
        raise ValueError("no return vectors below the requested level")
    diffs = np.concatenate(chunks)
    if diffs.dtype != object:
        diffs = np.unique(diffs, axis=0)
    vecs = [ExactVector(tuple(int(u) for u in row)) for row in diffs if any(row)]
    return group_basis(vecs, sys.basis)
