"""Uniformly expanding substitution rules on a common set of prototiles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .geometry import (
    ExactVector,
    ModuleBasis,
    Patch,
    PlacedTile,
    Prototile,
    Shapes,
    int_matmul,
    parse_real,
)


@dataclass(frozen=True)
class Digit:
    """One child of an inflated parent: its label and lower corner."""

    child: int
    corner: ExactVector


@dataclass(frozen=True)
class SubstitutionRule:
    name: str
    digits: tuple  # digits[i] = tuple of Digit for parent label i

    def matrix(self, n_types: int) -> tuple[tuple[int, ...], ...]:
        rows = []
        for i in range(n_types):
            row = [0] * n_types
            for d in self.digits[i]:
                row[d.child] += 1
            rows.append(tuple(row))
        return tuple(rows)


@dataclass(frozen=True, eq=False)
class SubstitutionSystem:
    shapes: Shapes
    rules: tuple
    name: str = ""

    @property
    def basis(self) -> ModuleBasis:
        return self.shapes.basis

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def n_types(self) -> int:
        return len(self.shapes.prototiles)

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.shapes.prototiles]

    def theta(self, rule: int) -> float:
        return self.basis.theta[rule]

    def matrix(self, rule: int) -> tuple[tuple[int, ...], ...]:
        return substitution_matrix(self, rule)

    def volumes(self) -> np.ndarray:
        return np.array([self.shapes.volume(i) for i in range(self.n_types)])

    def length_vectors(self) -> list[ExactVector]:
        """Exact length of each prototile (d = 1 only)."""
        if self.dim != 1:
            raise ValueError("lengths are defined for d = 1 systems")
        out = []
        for p in self.shapes.prototiles:
            if len(p.cells) != 1:
                raise ValueError("a d = 1 prototile must be a single interval")
            lo, hi = p.cells[0]
            out.append(hi - lo)
        return out


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    failures: list = field(default_factory=list)


@dataclass
class ValidationReport:
    checks: list
    primitivity_n: int | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "primitivity_n": self.primitivity_n,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail, "failures": c.failures}
                for c in self.checks
            ],
        }


def substitution_matrix(sys: SubstitutionSystem, rule: int) -> tuple[tuple[int, ...], ...]:
    """F[i][j] = number of children of label j under parent i."""
    if not 0 <= rule < sys.n_rules:
        raise IndexError(f"rule index {rule} out of range 0..{sys.n_rules - 1}")
    return sys.rules[rule].matrix(sys.n_types)


def inflate(sys: SubstitutionSystem, rule: int, patch: Patch) -> Patch:
    basis = sys.basis
    digits = sys.rules[rule].digits
    out = []
    for tile in patch.tiles:
        base = basis.expand(rule, tile.translation)
        for d in digits[tile.label]:
            out.append(PlacedTile(d.child, base + d.corner))
    return Patch(sys.shapes, tuple(out))


def _inflated_cells(sys: SubstitutionSystem, rule: int, label: int) -> list[tuple[ExactVector, ExactVector]]:
    basis = sys.basis
    return [(basis.expand(rule, lo), basis.expand(rule, hi)) for lo, hi in sys.shapes.prototiles[label].cells]


def _block_factor(basis: ModuleBasis, rule: int) -> int | None:
    m = basis.mult_tables[rule]
    q = m[0][0]
    for i, row in enumerate(m):
        for j, v in enumerate(row):
            if v != (q if i == j else 0):
                return None
    return q


def _check_covering(sys: SubstitutionSystem) -> CheckResult:
    failures = []
    basis = sys.basis
    for r, rule in enumerate(sys.rules):
        for i in range(sys.n_types):
            digits = rule.digits[i]
            where = {"rule": r, "rule_name": rule.name, "parent": sys.labels[i]}
            if not digits:
                failures.append({**where, "reason": "parent has no children"})
                continue
            if sys.dim == 1:
                (plo, phi), = _inflated_cells(sys, r, i)
                placed = sorted(
                    ((basis.embed(d.corner)[0], d) for d in digits), key=lambda t: t[0])
                cursor = plo
                total = ExactVector.zero(basis.rank)
                for _, d in placed:
                    lo, hi = sys.shapes.prototiles[d.child].cells[0]
                    total = total + (hi - lo)
                    if d.corner + lo != cursor:
                        failures.append({**where, "reason": f"gap or overlap at child {sys.labels[d.child]}"})
                        break
                    cursor = d.corner + hi
                else:
                    if cursor != phi:
                        width = float(basis.embed(phi - plo)[0])
                        got = float(basis.embed(total)[0])
                        failures.append({**where, "reason": f"child lengths sum {got:g} != {width:g}"})
            else:
                q = _block_factor(basis, r)
                if q is None or basis.rank != sys.dim:
                    failures.append({**where, "reason": "only block substitutions are supported for d >= 2"})
                    continue
                target = []
                for lo, _ in sys.shapes.prototiles[i].cells:
                    for off in itertools.product(range(q), repeat=sys.dim):
                        target.append(tuple(q * c + o for c, o in zip(lo.coords, off)))
                got = []
                for d in digits:
                    for lo, _ in sys.shapes.prototiles[d.child].cells:
                        got.append((d.corner + lo).coords)
                if sorted(target) != sorted(got):
                    failures.append({**where, "reason": "children do not partition the inflated cells"})
    return CheckResult("covering", not failures, f"{len(failures)} failures", failures)


def _check_uniform(sys: SubstitutionSystem) -> CheckResult:
    failures = []
    for r, resid in enumerate(sys.basis.multiplication_residuals()):
        if resid > 1e-12:
            failures.append({"rule": r, "reason": f"multiplication table defect {resid:.3g}"})
        if not sys.basis.theta[r] > 1.0:
            failures.append({"rule": r, "reason": f"expansion {sys.basis.theta[r]} is not > 1"})
        if sys.dim >= 2 and _block_factor(sys.basis, r) is None:
            failures.append({"rule": r, "reason": "expansion is not a scalar multiple of the identity"})
    if not sys.basis.spans():
        failures.append({"reason": "module does not span R^d"})
    return CheckResult("uniform_expansion", not failures, "", failures)


def _check_lengths(sys: SubstitutionSystem) -> CheckResult:
    failures = []
    for r in range(sys.n_rules):
        F = substitution_matrix(sys, r)
        if sys.dim == 1:
            L = sys.length_vectors()
            for i in range(sys.n_types):
                lhs = ExactVector.zero(sys.basis.rank)
                for j in range(sys.n_types):
                    lhs = lhs + F[i][j] * L[j]
                if lhs != sys.basis.expand(r, L[i]):
                    failures.append({"rule": r, "parent": sys.labels[i], "reason": "F L != theta L"})
        else:
            vol = sys.volumes()
            q = sys.basis.theta[r]
            lhs = np.asarray(F, dtype=float) @ vol
            if np.max(np.abs(lhs - q ** sys.dim * vol)) > 1e-9:
                failures.append({"rule": r, "reason": "F vol != theta^d vol"})
    return CheckResult("length_consistency", not failures, "", failures)


def primitivity_window(sys: SubstitutionSystem, words: Callable[[int], Iterable[tuple]] | None = None,
                       n_max: int = 8) -> int | None:
    """Smallest n <= n_max such that every realizable length-n product is positive."""
    if words is None:
        words = lambda n: itertools.product(range(sys.n_rules), repeat=n)
    mats = [substitution_matrix(sys, r) for r in range(sys.n_rules)]
    for n in range(1, n_max + 1):
        ok = True
        seen_any = False
        for w in words(n):
            seen_any = True
            prod = mats[w[0]]
            for letter in w[1:]:
                prod = int_matmul(mats[letter], prod)
            if min(min(row) for row in prod) <= 0:
                ok = False
                break
        if ok and seen_any:
            return n
    return None


def validate_system(sys: SubstitutionSystem, words: Callable[[int], Iterable[tuple]] | None = None,
                    n_max: int = 8) -> ValidationReport:
    """Run every structural check; a failing check never stops the others."""
    checks = []
    for fn in (_check_covering, _check_uniform, _check_lengths):
        try:
            checks.append(fn(sys))
        except Exception as exc:  # a malformed rule must still yield a report
            checks.append(CheckResult(fn.__name__.replace("_check_", ""), False, f"check crashed: {exc}"))
    try:
        n = primitivity_window(sys, words, n_max)
        checks.append(CheckResult("primitivity", n is not None,
                                  f"window n = {n}" if n else f"no window up to n = {n_max}"))
    except Exception as exc:
        n = None
        checks.append(CheckResult("primitivity", False, f"check crashed: {exc}"))
    contracting = all(t > 1.0 for t in sys.basis.theta)
    checks.append(CheckResult("contracting", contracting,
                              "recorded from expansions > 1" if contracting else "some expansion <= 1"))
    return ValidationReport(checks, n)


def count_coordinates(sys: SubstitutionSystem) -> SubstitutionSystem:
    """Re-express a d = 1 system in tile-count coordinates.

    A point is located by how many tiles of each type lie to its left, so the
    module is Z^M, prototile i has length e_i, the embedding sends e_i to the
    real length of tile i and the expansion of rule l acts by F_l transposed.
    """
    if sys.dim != 1:
        raise ValueError("count coordinates exist for d = 1 only")
    M = sys.n_types
    lengths = [float(sys.basis.embed(L)[0]) for L in sys.length_vectors()]
    tables = []
    rules = []
    e = [ExactVector(tuple(int(i == j) for j in range(M))) for i in range(M)]
    for r, rule in enumerate(sys.rules):
        F = substitution_matrix(sys, r)
        tables.append(tuple(tuple(F[j][i] for j in range(M)) for i in range(M)))
        new_digits = []
        for i in range(M):
            placed = sorted(rule.digits[i], key=lambda d: sys.basis.embed(d.corner)[0])
            cursor = ExactVector.zero(M)
            row = []
            # keep the original digit order so choice functions stay meaningful
            position = {}
            for d in placed:
                position[id(d)] = cursor
                cursor = cursor + e[d.child]
            for d in rule.digits[i]:
                row.append(Digit(d.child, position[id(d)]))
            new_digits.append(tuple(row))
        rules.append(SubstitutionRule(rule.name, tuple(new_digits)))
    exact = None
    basis = ModuleBasis(1, [[x] for x in lengths], tuple(tables), sys.basis.theta, exact)
    protos = tuple(Prototile(p.label, ((ExactVector.zero(M), e[i]),)) for i, p in enumerate(sys.shapes.prototiles))
    return SubstitutionSystem(Shapes(basis, protos), tuple(rules), sys.name)


def _parse_vector(values, rank: int, what: str) -> ExactVector:
    vals = list(values)
    if len(vals) != rank:
        raise ValueError(f"{what}: expected {rank} coordinates, got {len(vals)}")
    if any(isinstance(v, bool) or int(v) != v for v in vals):
        raise ValueError(f"{what}: coordinates must be integers")
    return ExactVector(tuple(int(v) for v in vals))


def build_system(doc: dict) -> SubstitutionSystem:
    """Construct a system from its JSON description (see README)."""
    dim = int(doc["dim"])
    basis_doc = doc["basis"]
    gens = basis_doc["generators"]
    rows, exact_rows = [], []
    for g in gens:
        if len(g) != dim:
            raise ValueError("each generator needs d real coordinates")
        vals = [parse_real(c) for c in g]
        rows.append([v for v, _ in vals])
        exact_rows.append(tuple(q for _, q in vals))
    exact = tuple(exact_rows) if all(q is not None for row in exact_rows for q in row) else None
    thetas = [parse_real(t)[0] for t in doc["expansions"]]
    basis = ModuleBasis(dim, rows, basis_doc["mult_tables"], thetas, exact)
    rank = basis.rank
    labels = [p["label"] for p in doc["prototiles"]]
    if len(set(labels)) != len(labels):
        raise ValueError("prototile labels must be distinct")
    index = {lab: i for i, lab in enumerate(labels)}
    protos = []
    for p in doc["prototiles"]:
        if dim == 1:
            L = _parse_vector(p["length"], rank, f"length of {p['label']}")
            cells = ((ExactVector.zero(rank), L),)
        else:
            cells = []
            for c in p["cells"]:
                lo = _parse_vector(c, rank, f"cell of {p['label']}")
                cells.append((lo, lo + ExactVector((1,) * rank)))
            cells = tuple(cells)
        protos.append(Prototile(p["label"], cells))
    rules = []
    for r, rspec in enumerate(doc["rules"]):
        table = []
        for lab in labels:
            kids = rspec["digits"].get(lab)
            if kids is None:
                raise ValueError(f"rule {r} has no digits for parent {lab}")
            row = []
            for child, corner in kids:
                if child not in index:
                    raise ValueError(f"rule {r}, parent {lab}: unknown child label {child}")
                row.append(Digit(index[child], _parse_vector(corner, rank, f"digit of {lab}")))
            table.append(tuple(row))
        unknown = set(rspec["digits"]) - set(labels)
        if unknown:
            raise ValueError(f"rule {r} mentions unknown parents {sorted(unknown)}")
        rules.append(SubstitutionRule(rspec.get("name", f"rule{r + 1}"), tuple(table)))
    if len(rules) != basis.n_rules:
        raise ValueError("need one multiplication table and expansion per rule")
    return SubstitutionSystem(Shapes(basis, tuple(protos)), tuple(rules), doc.get("name", ""))
