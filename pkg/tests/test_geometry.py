from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from tilecocycle.geometry import (ExactVector, Region, box_inside, int_identity, int_matmul, int_matvec,
                                  parse_real, refine_root, region_clip, unit_line_patch)

ints = st.integers(-50, 50)


def test_golden_root_matches_sympy():
    t = sympy.symbols("t")
    exact = max(sympy.solve(t**2 - t - 1, t), key=lambda r: float(r))
    assert refine_root([-1, -1, 1], 1.6) == pytest.approx(float(exact), abs=1e-15)


def test_plastic_root_matches_sympy():
    t = sympy.symbols("t")
    exact = float(sympy.nsolve(t**3 - t - 1, t, 1.3))
    assert refine_root([-1, -1, 0, 1], 1.3) == pytest.approx(exact, abs=1e-14)


def test_refine_root_rejects_constant():
    with pytest.raises(ValueError):
        refine_root([3], 1.0)


def test_parse_real_forms():
    assert parse_real(3) == (3.0, Fraction(3))
    assert parse_real("1/3") == (1 / 3, Fraction(1, 3))
    v, q = parse_real({"poly": [-1, -1, 1], "root": 1.6})
    assert q is None and v == pytest.approx((1 + 5**0.5) / 2, abs=1e-15)
    v, q = parse_real({"poly": [-3, 2], "root": 1})
    assert q == Fraction(3, 2)
    with pytest.raises(TypeError):
        parse_real(True)


@given(st.lists(ints, min_size=3, max_size=3), st.lists(ints, min_size=3, max_size=3))
def test_exact_vector_group_laws(a, b):
    u, v = ExactVector(a), ExactVector(b)
    assert (u + v) - v == u
    assert u + (-u) == ExactVector.zero(3)
    assert (2 * u).coords == tuple(2 * c for c in a)


def test_rank_mismatch():
    with pytest.raises(ValueError):
        ExactVector((1, 2)) + ExactVector((1,))


@settings(max_examples=60)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.lists(st.lists(ints, min_size=n, max_size=n), min_size=n, max_size=n),
    st.lists(st.lists(ints, min_size=n, max_size=n), min_size=n, max_size=n),
    st.lists(ints, min_size=n, max_size=n))))
def test_integer_products_match_sympy(data):
    a, b, v = data
    assert int_matmul(a, b) == tuple(map(tuple, (sympy.Matrix(a) * sympy.Matrix(b)).tolist()))
    assert int_matvec(a, v) == tuple(sympy.Matrix(a) * sympy.Matrix(v))
    assert int_matmul(a, int_identity(len(a))) == tuple(map(tuple, a))


def test_region_box_and_clip():
    r = Region((0.5,), 2.0)
    assert r.volume() == 4.0
    assert box_inside(np.array([-1.5]), np.array([2.5]), r)
    assert not box_inside(np.array([-1.6]), np.array([0.0]), r)
    patch = unit_line_patch(range(-4, 5))
    kept = region_clip(patch, r)
    assert sorted(t.translation.coords[0] for t in kept) == [-1, 0, 1]
    with pytest.raises(ValueError):
        Region((0.0,), 0.0)


def test_unit_patch_interiors_disjoint():
    assert unit_line_patch(range(10)).has_disjoint_interiors()
    assert not unit_line_patch([0, 0]).has_disjoint_interiors()
