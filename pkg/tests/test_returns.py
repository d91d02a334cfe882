import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.matrices.normalforms import smith_normal_form

from tilecocycle.geometry import ExactVector
from tilecocycle.returns import (NotInGroup, address, contains, enumerate_return_vectors, from_address, g_matrix,
                                 g_product, group_basis, hermite_rows, postal_check, smith_divisors, tower_group)
from tilecocycle.symbolic import parse_word

from conftest import GOLDEN

matrices = st.integers(1, 4).flatmap(lambda m: st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=m, max_size=m)))


def _sympy_divisors(rows):
    if not rows:
        return []
    S = smith_normal_form(sympy.Matrix(rows), domain=sympy.ZZ)
    return [abs(int(S[i, i])) for i in range(min(S.shape)) if S[i, i] != 0]


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_hermite_rows_span_same_lattice(rows):
    H = hermite_rows(rows)
    # equal rank and covolume, and neither grows when the other is added: same lattice
    both = _sympy_divisors(H + rows)
    assert _sympy_divisors(H) == both == _sympy_divisors(rows)
    pivots = [next(i for i, v in enumerate(h) if v) for h in H]
    assert pivots == sorted(set(pivots))
    for i, (h, p) in enumerate(zip(H, pivots)):
        assert h[p] > 0
        assert all(0 <= H[j][p] < h[p] for j in range(i))
    assert len(H) == sympy.Matrix(rows).rank()


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_smith_divisors_match_sympy(rows):
    assert smith_divisors(rows) == _sympy_divisors(rows)


@pytest.mark.parametrize("name,hnf", [("tmpd", ((1,),)), ("fibonacci", ((1, 0), (0, 1))),
                                       ("block2d", ((1, 0), (0, 1)))])
def test_return_groups(towers, name, hnf):
    assert tower_group(towers[name]).hnf == hnf


@pytest.mark.parametrize("name", GOLDEN)
def test_address_round_trip(towers, name):
    tower = towers[name]
    group = tower_group(tower)
    vecs = enumerate_return_vectors(tower, 5, 40.0).all_vectors()
    assert vecs
    for tau in vecs:
        alpha = address(group, tau)
        assert from_address(group, alpha) == tau
        real = group.embedding @ np.asarray(alpha, dtype=float)
        assert np.allclose(real, tower.sys.basis.embed(tau), atol=1e-9)


def test_not_in_group():
    g = group_basis([ExactVector((2, 0)), ExactVector((0, 3))])
    assert contains(g, (4, -3))
    with pytest.raises(NotInGroup):
        address(g, (1, 0))


@pytest.mark.parametrize("name", GOLDEN)
def test_g_composition_over_words(towers, name):
    tower = towers[name]
    sys = tower.sys
    group = tower_group(tower)
    per_letter = [g_matrix(sys, r, group, group).matrix for r in range(sys.n_rules)]
    rng = np.random.default_rng(3)
    for _ in range(10):
        word = tuple(int(c) for c in rng.integers(0, sys.n_rules, size=int(rng.integers(1, 6))))
        assert g_matrix(sys, word, group, group).matrix == g_product([per_letter[c] for c in word])


def test_fibonacci_g_is_companion(towers):
    group = tower_group(towers["fibonacci"])
    assert g_matrix(towers["fibonacci"].sys, 0, group, group).matrix == ((0, 1), (1, 1))


def test_postal_on_tmpd(towers, tmpd):
    group = tower_group(towers["tmpd"])
    rep = postal_check(tmpd.system, parse_word("1122"), 2, group)
    assert rep.postal and rep.divisors == [1]


@pytest.mark.parametrize("name", GOLDEN)
def test_base_point_span_equals_all_pairs(towers, name):
    tower = towers[name]
    R = float(np.max(tower.supertile_extent(4)))
    full = group_basis(enumerate_return_vectors(tower, 4, R), tower.sys.basis)
    assert tower_group(tower, 4).hnf == full.hnf
