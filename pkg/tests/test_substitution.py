import json

import numpy as np
import pytest

from tilecocycle.config import bundled
from tilecocycle.geometry import ExactVector, Patch, PlacedTile
from tilecocycle.substitution import (build_system, count_coordinates, inflate, primitivity_window,
                                      substitution_matrix, validate_system)

from conftest import GOLDEN


@pytest.mark.parametrize("name", GOLDEN)
def test_golden_systems_validate(configs, name):
    rep = validate_system(configs[name].system)
    assert rep.passed, rep.as_dict()


def test_known_matrices(tmpd, fib, block2d):
    assert substitution_matrix(tmpd.system, 0) == ((1, 1), (1, 1))
    assert substitution_matrix(tmpd.system, 1) == ((1, 1), (2, 0))
    assert substitution_matrix(fib.system, 0) == ((1, 1), (1, 0))
    assert substitution_matrix(block2d.system, 1) == ((3, 1), (4, 0))


def test_broken_covering_names_rule_and_parent():
    sys = build_system(json.loads(bundled("broken_covering"))["system"])
    rep = validate_system(sys)
    assert not rep.passed
    cov = rep.check("covering")
    assert not cov.passed
    assert cov.failures[0]["rule"] == 0 and cov.failures[0]["parent"] == "a"
    assert "child lengths sum 1 != 2" in cov.failures[0]["reason"]


def test_unknown_child_rejected():
    raw = json.loads(bundled("tmpd"))["system"]
    raw["rules"][0]["digits"]["a"][0][0] = "z"
    with pytest.raises(ValueError, match="unknown child"):
        build_system(raw)


def test_primitivity_window(tmpd, fib):
    assert primitivity_window(tmpd.system) == 2  # F2 alone has a zero entry
    assert primitivity_window(fib.system) == 2


@pytest.mark.parametrize("name", GOLDEN)
def test_inflation_counts_follow_matrix(configs, name):
    sys = configs[name].system
    rank = sys.basis.rank
    for rule in range(sys.n_rules):
        F = substitution_matrix(sys, rule)
        for label in range(sys.n_types):
            patch = Patch(sys.shapes, (PlacedTile(label, ExactVector.zero(rank)),))
            for _ in range(3):
                patch = inflate(sys, rule, patch)
            F3 = np.linalg.matrix_power(np.asarray(F, dtype=np.int64), 3)
            assert patch.label_counts(sys.n_types) == F3[label, :].tolist()  # row = parent
            assert patch.has_disjoint_interiors()


@pytest.mark.parametrize("name", ["tmpd", "fibonacci"])
def test_count_coordinates_preserve_matrices(configs, name):
    sys = configs[name].system
    lifted = count_coordinates(sys)
    assert lifted.basis.rank == sys.n_types
    assert validate_system(lifted).passed
    for r in range(sys.n_rules):
        F = substitution_matrix(sys, r)
        assert substitution_matrix(lifted, r) == F
        assert lifted.basis.mult_tables[r] == tuple(zip(*F))


def test_count_coordinates_need_line(block2d):
    with pytest.raises(ValueError):
        count_coordinates(block2d.system)
