import json
from fractions import Fraction

import pytest

from tilecocycle.config import ConfigError, bundled, bundled_names, parse_config
from tilecocycle.substitution import validate_system

from conftest import raw_doc


def _errors(doc):
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(doc))
    return info.value.errors


@pytest.mark.parametrize("name", ["tmpd", "fibonacci", "block2d"])
def test_bundled_parse_and_validate(name):
    cfg = parse_config(bundled(name))
    assert validate_system(cfg.system).passed
    assert len(cfg.config_hash) == 64


def test_bundled_listing():
    assert {"tmpd", "fibonacci", "block2d", "broken_covering"} <= set(bundled_names())


def test_probability_sum_reported():
    doc = raw_doc("tmpd")
    doc["sampler"]["p"] = [0.5, 0.6]
    errs = _errors(doc)
    assert {"pointer": "/sampler/p", "message": "probabilities sum 1.1"} in errs


def test_empty_document_lists_every_missing_field():
    errs = _errors({})
    messages = sorted(e["message"] for e in errs)
    assert messages == sorted(f"'{k}' is a required property" for k in ("system", "sampler", "seed"))
    assert all(e["pointer"] == "" for e in errs)


def test_all_errors_not_just_first():
    doc = raw_doc("tmpd")
    doc["seed"] = -1
    doc["sampler"]["kind"] = "nope"
    doc["system"]["dim"] = 3
    pointers = {e["pointer"] for e in _errors(doc)}
    assert {"/seed", "/sampler/kind", "/system/dim"} <= pointers


def test_undefined_labels_reported():
    doc = raw_doc("tmpd")
    doc["system"]["rules"][0]["digits"]["a"][0][0] = "q"
    doc["function"] = {"kind": "indicator", "weights": {"zz": 1}}
    pointers = {e["pointer"] for e in _errors(doc)}
    assert "/system/rules/0/digits/a/0/0" in pointers and "/function/weights/zz" in pointers


def test_lambda_dimension_checked():
    doc = raw_doc("tmpd")
    doc["experiments"]["veech"]["lambda"] = [[1, 2]]
    assert any(e["pointer"] == "/experiments/veech/lambda/0" for e in _errors(doc))


def test_word_letter_range():
    doc = raw_doc("tmpd")
    doc["experiments"]["veech"]["word"] = "1132"
    assert any("beyond" in e["message"] for e in _errors(doc))


def test_invalid_json():
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config("{")


def test_lambdas_and_seed_override():
    cfg = parse_config(bundled("tmpd"))
    assert cfg.lambdas("veech") == [(1,), (Fraction(1, 3),)]
    grid = cfg.lambdas("twist")
    assert len(grid) == 64 and grid[0] == (0.05,) and grid[-1] == pytest.approx((0.95,))
    other = cfg.with_seed(7)
    assert other.seed == 7 and other.sampler.seed == 7 and other.config_hash != cfg.config_hash


def test_word_sampler_is_zero_based():
    cfg = parse_config(bundled("fibonacci"))
    assert cfg.sampler.word == (0,)
