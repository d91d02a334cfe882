import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tilecocycle.symbolic import (MeasureSampler, best_split, fixed_sequence, format_word, is_simple, parse_word,
                                  power_word, return_times, return_times_naive, sample_sequence, word_check)


def test_parse_and_format_word():
    assert parse_word("1122") == (0, 0, 1, 1)
    assert parse_word("1 1 2 2") == (0, 0, 1, 1)
    assert parse_word([2, 1]) == (1, 0)
    assert format_word((0, 0, 1, 1)) == "1122"
    with pytest.raises(ValueError):
        parse_word("0")


@given(st.lists(st.integers(0, 2), min_size=1, max_size=12))
def test_word_round_trip(word):
    assert parse_word(format_word(word)) == tuple(word)


def _simple_oracle(w):
    n = len(w)
    return not any(w[:k] == w[n - k:] for k in range(1, n))


@given(st.lists(st.integers(0, 1), min_size=1, max_size=10))
def test_simplicity_matches_border_definition(word):
    assert is_simple(word) == _simple_oracle(tuple(word))


def test_sampler_rejects_bad_probabilities():
    with pytest.raises(ValueError, match="probabilities sum 1.1"):
        MeasureSampler("bernoulli", 2, p=(0.5, 0.6))


def test_sampling_is_seeded():
    s = MeasureSampler("bernoulli", 2, seed=5, p=(0.5, 0.5))
    a, b = sample_sequence(s, 50), sample_sequence(s, 50)
    assert np.array_equal(a.plus, b.plus) and np.array_equal(a.minus, b.minus)


def test_bernoulli_frequencies(rng):
    s = MeasureSampler("bernoulli", 2, seed=8, p=(0.3, 0.7))
    x = sample_sequence(s, 20000)
    assert np.mean(x.plus == 0) == pytest.approx(0.3, abs=0.02)


def test_markov_stays_on_support():
    P = ((0.0, 1.0), (0.5, 0.5))
    s = MeasureSampler("markov", 2, seed=3, matrix=P, initial=(0.5, 0.5))
    x = sample_sequence(s, 2000)
    pairs = set(zip(x.plus[:-1], x.plus[1:]))
    assert (0, 0) not in pairs
    assert {w for w in s.realizable_words(2)} == {(0, 1), (1, 0), (1, 1)}


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.lists(st.integers(0, 1), min_size=2, max_size=5), st.data())
def test_return_times_agree_with_naive_scan(seed, word, data):
    split = data.draw(st.integers(1, len(word) - 1))
    x = sample_sequence(MeasureSampler("bernoulli", 2, seed=seed, p=(0.5, 0.5)), 120)
    assert return_times(x, word, split, 100) == return_times_naive(x, word, split, 100)


def test_word_check_hand_products(tmpd):
    # Q- = F1 F1 = [[2,2],[2,2]]; Q+ = F2 F2 = [[3,1],[2,2]]
    chk = word_check(tmpd.system, parse_word("1122"), 2)
    assert chk.Q_minus == ((2, 2), (2, 2))
    assert chk.Q_plus == ((3, 1), (2, 2))
    assert chk.simple and not chk.positively_simple


def test_best_split_and_power_word(tmpd, fib):
    assert best_split(tmpd.system, parse_word("111222")).positively_simple
    pw = power_word(fib.system)
    assert pw.simple_waived and min(min(r) for r in pw.Q_plus) >= 2


def test_fixed_sequence_shift():
    x = fixed_sequence([0, 1, 1, 0])
    y = x.shifted(2)
    assert list(y.plus) == [1, 0] and list(y.minus[:2]) == [1, 0]
