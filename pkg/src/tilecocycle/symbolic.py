"""Symbol sequences, their samplers, and word predicates.

Rules are indexed from 0 internally.  Words typed by people (``"1122"``)
use 1-based digits and are converted by :func:`parse_word`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .geometry import int_matmul, int_identity
from .substitution import SubstitutionSystem, substitution_matrix


def parse_word(text) -> tuple[int, ...]:
    """``"1122"`` or ``[1, 1, 2, 2]`` or ``"1 1 2 2"`` -> (0, 0, 1, 1)."""
    if isinstance(text, str):
        items = text.split() if " " in text.strip() else list(text.strip())
    else:
        items = list(text)
    word = tuple(int(c) - 1 for c in items)
    if any(c < 0 for c in word):
        raise ValueError(f"word symbols start at 1: {text!r}")
    return word


def format_word(word) -> str:
    return "".join(str(c + 1) for c in word)


@dataclass(frozen=True)
class MeasureSampler:
    kind: str
    n_symbols: int
    seed: int = 0
    p: tuple | None = None
    matrix: tuple | None = None
    initial: tuple | None = None
    word: tuple | None = None

    def __post_init__(self):
        if self.kind == "bernoulli":
            p = np.asarray(self.p, dtype=float)
            if p.shape != (self.n_symbols,) or np.any(p < 0):
                raise ValueError("bernoulli needs a nonnegative probability per symbol")
            if abs(p.sum() - 1.0) > 1e-12:
                raise ValueError(f"probabilities sum {p.sum():g}")
        elif self.kind == "markov":
            P = np.asarray(self.matrix, dtype=float)
            if P.shape != (self.n_symbols, self.n_symbols) or np.any(P < 0):
                raise ValueError("markov needs a nonnegative square transition matrix")
            if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
                raise ValueError("transition rows must sum to 1")
            init = np.asarray(self.initial, dtype=float)
            if init.shape != (self.n_symbols,) or abs(init.sum() - 1.0) > 1e-12:
                raise ValueError(f"initial probabilities sum {init.sum():g}")
        elif self.kind == "word":
            if not self.word:
                raise ValueError("explicit word must be nonempty")
            if any(not 0 <= c < self.n_symbols for c in self.word):
                raise ValueError("explicit word uses an undefined rule")
        else:
            raise ValueError(f"unknown sampler kind {self.kind!r}")

    def realizable_words(self, n: int):
        """All length-n words that occur with positive probability."""
        if self.kind == "bernoulli":
            support = [i for i, q in enumerate(self.p) if q > 0]
            yield from itertools.product(support, repeat=n)
        elif self.kind == "markov":
            P = np.asarray(self.matrix, dtype=float)
            starts = [i for i in range(self.n_symbols) if _stationary(P)[i] > 0 or self.initial[i] > 0]

            def walk(prefix):
                if len(prefix) == n:
                    yield tuple(prefix)
                    return
                for j in range(self.n_symbols):
                    if P[prefix[-1], j] > 0:
                        yield from walk(prefix + [j])

            for s in starts:
                yield from walk([s])
        else:
            w = self.word
            seen = set()
            for start in range(len(w)):
                sub = tuple(w[(start + t) % len(w)] for t in range(n))
                if sub not in seen:
                    seen.add(sub)
                    yield sub

    def symbol_frequencies(self) -> np.ndarray:
        if self.kind == "bernoulli":
            return np.asarray(self.p, dtype=float)
        if self.kind == "markov":
            return _stationary(np.asarray(self.matrix, dtype=float))
        counts = np.bincount(self.word, minlength=self.n_symbols)
        return counts / counts.sum()


def _stationary(P: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eig(P.T)
    k = int(np.argmin(np.abs(w - 1.0)))
    pi = np.real(v[:, k])
    pi = np.abs(pi) / np.abs(pi).sum()
    return pi


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """Future symbols x_1, x_2, ... and past symbols x_-1, x_-2, ... (0-based rules)."""

    plus: np.ndarray
    minus: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.plus)

    def shifted(self, n: int) -> "SymbolSequence":
        """sigma^n: the first n future symbols move onto the past."""
        if n < 0 or n > len(self.plus):
            raise ValueError("shift beyond horizon")
        plus = self.plus[n:]
        minus = np.concatenate([self.plus[:n][::-1], self.minus])
        return SymbolSequence(plus, minus, {**self.meta, "shift": self.meta.get("shift", 0) + n})


def sample_sequence(sampler: MeasureSampler, K: int) -> SymbolSequence:
    """Draw K future and K past symbols; both tails are independent."""
    if K < 1:
        raise ValueError("horizon K must be positive")
    ss = np.random.SeedSequence(int(sampler.seed) & ((1 << 64) - 1))
    rng_plus, rng_minus = (np.random.default_rng(s) for s in ss.spawn(2))
    n = sampler.n_symbols
    if sampler.kind == "bernoulli":
        p = np.asarray(sampler.p, dtype=float)
        plus = rng_plus.choice(n, size=K, p=p)
        minus = rng_minus.choice(n, size=K, p=p)
    elif sampler.kind == "markov":
        P = np.asarray(sampler.matrix, dtype=float)
        init = np.asarray(sampler.initial, dtype=float)
        pi = _stationary(P)
        with np.errstate(divide="ignore", invalid="ignore"):
            back = np.where(pi[:, None] > 0, (P.T * pi[None, :]) / pi[:, None], 0.0)
        back = back / np.maximum(back.sum(axis=1, keepdims=True), 1e-300)
        plus = _run_chain(rng_plus, P, init, K)
        minus = _run_chain(rng_minus, back, init, K)
    else:
        w = np.asarray(sampler.word, dtype=np.int64)
        plus = np.resize(w, K)
        minus = np.resize(w[::-1], K)
    meta = {"sampler": sampler.kind, "seed": int(sampler.seed)}
    return SymbolSequence(np.asarray(plus, dtype=np.int64), np.asarray(minus, dtype=np.int64), meta)


def _run_chain(rng, P, init, K):
    out = np.empty(K, dtype=np.int64)
    u = rng.random(K)
    cum_init = np.cumsum(init)
    cum = np.cumsum(P, axis=1)
    s = int(np.searchsorted(cum_init, u[0] * cum_init[-1], side="right"))
    out[0] = min(s, len(init) - 1)
    for t in range(1, K):
        row = cum[out[t - 1]]
        out[t] = min(int(np.searchsorted(row, u[t] * row[-1], side="right")), len(init) - 1)
    return out


def fixed_sequence(plus, minus=None) -> SymbolSequence:
    plus = np.asarray(plus, dtype=np.int64)
    minus = plus[::-1].copy() if minus is None else np.asarray(minus, dtype=np.int64)
    return SymbolSequence(plus, minus, {"sampler": "fixed"})


def is_simple(word) -> bool:
    """No proper suffix equals the prefix of the same length."""
    n = len(word)
    return all(tuple(word[i - 1:]) != tuple(word[: n - i + 1]) for i in range(2, n + 1))


@dataclass
class WordCheck:
    word: tuple
    split: int
    simple: bool
    Q_minus: tuple
    Q_plus: tuple
    positively_simple: bool
    simple_waived: bool = False

    @property
    def minus(self) -> tuple:
        return self.word[: self.split]

    @property
    def plus(self) -> tuple:
        return self.word[self.split:]


def word_product(sys: SubstitutionSystem, word) -> tuple:
    """F_{w_n} ... F_{w_1}."""
    prod = int_identity(sys.n_types)
    for letter in word:
        prod = int_matmul(substitution_matrix(sys, letter), prod)
    return prod


def word_check(sys: SubstitutionSystem, word, split: int) -> WordCheck:
    word = tuple(word)
    if not 1 <= split < len(word):
        raise ValueError("split must leave both halves nonempty")
    Qm = word_product(sys, word[:split])
    Qp = word_product(sys, word[split:])
    simple = is_simple(word)
    big = min(min(r) for r in Qm) >= 2 and min(min(r) for r in Qp) >= 2
    return WordCheck(word, split, simple, Qm, Qp, simple and big)


def best_split(sys: SubstitutionSystem, word) -> WordCheck:
    """The first split making the word positively simple, else the split with
    the largest smallest entry of Q- and Q+."""
    word = tuple(word)
    checks = [word_check(sys, word, s) for s in range(1, len(word))]
    for c in checks:
        if c.positively_simple:
            return c
    return max(checks, key=lambda c: min(min(min(r) for r in c.Q_minus), min(min(r) for r in c.Q_plus)))


def power_word(sys: SubstitutionSystem, rule: int = 0, max_power: int = 64) -> WordCheck:
    """For a single substitution: the smallest power p with F^p >= 2 entrywise,
    returned as the word of length 2p split in the middle, simplicity waived."""
    for p in range(1, max_power + 1):
        word = (rule,) * (2 * p)
        Q = word_product(sys, word[:p])
        if min(min(r) for r in Q) >= 2:
            return WordCheck(word, p, is_simple(word), Q, Q, True, simple_waived=True)
    raise ValueError("no power of the rule has all entries >= 2")


def return_times(x: SymbolSequence, word, split: int, horizon: int) -> list[int]:
    """All k in [0, horizon] where w- ends at position k and w+ starts at k+1.

    Position k = 0 is the origin, so a match there reads w- from the past.
    """
    word = tuple(word)
    wm, wp = word[:split], word[split:]
    if horizon + len(wp) > len(x.plus):
        raise ValueError("horizon exceeds the sampled sequence")
    plus = np.asarray(x.plus)
    minus = np.asarray(x.minus)
    # two-sided view: index 0 of ``line`` is x_{-len(minus)}
    line = np.concatenate([minus[::-1], plus])
    origin = len(minus)  # line[origin + k - 1] = x_k for k >= 1
    n = len(word)
    target = np.asarray(word)
    starts = np.arange(0, horizon + 1) + origin - len(wm)
    valid = starts >= 0
    if n == 0:
        return list(range(horizon + 1))
    ok = valid.copy()
    for t in range(n):
        idx = np.clip(starts + t, 0, len(line) - 1)
        ok &= line[idx] == target[t]
    out = [int(k) for k in np.nonzero(ok)[0]]
    return out


def return_times_naive(x: SymbolSequence, word, split: int, horizon: int) -> list[int]:
    word = tuple(word)
    wm, wp = word[:split], word[split:]

    def sym(k):
        return int(x.plus[k - 1]) if k >= 1 else int(x.minus[-k - 1])

    out = []
    for k in range(horizon + 1):
        if len(wm) - k > len(x.minus):
            continue
        good = True
        for t, c in enumerate(wm):
            pos = k - len(wm) + 1 + t
            if pos <= 0:
                pos -= 1  # skip the missing index 0
            if sym(pos) != c:
                good = False
                break
        if good:
            for t, c in enumerate(wp):
                if sym(k + 1 + t) != c:
                    good = False
                    break
        if good:
            out.append(k)
    return out
