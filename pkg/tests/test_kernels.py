import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tilecocycle import _fallback, kernels


def test_backend_is_known():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_env_forces_numpy():
    env = dict(os.environ, TILECOCYCLE_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from tilecocycle import kernels; print(kernels.BACKEND)"],
                         capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"


@settings(max_examples=40)
@given(st.integers(1, 4), st.integers(1, 2), st.integers(0, 60), st.integers(0, 10**6))
def test_fourier_level_backends_agree(M, d, E, seed):
    r = np.random.default_rng(seed)
    parent = r.integers(0, M, E).astype(np.int64)
    child = r.integers(0, M, E).astype(np.int64)
    offs = r.normal(size=(E, d)) * 10
    lam = r.normal(size=d)
    a = kernels.fourier_level(parent, child, offs, lam, M)
    b = _fallback.fourier_level(parent, child, offs, lam, M)
    assert np.allclose(a, b, atol=1e-12)


@settings(max_examples=40)
@given(st.integers(1, 2), st.integers(0, 30), st.integers(0, 10**6))
def test_box_transform_backends_agree(d, n, seed):
    r = np.random.default_rng(seed)
    lo = r.normal(size=(n, d))
    hi = lo + r.uniform(0, 2, size=(n, d))
    w = r.normal(size=n) + 1j * r.normal(size=n)
    lam = r.normal(size=d) * r.choice([0.0, 1e-10, 1.0])
    assert kernels.box_transform_sum(lo, hi, w, lam) == pytest.approx(_fallback.box_transform_sum(lo, hi, w, lam),
                                                                      abs=1e-12)


def test_box_transform_small_lambda_limit():
    lo, hi = np.array([[0.0]]), np.array([[3.0]])
    w = np.array([1.0 + 0j])
    assert kernels.box_transform_sum(lo, hi, w, np.array([1e-12])) == pytest.approx(3.0, abs=1e-9)


def test_chain_log_norms_zero_product():
    mats = np.array([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]])
    out = kernels.chain_log_norms(mats, np.array([1, 2]))
    assert out[0] == 0.0 and out[1] == -np.inf
