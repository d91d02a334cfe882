import dataclasses
import json

import numpy as np
import pytest

from tilecocycle.config import bundled, parse_config
from tilecocycle.hierarchy import Tower
from tilecocycle.symbolic import sample_sequence

GOLDEN = ("tmpd", "fibonacci", "block2d")


def load(name):
    return parse_config(bundled(name))


def random_tower(cfg, seed, horizon=60):
    return Tower(cfg.system, sample_sequence(dataclasses.replace(cfg.sampler, seed=seed), horizon))


@pytest.fixture(scope="session")
def configs():
    return {name: load(name) for name in GOLDEN}


@pytest.fixture(scope="session")
def tmpd():
    return load("tmpd")


@pytest.fixture(scope="session")
def fib():
    return load("fibonacci")


@pytest.fixture(scope="session")
def block2d():
    return load("block2d")


@pytest.fixture(scope="session")
def towers(configs):
    return {name: random_tower(cfg, 11) for name, cfg in configs.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def raw_doc(name):
    return json.loads(bundled(name))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for n, m in sys.modules.items() if n.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
