import numpy as np
import pytest

from thor_ordinal import data

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fixture_spec():
    """K=5, d=8, sigma=0.5, 200 per class."""
    return data.SyntheticSpec(k=5, per_class=200, d=8, noise=0.5, transform_seed=42, seed=42)


@pytest.fixture(scope="session")
def fixture_splits(fixture_spec):
    return data.split(data.generate_synthetic(fixture_spec), (0.6, 0.2, 0.2), seed=42)


@pytest.fixture
def tiny_splits():
    spec = data.SyntheticSpec(k=3, per_class=30, d=3, noise=0.2, transform_seed=1, seed=1)
    return data.split(data.generate_synthetic(spec), seed=1)
