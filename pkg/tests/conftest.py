import numpy as np
import pytest

from henon_basins.manifolds import Branch, ManifoldKind, trace_manifold
from henon_basins.maps import make_general, make_henon, scalar_map_from_spec


@pytest.fixture(scope="session")
def henon():
    return make_henon(0.1, 2.0)


@pytest.fixture(scope="session")
def general():
    g = scalar_map_from_spec("logistic(2)")
    h = scalar_map_from_spec("linear_plus_sine(0.1, 0.001)")
    return make_general(g, h, 0.1)


@pytest.fixture(scope="session")
def stable_pair(henon):
    return tuple(trace_manifold(henon, ManifoldKind.STABLE, b, 20.0) for b in (Branch.PLUS, Branch.MINUS))


@pytest.fixture(scope="session")
def unstable_pair(henon):
    return tuple(trace_manifold(henon, ManifoldKind.UNSTABLE, b, 20.0) for b in (Branch.PLUS, Branch.MINUS))


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        status, text = RESULTS[n]
        terminalreporter.write_line(f"{status} criterion {n}: {text}")
