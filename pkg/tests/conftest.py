import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from walkestimate import Graph, barabasi_albert

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@st.composite
def graphs(draw, min_nodes=2, max_nodes=12, connected=False):
    """Random simple graphs; ``connected`` threads a random spanning path first."""
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    if connected:
        perm = draw(st.permutations(range(n)))
        chosen = list(chosen) + [(perm[i], perm[i + 1]) for i in range(n - 1)]
    return Graph(n, chosen)


@pytest.fixture
def path3():
    return Graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def ba30():
    return barabasi_albert(30, 2, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance verdicts, filled by test_acceptance.py and printed after the run.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, label, detail = ACCEPTANCE[key]
        terminalreporter.write_line("%s  %2d %s: %s" % ("PASS" if ok else "FAIL", key, label, detail))
