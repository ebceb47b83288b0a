import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def digraphs(draw, max_nodes=7, cyclic=True, min_edges=1, max_edges=14):
    """Random simple digraphs on vs, v1..vn with no edge into vs."""
    n = draw(st.integers(2, max_nodes))
    nodes = ["vs"] + [f"v{i}" for i in range(1, n)]
    pairs = [(a, b) for a in nodes for b in nodes[1:] if a != b]
    if not cyclic:
        pairs = [(a, b) for a, b in pairs if nodes.index(a) < nodes.index(b)]
    edges = draw(st.lists(st.sampled_from(pairs), min_size=min_edges,
                          max_size=min(max_edges, len(pairs)), unique=True))
    p0 = draw(st.lists(st.floats(0.05, 1.0), min_size=len(edges), max_size=len(edges)))
    return nodes, [(a, b, p) for (a, b), p in zip(edges, p0)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# Verdict lines recorded by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
