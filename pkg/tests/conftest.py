import math
import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("repo", deadline=None, derandomize=True, print_blob=True,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

_ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    """Record and immediately print one line per acceptance criterion."""
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def record(n, ok, detail, seconds):
        line = f"[criterion {n}] {'PASS' if ok else 'FAIL'} ({seconds:.1f}s) {detail}"
        _ACCEPTANCE[n] = line
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        else:
            print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])


# ---------------------------------------------------------------- shared strategies

def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@st.composite
def sl2_matrices(draw, t_max=3.0):
    """R(a) diag(e^t, e^-t) R(b): every element of SL(2, R) with bounded displacement."""
    a = draw(st.floats(0, 2 * math.pi))
    b = draw(st.floats(0, 2 * math.pi))
    t = draw(st.floats(-t_max, t_max))
    return rotation(a) @ np.diag([math.exp(t), math.exp(-t)]) @ rotation(b)


@st.composite
def upper_points(draw, r_max=3.0):
    x = draw(st.floats(-5, 5))
    y = math.exp(draw(st.floats(-r_max, r_max)))
    return complex(x, y)


def random_sl(rng, d, scale=0.5):
    """A random element of SL(d, R) near the identity in log scale."""
    g = np.eye(d) + scale * rng.normal(size=(d, d))
    while abs(np.linalg.det(g)) < 1e-2:
        g = np.eye(d) + scale * rng.normal(size=(d, d))
    if np.linalg.det(g) < 0:
        g[:, 0] *= -1
    return g / abs(np.linalg.det(g)) ** (1.0 / d)


@pytest.fixture(scope="session")
def tps_generators():
    from anosov_lab.hyperbolic import MoebiusMap
    return [MoebiusMap.from_matrix([[1, 2], [0, 1]]), MoebiusMap.from_matrix([[1, 0], [2, 1]])]
