import sys

import numpy as np
import pytest


def fd_jacobian(fn, x, t, eps=1e-6):
    """Central differences of fn(x, t) in x; result has a trailing axis over x components."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.shape[-1]):
        e = np.zeros_like(x)
        e[..., i] = eps
        cols.append((np.asarray(fn(x + e, t)) - np.asarray(fn(x - e, t))) / (2 * eps))
    return np.stack(cols, axis=-1)


def assert_derivative(fn, dfn, x, t, rtol=1e-5):
    num = fd_jacobian(fn, x, t)
    ana = np.asarray(dfn(x, t))
    scale = max(1.0, float(np.max(np.abs(ana))))
    assert np.max(np.abs(num - ana)) <= rtol * scale


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
