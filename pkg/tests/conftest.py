import numpy as np
import pytest

PATH3 = np.array([[2.0, -1, 0], [-1, 2, -1], [0, -1, 2]])
PATH_LAPLACIAN = np.array([[1.0, -1, 0], [-1, 2, -1], [0, -1, 1]])


def random_spd(rng, n, density=0.5):
    """Sparse symmetric off-diagonals with a diagonal that keeps the matrix PD."""
    off = rng.normal(size=(n, n)) * (rng.random((n, n)) < density)
    off = np.triu(off, 1)
    off = off + off.T
    radii = np.abs(off).sum(axis=1)
    m = off + np.diag(radii * rng.uniform(0.6, 2.0, n) + rng.uniform(0.01, 1.0, n))
    lo = np.linalg.eigvalsh(m)[0]
    if lo <= 1e-6:
        m += (1e-3 - lo) * np.eye(n)
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
