import numpy as np
import pytest

from tsinfo import oracle


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def var_a_100k():
    return oracle.gen_var1(oracle.VAR_A, 100_000, seed=2024)


@pytest.fixture(scope="session")
def var_a_10k():
    return oracle.gen_var1(oracle.VAR_A, 10_000, seed=7)


def gaussian_with_exact_cov(n, cov, seed=0):
    """Samples whose ML (divide-by-N) covariance equals ``cov`` up to rounding."""
    cov = np.atleast_2d(cov)
    d = cov.shape[0]
    z = np.random.default_rng(seed).standard_normal((n, d))
    z -= z.mean(axis=0)
    ml = z.T @ z / n
    z = z @ np.linalg.inv(np.linalg.cholesky(ml)).T
    return z @ np.linalg.cholesky(cov).T


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
