import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def rand_sym(rng, n, scale=1.0):
    M = rng.standard_normal((n, n)) * scale
    return (M + M.T) / 2


def rand_spd(rng, n, shift=1.0):
    B = rng.standard_normal((n, n))
    return B @ B.T / n + shift * np.eye(n)


def kron_loops(A, B):
    """Kronecker product built block by block."""
    ra, ca = A.shape
    rb, cb = B.shape
    K = np.zeros((ra * rb, ca * cb))
    for i in range(ra):
        for j in range(ca):
            K[i * rb:(i + 1) * rb, j * cb:(j + 1) * cb] = A[i, j] * B
    return K


def vec_loops(M):
    return np.array([M[i, j] for j in range(M.shape[1]) for i in range(M.shape[0])])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
