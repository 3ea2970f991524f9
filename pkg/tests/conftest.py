import numpy as np
import pytest

from cloakmat import Permutation, ScaledPermutation, LeiKey


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def worked_lei_key():
    """The 2x3 / 3x? worked example key: alpha={1,2}, beta={3,4,5}.

    One-based maps 1->2, 2->1 and 1->3, 2->1, 3->2 become zero-based
    forward arrays [1, 0] and [2, 0, 1].
    """
    p1 = ScaledPermutation(Permutation.from_forward([1, 0]), np.array([1.0, 2.0]))
    p2 = ScaledPermutation(Permutation.from_forward([2, 0, 1]), np.array([3.0, 4.0, 5.0]))
    p3 = ScaledPermutation(Permutation.from_forward([0, 1]), np.array([1.0, 1.0]))
    return LeiKey(p1, p2, p3)


WORKED_X = np.array([[1.0, 0.0, 2.0], [0.0, 3.0, 4.0]])
WORKED_X_ENC = np.array([[4 / 3, 0.0, 3 / 5], [4 / 3, 1 / 2, 0.0]])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
