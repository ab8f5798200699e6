import numpy as np
import pytest
from hypothesis import settings

from lassopath import LassoProblem

# property tests run on a fixed example sequence so the suite is reproducible
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


def gaussian_problem(seed: int, n: int, d: int, scaled: bool = True) -> LassoProblem:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    if scaled:
        X /= np.sqrt(n)
    return LassoProblem(X, rng.standard_normal(n))


def dense_pinv(M: np.ndarray) -> np.ndarray:
    """SVD pseudo-inverse written out, independent of the maintained factors."""
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return (Vt.T / s) @ U.T


@pytest.fixture
def identity_problem() -> LassoProblem:
    return LassoProblem(np.eye(2), np.array([3.0, 1.0]))


@pytest.fixture
def small_gaussian() -> LassoProblem:
    return gaussian_problem(7, 10, 25)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: list[str] = []


def record(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
