import numpy as np
import pytest

from mmreach.interval import IntervalVector
from mmreach.model import Linear, NeuralOdeModel, Tanh, fpa_model


def linear_model(A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return NeuralOdeModel((Linear(A, np.zeros(A.shape[0])),), A.shape[0], name="linear")


@pytest.fixture
def fpa():
    return fpa_model()


@pytest.fixture
def fpa_box():
    return IntervalVector([-0.1] * 5, [0.1] * 5)


@pytest.fixture
def decay():
    """Scalar x' = -x."""
    return linear_model([[-1.0]])


@pytest.fixture
def zero2():
    return linear_model(np.zeros((2, 2)))


@pytest.fixture
def identity_spiral():
    """W2 tanh(W1 x + b1) + b2 with identity weights and zero biases."""
    I = np.eye(2)
    return NeuralOdeModel((Linear(I, np.zeros(2)), Tanh(), Linear(I, np.zeros(2))), 2)


@pytest.fixture
def random_mlp():
    rng = np.random.default_rng(3)
    W1, b1 = rng.normal(size=(6, 3)), rng.normal(size=6)
    W2, b2 = rng.normal(size=(4, 6)), rng.normal(size=4)
    W3, b3 = rng.normal(size=(3, 4)), rng.normal(size=3)
    return NeuralOdeModel((Linear(W1, b1), Tanh(), Linear(W2, b2), Tanh(), Linear(W3, b3)), 3,
                          tau=-0.3)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def report_line():
    """Record a one-line criterion verdict, shown in the terminal summary."""
    def add(number: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append((number, f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"))
    return add


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
