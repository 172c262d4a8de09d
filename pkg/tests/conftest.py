import numpy as np
import pytest
from hypothesis import strategies as st

from nlpsg_mzi.fock import FockState


def random_state(rng, modes=3, max_n=2, terms=5):
    amps = {}
    for _ in range(terms):
        key = tuple(int(x) for x in rng.integers(0, max_n + 1, modes))
        amps[key] = complex(rng.normal(), rng.normal())
    return FockState(modes, amps, normalized=False)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_alphas(rng):
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


# one line per acceptance criterion, filled in by test_acceptance and echoed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
