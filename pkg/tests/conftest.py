import numpy as np
import pytest

from pmentropy import qcore


def eig_projector(op, sign):
    """Eigenprojector from a numerical eigendecomposition (independent of (1 +/- O)/2)."""
    vals, vecs = np.linalg.eigh(op)
    cols = vecs[:, np.isclose(vals, sign)]
    return cols @ cols.conj().T


@pytest.fixture(scope="session")
def random_states():
    """200 seeded states, half pure and half mixed."""
    return [qcore.random_state(seed, "pure") for seed in range(100)] + [
        qcore.random_state(seed, "mixed") for seed in range(100, 200)
    ]


@pytest.fixture(scope="session")
def catalog_states():
    return {label: qcore.state_factory(label) for label in qcore.STATE_LABELS}


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
