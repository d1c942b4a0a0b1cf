import numpy as np
import pytest

from dnls_breathers import ModeSpec, initial_guess, solve_breather
from dnls_breathers.solver import ground_state

# lines collected by the acceptance module, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def breathers_1d():
    """Converged 1D p=1 breathers at mu=0.2, keyed by mode label."""
    prof = ground_state(1, 1.0)
    out = {}
    for mode in ModeSpec.all_modes(1):
        out[mode.label] = solve_breather(initial_guess(prof, mode, 0.2), mode, 1.0)
    return out
