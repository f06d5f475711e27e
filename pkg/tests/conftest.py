import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from uscsensor import RabiParams, RateSet, build_model  # noqa: E402

# Lowest eight eigenvalues at g=0.3, omega_q=omega_c=1, from tests/oracles.py
# (cavity-first ordering, n_fock=80; identical to 12 digits at n_fock=120).
LEVELS_PI_2 = [-0.046035244863, 0.656807663092, 1.248629891883, 1.537583549696,
               2.362273665854, 2.450301358261, 3.381361649899, 3.442636343137]
LEVELS_PI_6 = [-0.079771244899, 0.786640497165, 1.044571706012, 1.758586861635,
               2.064253390405, 2.755647326045, 3.062314364771, 3.765606021317]


@pytest.fixture(scope="session")
def rates():
    return RateSet.reference()


@pytest.fixture(scope="session")
def model_sym(rates):
    return build_model(RabiParams(g=0.3, theta=np.pi / 2), rates)


@pytest.fixture(scope="session")
def model_broken(rates):
    return build_model(RabiParams(g=0.3, theta=np.pi / 6), rates)


@pytest.fixture(scope="session")
def model_small():
    """Cheap model for exhaustive checks."""
    return build_model(RabiParams(g=0.3, theta=np.pi / 6), RateSet.reference(), n_fock=12, n_levels=6)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
