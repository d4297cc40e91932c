import math

import numpy as np
import pytest

from ringlimit.devices import MicroringSpec, WavelengthGrid

NM = 1e-9
PM = 1e-12
UM = 1e-6

GOLDEN_RADIUS = 25 * UM
GOLDEN_N_EFF = 1.814
GOLDEN_KAPPA = 0.0163
GOLDEN_A = 0.999
# alpha with exp(-alpha * 2 pi R / 2) = 0.999
GOLDEN_ALPHA = -2.0 * math.log(GOLDEN_A) / (2.0 * math.pi * GOLDEN_RADIUS)


def golden_spec() -> MicroringSpec:
    return MicroringSpec.symmetric(GOLDEN_RADIUS, GOLDEN_N_EFF, GOLDEN_KAPPA, GOLDEN_ALPHA)


def golden_grid() -> WavelengthGrid:
    # centred on 1510 nm, 0.5 pm step (~88 points per FWHM)
    return WavelengthGrid.from_step(1490 * NM, 1530 * NM, 0.5 * PM)


@pytest.fixture
def golden():
    return golden_spec()


@pytest.fixture
def rng():
    return np.random.default_rng(20030101)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
