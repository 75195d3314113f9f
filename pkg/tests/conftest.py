import numpy as np
import pytest

from transmon_cas import measured_coherence, measured_device
from transmon_cas.gates import calibrate_cz


@pytest.fixture(scope="session")
def device():
    return measured_device()


@pytest.fixture(scope="session")
def coherence():
    return measured_coherence()


@pytest.fixture(scope="session")
def cz_cal(device):
    """Calibrated CZ at 75 MHz drive; shared because it takes tens of seconds."""
    return calibrate_cz(device, 0.075)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
