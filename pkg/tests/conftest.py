import numpy as np
import pytest

from steerharvest.config import settings
from steerharvest.models.schemas import DetectorPairParams


@pytest.fixture(autouse=True)
def isolated_log_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "log_dir", str(tmp_path / "LOG"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fig1a():
    """Omega_A sigma = 0.5 with Delta Omega / Omega_A = 1."""
    return DetectorPairParams(coupling=0.1, omega_a=0.5, omega_b=1.0, separation=0.1)


@pytest.fixture
def fig1b():
    return DetectorPairParams(coupling=0.1, omega_a=1.0, omega_b=2.0, separation=0.1)
