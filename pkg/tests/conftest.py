import sys
from pathlib import Path

import pytest

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src.critline import line_zeros, track_phase


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-scale tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def phase_track_60():
    return track_phase(0.0, 60.0)


@pytest.fixture(scope="session")
def tplus_60(phase_track_60):
    return line_zeros("Tplus", 60.0, track=phase_track_60)


@pytest.fixture(scope="session")
def tminus_60(phase_track_60):
    return line_zeros("Tminus", 60.0, track=phase_track_60)


@pytest.fixture(scope="session")
def zeta_line_210():
    """Critical-line zeta zeros in t units (gamma / 2) up to t = 210."""
    return line_zeros("zeta_line", 210.0)


@pytest.fixture(scope="session")
def tables_1000():
    """Full-height tables; only the slow tests ask for these."""
    track = track_phase(0.0, 1000.0)
    return {
        "Tplus": line_zeros("Tplus", 1000.0, track=track),
        "Tminus": line_zeros("Tminus", 1000.0, track=track),
        "zeta_line": line_zeros("zeta_line", 1000.0),
    }
