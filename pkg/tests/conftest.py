"""
Pytest configuration and fixtures for the random-modulation toolkit tests
"""
import os
import sys
from pathlib import Path

# Add the src directory and the project root to Python path for imports
project_root = Path(__file__).parent.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))
sys.path.insert(0, str(project_root))

# Keep test runs quiet and single-threaded unless a test asks otherwise
os.environ.setdefault("RM_LOG_LEVEL", "WARNING")
os.environ.setdefault("RM_WORKERS", "1")

import numpy as np
import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte-Carlo acceptance runs")


@pytest.fixture
def rng():
    """Seeded generator for test data"""
    return np.random.default_rng(12345)


@pytest.fixture
def small_channel_spec():
    """Desk-scale doubly-selective SISO channel parameters"""
    from channel import ChannelSpec
    return ChannelSpec(n=128, paths=5, max_delay_taps=8, seed=11)


@pytest.fixture
def two_atom_sigmas():
    """Singular values of a two-subchannel toy with sigma^2 in {4, 0.25}"""
    return np.sqrt(np.array([4.0, 0.25]))


@pytest.fixture
def ber_ini(tmp_path):
    """Minimal BER experiment on the identity channel"""
    path = tmp_path / "ber.ini"
    path.write_text(
        "[experiment]\n"
        "schema_version = 1\n"
        "kind = ber\n"
        "trials = 4\n"
        "seed = 7\n"
        "\n"
        "[system]\n"
        "n = 256\n"
        "snr_db = 6.0205999132796239\n"
        "constellation = qpsk\n"
        "transform = permutation_dft\n"
        "channel_model = identity\n"
        "\n"
        "[detector]\n"
        "variant = cd_oamp\n"
        "max_iters = 4\n"
        "\n"
        "[output]\n"
        f"path = {tmp_path / 'ber.csv'}\n"
    )
    return path
