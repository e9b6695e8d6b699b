"""
Pytest configuration and shared fixtures
"""
import os
import tempfile

import numpy as np
import pytest

# Set test environment variables before imports
os.environ["LOG_LEVEL"] = "ERROR"  # Suppress logs during testing
os.environ["LOG_DIR"] = os.path.join(tempfile.gettempdir(), "wavefront_kdv_test_logs")
os.environ["WAVEFRONT_KDV_THREADS"] = "1"

from models.field import Grid1D
from models.results import PhasePoint, Threshold
from processing.detector import SweepConfig
from processing.propagator import WindowSpec
from providers.data import gaussian_datum, jump_gaussian_datum
from providers.soliton import SolitonCoefficient
from providers.zero import ZeroCoefficient


@pytest.fixture
def small_grid():
    """Coarse periodic grid for fast transform tests"""
    return Grid1D(20.0, 256)


@pytest.fixture
def grid():
    """Standard grid: L = 40, N = 1024"""
    return Grid1D(40.0, 1024)


@pytest.fixture
def soliton():
    """Canonical soliton c = 12, b = 1, s = 4"""
    return SolitonCoefficient(12.0, 1.0, 4.0)


@pytest.fixture
def zero_coeff():
    return ZeroCoefficient()


@pytest.fixture
def gaussian():
    """Built-in smooth datum e^{-x^2}"""
    return gaussian_datum()


@pytest.fixture
def jump():
    """Built-in jump datum H(x) e^{-x^2}"""
    return jump_gaussian_datum()


@pytest.fixture
def window():
    """Default window: Gaussian base, d = 0.375"""
    return WindowSpec.named("gaussian", 0.375)


@pytest.fixture
def threshold():
    """Fixed threshold between the canonical smooth and jump exponents"""
    return Threshold(n_thr=10.0, margin=2.0)


@pytest.fixture
def sweep(threshold):
    """Short sweep over lambda in [1, 64]"""
    return SweepConfig(1.0, 64.0, 13, threshold)


@pytest.fixture
def origin():
    return PhasePoint(0.0, 1.0)


@pytest.fixture(params=["gaussian", "sech", "sech2", "bump"])
def window_name(request):
    """Parametrized fixture for base windows"""
    return request.param


@pytest.fixture(params=[0.30, 0.375, 0.45])
def window_d(request):
    """Parametrized fixture for window scaling exponents"""
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def config_file(tmp_path):
    """Write a config file from a dict of dotted keys and return its path"""
    def _write(values, name="run.cfg"):
        lines = ["# test config"] + [f"{key} = {value}" for key, value in values.items()]
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n")
        return path
    return _write
