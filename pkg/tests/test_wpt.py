"""
Tests for the wave packet transform
"""
import numpy as np
import pytest

from models.errors import ContractError, GridTooCoarse, NoSpectralClosure, UnderResolved
from models.field import Grid1D, SpectralField
from processing.field import l2_norm, to_physical
from processing.propagator import WindowSpec, scaled_window
from processing.wpt import (
    evaluate_wpt,
    forward_wpt,
    forward_wpt_spectral,
    inverse_wpt,
    spectral_window,
    wpt_matrix,
    wpt_slice,
)
from providers.data import DataSource, evolved, from_field
from providers.windows import get_window


@pytest.fixture
def window_source():
    """The unit Gaussian window itself as data"""
    base = get_window("gaussian")
    return DataSource(name="gaussian_window", profile=base.profile, spectrum=base.spectrum,
                      support_radius=base.radius, band=base.band)


@pytest.fixture
def band_limited():
    """Random data on L = 10, N = 128 with modes |eta| <= 10"""
    grid = Grid1D(10.0, 128)
    rng = np.random.default_rng(1)
    coefficients = np.where(np.abs(grid.wavenumbers) <= 10.0,
                            rng.standard_normal(grid.count) + 1j * rng.standard_normal(grid.count), 0.0)
    return to_physical(SpectralField(grid, coefficients))


class TestClosedForm:
    """Gaussian window against Gaussian data"""

    @pytest.mark.parametrize("x,xi", [(0.0, 0.0), (1.0, -2.0), (-1.5, 3.0)])
    def test_physical_path(self, window_source, window, x, xi):
        """W = exp(-(x^2 + xi^2)/4 - i x xi / 2)"""
        exact = np.exp(-(x ** 2 + xi ** 2) / 4.0 - 0.5j * x * xi)
        result = forward_wpt(window_source, window, x, xi)
        assert abs(result.value - exact) <= 1e-9
        assert result.path == "physical"

    @pytest.mark.parametrize("x,xi", [(0.0, 0.0), (1.0, -2.0), (-1.5, 3.0)])
    def test_spectral_path(self, window_source, window, x, xi):
        exact = np.exp(-(x ** 2 + xi ** 2) / 4.0 - 0.5j * x * xi)
        result = forward_wpt_spectral(window_source, spectral_window(window), x, xi)
        assert abs(result.value - exact) <= 1e-9
        assert result.path == "spectral"
        assert result.scale >= abs(result.value)


class TestPaths:
    """Agreement between quadrature paths"""

    @pytest.mark.parametrize("x,xi", [(0.5, 4.0), (0.0, -6.0), (-1.0, 2.0)])
    def test_jump_physical_vs_spectral(self, jump, window, x, xi):
        scaled = window.at(4.0)
        physical = forward_wpt(jump, scaled, x, xi).value
        spectral = forward_wpt_spectral(jump, spectral_window(scaled), x, xi).value
        assert abs(physical - spectral) <= 1e-7

    def test_sampled_data_matches_closure(self, gaussian, window):
        grid = Grid1D(20.0, 512)
        sampled = from_field(grid.sample(gaussian.evaluate))
        field_value = evaluate_wpt(sampled, window, 0.5, 1.0)
        assert field_value.path == "field"
        assert abs(field_value.value - evaluate_wpt(gaussian, window, 0.5, 1.0).value) <= 1e-10

    def test_evolved_window_on_sampled_data(self, gaussian, window):
        grid = Grid1D(20.0, 512)
        sampled = from_field(grid.sample(gaussian.evaluate))
        field_value = evaluate_wpt(sampled, window, 1.5, 1.0, t0=0.3)
        spectral_value = evaluate_wpt(gaussian, window, 1.5, 1.0, t0=0.3)
        assert spectral_value.path == "spectral"
        assert abs(field_value.value - spectral_value.value) <= 1e-9

    def test_evolved_window_on_closure(self, gaussian, window):
        physical = evaluate_wpt(gaussian, window, 1.5, 1.0, t0=0.3, prefer_spectral=False)
        spectral = evaluate_wpt(gaussian, window, 1.5, 1.0, t0=0.3)
        assert physical.path == "physical"
        assert abs(physical.value - spectral.value) <= 1e-8

    @pytest.mark.parametrize("x,xi", [(0.0, 1.0), (1.0, -2.0), (-0.5, 1.5)])
    def test_free_transport_identity(self, gaussian, window, x, xi):
        """W_phi u(t0)(x, xi) = e^{i xi^3 t0} W_psi u0(x + 3 xi^2 t0, xi)"""
        t0 = 0.3
        lhs = evaluate_wpt(evolved(gaussian, t0), window, x, xi).value
        rhs = evaluate_wpt(gaussian, window, x + 3.0 * xi ** 2 * t0, xi, t0=t0).value
        assert abs(lhs - np.exp(1j * xi ** 3 * t0) * rhs) <= 1e-9

    def test_spectral_needs_transform(self, window):
        grid = Grid1D(10.0, 128)
        sampled = from_field(grid.sample(lambda y: np.exp(-y ** 2)))
        with pytest.raises(NoSpectralClosure):
            forward_wpt_spectral(sampled, spectral_window(window), 0.0, 1.0)

    def test_oscillation_guard(self, window):
        grid = Grid1D(10.0, 128)
        with pytest.raises(UnderResolved):
            forward_wpt(grid.sample(lambda y: np.exp(-y ** 2)), window, 0.0, 20.0)


class TestSlices:
    """Batched slices, isometry and inversion"""

    def test_slice_matches_pointwise(self, band_limited, window):
        phi = scaled_window(window, band_limited.grid)
        row = wpt_slice(band_limited, phi, 2.0)
        for j in (0, 17, 64, 100):
            x = band_limited.grid.nodes[j]
            assert abs(row.samples[j] - forward_wpt(band_limited, phi, x, 2.0).value) <= 1e-10

    def test_isometry(self, band_limited, window):
        """h (pi/L) sum |W|^2 = 2 pi ||phi||^2 ||f||^2"""
        grid = band_limited.grid
        phi = scaled_window(window, grid)
        W = wpt_matrix(band_limited, phi, grid.wavenumbers)
        lhs = grid.spacing * grid.frequency_spacing * float(np.sum(np.abs(W) ** 2))
        rhs = 2.0 * np.pi * l2_norm(phi) ** 2 * l2_norm(band_limited) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-6)

    def test_inversion(self, band_limited, window):
        grid = band_limited.grid
        phi = scaled_window(window, grid)
        W = wpt_matrix(band_limited, phi, grid.wavenumbers)
        back = inverse_wpt(W, phi, grid.wavenumbers)
        assert l2_norm(back - band_limited) <= 1e-6 * l2_norm(band_limited)

    def test_inversion_rejects_sparse_lattice(self, band_limited, window):
        """Stride-2 lattice: spacing exceeds pi / window radius"""
        grid = band_limited.grid
        phi = scaled_window(window, grid)
        xi = grid.wavenumbers[::2]
        with pytest.raises(GridTooCoarse):
            inverse_wpt(wpt_matrix(band_limited, phi, xi), phi, xi)

    @pytest.mark.parametrize("xi", [
        np.pi / 10.0 * np.arange(64),                  # half the residues
        0.5 * np.arange(128),                         # not a multiple of pi/L
        np.concatenate([[0.0, 0.1], np.arange(2, 128) * np.pi / 10.0]),  # uneven
    ])
    def test_inversion_rejects_bad_sets(self, band_limited, window, xi):
        phi = scaled_window(window, band_limited.grid)
        with pytest.raises(GridTooCoarse):
            inverse_wpt(np.zeros((xi.size, 128)), phi, xi)

    def test_inversion_shape(self, band_limited, window):
        phi = scaled_window(window, band_limited.grid)
        with pytest.raises(ContractError):
            inverse_wpt(np.zeros((3, 64)), phi, [0.0, 1.0, 2.0])
