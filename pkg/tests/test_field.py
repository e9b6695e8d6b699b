"""
Tests for grids, fields and the spectral substrate
"""
import numpy as np
import pytest

from models.errors import ContractError, GridMismatch, NonFinite, NonFiniteMultiplier
from models.field import ComplexField, Grid1D, SpectralField, is_power_of_two, next_power_of_two
from processing.field import (
    apply_multiplier,
    dealias_mask,
    derivative,
    direct_transform,
    inner_product,
    l2_norm,
    mass,
    refine,
    shift,
    to_physical,
    to_spectral,
)


def _gauss(grid, center=0.0):
    return grid.sample(lambda x: np.exp(-(x - center) ** 2 / 2))


class TestGrid:
    """Grid construction and lattices"""

    def test_nodes_and_spacing(self, small_grid):
        """Nodes start at -L with spacing 2L/N"""
        assert small_grid.spacing == pytest.approx(40.0 / 256)
        assert small_grid.nodes[0] == -20.0
        assert small_grid.nodes[-1] == pytest.approx(20.0 - small_grid.spacing)

    def test_wavenumbers_symmetric_order(self, small_grid):
        """eta_k = pi k / L for k = -N/2 .. N/2-1"""
        eta = small_grid.wavenumbers
        assert eta[0] == pytest.approx(-np.pi * 128 / 20.0)
        assert eta[128] == 0.0
        assert np.allclose(np.diff(eta), small_grid.frequency_spacing)

    @pytest.mark.parametrize("count", [0, 8, 100, 1000])
    def test_rejects_bad_count(self, count):
        """Counts must be powers of two >= 16"""
        with pytest.raises(ContractError):
            Grid1D(10.0, count)

    @pytest.mark.parametrize("half_length", [0.0, -1.0, float("inf")])
    def test_rejects_bad_length(self, half_length):
        with pytest.raises(ContractError):
            Grid1D(half_length, 64)

    def test_power_of_two_helpers(self):
        assert is_power_of_two(1024)
        assert not is_power_of_two(1000)
        assert next_power_of_two(3) == 16
        assert next_power_of_two(1025) == 2048


class TestComplexField:
    """Field invariants"""

    def test_samples_are_read_only(self, small_grid):
        f = _gauss(small_grid)
        with pytest.raises(ValueError):
            f.samples[0] = 1.0

    def test_rejects_non_finite(self, small_grid):
        values = np.zeros(small_grid.count)
        values[3] = np.nan
        with pytest.raises(NonFinite):
            ComplexField(small_grid, values)

    def test_rejects_wrong_length(self, small_grid):
        with pytest.raises(ContractError):
            ComplexField(small_grid, np.zeros(10))

    def test_arithmetic_requires_same_grid(self, small_grid):
        other = Grid1D(20.0, 512)
        with pytest.raises(GridMismatch):
            _ = _gauss(small_grid) + _gauss(other)

    def test_arithmetic(self, small_grid):
        f = _gauss(small_grid)
        assert np.allclose((2 * f - f).samples, f.samples)
        assert np.allclose((-f).samples, -f.samples)


class TestTransforms:
    """Forward/inverse transforms and quadratures"""

    def test_round_trip(self, small_grid, rng):
        """to_physical(to_spectral(f)) == f"""
        f = ComplexField(small_grid, rng.standard_normal(256) + 1j * rng.standard_normal(256))
        back = to_physical(to_spectral(f))
        assert np.max(np.abs(back.samples - f.samples)) < 1e-12

    def test_gaussian_closed_form(self, small_grid):
        """Transform of e^{-x^2/2} is sqrt(2 pi) e^{-eta^2/2}"""
        F = to_spectral(_gauss(small_grid))
        exact = np.sqrt(2 * np.pi) * np.exp(-small_grid.wavenumbers ** 2 / 2)
        assert np.max(np.abs(F.coefficients - exact)) < 1e-10

    def test_parseval(self, small_grid):
        f = _gauss(small_grid, center=1.0)
        F = to_spectral(f)
        spectral = np.sum(np.abs(F.coefficients) ** 2) * small_grid.frequency_spacing / (2 * np.pi)
        assert spectral == pytest.approx(l2_norm(f) ** 2, rel=1e-10)

    def test_direct_transform_agrees(self):
        grid = Grid1D(8.0, 64)
        f = _gauss(grid, center=0.5)
        assert np.max(np.abs(direct_transform(f).coefficients - to_spectral(f).coefficients)) < 1e-10

    def test_derivative(self, small_grid):
        f = _gauss(small_grid)
        exact = -small_grid.nodes * np.exp(-small_grid.nodes ** 2 / 2)
        assert np.max(np.abs(derivative(f).samples - exact)) < 1e-10

    def test_shift(self, small_grid):
        """shift(f, a) samples f(x - a)"""
        shifted = shift(_gauss(small_grid), 1.5)
        assert np.max(np.abs(shifted.samples - _gauss(small_grid, 1.5).samples)) < 1e-10

    def test_refine_interpolates(self, small_grid):
        fine = refine(_gauss(small_grid), 2)
        assert fine.grid.count == 512
        assert np.max(np.abs(fine.samples - _gauss(fine.grid).samples)) < 1e-10

    def test_non_finite_multiplier(self, small_grid):
        with pytest.raises(NonFiniteMultiplier):
            apply_multiplier(_gauss(small_grid), lambda eta: 1.0 / eta)

    def test_mass_and_inner_product(self, small_grid):
        f = small_grid.sample(lambda x: np.exp(-x ** 2))
        assert mass(f) == pytest.approx(np.sqrt(np.pi), rel=1e-12)
        # conjugate-linear in the first slot
        assert inner_product(1j * f, f) == pytest.approx(-1j * l2_norm(f) ** 2, rel=1e-12)

    def test_dealias_mask(self, small_grid):
        mask = dealias_mask(small_grid, 2.0 / 3.0)
        kept = np.abs(small_grid.wavenumbers[mask == 1.0])
        assert kept.max() <= 2.0 / 3.0 * np.abs(small_grid.wavenumbers).max()
        assert mask[128] == 1.0

    def test_spectral_field_validates(self, small_grid):
        with pytest.raises(ContractError):
            SpectralField(small_grid, np.zeros(3))
