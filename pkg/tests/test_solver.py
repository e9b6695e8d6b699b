"""
Tests for the Strang-split solver
"""
import numpy as np
import pytest

from models.errors import BoundaryContamination, ContractError, EnergyLawViolation, StabilityViolation
from models.field import Grid1D
from processing.field import l2_norm, mass
from processing.propagator import airy_propagate, flipped_phase_sign
from processing.solver import SolveConfig, _Stepper, h3_norm, solve, stability_limit, step
from providers.custom import CustomCoefficient


@pytest.fixture
def soliton_grid():
    return Grid1D(50.0, 2048)


class TestSolveConfig:
    """Config validation"""

    @pytest.mark.parametrize("dt,t_final,stride", [(0.0, 1.0, 1), (-1e-3, 1.0, 1), (1e-3, -1.0, 1), (1e-3, 1.0, 0)])
    def test_rejects_bad_values(self, grid, zero_coeff, dt, t_final, stride):
        with pytest.raises(ContractError):
            SolveConfig(dt=dt, t_final=t_final, grid=grid, coefficient=zero_coeff, record_stride=stride)

    def test_stability_guard(self, grid, soliton):
        """dt_stability = min(0.5 h / (||a||_inf + 1), cap)"""
        limit = stability_limit(grid, soliton)
        assert limit == pytest.approx(0.5 * grid.spacing / 13.0, rel=1e-6)
        with pytest.raises(StabilityViolation):
            SolveConfig(dt=2.0 * limit, t_final=1.0, grid=grid, coefficient=soliton)

    def test_single_step_guard(self, grid, soliton):
        u = grid.sample(lambda x: np.exp(-x ** 2))
        with pytest.raises(StabilityViolation):
            step(u, 0.0, 1.0, soliton)

    def test_grid_mismatch(self, grid, small_grid, zero_coeff):
        u0 = small_grid.sample(lambda x: np.exp(-x ** 2))
        with pytest.raises(ContractError):
            solve(u0, SolveConfig(dt=1e-3, t_final=0.1, grid=grid, coefficient=zero_coeff))

    def test_rejects_boundary_limit(self, grid, zero_coeff):
        with pytest.raises(ContractError):
            SolveConfig(dt=1e-3, t_final=0.1, grid=grid, coefficient=zero_coeff, boundary_limit=0.0)


class TestFreeFlow:
    """a == 0 reduces to the exact Airy multiplier"""

    def test_matches_airy_multiplier(self, grid, zero_coeff):
        u0 = grid.sample(lambda x: np.exp(-x ** 2))
        traj = solve(u0, SolveConfig(dt=1e-3, t_final=0.2, grid=grid, coefficient=zero_coeff, record_stride=50))
        assert np.max(np.abs((traj.final - airy_propagate(u0, 0.2)).samples)) <= 1e-10
        assert traj.energy_residual <= 1e-12
        assert traj.gronwall_rate == 0.0

    def test_recording(self, grid, zero_coeff):
        u0 = grid.sample(lambda x: np.exp(-x ** 2))
        traj = solve(u0, SolveConfig(dt=1e-3, t_final=0.2, grid=grid, coefficient=zero_coeff, record_stride=50))
        assert traj.times == pytest.approx([0.0, 0.05, 0.1, 0.15, 0.2])
        assert len(traj.snapshots) == len(traj.l2_history) == len(traj.dissipation_history) == 5
        assert traj.snapshots[0] is u0

    def test_zero_final_time(self, grid, zero_coeff):
        u0 = grid.sample(lambda x: np.exp(-x ** 2))
        traj = solve(u0, SolveConfig(dt=1e-3, t_final=0.0, grid=grid, coefficient=zero_coeff))
        assert len(traj.snapshots) == 1
        assert traj.final is u0


class TestSolitonCoefficient:
    """Variable coefficient: conservation and the energy law"""

    @pytest.fixture
    def trajectory(self, soliton_grid, soliton):
        u0 = soliton_grid.sample(lambda x: np.exp(-x ** 2 / 4))
        return solve(u0, SolveConfig(dt=2e-4, t_final=0.2, grid=soliton_grid, coefficient=soliton,
                                     record_stride=250))

    def test_mass_conserved(self, trajectory):
        assert abs(trajectory.mass_history[-1] - trajectory.mass_history[0]) <= 1e-8 * abs(trajectory.mass_history[0])

    def test_energy_law(self, trajectory):
        """||u(T)||^2 - ||u0||^2 + int int a_x |u|^2 = 0 up to splitting error"""
        assert trajectory.energy_residual <= 1e-5
        assert trajectory.dissipation_history[0] == 0.0

    def test_gronwall_rate(self, trajectory):
        """C = sup |a_x| / 2 with sup |2 c b sech^2 tanh| = 4 c b / (3 sqrt 3)"""
        assert trajectory.gronwall_rate == pytest.approx(0.5 * 4.0 * 12.0 / (3.0 * np.sqrt(3.0)), rel=1e-2)

    def test_norm_bound(self, trajectory):
        """||u(t)|| <= e^{C t} ||u0||"""
        bound = np.exp(trajectory.gronwall_rate * trajectory.times) * trajectory.l2_history[0]
        assert np.all(trajectory.l2_history <= bound * (1 + 1e-10))


class TestNorms:
    def test_h3_dominates_l2(self, grid):
        u = grid.sample(lambda x: np.exp(-x ** 2))
        assert h3_norm(u) > l2_norm(u)
        assert h3_norm(grid.zeros()) == 0.0

    def test_mass(self, grid):
        u = grid.sample(lambda x: np.exp(-x ** 2))
        assert mass(u) == pytest.approx(np.sqrt(np.pi))


def _bump_coefficient(consistent: bool) -> CustomCoefficient:
    """a = e^{-(x-1)^2}; the inconsistent variant reports a_x = 0"""
    def evaluate(t, x, k):
        if k == 0:
            return np.exp(-(x - 1.0) ** 2)
        if consistent:
            return -2.0 * (x - 1.0) * np.exp(-(x - 1.0) ** 2)
        return np.zeros_like(x)
    return CustomCoefficient(evaluate, max_order=1, name="offset_bump")


class TestEnforcedChecks:
    """Energy law and box edge abort the run"""

    def test_wrong_derivative_breaks_energy_law(self, grid):
        """With a_x reported as 0 the law predicts constant energy, but ||u||^2 grows at int a_x |u|^2 ~ 0.7"""
        u0 = grid.sample(lambda x: np.exp(-x ** 2))
        cfg = SolveConfig(dt=1e-3, t_final=0.05, grid=grid, coefficient=_bump_coefficient(False), record_stride=10)
        with pytest.raises(EnergyLawViolation):
            solve(u0, cfg)

    def test_edge_mass_aborts(self, small_grid, zero_coeff):
        u0 = small_grid.sample(lambda x: np.exp(-(x - 19.0) ** 2))
        cfg = SolveConfig(dt=1e-3, t_final=0.01, grid=small_grid, coefficient=zero_coeff, record_stride=5)
        with pytest.raises(BoundaryContamination, match="solver.L"):
            solve(u0, cfg)

    def test_boundary_limit_is_configurable(self, small_grid, zero_coeff):
        u0 = small_grid.sample(lambda x: np.exp(-(x - 19.0) ** 2))
        cfg = SolveConfig(dt=1e-3, t_final=0.01, grid=small_grid, coefficient=zero_coeff, record_stride=5,
                          boundary_limit=1.0)
        assert len(solve(u0, cfg).snapshots) == 3


class TestStepperCache:
    """Cached Airy half steps follow the propagator phase sign"""

    def test_sign_flip_rebuilds_multiplier(self, grid, zero_coeff):
        u = grid.sample(lambda x: np.exp(-x ** 2) * np.exp(2j * x))
        stepper = _Stepper(grid, zero_coeff)
        forward = stepper.step(u.samples, 0.0, 0.01)
        with flipped_phase_sign():
            flipped = stepper.step(u.samples, 0.0, 0.01)
        again = stepper.step(u.samples, 0.0, 0.01)
        assert np.max(np.abs(forward - airy_propagate(u, 0.01).samples)) <= 1e-12
        assert np.max(np.abs(flipped - airy_propagate(u, -0.01).samples)) <= 1e-12
        assert np.array_equal(again, forward)


class TestConvergence:
    """Second order in time and preservation of real data"""

    @pytest.fixture
    def finals(self, soliton_grid, soliton):
        u0 = soliton_grid.sample(lambda x: np.exp(-x ** 2 / 4))
        return [solve(u0, SolveConfig(dt=dt, t_final=0.05, grid=soliton_grid, coefficient=soliton,
                                      record_stride=10000)).final
                for dt in (2e-4, 1e-4, 5e-5)]

    @pytest.mark.slow
    def test_self_convergence_ratio(self, finals):
        coarse, mid, fine = finals
        ratio = l2_norm(coarse - mid) / l2_norm(mid - fine)
        assert 3.5 < ratio < 4.6

    @pytest.mark.slow
    def test_real_data_stays_real(self, finals):
        for u in finals:
            assert np.max(np.abs(u.samples.imag)) <= 1e-10 * np.max(np.abs(u.samples))
