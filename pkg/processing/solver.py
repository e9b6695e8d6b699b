"""
Strang-split pseudospectral solver for u_t + u_xxx + (a u)_x = 0
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft as sfft

from config.settings import DEALIAS_FRACTION, SOLVER_BOUNDARY_LIMIT, SOLVER_STRIDE, STABILITY_CAP
from models.errors import (
    BoundaryContamination,
    ContractError,
    EnergyLawViolation,
    NonFinite,
    StabilityViolation,
)
from models.field import ComplexField, Grid1D
from models.results import Trajectory
from processing.field import l2_norm, mass, to_spectral
from processing.propagator import airy_multiplier, phase_sign
from providers.base import CoefficientModel

logger = logging.getLogger(__name__)

# relative energy-law mismatch tolerated per unit time
ENERGY_TOLERANCE = 1e-5
BOUNDARY_LEVEL = 1e-10


def stability_limit(grid: Grid1D, coeff: CoefficientModel, t: float = 0.0) -> float:
    """dt_stability = min(0.5 h / (||a||_inf + 1), STABILITY_CAP)"""
    sup_a = float(np.max(np.abs(coeff.derivative(t, grid.nodes, 0))))
    return min(0.5 * grid.spacing / (sup_a + 1.0), STABILITY_CAP)


@dataclass(frozen=True)
class SolveConfig:
    dt: float
    t_final: float
    grid: Grid1D
    coefficient: CoefficientModel
    record_stride: int = SOLVER_STRIDE
    boundary_limit: float = SOLVER_BOUNDARY_LIMIT

    def __post_init__(self):
        if not self.dt > 0:
            raise ContractError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ContractError(f"t_final must be >= 0, got {self.t_final}")
        if self.record_stride < 1:
            raise ContractError(f"record_stride must be >= 1, got {self.record_stride}")
        if not self.boundary_limit > 0:
            raise ContractError(f"boundary_limit must be positive, got {self.boundary_limit}")
        limit = stability_limit(self.grid, self.coefficient)
        if self.dt > limit:
            raise StabilityViolation(f"dt={self.dt} exceeds stability limit {limit:.4g}")


class _Stepper:
    """Array-level Strang step on a fixed grid (FFT order)."""

    def __init__(self, grid: Grid1D, coeff: CoefficientModel):
        self.grid = grid
        self.coeff = coeff
        self.ik = 1j * 2.0 * np.pi * sfft.fftfreq(grid.count, grid.spacing)
        eta = np.abs(self.ik.imag)
        self.mask = (eta <= DEALIAS_FRACTION * np.max(eta)).astype(float)
        self.eta = self.ik.imag
        self._half_key = None
        self._half = None

    def _airy(self, u: np.ndarray, dt: float) -> np.ndarray:
        key = (dt, phase_sign())
        if key != self._half_key:
            self._half_key = key
            self._half = airy_multiplier(dt)(self.eta)
        return sfft.ifft(self._half * sfft.fft(u))

    def _interaction(self, t: float, u: np.ndarray) -> np.ndarray:
        x = self.grid.nodes
        a = self.coeff.derivative(t, x, 0)
        a_x = self.coeff.derivative(t, x, 1)
        u_hat = sfft.fft(u)
        u_x = sfft.ifft(self.ik * u_hat)
        rate = -a * u_x - a_x * u
        return sfft.ifft(self.mask * sfft.fft(rate))

    def _rk4(self, t: float, u: np.ndarray, dt: float) -> np.ndarray:
        f = self._interaction
        k1 = f(t, u)
        k2 = f(t + 0.5 * dt, u + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, u + 0.5 * dt * k2)
        k4 = f(t + dt, u + dt * k3)
        return u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def step(self, u: np.ndarray, t: float, dt: float) -> np.ndarray:
        if self.coeff.is_zero():
            return self._airy(u, dt) if dt != 0 else u
        half = self._airy(u, 0.5 * dt)
        half = self._rk4(t, half, dt)
        return self._airy(half, 0.5 * dt)

    def dissipation_rate(self, t: float, u: np.ndarray) -> float:
        """int a_x |u|^2 dx"""
        a_x = self.coeff.derivative(t, self.grid.nodes, 1)
        return float(self.grid.spacing * np.sum(a_x * np.abs(u) ** 2))


def step(u: ComplexField, t: float, dt: float, coeff: CoefficientModel) -> ComplexField:
    """
    One Strang step: Airy half step, RK4 on u_t = -a u_x - a_x u, Airy half step.

    Raises:
        StabilityViolation: If dt exceeds the interaction-step guard
        NonFinite: If the result is not finite
    """
    limit = stability_limit(u.grid, coeff, t)
    if dt > limit:
        raise StabilityViolation(f"dt={dt} exceeds stability limit {limit:.4g}")
    out = _Stepper(u.grid, coeff).step(u.samples, t, dt)
    if not np.all(np.isfinite(out)):
        raise NonFinite(f"solver state blew up at t={t + dt}")
    return u.replace(out)


def h3_norm(u: ComplexField) -> float:
    """(sum (1+eta^2)^3 |u^|^2 (pi/L) / 2pi)^{1/2}"""
    spectrum = to_spectral(u).coefficients
    eta = u.grid.wavenumbers
    weight = (1.0 + eta ** 2) ** 3
    return float(np.sqrt(np.sum(weight * np.abs(spectrum) ** 2) * u.grid.frequency_spacing / (2.0 * np.pi)))


def solve(u0: ComplexField, cfg: SolveConfig) -> Trajectory:
    """
    March u0 to cfg.t_final, recording every record_stride steps.

    The dissipation integral int_0^t int a_x |u|^2 dx dt is accumulated by
    the trapezoid rule every step; the energy law
    ||u(t)||^2 - ||u0||^2 + dissipation(t) = 0 and the box-edge amplitude
    are checked at each record.

    Raises:
        NonFinite: If the state blows up
        EnergyLawViolation: If the energy law drifts past ENERGY_TOLERANCE per unit time
        BoundaryContamination: If |u| at the box edge exceeds cfg.boundary_limit * sup |u0|
    """
    if u0.grid != cfg.grid:
        raise ContractError(f"initial data on {u0.grid}, config grid {cfg.grid}")

    n_steps = max(1, int(np.ceil(cfg.t_final / cfg.dt - 1e-9))) if cfg.t_final > 0 else 0
    dt = cfg.t_final / n_steps if n_steps else cfg.dt
    stepper = _Stepper(cfg.grid, cfg.coefficient)
    grid, coeff = cfg.grid, cfg.coefficient

    logger.info(f"Solving to T={cfg.t_final} with {n_steps} steps of dt={dt:.4g} "
                f"(L={grid.half_length}, N={grid.count}, a={coeff.get_kind_name()})")

    u = u0.samples.copy()
    initial_energy = l2_norm(u0) ** 2
    scale = u0.max_abs()
    t = 0.0
    dissipated = 0.0
    rate = stepper.dissipation_rate(t, u)
    sup_ax = float(np.max(np.abs(coeff.derivative(0.0, grid.nodes, 1))))

    times, snapshots = [0.0], [u0]
    l2, masses, h3, dissipation = [l2_norm(u0)], [mass(u0)], [h3_norm(u0)], [0.0]

    for n in range(1, n_steps + 1):
        u = stepper.step(u, t, dt)
        t = n * dt
        if not np.all(np.isfinite(u)):
            raise NonFinite(f"solver state blew up at t={t:.6g}")
        next_rate = stepper.dissipation_rate(t, u)
        dissipated += 0.5 * dt * (rate + next_rate)
        rate = next_rate

        if n % cfg.record_stride == 0 or n == n_steps:
            snap = ComplexField(grid, u)
            times.append(t)
            snapshots.append(snap)
            l2.append(l2_norm(snap))
            masses.append(mass(snap))
            h3.append(h3_norm(snap))
            dissipation.append(dissipated)
            sup_ax = max(sup_ax, float(np.max(np.abs(coeff.derivative(t, grid.nodes, 1)))))
            _check_energy(l2[-1] ** 2, initial_energy, dissipated, t)
            _check_boundary(u, grid, scale, cfg.boundary_limit, t)
            logger.debug(f"t={t:.5g}: ||u||={l2[-1]:.12g}, dissipated={dissipated:.6g}")

    edge = _edge(u)
    if edge > BOUNDARY_LEVEL * scale:
        logger.warning(f"|u| = {edge:.3e} at the box edge (L={grid.half_length}); enlarge solver.L")
    trajectory = Trajectory(
        times=np.array(times),
        snapshots=snapshots,
        l2_history=np.array(l2),
        mass_history=np.array(masses),
        h3_history=np.array(h3),
        dissipation_history=np.array(dissipation),
        gronwall_rate=0.5 * sup_ax,
    )
    logger.info(f"Solve finished: energy residual {trajectory.energy_residual:.3e}")
    return trajectory


def _check_energy(energy: float, initial: float, dissipated: float, t: float) -> None:
    if initial == 0:
        return
    mismatch = abs(energy - initial + dissipated) / initial
    if mismatch > ENERGY_TOLERANCE * max(t, 1.0):
        raise EnergyLawViolation(f"energy law mismatch {mismatch:.3e} at t={t:.5g} "
                                 f"(tolerance {ENERGY_TOLERANCE * max(t, 1.0):.1e})")


def _edge(u: np.ndarray) -> float:
    return float(max(abs(u[0]), abs(u[-1])))


def _check_boundary(u: np.ndarray, grid: Grid1D, scale: float, limit: float, t: float) -> None:
    edge = _edge(u)
    if edge > limit * scale:
        raise BoundaryContamination(
            f"|u| = {edge:.3e} at the box edge at t={t:.5g} exceeds {limit:.1e} * sup|u0|; "
            f"enlarge solver.L (now {grid.half_length})"
        )
