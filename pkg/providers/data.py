"""
Initial data sources: sampled fields or analytic closures
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.special import erfcx

from models.errors import ContractError, UnknownSupport
from models.field import ComplexField, Grid1D, SpectralField

logger = logging.getLogger(__name__)

Closure = Callable[[np.ndarray], np.ndarray]

# e^{-y^2} < 1e-16 beyond this radius
_GAUSS_DATUM_RADIUS = float(np.sqrt(np.log(1e16)))
# sqrt(pi) e^{-eta^2/4} < 1e-16 beyond this frequency
_GAUSS_DATUM_BAND = float(2.0 * np.sqrt(np.log(np.sqrt(np.pi) * 1e16)))


@dataclass(frozen=True, eq=False)
class DataSource:
    """
    Initial datum u0 as grid samples or closures.

    A closure source carries a profile y -> u0(y) and/or a spectrum
    eta -> u0^(eta). Physical-side quadrature needs a profile and a support
    radius; spectral-side quadrature needs a spectrum. dispersion_time records
    an Airy factor e^{i eta^3 t} folded into the spectrum.
    """
    name: str
    samples: Optional[ComplexField] = None
    profile: Optional[Closure] = None
    spectrum: Optional[Closure] = None
    support_radius: Optional[float] = None
    center: float = 0.0
    band: float = float("inf")
    breakpoints: Tuple[float, ...] = field(default_factory=tuple)
    dispersion_time: float = 0.0

    def __post_init__(self):
        if self.samples is None and self.profile is None and self.spectrum is None:
            raise ContractError(f"data source '{self.name}' has neither samples nor closures")

    @property
    def is_field(self) -> bool:
        return self.samples is not None

    @property
    def has_spectrum(self) -> bool:
        return self.spectrum is not None

    def evaluate(self, y) -> np.ndarray:
        """Profile values; requires a closure profile."""
        if self.profile is None:
            raise UnknownSupport(f"data source '{self.name}' has no physical-side closure")
        return np.asarray(self.profile(np.asarray(y, dtype=float)), dtype=complex)

    def transform(self, eta) -> np.ndarray:
        if self.spectrum is None:
            raise ContractError(f"data source '{self.name}' has no analytic transform")
        return np.asarray(self.spectrum(np.asarray(eta, dtype=float)), dtype=complex)

    def physical_extent(self) -> Tuple[float, float]:
        """Interval outside which the profile is below 1e-16."""
        if self.samples is not None:
            g = self.samples.grid
            return -g.half_length, g.half_length
        if self.support_radius is None or not np.isfinite(self.support_radius):
            raise UnknownSupport(f"data source '{self.name}' declares no support radius")
        return self.center - self.support_radius, self.center + self.support_radius

    def sample(self, grid: Grid1D) -> ComplexField:
        """
        Values on a periodic grid.

        Spectrum-only sources are synthesized from their transform on the
        frequency lattice (periodized, exact when the box holds the datum).
        """
        if self.samples is not None:
            if self.samples.grid != grid:
                raise ContractError(f"data '{self.name}' lives on {self.samples.grid}, requested {grid}")
            return self.samples
        if self.profile is not None:
            return grid.sample(self.evaluate)
        from processing.field import to_physical
        return to_physical(SpectralField(grid, self.transform(grid.wavenumbers)))

    def check_consistency(self, count: int = 8, seed: int = 0, tol: float = 1e-6) -> float:
        """
        Spot-check the spectrum against quadrature of the profile at random
        frequencies inside the band.

        Returns:
            Largest absolute mismatch (raises if above tol)
        """
        if self.profile is None or self.spectrum is None:
            return 0.0
        lo, hi = self.physical_extent()
        rng = np.random.default_rng(seed)
        limit = min(self.band, 8.0)
        eta = rng.uniform(-limit, limit, count)
        worst = 0.0
        for q in eta:
            value = _panel_quadrature(lambda y: self.evaluate(y) * np.exp(-1j * y * q), lo, hi, self.breakpoints)
            worst = max(worst, abs(value - complex(self.transform(np.array([q]))[0])))
        if worst > tol:
            raise ContractError(f"data source '{self.name}': profile and spectrum disagree by {worst:.3e}")
        return worst


def _panel_quadrature(integrand: Closure, lo: float, hi: float, breakpoints: Tuple[float, ...],
                      panels: int = 64, order: int = 16) -> complex:
    edges = np.unique(np.concatenate([[lo, hi], [b for b in breakpoints if lo < b < hi]]))
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        cuts = np.linspace(a, b, panels + 1)
        mid = 0.5 * (cuts[1:] + cuts[:-1])[:, None]
        half = 0.5 * (cuts[1:] - cuts[:-1])[:, None]
        y = (mid + half * nodes[None, :]).ravel()
        w = (half * weights[None, :]).ravel()
        total += np.sum(w * integrand(y))
    return complex(total)


def from_field(samples: ComplexField, name: str = "field") -> DataSource:
    return DataSource(name=name, samples=samples)


def zero_datum() -> DataSource:
    return DataSource(
        name="zero",
        profile=lambda y: np.zeros_like(y, dtype=complex),
        spectrum=lambda eta: np.zeros_like(eta, dtype=complex),
        support_radius=1.0,
        band=1.0,
    )


def gaussian_datum(amplitude: float = 1.0) -> DataSource:
    """u0(y) = A e^{-y^2}, u0^(eta) = A sqrt(pi) e^{-eta^2/4}"""
    return DataSource(
        name="gaussian",
        profile=lambda y: amplitude * np.exp(-y ** 2) + 0j,
        spectrum=lambda eta: amplitude * np.sqrt(np.pi) * np.exp(-0.25 * eta ** 2) + 0j,
        support_radius=_GAUSS_DATUM_RADIUS,
        band=_GAUSS_DATUM_BAND,
    )


def _heaviside_gaussian(y: np.ndarray) -> np.ndarray:
    return np.where(y > 0, np.exp(-y ** 2), np.where(y == 0, 0.5, 0.0)) + 0j


def jump_gaussian_datum() -> DataSource:
    """
    u0(y) = H(y) e^{-y^2}, a jump of height 1 at 0.

    Its transform (sqrt(pi)/2) erfcx(i eta / 2) decays like 1/|eta|.
    """
    return DataSource(
        name="jump_gaussian",
        profile=_heaviside_gaussian,
        spectrum=lambda eta: 0.5 * np.sqrt(np.pi) * erfcx(0.5j * np.asarray(eta, dtype=float)),
        support_radius=_GAUSS_DATUM_RADIUS,
        breakpoints=(0.0,),
    )


def evolved(source: DataSource, t: float) -> DataSource:
    """
    Free Airy flow of a source with analytic transform: spectrum times e^{i eta^3 t}.

    The profile is dropped for t != 0 (no closed form on the physical side).
    """
    if t == 0:
        return source
    if not source.has_spectrum:
        raise ContractError(f"cannot evolve '{source.name}' without an analytic transform")
    base = source.spectrum

    def spectrum(eta):
        eta = np.asarray(eta, dtype=float)
        return base(eta) * np.exp(1j * np.mod(eta ** 3 * t, 2.0 * np.pi))

    return replace(
        source,
        name=f"{source.name}@{t:g}",
        profile=None,
        spectrum=spectrum,
        breakpoints=(),
        dispersion_time=source.dispersion_time + t,
    )


def backward_evolved_jump_datum(t_sched: float) -> DataSource:
    """Airy flow of H(y)e^{-y^2} run back by t_sched, so the jump reappears at t = t_sched."""
    source = evolved(jump_gaussian_datum(), -t_sched)
    return replace(source, name="backward_evolved_jump")


def from_file(path: Union[str, Path]) -> DataSource:
    """
    Load a field dump (`x,re,im` CSV, `#` comment lines allowed).

    The nodes must form a Grid1D: x_0 = -L, uniform spacing, power-of-two count.
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if lines and lines[0].replace(" ", "") == "x,re,im":
        lines = lines[1:]
    if not lines:
        raise ContractError(f"no samples in {path}")
    table = np.loadtxt(lines, delimiter=",", ndmin=2)
    x, re, im = table[:, 0], table[:, 1], table[:, 2]
    grid = Grid1D(half_length=-float(x[0]), count=len(x))
    if not np.allclose(x, grid.nodes, rtol=0.0, atol=1e-9 * grid.half_length):
        raise ContractError(f"nodes in {path} do not form a uniform grid starting at -L")
    logger.info(f"Loaded field from {path}: L={grid.half_length}, N={grid.count}")
    return DataSource(name=Path(path).stem, samples=ComplexField(grid, re + 1j * im))
