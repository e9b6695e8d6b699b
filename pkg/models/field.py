"""
Periodic grids and complex fields on them
"""
from dataclasses import dataclass, field
from functools import cached_property
from numbers import Number

import numpy as np

from models.errors import ContractError, GridMismatch, NonFinite

MIN_GRID_COUNT = 16


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def next_power_of_two(n: float) -> int:
    """Smallest power of two >= n (and >= MIN_GRID_COUNT)."""
    count = MIN_GRID_COUNT
    while count < n:
        count *= 2
    return count


@dataclass(frozen=True)
class Grid1D:
    """
    Periodic grid on [-L, L) with N nodes x_j = -L + j h.

    Frequency node k carries eta_k = pi k / L for k = -N/2 .. N/2-1
    (symmetric order).
    """
    half_length: float
    count: int

    def __post_init__(self):
        if not is_power_of_two(int(self.count)) or self.count < MIN_GRID_COUNT:
            raise ContractError(
                f"grid count must be a power of two >= {MIN_GRID_COUNT}, got {self.count}"
            )
        if not (self.half_length > 0 and np.isfinite(self.half_length)):
            raise ContractError(f"half_length must be positive, got {self.half_length}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.count

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -self.half_length + self.spacing * np.arange(self.count)
        x.flags.writeable = False
        return x

    @cached_property
    def mode_indices(self) -> np.ndarray:
        k = np.arange(-self.count // 2, self.count // 2)
        k.flags.writeable = False
        return k

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        eta = np.pi * self.mode_indices / self.half_length
        eta.flags.writeable = False
        return eta

    @property
    def frequency_spacing(self) -> float:
        return np.pi / self.half_length

    @property
    def nyquist(self) -> float:
        return np.pi / self.spacing

    def zeros(self) -> "ComplexField":
        return ComplexField(self, np.zeros(self.count, dtype=complex))

    def sample(self, func) -> "ComplexField":
        """Sample a vectorized closure x -> f(x) on the nodes."""
        return ComplexField(self, np.asarray(func(self.nodes), dtype=complex))


def _frozen_complex(values, count: int, label: str) -> np.ndarray:
    arr = np.array(values, dtype=complex, copy=True).reshape(-1)
    if arr.shape[0] != count:
        raise ContractError(f"{label} count {arr.shape[0]} does not match grid count {count}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{label} contain NaN or Inf")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField:
    """N complex samples on a Grid1D. Immutable; samples are always finite."""
    grid: Grid1D
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen_complex(self.samples, self.grid.count, "samples"))

    def _check(self, other: "ComplexField") -> None:
        if other.grid != self.grid:
            raise GridMismatch(f"grids differ: {self.grid} vs {other.grid}")

    def replace(self, samples: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, samples)

    def __add__(self, other: "ComplexField") -> "ComplexField":
        self._check(other)
        return self.replace(self.samples + other.samples)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        self._check(other)
        return self.replace(self.samples - other.samples)

    def __mul__(self, scalar: Number) -> "ComplexField":
        return self.replace(self.samples * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "ComplexField":
        return self.replace(-self.samples)

    @property
    def real(self) -> np.ndarray:
        return self.samples.real

    @property
    def imag(self) -> np.ndarray:
        return self.samples.imag

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Transform coefficients F(eta_k) in symmetric order."""
    grid: Grid1D
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", _frozen_complex(self.coefficients, self.grid.count, "coefficients")
        )

    def replace(self, coefficients: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, coefficients)
