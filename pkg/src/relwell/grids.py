"""Spatial grids and the sampled wavefunction container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid over the well [0, L], endpoints included.

    ``intervals`` is the number of spacings; the grid has ``intervals + 1``
    points with x[0] = 0 and x[-1] = L.  Sine-basis operations address the
    ``intervals - 1`` interior points.
    """

    well_width: float
    intervals: int

    def __post_init__(self):
        if self.well_width <= 0:
            raise ValueError("well_width must be positive")
        if self.intervals < 2:
            raise ValueError("need at least 2 intervals")

    @property
    def spacing(self) -> float:
        return self.well_width / self.intervals

    @property
    def points(self) -> np.ndarray:
        return np.linspace(0.0, self.well_width, self.intervals + 1)

    @property
    def nyquist_level(self) -> int:
        """Highest sine-basis index the grid represents without aliasing."""
        return self.intervals - 1


@dataclass(frozen=True)
class BoxGrid:
    """Periodic grid over [x_min, x_max) used by the split-operator engine.

    The right endpoint is identified with the left one and not stored.
    """

    x_min: float
    x_max: float
    size: int

    def __post_init__(self):
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.size < 2:
            raise ValueError("need at least 2 points")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def spacing(self) -> float:
        return self.length / self.size

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.size)

    def momenta(self, hbar: float) -> np.ndarray:
        """FFT-ordered momentum samples conjugate to the grid."""
        return 2.0 * np.pi * hbar * np.fft.fftfreq(self.size, d=self.spacing)


@dataclass
class GridState:
    """Complex wavefunction samples on a grid, tagged with the time they refer to."""

    values: np.ndarray
    grid: SpatialGrid | BoxGrid
    time_tag: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.points.shape:
            raise ValueError("sample count does not match the grid")

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.spacing)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def normalized(self) -> "GridState":
        norm = np.sqrt(self.norm_squared())
        if norm == 0.0:
            raise ValueError("cannot normalize a zero state")
        return GridState(self.values / norm, self.grid, self.time_tag, dict(self.metadata))
