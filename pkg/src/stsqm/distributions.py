"""Containers for arrival densities and flux time series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ArrivalDistribution:
    """Density samples over one or more arrival axes.

    ``samples`` are the raw (unnormalized) density values and
    ``normalization_constant`` the divisor that turns them into a
    probability density, so ``density = samples / normalization_constant``.
    ``cell`` holds the spacing of every axis.
    """

    axes: tuple[str, ...]
    coords: tuple[np.ndarray, ...]
    samples: np.ndarray
    normalization_constant: float
    cell: tuple[float, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != len(self.axes) or len(self.coords) != s.ndim or len(self.cell) != s.ndim:
            raise DomainError("axes, coords, cell and samples disagree in dimension")
        if not self.normalization_constant > 0:
            raise DomainError("normalization constant must be positive")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "coords", tuple(np.asarray(c, dtype=float) for c in self.coords))

    @property
    def density(self) -> np.ndarray:
        return self.samples / self.normalization_constant

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.cell))

    @property
    def captured_mass(self) -> float:
        return float(np.sum(self.density) * self.cell_volume)

    @property
    def improper(self) -> bool:
        return bool(self.metadata.get("improper", False))

    def marginal(self, axis: str) -> ArrivalDistribution:
        """Integrate out every axis except ``axis``."""
        k = self.axes.index(axis)
        others = tuple(i for i in range(len(self.axes)) if i != k)
        w = float(np.prod([self.cell[i] for i in others])) if others else 1.0
        s = self.samples.sum(axis=others) * w if others else self.samples
        return ArrivalDistribution((axis,), (self.coords[k],), s, self.normalization_constant,
                                   (self.cell[k],), dict(self.metadata))


@dataclass(frozen=True)
class FluxSeries:
    t: np.ndarray
    current: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        j = np.asarray(self.current, dtype=float)
        if t.shape != j.shape or t.ndim != 1:
            raise DomainError("flux series needs matching 1D time and current arrays")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "current", j)
