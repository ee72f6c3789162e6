"""Grid and field containers shared by the simulation, weight and filter code."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Grid1D", "Field1D"]


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid, nodes x_j = x_min + j dx for j = 0..n-1.

    The half-open convention n dx = x_max - x_min keeps FFT bins exact on
    periodic domains; for bounded (Dirichlet) domains the last node sits one
    spacing short of x_max.
    """

    x_min: float
    x_max: float
    n: int
    frame: str = "comoving"  # or "lab"
    periodic: bool = False

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("grid too small")
        if self.x_max <= self.x_min:
            raise ValueError("empty domain")
        if self.frame not in ("comoving", "lab"):
            raise ValueError(f"unknown frame {self.frame!r}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def wavenumbers(self) -> np.ndarray:
        """FFT bin frequencies [rad/length] for a periodic grid."""
        if not self.periodic:
            raise ValueError("wavenumbers are defined for periodic grids")
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


@dataclass
class Field1D:
    """A scalar grid function together with its grid and frame."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.n,):
            raise ValueError("field shape does not match grid")

    @property
    def frame(self) -> str:
        return self.grid.frame


def centered_derivative(values: np.ndarray, dx: float, periodic: bool = False) -> np.ndarray:
    """Second-order first derivative; one-sided second-order at closed ends."""
    v = np.asarray(values)
    if periodic:
        return (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * dx)
    out = np.empty_like(v, dtype=np.result_type(v, 1.0))
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dx)
    return out
