"""Uniform position grids and trapezoid quadrature used by the grid-based routines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of `points` samples on [center - half_width, center + half_width]."""

    center: float
    half_width: float
    points: int

    def __post_init__(self):
        if not np.isfinite(self.center):
            raise ValueError("grid center must be finite")
        if not (self.half_width > 0 and np.isfinite(self.half_width)):
            raise ValueError(f"grid half_width must be positive and finite, got {self.half_width}")
        if self.points < 64:
            raise ValueError(f"grid needs at least 64 points, got {self.points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    def coords(self) -> np.ndarray:
        return np.linspace(self.center - self.half_width, self.center + self.half_width, self.points)

    def weights(self) -> np.ndarray:
        """Trapezoid weights; spectrally accurate for smooth integrands with decayed tails."""
        w = np.full(self.points, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w


def grid_for_widths(center: float, widths: float | list[float], n_widths: float = 8.0,
                    points: int = 256, span: float = 0.0) -> GridSpec:
    """Grid extending `n_widths` times the largest relevant length scale beyond `span`."""
    w = float(np.max(widths))
    return GridSpec(center=center, half_width=span + n_widths * w, points=points)
