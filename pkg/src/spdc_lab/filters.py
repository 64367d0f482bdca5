"""Flat-top spectral filters."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FilterSpec:
    """Flat-top bandpass window: ``transmission`` inside center +/- half_width
    (closed interval), zero outside. All frequencies in rad/s."""

    center: float
    half_width: float
    transmission: float = 1.0

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if not 0.0 <= self.transmission <= 1.0:
            raise ValueError("transmission must lie in [0, 1]")

    @property
    def support(self):
        return (self.center - self.half_width, self.center + self.half_width)


@dataclass(frozen=True)
class FilterBank:
    """The three windows applied to one SPDC configuration."""

    signal: FilterSpec
    idler: FilterSpec
    pump: FilterSpec


def filter_transmission(omega, f):
    """Evaluate a flat-top filter; band edges are included."""
    omega = np.asarray(omega, dtype=float)
    inside = np.abs(omega - f.center) <= f.half_width
    return np.where(inside, f.transmission, 0.0)
