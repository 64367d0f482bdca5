"""Unit conversions at the interface boundary.

All internal math uses SI: meters, rad/s, rad/m, seconds, watts. Interfaces
accept nm, um, degrees, THz, mW and convert here. "THz" inputs are ambiguous
between angular (1e12 rad/s) and ordinary (2*pi*1e12 rad/s) frequency; the
``frequency_convention`` switch makes the choice explicit.
"""

import math

from scipy.constants import c

TWO_PI = 2.0 * math.pi

FREQUENCY_CONVENTIONS = ("angular", "ordinary")


def nm_to_m(x):
    return x * 1e-9


def um_to_m(x):
    return x * 1e-6


def m_to_um(x):
    return x * 1e6


def deg_to_rad(x):
    return math.radians(x)


def rad_to_deg(x):
    return math.degrees(x)


def thz_to_rad_per_s(x, convention="angular"):
    """Convert a value quoted in THz to rad/s under the chosen convention."""
    if convention not in FREQUENCY_CONVENTIONS:
        raise ValueError("unknown frequency convention: %r" % (convention,))
    scale = 1e12 if convention == "angular" else TWO_PI * 1e12
    return x * scale


def wavelength_to_angular_frequency(lam_m):
    return TWO_PI * c / lam_m


def angular_frequency_to_wavelength(omega):
    return TWO_PI * c / omega
