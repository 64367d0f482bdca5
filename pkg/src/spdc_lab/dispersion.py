"""Dispersion and phase-matching for a negative uniaxial crystal.

Refractive indices come from a Sellmeier fit of the form

    n^2 = a + b / (lambda_um^2 - c) - d * lambda_um^2

with coefficients shipped in a versioned JSON data file (BBO by default).
Wavelengths at every public interface are meters; the micrometer conversion
happens only inside the Sellmeier evaluation.
"""

import json
import math
import os
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.constants import c
from scipy.optimize import brentq

from .errors import (
    PhaseMatchingError,
    TotalInternalReflectionError,
    WavelengthWindowError,
)
from .units import TWO_PI, wavelength_to_angular_frequency

CRYSTAL_DIR_ENV = "SPDC_LAB_CRYSTAL_DIR"

ROLES = ("pump", "signal", "idler")
POLARIZATIONS = ("ordinary", "extraordinary")


@dataclass(frozen=True)
class CrystalSpec:
    """Dispersion data plus the geometric parameters of one crystal sample.

    Sellmeier coefficient tuples are (a, b, c, d) for the formula above;
    d11 and d31 are nonlinear tensor elements in pm/V; length_L in meters;
    cut_angle_theta and azimuth_phi in radians. cut_angle_theta is the angle
    between the optic axis and the pump propagation direction.
    """

    name: str
    sellmeier_o: tuple
    sellmeier_e: tuple
    validity_window: tuple  # (lambda_min, lambda_max) in meters
    d11: float
    d31: float
    length_L: float
    cut_angle_theta: float
    azimuth_phi: float = 0.0
    source_citations: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.length_L <= 0:
            raise ValueError("length_L must be positive")
        if not 0.0 < self.cut_angle_theta < math.pi / 2:
            raise ValueError("cut_angle_theta must lie in (0, pi/2)")
        lo, hi = self.validity_window
        if not 0 < lo < hi:
            raise ValueError("validity window must satisfy 0 < lo < hi")
        # spot-check the dataset over the window: n > 1 everywhere and the
        # extraordinary principal index below the ordinary one (negative
        # uniaxial)
        lam = np.linspace(lo * (1 + 1e-9), hi * (1 - 1e-9), 64)
        n_o = _sellmeier_index(self.sellmeier_o, lam)
        n_e = _sellmeier_index(self.sellmeier_e, lam)
        if not (np.all(n_o > 1.0) and np.all(n_e > 1.0)):
            raise ValueError("Sellmeier data yields n <= 1 inside the window")
        if not np.all(n_e < n_o):
            raise ValueError("dataset is not negative uniaxial (n_e >= n_o)")


@dataclass(frozen=True)
class OpticalMode:
    """One interacting field: role, polarization, and center frequency."""

    role: str
    polarization: str
    central_wavelength: float  # meters
    central_angular_frequency: float = None  # rad/s; derived when omitted

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError("role must be one of %s" % (ROLES,))
        if self.polarization not in POLARIZATIONS:
            raise ValueError("polarization must be one of %s" % (POLARIZATIONS,))
        if self.central_wavelength <= 0:
            raise ValueError("central_wavelength must be positive")
        omega = wavelength_to_angular_frequency(self.central_wavelength)
        if self.central_angular_frequency is None:
            object.__setattr__(self, "central_angular_frequency", omega)
        elif abs(self.central_angular_frequency - omega) > 1e-6 * omega:
            raise ValueError(
                "central_angular_frequency inconsistent with wavelength"
            )


def _sellmeier_index(coeffs, lam_m):
    a, b, cc, d = coeffs
    l2 = (np.asarray(lam_m) * 1e6) ** 2  # um^2
    n2 = a + b / (l2 - cc) - d * l2
    return np.sqrt(n2)


def _check_window(lam_m, crystal):
    lo, hi = crystal.validity_window
    lam = np.asarray(lam_m)
    if np.any(lam < lo) or np.any(lam > hi):
        raise WavelengthWindowError(
            "wavelength outside the %s dispersion-data window [%.1f, %.1f] nm"
            % (crystal.name, lo * 1e9, hi * 1e9)
        )


def load_crystal(name_or_path, length_L, cut_angle_theta, azimuth_phi=0.0):
    """Build a CrystalSpec from a JSON dataset.

    ``name_or_path`` is either a bare dataset name resolved against the
    directory named by the SPDC_LAB_CRYSTAL_DIR environment variable (falling
    back to the packaged data directory) or an explicit file path.
    """
    path = name_or_path
    if not os.path.exists(path):
        fname = name_or_path if name_or_path.endswith(".json") else name_or_path + ".json"
        override = os.environ.get(CRYSTAL_DIR_ENV)
        if override and os.path.exists(os.path.join(override, fname)):
            path = os.path.join(override, fname)
        else:
            path = str(resources.files("spdc_lab").joinpath("data", fname))
    with open(path) as fh:
        raw = json.load(fh)
    lo_nm, hi_nm = raw["validity_window_nm"]
    return CrystalSpec(
        name=raw["name"],
        sellmeier_o=tuple(raw["sellmeier_o"]),
        sellmeier_e=tuple(raw["sellmeier_e"]),
        validity_window=(lo_nm * 1e-9, hi_nm * 1e-9),
        d11=raw["d11_pm_per_V"],
        d31=raw["d31_pm_per_V"],
        length_L=length_L,
        cut_angle_theta=cut_angle_theta,
        azimuth_phi=azimuth_phi,
        source_citations=tuple(raw.get("source_citations", ())),
    )


def index_ordinary(lam_m, crystal):
    """Ordinary refractive index n_o(lambda)."""
    _check_window(lam_m, crystal)
    return _sellmeier_index(crystal.sellmeier_o, lam_m)


def index_extraordinary_principal(lam_m, crystal):
    """Principal extraordinary index n_e(lambda) (optic axis at 90 deg)."""
    _check_window(lam_m, crystal)
    return _sellmeier_index(crystal.sellmeier_e, lam_m)


def index_extraordinary(lam_m, theta, crystal):
    """Angle-tuned extraordinary index n_e(theta, lambda).

    Satisfies 1/n^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e_principal^2,
    so it runs monotonically from n_o at theta=0 to the principal value at
    theta=pi/2.
    """
    n_o = index_ordinary(lam_m, crystal)
    n_ep = index_extraordinary_principal(lam_m, crystal)
    return 1.0 / np.sqrt(
        np.cos(theta) ** 2 / n_o**2 + np.sin(theta) ** 2 / n_ep**2
    )


def wave_number(omega, mode, theta, crystal):
    """k = n(omega, theta) * omega / c with n selected by polarization."""
    omega = np.asarray(omega, dtype=float)
    lam = TWO_PI * c / omega
    if mode.polarization == "ordinary":
        n = index_ordinary(lam, crystal)
    else:
        n = index_extraordinary(lam, theta, crystal)
    return n * omega / c


def _sellmeier_dn_dlam_um(coeffs, lam_um):
    # derivative of n wrt lambda (per um): dn/dl = (1/2n) d(n^2)/dl
    a, b, cc, d = coeffs
    l2 = lam_um**2
    n = np.sqrt(a + b / (l2 - cc) - d * l2)
    dn2 = (-b / (l2 - cc) ** 2 - d) * 2.0 * lam_um
    return dn2 / (2.0 * n)


def inverse_group_velocity(mode, theta, crystal):
    """N = dk/domega at the mode's center frequency, in s/m.

    Computed analytically from the index formula: N = (n - lambda dn/dlambda)/c.
    """
    lam = mode.central_wavelength
    _check_window(lam, crystal)
    lam_um = lam * 1e6
    if mode.polarization == "ordinary":
        n = _sellmeier_index(crystal.sellmeier_o, lam)
        dn = _sellmeier_dn_dlam_um(crystal.sellmeier_o, lam_um)
    else:
        n_o = _sellmeier_index(crystal.sellmeier_o, lam)
        n_ep = _sellmeier_index(crystal.sellmeier_e, lam)
        dn_o = _sellmeier_dn_dlam_um(crystal.sellmeier_o, lam_um)
        dn_ep = _sellmeier_dn_dlam_um(crystal.sellmeier_e, lam_um)
        cos2, sin2 = math.cos(theta) ** 2, math.sin(theta) ** 2
        n = 1.0 / math.sqrt(cos2 / n_o**2 + sin2 / n_ep**2)
        dn = n**3 * (cos2 * dn_o / n_o**3 + sin2 * dn_ep / n_ep**3)
    return (n - lam_um * dn) / c


def effective_nonlinearity(theta, phi, crystal):
    """d_eff = d11 cos(3 phi) cos(theta) - d31 sin(theta), in pm/V."""
    return crystal.d11 * math.cos(3 * phi) * math.cos(theta) - crystal.d31 * math.sin(theta)


def collinear_cut_angle(lam_p, lam_s, lam_i, crystal):
    """Cut angle theta_c that closes the collinear momentum mismatch.

    Solves k_p(theta_c) - k_s - k_i = 0 at the central frequencies with zero
    emission angles, bracketed to 1e-10 rad.
    """
    if abs(1 / lam_p - 1 / lam_s - 1 / lam_i) > 1e-6 * (1 / lam_p):
        raise ValueError(
            "central wavelengths violate energy conservation: 1/lam_p != 1/lam_s + 1/lam_i"
        )
    w_p = wavelength_to_angular_frequency(lam_p)
    pump = OpticalMode("pump", "extraordinary", lam_p)
    k_s = index_ordinary(lam_s, crystal) * wavelength_to_angular_frequency(lam_s) / c
    k_i = index_ordinary(lam_i, crystal) * wavelength_to_angular_frequency(lam_i) / c

    def residual(theta):
        return float(wave_number(w_p, pump, theta, crystal)) - k_s - k_i

    lo, hi = 1e-6, math.pi / 2 - 1e-6
    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo * f_hi > 0:
        grid = np.linspace(lo, hi, 256)
        vals = np.array([residual(t) for t in grid])
        if np.max(np.abs(vals)) < 1.0:
            raise PhaseMatchingError(
                "no unique solution: mismatch vanishes at every angle"
            )
        raise PhaseMatchingError("no phase-matching solution in (0, pi/2)")
    return brentq(residual, lo, hi, xtol=1e-10)


def emission_angles(cut_detuning, lam_s, lam_i, crystal):
    """Internal emission angles (theta_s, theta_i) at a detuned cut angle.

    The crystal axis is rotated by ``cut_detuning`` past the collinear cut
    angle; the transverse and longitudinal mismatches are then closed
    simultaneously at the central frequencies. The transverse condition
    k_s sin(theta_s) = k_i sin(theta_i) reduces the system to one unknown.
    """
    if cut_detuning < 0:
        raise ValueError("cut_detuning must be nonnegative")
    lam_p = 1.0 / (1.0 / lam_s + 1.0 / lam_i)
    theta_c = collinear_cut_angle(lam_p, lam_s, lam_i, crystal)
    theta_cut = theta_c + cut_detuning
    pump = OpticalMode("pump", "extraordinary", lam_p)
    k_p = float(
        wave_number(wavelength_to_angular_frequency(lam_p), pump, theta_cut, crystal)
    )
    k_s = index_ordinary(lam_s, crystal) * wavelength_to_angular_frequency(lam_s) / c
    k_i = index_ordinary(lam_i, crystal) * wavelength_to_angular_frequency(lam_i) / c

    def residual(theta_s):
        theta_i = math.asin(k_s * math.sin(theta_s) / k_i)
        return k_p - k_s * math.cos(theta_s) - k_i * math.cos(theta_i)

    hi = 0.15
    r0 = residual(0.0)
    if r0 >= -1e-3:
        # at (or numerically below) the noncollinear threshold
        if cut_detuning > 1e-9:
            warnings.warn(
                "cut detuning below the noncollinear threshold; returning zero angles"
            )
        return 0.0, 0.0
    if residual(hi) < 0:
        raise PhaseMatchingError("emission-angle root finder failed to bracket")
    theta_s = brentq(residual, 0.0, hi, xtol=1e-12)
    theta_i = math.asin(k_s * math.sin(theta_s) / k_i)
    return theta_s, theta_i


def external_angle(theta_internal, lam_m, crystal):
    """Refraction of an ordinary ray at the exit face: sin out = n sin in."""
    n = float(index_ordinary(lam_m, crystal))
    s = n * math.sin(theta_internal)
    if s >= 1.0:
        raise TotalInternalReflectionError(
            "internal angle exceeds the critical angle (n sin theta = %.3f)" % s
        )
    return math.asin(s)


def walk_off_angle(theta, lam_m, crystal):
    """Poynting walk-off of the extraordinary wave, rho(theta), in radians."""
    n_o = float(index_ordinary(lam_m, crystal))
    n_ep = float(index_extraordinary_principal(lam_m, crystal))
    return math.atan((n_o / n_ep) ** 2 * math.tan(theta)) - theta
