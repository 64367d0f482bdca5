"""Joint spectral amplitude of a noncollinear bulk-crystal pair source.

The two-photon amplitude over frequency detunings (Omega_s, Omega_i) is, up
to the rate prefactor handled in :mod:`spdc_lab.metrics`,

    Phi = pi / sqrt(A C) * Phi_z(dk_z) * exp(-dk_y^2 / (4 C)
          - (Omega_s + Omega_i)^2 / (4 B_p^2)),

where A, C (and D, F, H) collect the transverse Gaussian-beam overlap of the
three modes, dk_y and dk_z are the transverse/longitudinal phase mismatches,
and Phi_z is the longitudinal integral, equal to L sinc(dk_z L / 2) when the
pump walk-off envelope exp(-H z^2) is neglected.

This module also provides the Gaussian model of the joint intensity: with the
sinc replaced by a Gaussian of matched curvature and the mismatches
linearized in the detunings, the log-intensity is the quadratic form
-(delta_s Omega_s^2 + delta_i Omega_i^2 + 2 delta_si Omega_s Omega_i), and
driving the cross coefficient delta_si to zero by choice of the collection
waist makes the amplitude separable. ``purity_waist`` solves that condition
in closed form.
"""

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .dispersion import inverse_group_velocity, wave_number
from .errors import UnsatisfiableConditionError

# curvature-matching constant for the sinc -> Gaussian replacement
# sinc(x) ~= exp(-SINC_GAUSS_ALPHA * x^2)
SINC_GAUSS_ALPHA = 0.455

ALPHA_CONVENTIONS = ("paper_literal", "consistent")

MIN_GRID_RESOLUTION = 64


@dataclass(frozen=True)
class BeamGeometry:
    """Waists, emission angles, and pump parameters of one configuration.

    Waists are 1/e field radii in meters; angles are internal emission angles
    in radians; pump_bandwidth_Bp in rad/s; pump_power_P in mW. ``modes`` is
    the (pump, signal, idler) triple of OpticalMode records.
    """

    W0p: float
    W0s: float
    W0i: float
    theta_s: float
    theta_i: float
    pump_bandwidth_Bp: float
    pump_power_P: float
    modes: tuple

    def __post_init__(self):
        for w in (self.W0p, self.W0s, self.W0i):
            if w <= 0:
                raise ValueError("waists must be positive")
        for th in (self.theta_s, self.theta_i):
            if not 0.0 <= th < 0.1:
                raise ValueError(
                    "emission angles must lie in [0, 0.1) rad (small-angle regime)"
                )
        if self.pump_bandwidth_Bp <= 0:
            raise ValueError("pump_bandwidth_Bp must be positive")
        if self.pump_power_P <= 0:
            raise ValueError("pump_power_P must be positive")
        roles = tuple(m.role for m in self.modes)
        if roles != ("pump", "signal", "idler"):
            raise ValueError("modes must be the (pump, signal, idler) triple")

    @property
    def pump(self):
        return self.modes[0]

    @property
    def signal(self):
        return self.modes[1]

    @property
    def idler(self):
        return self.modes[2]


def check_rayleigh(geom, length_L):
    """Warn when any Rayleigh range is not large against the crystal length.

    The thin-beam factorization used throughout assumes z_r = pi W0^2 /
    lambda >> L; enforce z_r > 10 L with a warning.
    """
    for w0, mode in zip(
        (geom.W0p, geom.W0s, geom.W0i), geom.modes
    ):
        z_r = math.pi * w0**2 / mode.central_wavelength
        if z_r <= 10.0 * length_L:
            warnings.warn(
                "%s Rayleigh range %.2e m is not >> crystal length %.2e m"
                % (mode.role, z_r, length_L)
            )


@dataclass(frozen=True)
class GeometryFactors:
    """Transverse-overlap curvatures, all in 1/m^2."""

    A: float
    C: float
    D: float
    F: float
    H: float

    def __post_init__(self):
        if not self.A >= self.C > 0:
            raise ValueError("require A >= C > 0")
        if self.F < -1e-30 or self.H < -1e-12 * max(self.F, self.C):
            raise ValueError("require F >= 0 and H >= 0")


@dataclass(frozen=True)
class DeltaCoefficients:
    """Quadratic-form coefficients of the Gaussian-model log-intensity, s^2.

    Convention: joint intensity ~ exp(-delta_s Omega_s^2 - delta_i Omega_i^2
    - 2 delta_si Omega_s Omega_i).
    """

    delta_s: float
    delta_i: float
    delta_si: float

    def __post_init__(self):
        if self.delta_s <= 0 or self.delta_i <= 0:
            raise ValueError("delta_s and delta_i must be positive")


@dataclass(frozen=True)
class JsaGrid:
    """Sampled complex amplitude on a uniform detuning grid.

    ``omega_s_samples`` and ``omega_i_samples`` are absolute frequencies in
    rad/s spanning the filter windows; ``amplitude[j, k]`` is Phi at
    (omega_s_samples[j], omega_i_samples[k]). ``normalization_N`` scales
    |amplitude|^2 to a unit-probability joint spectral density:
    normalization_N * sum |Phi|^2 dOmega_s dOmega_i = 1 (trapezoid rule).
    """

    omega_s_samples: np.ndarray
    omega_i_samples: np.ndarray
    amplitude: np.ndarray
    normalization_N: float

    def __post_init__(self):
        if self.amplitude.shape != (
            self.omega_s_samples.size,
            self.omega_i_samples.size,
        ):
            raise ValueError("amplitude shape does not match sample arrays")
        if not np.all(np.isfinite(self.amplitude.view(float))):
            raise ValueError("amplitude contains non-finite entries")
        if np.max(np.abs(self.amplitude)) <= 0:
            raise ValueError("vanishing joint amplitude")


def geometry_factors(geom):
    """Transverse-overlap curvatures A, C, D, F and the walk-off factor H."""
    wp2, ws2, wi2 = geom.W0p**2, geom.W0s**2, geom.W0i**2
    ts, ti = geom.theta_s, geom.theta_i
    A = 1.0 / wp2 + 1.0 / ws2 + 1.0 / wi2
    C = 1.0 / wp2 + math.cos(ts) ** 2 / ws2 + math.cos(ti) ** 2 / wi2
    D = math.sin(2 * ts) / ws2 - math.sin(2 * ti) / wi2
    F = math.sin(ts) ** 2 / ws2 + math.sin(ti) ** 2 / wi2
    H = F - D**2 / (4.0 * C)
    return GeometryFactors(A=A, C=C, D=D, F=F, H=max(H, 0.0))


def phase_mismatch_exact(Omega_s, Omega_i, geom, crystal):
    """(dk_y, dk_z) with full dispersion at the detuned frequencies.

    dk_y = k_s sin(theta_s) - k_i sin(theta_i);
    dk_z = k_p - k_s cos(theta_s) - k_i cos(theta_i);
    the pump is extraordinary at the crystal cut angle and carries the sum
    frequency.
    """
    Omega_s = np.asarray(Omega_s, dtype=float)
    Omega_i = np.asarray(Omega_i, dtype=float)
    w_s = geom.signal.central_angular_frequency + Omega_s
    w_i = geom.idler.central_angular_frequency + Omega_i
    k_s = wave_number(w_s, geom.signal, 0.0, crystal)
    k_i = wave_number(w_i, geom.idler, 0.0, crystal)
    k_p = wave_number(w_s + w_i, geom.pump, crystal.cut_angle_theta, crystal)
    dky = k_s * np.sin(geom.theta_s) - k_i * np.sin(geom.theta_i)
    dkz = k_p - k_s * np.cos(geom.theta_s) - k_i * np.cos(geom.theta_i)
    return dky, dkz


def phase_mismatch_linear(Omega_s, Omega_i, inverse_group_velocities, angles):
    """(dk_y, dk_z) linearized in the detunings.

    ``inverse_group_velocities`` is (N_s, N_i, N_p) in s/m at the central
    frequencies; ``angles`` is (theta_s, theta_i). The zero-order terms
    cancel by construction of the central phase matching.
    """
    N_s, N_i, N_p = inverse_group_velocities
    theta_s, theta_i = angles
    Omega_s = np.asarray(Omega_s, dtype=float)
    Omega_i = np.asarray(Omega_i, dtype=float)
    dky = N_s * Omega_s * np.sin(theta_s) - N_i * Omega_i * np.sin(theta_i)
    dkz = (
        N_p * (Omega_s + Omega_i)
        - N_s * Omega_s * np.cos(theta_s)
        - N_i * Omega_i * np.cos(theta_i)
    )
    return dky, dkz


def central_inverse_group_velocities(geom, crystal):
    """(N_s, N_i, N_p) at the central frequencies; pump at the cut angle."""
    N_s = inverse_group_velocity(geom.signal, 0.0, crystal)
    N_i = inverse_group_velocity(geom.idler, 0.0, crystal)
    N_p = inverse_group_velocity(geom.pump, crystal.cut_angle_theta, crystal)
    return N_s, N_i, N_p


def walk_off_integral(dk_z, H, L):
    """Longitudinal overlap integral of exp(-H z^2 - i dk_z z) over [-L/2, L/2].

    Adaptive quadrature to relative 1e-8. The imaginary part vanishes by
    parity; at H = 0 the result reduces to L sinc(dk_z L / 2).
    """
    if H < 0:
        raise ValueError("H must be nonnegative")
    val, _ = quad(
        lambda z: math.exp(-H * z * z),
        0.0,
        L / 2.0,
        weight="cos",
        wvar=float(dk_z),
        epsabs=0.0,
        epsrel=1e-10,
        limit=400,
    )
    return complex(2.0 * val)


def _walk_off_grid(dkz, H, L, order=200):
    """Vectorized Gauss-Legendre version of walk_off_integral for grids."""
    t, w = np.polynomial.legendre.leggauss(order)
    z = t * (L / 2.0)
    w = w * (L / 2.0)
    env = np.exp(-H * z**2) * w
    return np.exp(-1j * np.multiply.outer(dkz, z)) @ env


def mode_function(
    Omega_s,
    Omega_i,
    geom,
    crystal,
    dispersion_mode="exact",
    walk_off=False,
):
    """Closed-form joint spectral amplitude Phi(Omega_s, Omega_i).

    With ``walk_off`` False the longitudinal factor is L sinc(dk_z L / 2);
    enabling it evaluates the exp(-H z^2) envelope numerically.
    """
    g = geometry_factors(geom)
    if dispersion_mode == "exact":
        dky, dkz = phase_mismatch_exact(Omega_s, Omega_i, geom, crystal)
    elif dispersion_mode == "linear":
        ngv = central_inverse_group_velocities(geom, crystal)
        dky, dkz = phase_mismatch_linear(
            Omega_s, Omega_i, ngv, (geom.theta_s, geom.theta_i)
        )
    else:
        raise ValueError("dispersion_mode must be 'exact' or 'linear'")
    L = crystal.length_L
    Omega_s = np.asarray(Omega_s, dtype=float)
    Omega_i = np.asarray(Omega_i, dtype=float)
    if walk_off and g.H > 0:
        phi_z = _walk_off_grid(dkz, g.H, L)
    else:
        phi_z = L * np.sinc(dkz * L / 2.0 / math.pi)
    envelope = np.exp(
        -dky**2 / (4.0 * g.C)
        - (Omega_s + Omega_i) ** 2 / (4.0 * geom.pump_bandwidth_Bp**2)
    )
    return math.pi / math.sqrt(g.A * g.C) * phi_z * envelope


def jsa_grid(
    resolution,
    geom,
    crystal,
    signal_filter,
    idler_filter,
    dispersion_mode="exact",
    walk_off=False,
):
    """Sample the amplitude on a uniform grid spanning the filter windows."""
    if resolution < MIN_GRID_RESOLUTION:
        raise ValueError(
            "grid resolution %d below minimum %d" % (resolution, MIN_GRID_RESOLUTION)
        )
    check_rayleigh(geom, crystal.length_L)
    w_s = np.linspace(*signal_filter.support, resolution)
    w_i = np.linspace(*idler_filter.support, resolution)
    Om_s = w_s - geom.signal.central_angular_frequency
    Om_i = w_i - geom.idler.central_angular_frequency
    OS, OI = np.meshgrid(Om_s, Om_i, indexing="ij")
    amp = mode_function(
        OS, OI, geom, crystal, dispersion_mode=dispersion_mode, walk_off=walk_off
    )
    amp = np.asarray(amp, dtype=complex)
    norm = np.trapezoid(np.trapezoid(np.abs(amp) ** 2, Om_i, axis=1), Om_s)
    return JsaGrid(
        omega_s_samples=w_s,
        omega_i_samples=w_i,
        amplitude=amp,
        normalization_N=1.0 / norm,
    )


def _delta_terms(geom, crystal, alpha_convention):
    if alpha_convention not in ALPHA_CONVENTIONS:
        raise ValueError("alpha_convention must be one of %s" % (ALPHA_CONVENTIONS,))
    N_s, N_i, N_p = central_inverse_group_velocities(geom, crystal)
    ts, ti = geom.theta_s, geom.theta_i
    u = N_s * math.sin(ts)
    v = N_i * math.sin(ti)
    a = N_p - N_s * math.cos(ts)
    b = N_p - N_i * math.cos(ti)
    power = 1 if alpha_convention == "consistent" else 2
    alpha_eff = SINC_GAUSS_ALPHA**power
    return u, v, a, b, alpha_eff


def delta_coefficients(geom, crystal, alpha_convention="paper_literal"):
    """Gaussian-model quadratic-form coefficients for the joint intensity.

    ``consistent`` uses the single power of the sinc-matching constant that
    follows from squaring the Gaussian-replaced amplitude; ``paper_literal``
    keeps the squared constant of the printed closed-form waist relation.
    """
    u, v, a, b, alpha_eff = _delta_terms(geom, crystal, alpha_convention)
    g = geometry_factors(geom)
    L2 = crystal.length_L**2
    bp2 = geom.pump_bandwidth_Bp**2
    delta_s = alpha_eff * a * a * L2 / 2.0 + u * u / (2.0 * g.C) + 1.0 / (2.0 * bp2)
    delta_i = alpha_eff * b * b * L2 / 2.0 + v * v / (2.0 * g.C) + 1.0 / (2.0 * bp2)
    delta_si = alpha_eff * a * b * L2 / 2.0 - u * v / (2.0 * g.C) + 1.0 / (2.0 * bp2)
    return DeltaCoefficients(delta_s=delta_s, delta_i=delta_i, delta_si=delta_si)


def purity_waist(W0p, geom, crystal, alpha_convention="paper_literal"):
    """Collection waist W0s (= W0i) that zeroes the cross coefficient delta_si.

    Closed form: with equal collection waists the condition delta_si = 0
    fixes the transverse curvature C, giving

        W0s = sqrt((cos^2 theta_s + cos^2 theta_i) / (C* - 1/W0p^2)),
        C*  = u v / (1/B_p^2 + alpha_eff a b L^2),

    which only has a real solution when C* exceeds 1/W0p^2.
    """
    u, v, a, b, alpha_eff = _delta_terms(geom, crystal, alpha_convention)
    if u * v <= 0:
        raise UnsatisfiableConditionError(
            "purity condition unsatisfiable at zero emission angle; "
            "increase the cut detuning"
        )
    c_star = (u * v) / (1.0 / geom.pump_bandwidth_Bp**2 + alpha_eff * a * b * crystal.length_L**2)
    radicand = c_star - 1.0 / W0p**2
    if radicand <= 0:
        raise UnsatisfiableConditionError(
            "purity condition unsatisfiable; increase B_p, cut detuning, or W0p"
        )
    return math.sqrt(
        (math.cos(geom.theta_s) ** 2 + math.cos(geom.theta_i) ** 2) / radicand
    )


def sinc_gaussian(x):
    """Gaussian stand-in for sinc with matched curvature: exp(-0.455 x^2)."""
    return np.exp(-SINC_GAUSS_ALPHA * np.asarray(x, dtype=float) ** 2)


def gaussian_model_purity(delta):
    """Analytic spectral purity of the Gaussian-model amplitude.

    For Phi = exp(-(delta_s x^2 + delta_i y^2 + 2 delta_si x y)/2) the
    Schmidt weights are geometric with ratio mu and the purity is
    (1 - mu)/(1 + mu), where mu follows from the Mehler kernel of the
    one-photon reduced state.
    """
    al, be, ga = delta.delta_s, delta.delta_i, delta.delta_si
    if al * be <= ga * ga:
        raise ValueError("quadratic form not positive definite")
    A = al / 2.0 - ga * ga / (4.0 * be)
    B = ga * ga / (4.0 * be)
    mu = B / (A + math.sqrt(A * A - B * B))
    return (1.0 - mu) / (1.0 + mu)


def write_jsa_csv(grid, path):
    """Dump the grid as rows (omega_s, omega_i, Re Phi, Im Phi, |Phi|^2)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["omega_s_rad_per_s", "omega_i_rad_per_s", "re_phi", "im_phi", "jsi"])
        for j, ws in enumerate(grid.omega_s_samples):
            for k, wi in enumerate(grid.omega_i_samples):
                amp = grid.amplitude[j, k]
                writer.writerow(
                    [
                        "%.9e" % ws,
                        "%.9e" % wi,
                        "%.9e" % amp.real,
                        "%.9e" % amp.imag,
                        "%.9e" % abs(amp) ** 2,
                    ]
                )


def write_jsa_json(grid, path):
    """Dump the grid as a plain-JSON document (no binary blobs)."""
    doc = {
        "omega_s_samples": grid.omega_s_samples.tolist(),
        "omega_i_samples": grid.omega_i_samples.tolist(),
        "amplitude_re": grid.amplitude.real.tolist(),
        "amplitude_im": grid.amplitude.imag.tolist(),
        "normalization_N": grid.normalization_N,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
