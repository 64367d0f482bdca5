"""Spectral purity via singular value decomposition of the sampled amplitude."""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import SpdcLabError


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Normalized Schmidt weights (descending), purity, and Schmidt number."""

    lambdas: np.ndarray
    purity: float
    schmidt_number: float

    def __post_init__(self):
        if abs(float(np.sum(self.lambdas)) - 1.0) > 1e-12:
            raise ValueError("Schmidt weights must sum to 1")
        if np.any(self.lambdas < 0):
            raise ValueError("Schmidt weights must be nonnegative")
        if not 0.0 < self.purity <= 1.0 + 1e-12:
            raise ValueError("purity must lie in (0, 1]")


def schmidt_purity(grid, decompose="amplitude"):
    """Schmidt spectrum of a sampled joint amplitude.

    ``grid`` is a JsaGrid or a bare 2-D array. ``amplitude`` decomposes the
    complex amplitude itself (weights sigma_n^2 / sum sigma^2, the standard
    Schmidt decomposition); ``intensity`` decomposes the modulus-squared
    matrix instead, normalizing its singular values linearly so that they
    play the role of the weights directly.
    """
    matrix = getattr(grid, "amplitude", grid)
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or min(matrix.shape) < 2:
        raise ValueError("need a 2-D grid of at least 2x2 samples")
    if not np.all(np.isfinite(matrix.view(float))):
        raise ValueError("grid contains non-finite entries")
    if decompose == "amplitude":
        sv = np.linalg.svd(matrix, compute_uv=False)
        total = np.sum(sv**2)
        if total <= 0:
            raise SpdcLabError("vanishing joint amplitude")
        lam = np.sort(sv**2)[::-1] / total
    elif decompose == "intensity":
        sv = np.linalg.svd(np.abs(matrix) ** 2, compute_uv=False)
        total = np.sum(sv)
        if total <= 0:
            raise SpdcLabError("vanishing joint amplitude")
        lam = np.sort(sv)[::-1] / total
    else:
        raise ValueError("decompose must be 'amplitude' or 'intensity'")
    purity = float(np.sum(lam**2))
    return SchmidtSpectrum(
        lambdas=lam, purity=purity, schmidt_number=1.0 / purity
    )


def write_schmidt_csv(spectrum, path):
    """Rows (n, lambda_n) followed by a summary line."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "lambda_n"])
        for n, lam in enumerate(spectrum.lambdas):
            writer.writerow([n, "%.12e" % lam])
        writer.writerow(
            ["purity=%.12f" % spectrum.purity,
             "schmidt_number=%.12f" % spectrum.schmidt_number]
        )
