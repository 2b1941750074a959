"""Scalar maps m(z) = cos(sqrt z), n(z) = 2 m'(z), spectral bands and the Weyl matrix.

All four scalars are even in ``w = sqrt(z)``, hence entire in ``z``; they
are evaluated through the principal root and a Taylor series near 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange, SigmaCollision, SigmaPole
from .graph import Graph

__all__ = [
    "SERIES_RADIUS",
    "ScalarMaps",
    "Band",
    "scalar_maps",
    "band",
    "band_inverse",
    "band_bounds",
    "sigma_distance",
    "weyl_matrix",
    "sqrt_branch",
    "sinc",
    "check_pole",
]

SERIES_RADIUS = 1e-4
_SERIES_TERMS = 10
_POLE_EPS = 1e-13


def sqrt_branch(z) -> complex:
    """Principal square root with ``Im w >= 0``."""
    w = np.sqrt(complex(z))
    if w.imag < 0 or (w.imag == 0 and w.real < 0):
        w = -w
    return w


def sinc(w):
    """``sin(w) / w`` for complex ``w``, with the removable point handled."""
    w = complex(w)
    if abs(w) < 1e-4:
        w2 = w * w
        return 1 - w2 / 6 + w2 * w2 / 120
    return np.sin(w) / w


@dataclass(frozen=True)
class ScalarMaps:
    z: complex
    m: complex
    dm: complex
    ddm: complex

    @property
    def n(self) -> complex:
        return 2 * self.dm

    @property
    def dn(self) -> complex:
        return 2 * self.ddm


def _series(z):
    # cos(sqrt z) = sum_j (-z)^j / (2j)!
    m = dm = ddm = 0j
    for j in range(_SERIES_TERMS):
        c = (-1) ** j / math.factorial(2 * j)
        m += c * z**j
        if j >= 1:
            dm += c * j * z ** (j - 1)
        if j >= 2:
            ddm += c * j * (j - 1) * z ** (j - 2)
    return m, dm, ddm


def scalar_maps(z) -> ScalarMaps:
    z = complex(z)
    if abs(z) < SERIES_RADIUS:
        m, dm, ddm = _series(z)
    else:
        w = sqrt_branch(z)
        s, c = np.sin(w), np.cos(w)
        m = c
        dm = -s / (2 * w)
        ddm = (s - w * c) / (4 * w**3)
    return ScalarMaps(z, complex(m), complex(dm), complex(ddm))


@dataclass(frozen=True)
class Band:
    """Open interval ((k pi)^2, ((k+1) pi)^2); band 0 starts at -inf."""

    k: int

    @property
    def lower(self) -> float:
        return -math.inf if self.k == 0 else (self.k * math.pi) ** 2

    @property
    def upper(self) -> float:
        return ((self.k + 1) * math.pi) ** 2

    def __contains__(self, lam) -> bool:
        return self.lower < lam < self.upper

    @property
    def slope_sign(self) -> int:
        """Sign of m' on the band."""
        return (-1) ** (self.k + 1)


def band(k: int) -> Band:
    if int(k) != k or k < 0:
        raise OutOfRange(f"band index must be a non-negative integer, got {k!r}")
    return Band(int(k))


def band_bounds(k: int) -> tuple[float, float]:
    b = band(k)
    return b.lower, b.upper


def band_inverse(k: int, mu: float) -> float:
    """The unique ``lam`` in band ``k`` with ``cos(sqrt lam) = mu``."""
    band(k)
    mu = float(mu)
    if not -1.0 <= mu <= 1.0:
        raise OutOfRange(f"mu={mu!r} outside [-1, 1]")
    if mu == -1.0 or (k >= 1 and mu == 1.0):
        raise SigmaCollision(k, mu)
    s = k * math.pi + math.acos((-1) ** k * mu)
    return s * s


def sigma_distance(lam: float) -> tuple[float, float]:
    """Nearest point of {(k pi)^2 : k >= 1} and the distance to it."""
    lam = float(lam)
    if lam <= math.pi**2:
        k = 1
    else:
        r = math.sqrt(lam) / math.pi
        lo = max(1, math.floor(r))
        k = min((lo, lo + 1), key=lambda j: abs((j * math.pi) ** 2 - lam))
    p = (k * math.pi) ** 2
    return p, abs(lam - p)


def check_pole(z):
    z = complex(z)
    if z.imag == 0.0:
        _, d = sigma_distance(z.real)
        if d <= _POLE_EPS * max(1.0, abs(z)):
            raise SigmaPole(z)
    elif abs(sinc(sqrt_branch(z))) <= _POLE_EPS:
        raise SigmaPole(z)


def weyl_matrix(g: Graph, p: np.ndarray, z) -> np.ndarray:
    """``M(z) = (m(z) - P) / n(z)``, equal to ``-(sqrt z / sin sqrt z)(cos sqrt z - P)``."""
    check_pole(z)
    sm = scalar_maps(z)
    return (sm.m * np.eye(g.n_vertices) - p) / sm.n
