"""Exact integrals over [0, 1] of products of edge modes.

A mode is written as a short list of terms ``c * t**k * exp(beta * t)``.
The integral of a product of two such sums is a finite sum of the moments
``M_k(beta) = int_0^1 t^k e^(beta t) dt``, which are evaluated in closed
form: upward recurrence while ``k < |beta|`` and the convergent
integration-by-parts series ``e^beta * sum_j (-beta)^j / ((k+1)...(k+j+1))``
otherwise.  Neither branch loses accuracy as ``beta -> 0``.

Modes of small frequency (``|w| <= 1``) are expanded as polynomials in t,
larger ones as exponentials, so the ``w -> 0`` limit needs no special case.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .weyl import sinc, sqrt_branch

SMALL_FREQ = 1.0
_POLY_TERMS = 13
_SERIES_MAX = 400


def moments(kmax: int, beta: complex) -> np.ndarray:
    """``[M_0(beta), ..., M_kmax(beta)]``."""
    beta = complex(beta)
    out = np.empty(kmax + 1, dtype=complex)
    ab = abs(beta)
    if ab == 0.0:
        return 1.0 / np.arange(1, kmax + 2)
    eb = np.exp(beta)
    k_up = -1
    if ab >= 1.0:
        k_up = min(kmax, math.ceil(ab) - 1)
        prev = (eb - 1.0) / beta
        out[0] = prev
        for k in range(1, k_up + 1):
            prev = (eb - k * prev) / beta
            out[k] = prev
    for k in range(k_up + 1, kmax + 1):
        term = 1.0 / (k + 1)
        total = term
        for j in range(1, _SERIES_MAX):
            term *= -beta / (k + j + 1)
            total += term
            if abs(term) <= 1e-17 * abs(total):
                break
        out[k] = eb * total
    return out


def _poly_modes(z, w):
    # S(t) = sin(w t)/w and C(t) = cos(w t) as power series in t
    s_terms, c_terms = [], []
    for j in range(_POLY_TERMS):
        s_terms.append(((-z) ** j / math.factorial(2 * j + 1), 2 * j + 1, 0j))
        c_terms.append(((-z) ** j / math.factorial(2 * j), 2 * j, 0j))
    s1 = sinc(w)
    phi = [(c / s1, k, b) for c, k, b in s_terms]
    # phi(1 - t) = cos(w t) - cos(w) * S(t) / S(1)
    phi_rev = c_terms + [(-np.cos(w) * c / s1, k, b) for c, k, b in s_terms]
    return phi_rev, phi


def _exp_modes(w):
    d = 2j * np.sin(w)
    ew, emw = np.exp(1j * w), np.exp(-1j * w)
    phi = [(1 / d, 0, 1j * w), (-1 / d, 0, -1j * w)]
    phi_rev = [(ew / d, 0, -1j * w), (-emw / d, 0, 1j * w)]
    return phi_rev, phi


@lru_cache(maxsize=4096)
def modes(z: complex):
    """Terms of ``(phi_w(1 - t), phi_w(t))`` with ``phi_w(t) = sin(w t) / sin(w)``."""
    z = complex(z)
    w = sqrt_branch(z)
    if abs(w) <= SMALL_FREQ:
        return _poly_modes(z, w)
    return _exp_modes(w)


def _conj(terms):
    return [(np.conj(c), k, np.conj(b)) for c, k, b in terms]


def integrate_product(f_terms, g_terms) -> complex:
    """``int_0^1 f(t) g(t) dt`` (no conjugation)."""
    by_beta = {}
    for cf, kf, bf in f_terms:
        for cg, kg, bg in g_terms:
            key = bf + bg
            by_beta.setdefault(key, []).append((cf * cg, kf + kg))
    total = 0j
    for beta, items in by_beta.items():
        kmax = max(k for _, k in items)
        mom = moments(kmax, beta)
        total += sum(c * mom[k] for c, k in items)
    return total


@lru_cache(maxsize=4096)
def basis_gram(z1: complex, z2: complex) -> np.ndarray:
    """2x2 matrix ``B[i, j] = int conj(psi_i^{z1}) psi_j^{z2}``.

    ``psi_0(t) = phi(1 - t)`` and ``psi_1(t) = phi(t)``.
    """
    left = [_conj(t) for t in modes(complex(z1))]
    right = modes(complex(z2))
    out = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[i, j] = integrate_product(left[i], right[j])
    out.flags.writeable = False
    return out
