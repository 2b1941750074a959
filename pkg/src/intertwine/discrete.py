"""The degree-weighted vertex space and the transition operator.

Vectors on vertices are plain numpy arrays indexed like ``Graph.vertices``.
The inner product is always the weighted one,
``<f, g> = sum_x m0(x) conj(f(x)) g(x)``, and operators are square
matrices acting on such arrays.  Adjoints and norms below are taken in
that inner product; nothing here uses the bare dot product as an inner
product.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AmbiguousBoundary, ConvergenceFailure
from .graph import Graph

DEFAULT_TOL = 1e-12

__all__ = [
    "DEFAULT_TOL",
    "EigDecomp",
    "transition_operator",
    "sym_eigendecomposition",
    "spectral_projector",
    "weighted_inner",
    "weighted_norm",
    "weighted_adjoint",
    "weighted_opnorm",
    "weighted_basis",
    "normalize_region",
]


def weighted_inner(g: Graph, f, h) -> complex:
    return complex(np.sum(g.degree * np.conj(f) * h))


def weighted_norm(g: Graph, f) -> float:
    return float(np.sqrt(np.sum(g.degree * np.abs(f) ** 2)))


def weighted_adjoint(g: Graph, a: np.ndarray) -> np.ndarray:
    """Adjoint of a vertex operator: ``D^-1 A^H D``."""
    d = g.degree
    return (np.conj(a).T * d[None, :]) / d[:, None]


def weighted_opnorm(g: Graph, a: np.ndarray) -> float:
    """Operator norm in the weighted space.

    Largest singular value of ``D^1/2 A D^-1/2``, taken from the symmetric
    eigensolver applied to its Gram matrix.
    """
    s = np.sqrt(g.degree)
    b = s[:, None] * a / s[None, :]
    return opnorm(b)


def opnorm(b: np.ndarray) -> float:
    if b.size == 0:
        return 0.0
    gram = np.conj(b).T @ b
    top = scipy.linalg.eigvalsh(gram)[-1]
    return float(np.sqrt(max(top, 0.0)))


def weighted_basis(g: Graph) -> np.ndarray:
    """Columns ``e_x / sqrt(m0(x))``: an orthonormal basis of the weighted space."""
    return np.diag(1.0 / np.sqrt(g.degree))


def transition_operator(g: Graph) -> np.ndarray:
    """``(P f)(x) = (1 / m0(x)) * sum_{y ~ x} f(y)``."""
    return g.adjacency / g.degree[:, None]


@dataclass(frozen=True, eq=False)
class EigDecomp:
    """Eigenpairs of P, ascending, with weighted-orthonormal eigenvectors (columns)."""

    graph: Graph
    eigenvalues: np.ndarray
    vectors: np.ndarray
    tol: float

    def __len__(self):
        return len(self.eigenvalues)

    def clusters(self) -> list[tuple[float, np.ndarray]]:
        """Distinct eigenvalues with the column indices of their eigenvectors."""
        out = []
        start = 0
        mu = self.eigenvalues
        for i in range(1, len(mu) + 1):
            if i == len(mu) or mu[i] - mu[i - 1] > 10 * self.tol:
                idx = np.arange(start, i)
                out.append((float(np.mean(mu[idx])), idx))
                start = i
        return out

    def projector(self, idx) -> np.ndarray:
        v = self.vectors[:, idx]
        return (v @ np.conj(v).T) * self.graph.degree[None, :]


def sym_eigendecomposition(p: np.ndarray, g: Graph, tol: float = DEFAULT_TOL) -> EigDecomp:
    """Full eigendecomposition of the transition operator ``p`` of ``g``.

    The symmetric problem ``D^1/2 P D^-1/2`` is solved and eigenvectors are
    mapped back with ``D^-1/2``.  Degenerate clusters (eigenvalues within
    ``10 * tol``) get a canonical basis and share the cluster mean as
    eigenvalue.  Eigenvalues within ``10 * tol`` of +-1 are snapped to +-1.
    """
    s = np.sqrt(g.degree)
    a = s[:, None] * p / s[None, :]
    a = 0.5 * (a + a.T)
    w, u = scipy.linalg.eigh(a)
    n = len(w)

    values = np.empty(n)
    vecs = np.empty((n, n))
    start = 0
    for i in range(1, n + 1):
        if i < n and w[i] - w[i - 1] <= 10 * tol:
            continue
        block = u[:, start:i]
        mu = float(np.mean(w[start:i]))
        if i - start > 1:
            block = _canonical_basis(block)
        for j in range(block.shape[1]):
            block[:, j] = _sign_normalize(block[:, j])
        order = sorted(range(block.shape[1]), key=lambda j: tuple(block[:, j]))
        block = block[:, order]
        if abs(mu - 1.0) <= 10 * tol:
            mu = 1.0
        elif abs(mu + 1.0) <= 10 * tol:
            mu = -1.0
        values[start:i] = mu
        vecs[:, start:i] = block
        start = i

    vectors = vecs / s[:, None]
    resid = _max_residual(g, p, values, vectors)
    ortho = np.abs((vectors.T * g.degree[None, :]) @ vectors - np.eye(n)).max()
    achieved = max(resid, ortho)
    # tolerance is relative to |A| = 1; allow the unavoidable sqrt(N) rounding growth
    if achieved > tol * max(1.0, np.sqrt(n)):
        raise ConvergenceFailure(tol, achieved)
    return EigDecomp(g, values, vectors, tol)


def _canonical_basis(block):
    # orthonormal basis of the cluster's eigenspace that does not depend on
    # the solver's arbitrary rotation inside the cluster
    proj = block @ block.T
    q, _, _ = scipy.linalg.qr(proj, pivoting=True)
    return q[:, : block.shape[1]].copy()


def _sign_normalize(v):
    big = np.flatnonzero(np.abs(v) > 1e-9 * np.abs(v).max())
    if big.size and v[big[0]] < 0:
        return -v
    return v


def _max_residual(g, p, values, vectors):
    r = p @ vectors - vectors * values[None, :]
    return float(np.sqrt((g.degree[:, None] * np.abs(r) ** 2).sum(axis=0)).max())


def normalize_region(omega) -> list[tuple[float, float]]:
    """Accept ``(lo, hi)`` or an iterable of such pairs; return sorted closed intervals."""
    omega = list(omega)
    if len(omega) == 2 and all(np.isscalar(x) for x in omega):
        omega = [tuple(omega)]
    out = []
    for lo, hi in omega:
        lo, hi = float(lo), float(hi)
        if hi < lo:
            raise ValueError(f"malformed interval ({lo}, {hi})")
        out.append((lo, hi))
    return sorted(out)


def spectral_projector(e: EigDecomp, omega) -> np.ndarray:
    """``E_T(omega)`` for a finite union of closed intervals ``omega``."""
    intervals = normalize_region(omega)
    margin = 10 * e.tol
    keep = []
    for mu, idx in e.clusters():
        for lo, hi in intervals:
            for end in (lo, hi):
                if abs(mu - end) <= margin:
                    raise AmbiguousBoundary(mu, end)
        if any(lo < mu < hi for lo, hi in intervals):
            keep.extend(idx)
    n = len(e)
    if not keep:
        return np.zeros((n, n))
    return e.projector(np.array(keep))
