"""Edge waves, the gamma-field and its adjoint.

An :class:`EdgeWave` is a function on the metric graph which on every
canonical edge (u, v) reads ``F(t) = a * phi(1 - t) + b * phi(t)`` with
``phi(t) = sin(w t) / sin(w)`` and ``w = sqrt(z)``; at ``z = 0`` the mode
degenerates to ``phi(t) = t``.  ``a`` and ``b`` are the boundary traces at
the two endpoints.  Such a function solves ``-F'' = z F`` on each edge.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import _integrals
from .discrete import weighted_opnorm
from .errors import GraphMismatch
from .graph import Graph
from .weyl import check_pole, scalar_maps, sinc, sqrt_branch, weyl_matrix

__all__ = [
    "EdgeWave",
    "gamma_apply",
    "gamma_adjoint_apply",
    "edgewave_inner",
    "vertex_residuals",
    "weyl_identity_residual",
    "weyl_derivative",
    "gram_matrix",
    "sample_rows",
    "write_samples_csv",
]


def _phi(w, t):
    t = np.asarray(t, dtype=float)
    return t * np.vectorize(lambda s: sinc(w * s), otypes=[complex])(t) / sinc(w)


@dataclass(frozen=True, eq=False)
class EdgeWave:
    graph: Graph
    z: complex
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=complex))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=complex))
        if self.a.shape != (self.graph.n_edges,) or self.b.shape != (self.graph.n_edges,):
            raise GraphMismatch("one (a, b) coefficient pair per edge is required")

    @property
    def w(self) -> complex:
        return sqrt_branch(self.z)

    def __mul__(self, c):
        return EdgeWave(self.graph, self.z, c * self.a, c * self.b)

    __rmul__ = __mul__

    def __add__(self, other):
        if other.graph is not self.graph or other.z != self.z:
            raise GraphMismatch("can only add edge waves on the same graph and frequency")
        return EdgeWave(self.graph, self.z, self.a + other.a, self.b + other.b)

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def values(self, t) -> np.ndarray:
        """Samples on every canonical edge, shape ``(n_edges, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        w = self.w
        return np.outer(self.a, _phi(w, 1.0 - t)) + np.outer(self.b, _phi(w, t))

    def at(self, u: int, v: int, t: float) -> complex:
        """Value at the point at distance t from vertex u on edge {u, v}."""
        k, s = self.graph.edge_point(u, v, t)
        w = self.w
        return complex(self.a[k] * _phi(w, 1.0 - s) + self.b[k] * _phi(w, s))

    def outgoing_derivatives(self) -> tuple[np.ndarray, np.ndarray]:
        """Derivatives along each edge pointing away from its first / second endpoint."""
        w = self.w
        d0 = 1.0 / sinc(w)  # phi'(0)
        d1 = np.cos(w) / sinc(w)  # phi'(1)
        at_u = -self.a * d1 + self.b * d0
        at_v = self.a * d0 - self.b * d1
        return at_u, at_v

    def conj_z_wave(self):
        """Complex conjugate function (frequency conj(z))."""
        return EdgeWave(self.graph, np.conj(self.z), np.conj(self.a), np.conj(self.b))


def gamma_apply(g: Graph, z, xi) -> EdgeWave:
    """``gamma(z) xi``: the solution of ``-F'' = z F`` with vertex traces ``xi``."""
    check_pole(z)
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (g.n_vertices,):
        raise GraphMismatch("vertex vector has the wrong length")
    e = np.array(g.edges, dtype=int).reshape(-1, 2)
    return EdgeWave(g, z, xi[e[:, 0]], xi[e[:, 1]])


def edgewave_inner(f: EdgeWave, h: EdgeWave) -> complex:
    """``sum over edges of int_0^1 conj(f) h dt``, in closed form."""
    if f.graph is not h.graph:
        raise GraphMismatch("edge waves live on different graphs")
    bg = _integrals.basis_gram(f.z, h.z)
    left = np.stack([np.conj(f.a), np.conj(f.b)])
    right = np.stack([h.a, h.b])
    return complex(np.einsum("ie,ij,je->", left, bg, right))


def gamma_adjoint_apply(g: Graph, z, f: EdgeWave) -> np.ndarray:
    """``gamma(z)^* f`` in the weighted vertex space.

    ``eta(x) = (1/m0(x)) sum_{y~x} int_0^1 conj(phi_w(1 - s)) f(xy, s) ds``,
    so that ``<xi, eta>_w = <gamma(z) xi, f>`` for every ``xi``.
    """
    if f.graph is not g:
        raise GraphMismatch("edge wave lives on a different graph")
    check_pole(z)
    bg = _integrals.basis_gram(complex(z), f.z)
    from_u = bg[0, 0] * f.a + bg[0, 1] * f.b
    from_v = bg[1, 0] * f.a + bg[1, 1] * f.b
    eta = np.zeros(g.n_vertices, dtype=complex)
    e = np.array(g.edges, dtype=int).reshape(-1, 2)
    np.add.at(eta, e[:, 0], from_u)
    np.add.at(eta, e[:, 1], from_v)
    return eta / g.degree


def vertex_residuals(g: Graph, f: EdgeWave) -> tuple[float, float]:
    """Continuity and Kirchhoff defects of ``f`` at the vertices.

    Continuity: largest spread of the boundary values meeting at a vertex.
    Kirchhoff: largest ``|sum_{y~x} F'(xy, 0+)|``.
    """
    n = g.n_vertices
    spread = np.zeros(n)
    traces = [[] for _ in range(n)]
    kirch = np.zeros(n, dtype=complex)
    du, dv = f.outgoing_derivatives()
    for k, (u, v) in enumerate(g.edges):
        traces[u].append(f.a[k])
        traces[v].append(f.b[k])
        kirch[u] += du[k]
        kirch[v] += dv[k]
    for x in range(n):
        vals = np.array(traces[x])
        spread[x] = np.abs(vals[:, None] - vals[None, :]).max()
    return float(spread.max()), float(np.abs(kirch).max())


def gram_matrix(waves_left, waves_right) -> np.ndarray:
    return np.array([[edgewave_inner(f, h) for h in waves_right] for f in waves_left])


def weyl_derivative(g: Graph, p: np.ndarray, lam: float) -> np.ndarray:
    """``M'(lam) = (m'/n) I - (n'/n^2)(m - P)``."""
    sm = scalar_maps(lam)
    eye = np.eye(g.n_vertices)
    return (sm.dm / sm.n) * eye - (sm.dn / sm.n**2) * (sm.m * eye - p)


def weyl_identity_residual(g: Graph, p: np.ndarray, z1, z2) -> float:
    """Weighted norm of ``M(z1) - M(conj z2) - (z1 - conj z2) gamma(z2)^* gamma(z1)``.

    The Gram side uses only the closed-form edge integrals, the Weyl side
    only the matrix formula.
    """
    z1, z2 = complex(z1), complex(z2)
    n = g.n_vertices
    gram = np.empty((n, n), dtype=complex)
    for x in range(n):
        e = np.zeros(n)
        e[x] = 1.0
        gram[:, x] = gamma_adjoint_apply(g, z2, gamma_apply(g, z1, e))
    lhs = weyl_matrix(g, p, z1) - weyl_matrix(g, p, np.conj(z2))
    return weighted_opnorm(g, lhs - (z1 - np.conj(z2)) * gram)


def sample_rows(f: EdgeWave, samples: int = 101):
    """Rows ``(edge_u, edge_v, t, re, im)`` on a uniform t grid."""
    t = np.linspace(0.0, 1.0, int(samples))
    vals = f.values(t)
    g = f.graph
    for k, (u, v) in enumerate(g.edges):
        for tj, val in zip(t, vals[k]):
            yield g.vertices[u], g.vertices[v], float(tj), float(val.real), float(val.imag)


def write_samples_csv(waves, samples: int = 101, stream=None) -> str:
    """CSV export (``edge_u, edge_v, t, re, im``) for one wave or a labelled list."""
    buf = stream if stream is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(waves, EdgeWave):
        writer.writerow(["edge_u", "edge_v", "t", "re", "im"])
        writer.writerows(sample_rows(waves, samples))
    else:
        writer.writerow(["label", "edge_u", "edge_v", "t", "re", "im"])
        for label, wave in waves:
            for row in sample_rows(wave, samples):
                writer.writerow([label, *row])
    return buf.getvalue() if stream is None else ""
