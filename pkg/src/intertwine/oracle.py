"""Finite-element oracle for the Kirchhoff Laplacian and the half-line dot array.

P1 elements on a uniform mesh of every unit edge.  Vertex unknowns are
shared by all incident edges, so continuity is built in and the Kirchhoff
condition comes out as the natural boundary condition.  This module only
*samples* analytic edge waves; it never uses the closed-form integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discrete import EigDecomp
from .errors import InvalidSize, MultiplicityMismatch, NearSingular
from .gamma import EdgeWave
from .graph import Graph
from .weyl import sigma_distance

__all__ = [
    "FemSystem",
    "assemble_fem",
    "oracle_spectrum",
    "oracle_eigenpairs",
    "sample_on_nodes",
    "oracle_compare",
    "convergence_table",
    "oracle_resolvent_apply",
    "krein_check",
    "dot_oracle_spectrum",
    "SIGMA_WINDOW",
    "EIG_TOL_CONSTANT",
]

SIGMA_WINDOW = 0.5
# eigenvalue match window |lam_h - lam| <= C h^2 lam^2; P1 with consistent mass
# has error ~ h^2 lam^2 / 12 on the Neumann interval, so C = 1 leaves room.
EIG_TOL_CONSTANT = 1.0
_NEAR = 1e-3


@dataclass(frozen=True, eq=False)
class FemSystem:
    graph: Graph
    nodes: int
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix

    @property
    def h(self) -> float:
        return 1.0 / self.nodes

    @property
    def size(self) -> int:
        return self.stiffness.shape[0]

    def interior_index(self, edge: int, j: int) -> int:
        """Unknown of interior node ``j`` (1 .. nodes-1) on canonical edge ``edge``."""
        return self.graph.n_vertices + edge * (self.nodes - 1) + (j - 1)

    def edge_nodes(self, edge: int) -> np.ndarray:
        """Unknowns along an edge from t=0 to t=1, endpoints included."""
        u, v = self.graph.edges[edge]
        inner = self.graph.n_vertices + edge * (self.nodes - 1) + np.arange(self.nodes - 1)
        return np.concatenate([[u], inner, [v]])


def assemble_fem(g: Graph, nodes: int) -> FemSystem:
    """Stiffness and mass matrices with ``nodes`` elements per edge."""
    nodes = int(nodes)
    if nodes < 8:
        raise InvalidSize(f"need at least 8 elements per edge, got {nodes}")
    h = 1.0 / nodes
    ke = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
    me = np.array([[2.0, 1.0], [1.0, 2.0]]) * h / 6.0
    n = g.n_vertices + g.n_edges * (nodes - 1)
    rows, cols, kv, mv = [], [], [], []
    sys_stub = FemSystem(g, nodes, None, None)
    for k in range(g.n_edges):
        idx = sys_stub.edge_nodes(k)
        for el in range(nodes):
            pair = idx[el : el + 2]
            for i in range(2):
                for j in range(2):
                    rows.append(pair[i])
                    cols.append(pair[j])
                    kv.append(ke[i, j])
                    mv.append(me[i, j])
    kmat = sp.csr_matrix((kv, (rows, cols)), shape=(n, n))
    mmat = sp.csr_matrix((mv, (rows, cols)), shape=(n, n))
    return FemSystem(g, nodes, kmat, mmat)


def _reduce(kmat, mmat):
    # K x = lam M x  ->  (L^-1 K L^-T) y = lam y with M = L L^T
    chol = scipy.linalg.cholesky(mmat, lower=True)
    tmp = scipy.linalg.solve_triangular(chol, kmat, lower=True)
    a = scipy.linalg.solve_triangular(chol, tmp.T, lower=True).T
    return 0.5 * (a + a.T), chol


def oracle_eigenpairs(fem: FemSystem, lam_max: float):
    """Generalized eigenpairs below ``lam_max``; eigenvectors are M-orthonormal."""
    a, chol = _reduce(fem.stiffness.toarray(), fem.mass.toarray())
    w, y = scipy.linalg.eigh(a, subset_by_value=(-np.inf, lam_max))
    x = scipy.linalg.solve_triangular(chol, y, lower=True, trans="T")
    return w, x


def oracle_spectrum(g: Graph, nodes: int, lam_max: float) -> np.ndarray:
    w, _ = oracle_eigenpairs(assemble_fem(g, nodes), lam_max)
    return w


def sample_on_nodes(fem: FemSystem, f: EdgeWave) -> np.ndarray:
    """Point values of an edge wave at every unknown of the mesh."""
    g = fem.graph
    t = np.linspace(0.0, 1.0, fem.nodes + 1)
    vals = f.values(t)
    out = np.zeros(fem.size, dtype=complex)
    for k in range(g.n_edges):
        out[fem.edge_nodes(k)] = vals[k]
    # vertex values: the first incident edge wins (continuous waves agree anyway)
    for x in range(g.n_vertices):
        k, end = g.incident[x][0]
        out[x] = vals[k][0] if end == 0 else vals[k][-1]
    return out


def _match_window(lam, h):
    return EIG_TOL_CONSTANT * h * h * lam * lam + 1e-9


def _sin_angle(mass, x1, x2) -> float:
    """Largest principal-angle sine between column spans, in the M inner product."""
    def orth(x):
        gram = np.conj(x).T @ (mass @ x)
        w, v = np.linalg.eigh(0.5 * (gram + np.conj(gram).T))
        return x @ (v / np.sqrt(w))

    q1, q2 = orth(x1), orth(x2)
    resid = q1 - q2 @ (np.conj(q2).T @ (mass @ q1))
    gram = np.conj(resid).T @ (mass @ resid)
    top = np.linalg.eigvalsh(0.5 * (gram + np.conj(gram).T))[-1]
    return float(math.sqrt(max(top, 0.0)))


def oracle_compare(g: Graph, e: EigDecomp, k: int, interval, nodes: int = 200) -> dict:
    """Compare band eigenvalues and intertwiner images with the FEM eigensystem.

    Oracle eigenvalues within ``SIGMA_WINDOW`` of the forbidden set are
    ignored.  Raises :class:`MultiplicityMismatch` when the counts differ.
    """
    from .intertwiner import phi_eigen_sum

    phi = phi_eigen_sum(g, e, k, interval)
    a, b = phi.interval
    fem = assemble_fem(g, nodes)
    h = fem.h
    w, x = oracle_eigenpairs(fem, b + 1.0)
    keep = [
        i for i in range(len(w))
        if a <= w[i] <= b and (w[i] <= 0 or sigma_distance(w[i])[1] > SIGMA_WINDOW)
    ]
    used = set()
    eig_rows, angle_rows = [], []
    mass = fem.mass
    for atom in phi.atoms:
        lam = atom.lam
        win = _match_window(lam, h)
        hits = [i for i in keep if abs(w[i] - lam) <= win]
        if len(hits) != atom.mult:
            raise MultiplicityMismatch(
                f"lambda={lam:.10g}: analytic multiplicity {atom.mult}, oracle found {len(hits)}"
            )
        used.update(hits)
        for i in hits:
            err = abs(w[i] - lam)
            eig_rows.append({
                "lambda": lam,
                "fem": float(w[i]),
                "abs_err": float(err),
                "rel_err": float(err / lam) if lam > 0 else float(err),
            })
        sampled = np.column_stack([sample_on_nodes(fem, f) for f in phi.images(atom)])
        angle_rows.append({
            "lambda": lam,
            "mult": atom.mult,
            "sin_angle": _sin_angle(mass, sampled, x[:, hits]),
        })
    extra = [float(w[i]) for i in keep if i not in used]
    if extra:
        raise MultiplicityMismatch(f"oracle eigenvalues without analytic partner: {extra}")
    return {
        "nodes": nodes,
        "h": h,
        "eigenvalues": eig_rows,
        "angles": angle_rows,
        "max_rel_err": max((r["rel_err"] for r in eig_rows), default=0.0),
        "max_sin_angle": max((r["sin_angle"] for r in angle_rows), default=0.0),
    }


def convergence_table(g: Graph, e: EigDecomp, k: int, interval, nodes_list=(50, 100, 200)):
    """Max eigenvalue error (over lambda > 0) per mesh and successive error ratios."""
    errs = []
    for nodes in nodes_list:
        cmp = oracle_compare(g, e, k, interval, nodes)
        positive = [r["abs_err"] for r in cmp["eigenvalues"] if r["lambda"] > 0]
        errs.append(max(positive, default=0.0))
    ratios = [
        errs[i] / errs[i + 1] if errs[i + 1] > 0 else math.inf for i in range(len(errs) - 1)
    ]
    return {"nodes": list(nodes_list), "max_abs_err": errs, "ratios": ratios}


def _check_distance(kmat, mmat, z):
    z = complex(z)
    if abs(z.imag) > _NEAR or z.real < -_NEAR:
        return
    vals = spla.eigsh(kmat.tocsc(), k=1, M=mmat.tocsc(), sigma=z.real, which="LM",
                      return_eigenvectors=False)
    if abs(vals[0] - z) <= _NEAR:
        raise NearSingular(f"z={z} is within {_NEAR} of the oracle eigenvalue {vals[0]:.6g}")


def oracle_resolvent_apply(g: Graph, nodes: int, z, rhs: EdgeWave | None):
    """Oracle ``(H - z)^-1 f`` and ``(H0 - z)^-1 f`` on the mesh.

    ``H0`` pins all vertex values to zero (decoupled Dirichlet edges).
    Returns ``(fem, u, u0)``.
    """
    fem = assemble_fem(g, nodes)
    kmat, mmat = fem.stiffness, fem.mass
    nv = g.n_vertices
    f = np.zeros(fem.size, dtype=complex) if rhs is None else sample_on_nodes(fem, rhs)
    load = mmat @ f
    _check_distance(kmat, mmat, z)
    interior = slice(nv, fem.size)
    _check_distance(kmat[interior, interior], mmat[interior, interior], z)
    u = spla.spsolve((kmat - complex(z) * mmat).tocsc(), load)
    u0 = np.zeros(fem.size, dtype=complex)
    a0 = (kmat[interior, interior] - complex(z) * mmat[interior, interior]).tocsc()
    u0[interior] = spla.spsolve(a0, load[interior])
    return fem, u, u0


def krein_check(g: Graph, e: EigDecomp | None, z, rhs: EdgeWave, nodes: int = 200) -> dict:
    """Relative M-norm error between the oracle resolvent difference and the
    analytic correction ``-gamma(z) M(z)^-1 gamma(conj z)^* f``."""
    from .intertwiner import krein_correction_apply

    fem, u, u0 = oracle_resolvent_apply(g, nodes, z, rhs)
    diff = u - u0
    corr = sample_on_nodes(fem, krein_correction_apply(g, e, z, rhs))
    mass = fem.mass

    def mnorm(v):
        return float(math.sqrt(abs(np.vdot(v, mass @ v))))

    denom = mnorm(corr)
    err = mnorm(diff - corr)
    return {
        "z": [float(complex(z).real), float(complex(z).imag)],
        "nodes": nodes,
        "abs_err": err,
        "norm": denom,
        "rel_err": err / denom if denom > 0 else err,
    }


def dot_oracle_spectrum(t_matrix, length: float = 10.0, nodes_per_unit: int = 50) -> np.ndarray:
    """Negative eigenvalues of N half-lines truncated at ``length`` (Dirichlet there),
    coupled at 0 through ``f'(0) = T f(0)``.

    Bilinear form ``sum_a int u_a' v_a' + v(0)^T T u(0)``, P1 elements.
    """
    t_matrix = np.atleast_2d(np.asarray(t_matrix, dtype=float))
    n_sites = t_matrix.shape[0]
    n_el = int(round(length * nodes_per_unit))
    if n_el < 8:
        raise InvalidSize("mesh too coarse")
    h = length / n_el
    per = n_el  # nodes 0 .. n_el-1 per site; node n_el is the Dirichlet end
    size = n_sites * per
    main_k = np.full(per, 2.0 / h)
    main_k[0] = 1.0 / h
    main_m = np.full(per, 4.0 * h / 6.0)
    main_m[0] = 2.0 * h / 6.0
    off_k = np.full(per - 1, -1.0 / h)
    off_m = np.full(per - 1, h / 6.0)
    k1 = sp.diags([off_k, main_k, off_k], [-1, 0, 1])
    m1 = sp.diags([off_m, main_m, off_m], [-1, 0, 1])
    eye = sp.identity(n_sites)
    kmat = sp.kron(eye, k1, format="lil")
    mmat = sp.kron(eye, m1, format="csc")
    for i in range(n_sites):
        for j in range(n_sites):
            if t_matrix[i, j] != 0.0:
                kmat[i * per, j * per] += t_matrix[i, j]
    kmat = kmat.tocsc()
    bound = float(np.abs(np.linalg.eigvalsh(t_matrix)).max()) if n_sites else 0.0
    sigma = -(bound**2) - 1.0
    count = min(n_sites + 1, size - 2)
    try:
        vals = spla.eigsh(kmat, k=count, M=mmat, sigma=sigma, which="LM",
                          return_eigenvectors=False)
    except (RuntimeError, spla.ArpackError) as exc:
        raise NearSingular(str(exc)) from None
    vals = np.sort(vals.real)
    return vals[vals < 0]
