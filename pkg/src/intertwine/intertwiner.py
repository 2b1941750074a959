"""The intertwining map between the Kirchhoff Laplacian and the transition operator.

For an interval ``[a, b]`` inside a band the map

    Phi([a, b]) xi = sum_i sqrt(n(lam_i) / m'(lam_i)) gamma(lam_i) E_P({mu_i}) xi

collapses to finitely many atoms ``lam_i = m^-1(mu_i)``, one per eigenvalue
``mu_i`` of P whose band preimage lies in the interval; on the network
``sqrt(n / m') = sqrt(2)``.  Riemann-Stieltjes sums have the same shape with
the atoms moved to the evaluation points, so both are stored as
:class:`IntertwinerMap`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discrete import (
    EigDecomp,
    opnorm,
    spectral_projector,
    transition_operator,
    weighted_adjoint,
    weighted_opnorm,
)
from .errors import AmbiguousBoundary, EndpointOnSpectrum, SingularWeyl
from .gamma import (
    EdgeWave,
    edgewave_inner,
    gamma_adjoint_apply,
    gamma_apply,
    vertex_residuals,
    weyl_identity_residual,
)
from .graph import Graph
from .report import VerificationReport
from .weyl import band, band_inverse, scalar_maps, sigma_distance, weyl_matrix

__all__ = [
    "Atom",
    "BandEigen",
    "IntertwinerMap",
    "band_eigensystem",
    "sigma_excluded",
    "phi_eigen_sum",
    "phi_riemann_sum",
    "anchored_partition",
    "map_distance",
    "stieltjes_table",
    "stieltjes_meshes",
    "stieltjes_report",
    "default_interval",
    "exhaustion",
    "verify_interval",
    "weyl_report",
    "krein_correction_apply",
    "weyl_inverse_norm",
    "gamma_norm",
    "VERIFY_TOL",
]

VERIFY_TOL = 1e-10
SINGULAR_LIMIT = 1e12


@dataclass(frozen=True)
class BandEigen:
    lam: float
    mu: float
    mult: int
    idx: np.ndarray  # eigenvector columns in the EigDecomp
    projector: np.ndarray


@dataclass(frozen=True, eq=False)
class Atom:
    """``coef * gamma(lam)`` acting on the eigenvector columns ``idx``."""

    lam: float
    idx: np.ndarray
    coef: float

    @property
    def mult(self) -> int:
        return len(self.idx)


@dataclass(frozen=True, eq=False)
class IntertwinerMap:
    graph: Graph
    eig: EigDecomp
    band: int
    interval: tuple[float, float]
    atoms: tuple[Atom, ...]

    @property
    def rank(self) -> int:
        return sum(a.mult for a in self.atoms)

    def frame(self, atom: Atom) -> np.ndarray:
        return self.eig.vectors[:, atom.idx]

    def projector(self, atom: Atom) -> np.ndarray:
        return self.eig.projector(atom.idx)

    def images(self, atom: Atom) -> list[EdgeWave]:
        """Image of the source frame of ``atom``: one edge wave per frame vector."""
        return [
            gamma_apply(self.graph, atom.lam, atom.coef * v) for v in self.frame(atom).T
        ]

    def apply(self, xi) -> list[EdgeWave]:
        """``Phi xi`` as one edge wave per atom (different frequencies do not mix)."""
        return [
            gamma_apply(self.graph, a.lam, a.coef * (self.projector(a) @ xi))
            for a in self.atoms
        ]

    def adjoint(self, waves) -> np.ndarray:
        """``Phi^* F`` for ``F`` given as a sum of edge waves."""
        out = np.zeros(self.graph.n_vertices, dtype=complex)
        for a in self.atoms:
            eta = sum(gamma_adjoint_apply(self.graph, a.lam, f) for f in waves)
            out += a.coef * (self.projector(a) @ eta)
        return out

    def sandwich(self, other: "IntertwinerMap" | None = None, multiplier=None) -> np.ndarray:
        """Matrix of ``Phi^* f(H) Other`` on the vertex space.

        ``f(H)`` acts on the image of each atom of ``other`` as the scalar
        ``multiplier(lam)`` (identity when omitted).
        """
        other = self if other is None else other
        n = self.graph.n_vertices
        out = np.zeros((n, n), dtype=complex)
        if not self.atoms or not other.atoms:
            return out
        for x in range(n):
            xi = np.zeros(n)
            xi[x] = 1.0
            waves = other.apply(xi)
            if multiplier is not None:
                waves = [multiplier(a.lam) * f for a, f in zip(other.atoms, waves)]
            out[:, x] = self.adjoint(waves)
        return out


def _m(lam):
    return scalar_maps(lam).m.real


def _m_image(interval):
    lo, hi = sorted((_m(interval[0]), _m(interval[1])))
    return lo, hi


def sigma_excluded(e: EigDecomp, k: int) -> list[tuple[float, int]]:
    """Eigenvalues of P whose band-k preimage falls on the forbidden set."""
    bad = (-1.0,) if k == 0 else (-1.0, 1.0)
    return [(mu, len(idx)) for mu, idx in e.clusters() if mu in bad]


def _check_interval(e, k, interval):
    a, b = (float(x) for x in interval)
    lower, upper = band(k).lower, band(k).upper
    if not (a <= b):
        raise EndpointOnSpectrum(b, "interval is reversed")
    margin = 10 * e.tol
    for end in (a, b):
        if not (lower <= end <= upper) or not math.isfinite(end):
            raise EndpointOnSpectrum(end, f"outside the closure of band {k}")
        if end > 0 and sigma_distance(end)[1] <= margin * max(1.0, end):
            raise EndpointOnSpectrum(end, "on the forbidden set")
        m_end = _m(end)
        for mu, _ in e.clusters():
            if abs(mu - m_end) <= margin:
                raise EndpointOnSpectrum(end, f"m(endpoint) hits eigenvalue {mu!r}")
    return a, b


def band_eigensystem(e: EigDecomp, k: int, interval) -> list[BandEigen]:
    """Band-k preimages of spec P inside ``interval``, ascending in lambda."""
    a, b = _check_interval(e, k, interval)
    excluded = {mu for mu, _ in sigma_excluded(e, k)}
    out = []
    for mu, idx in e.clusters():
        if mu in excluded:
            continue
        lam = band_inverse(k, mu)
        if a < lam < b:
            out.append(BandEigen(lam, mu, len(idx), idx, e.projector(idx)))
    out.sort(key=lambda x: x.lam)
    return out


def _coef(lam):
    sm = scalar_maps(lam)
    return math.sqrt((sm.n / sm.dm).real)


def phi_eigen_sum(g: Graph, e: EigDecomp, k: int, interval) -> IntertwinerMap:
    """``Phi([a, b])`` with one atom per eigenvalue preimage in the interval."""
    eigs = band_eigensystem(e, k, interval)
    atoms = tuple(Atom(x.lam, x.idx, _coef(x.lam)) for x in eigs)
    return IntertwinerMap(g, e, k, tuple(float(x) for x in interval), atoms)


def phi_riemann_sum(g: Graph, e: EigDecomp, k: int, interval, partition, points) -> IntertwinerMap:
    """Riemann-Stieltjes sum ``sum_j c(xi_j) gamma(xi_j) E_P(m(Delta_j))``.

    ``partition`` runs from a to b; ``points[j]`` lies in the closure of
    ``Delta_j = [partition[j], partition[j+1])``.
    """
    eigs = band_eigensystem(e, k, interval)
    part = np.asarray(partition, dtype=float)
    points = np.asarray(points, dtype=float)
    a, b = (float(x) for x in interval)
    if part.ndim != 1 or len(part) < 2 or np.any(np.diff(part) <= 0):
        raise ValueError("partition must be strictly increasing")
    if part[0] != a or part[-1] != b:
        raise ValueError("partition must start at a and end at b")
    if len(points) != len(part) - 1:
        raise ValueError("one evaluation point per partition cell is required")
    if np.any(points < part[:-1]) or np.any(points > part[1:]):
        raise ValueError("evaluation point outside its cell")
    margin = 10 * e.tol
    for x in eigs:
        for p in part:
            if abs(p - x.lam) <= margin * max(1.0, abs(x.lam)):
                raise AmbiguousBoundary(x.lam, float(p))
    atoms = []
    for j in range(len(points)):
        inside = [x for x in eigs if part[j] <= x.lam < part[j + 1]]
        if not inside:
            continue
        idx = np.concatenate([x.idx for x in inside])
        atoms.append(Atom(float(points[j]), idx, _coef(points[j])))
    return IntertwinerMap(g, e, k, (a, b), tuple(atoms))


def anchored_partition(interval, lams, h: float, theta: float = 1.0 / 3.0):
    """Partition of mesh <= h placing each ``lam`` at fraction ``theta`` of its cell.

    Returns ``(partition, left_points, anchor_points)``: evaluation at the
    left endpoints puts every atom at distance exactly ``theta * h`` from its
    evaluation point; ``anchor_points`` evaluates at the atoms themselves
    (or at left endpoints for cells without atoms).
    """
    a, b = (float(x) for x in interval)
    cells = []
    for lam in sorted(lams):
        lo, hi = lam - theta * h, lam + (1 - theta) * h
        if lo <= a or hi >= b or (cells and lo < cells[-1][1]):
            raise ValueError("mesh too coarse to isolate the atoms")
        cells.append((lo, hi))
    points = [a]
    anchors = []
    cursor = a
    for (lo, hi), lam in zip(cells, sorted(lams)):
        n = max(1, math.ceil((lo - cursor) / h - 1e-12))
        points.extend(np.linspace(cursor, lo, n + 1)[1:])
        anchors.extend([None] * n)
        points.append(hi)
        anchors.append(lam)
        cursor = hi
    n = max(1, math.ceil((b - cursor) / h - 1e-12))
    points.extend(np.linspace(cursor, b, n + 1)[1:])
    anchors.extend([None] * n)
    part = np.array(points)
    part[-1] = b
    left = part[:-1].copy()
    at = np.array([lft if lam is None else lam for lft, lam in zip(left, anchors)])
    return part, left, at


def map_distance(phi1: IntertwinerMap, phi2: IntertwinerMap) -> float:
    """Operator norm of ``Phi1 - Phi2`` from the weighted vertex space to L^2."""
    if phi1.eig is not phi2.eig:
        raise ValueError("maps must share the eigendecomposition")
    e = phi1.eig
    terms: dict[int, dict[float, float]] = {}
    for sign, phi in ((1.0, phi1), (-1.0, phi2)):
        for atom in phi.atoms:
            for l in atom.idx:
                bucket = terms.setdefault(int(l), {})
                bucket[atom.lam] = bucket.get(atom.lam, 0.0) + sign * atom.coef
    cols = sorted(terms)
    live = {l: [(c, lam) for lam, c in terms[l].items() if c != 0.0] for l in cols}
    cols = [l for l in cols if live[l]]
    if not cols:
        return 0.0
    g = phi1.graph
    waves = {
        l: [gamma_apply(g, lam, c * e.vectors[:, l]) for c, lam in live[l]] for l in cols
    }
    gram = np.empty((len(cols), len(cols)), dtype=complex)
    for i, l in enumerate(cols):
        for j, r in enumerate(cols):
            gram[i, j] = sum(edgewave_inner(f, h) for f in waves[l] for h in waves[r])
    gram = 0.5 * (gram + np.conj(gram).T)
    top = np.linalg.eigvalsh(gram)[-1]
    return float(math.sqrt(max(top, 0.0)))


def stieltjes_table(g: Graph, e: EigDecomp, k: int, interval, meshes, theta: float = 1.0 / 3.0):
    """Defect ``|Phi_Delta - Phi|`` over a sequence of meshes.

    Returns rows ``(h, defect, anchored_defect)`` where ``anchored_defect``
    evaluates at the atoms themselves and should vanish.
    """
    exact = phi_eigen_sum(g, e, k, interval)
    lams = [a.lam for a in exact.atoms]
    rows = []
    for h in meshes:
        part, left, at = anchored_partition(interval, lams, h, theta)
        rs = phi_riemann_sum(g, e, k, interval, part, left)
        rs_exact = phi_riemann_sum(g, e, k, interval, part, at)
        rows.append((float(h), map_distance(rs, exact), map_distance(rs_exact, exact)))
    return rows


def stieltjes_meshes(interval, lams, levels: int = 4) -> list[float]:
    """Halving meshes, the coarsest small enough to isolate every atom."""
    pts = [float(interval[0])] + sorted(lams) + [float(interval[1])]
    h0 = 0.5 * min(np.diff(pts))
    return [h0 / 2**j for j in range(levels)]


def stieltjes_report(g: Graph, e: EigDecomp, k: int, interval, levels: int = 4,
                     ratio_band=(0.3, 0.7), exact_tol: float = 1e-12):
    """Table of Riemann-Stieltjes defects plus pass/fail rows.

    Rows: worst distance of a halving ratio from the centre of
    ``ratio_band`` and the largest defect with evaluation at the atoms.
    """
    exact = phi_eigen_sum(g, e, k, interval)
    rep = VerificationReport()
    lo, hi = ratio_band
    if not exact.atoms:
        rep.add("stieltjes_ratio", "Phi_Delta -> Phi, defect ratio under halving", 0.0, 0.5 * (hi - lo))
        rep.add("stieltjes_exact", "Phi_Delta = Phi when points hit the atoms", 0.0, exact_tol)
        return [], [], rep
    meshes = stieltjes_meshes(exact.interval, [a.lam for a in exact.atoms], levels)
    rows = stieltjes_table(g, e, k, interval, meshes)
    ratios = [rows[i + 1][1] / rows[i][1] for i in range(len(rows) - 1)]
    mid = 0.5 * (lo + hi)
    rep.add("stieltjes_ratio", "Phi_Delta -> Phi, defect ratio under halving",
            max(abs(r - mid) for r in ratios), 0.5 * (hi - lo))
    rep.add("stieltjes_exact", "Phi_Delta = Phi when points hit the atoms",
            max(r[2] for r in rows), exact_tol)
    return rows, ratios, rep


def default_interval(k: int, margin: float = 0.5) -> tuple[float, float]:
    """Band ``k`` shrunk by ``margin`` at the forbidden points; band 0 starts at -1."""
    lower, upper = band(k).lower, band(k).upper
    lo = -1.0 if k == 0 else lower + margin
    return (lo, upper - margin)


def exhaustion(g: Graph, e: EigDecomp, k: int, eps_list) -> list[IntertwinerMap]:
    """Maps on ``[a0 + eps, b0 - eps]`` for the whole band (band 0 uses ``-1/eps``)."""
    lower, upper = band(k).lower, band(k).upper
    out = []
    for eps in eps_list:
        lo = -1.0 / eps if k == 0 else lower + eps
        out.append(phi_eigen_sum(g, e, k, (lo, upper - eps)))
    return out


def _random_split(rng, e, k, a, b, count):
    # random points in (a, b) whose m-images stay away from spec P
    margin = 1e3 * e.tol
    for _ in range(1000):
        pts = np.sort(rng.uniform(a, b, count))
        ok = True
        for p in pts:
            mp = _m(p)
            if any(abs(mu - mp) <= margin for mu, _ in e.clusters()):
                ok = False
        if ok and np.all(np.diff(pts) > 0):
            return [float(x) for x in pts]
    raise RuntimeError("could not find admissible split points")


def verify_interval(
    g: Graph,
    e: EigDecomp,
    k: int,
    interval,
    rng: np.random.Generator | None = None,
    parameter: np.ndarray | None = None,
    tol: float = VERIFY_TOL,
) -> VerificationReport:
    """Operator identities for ``Phi([a, b])``, each as a weighted operator-norm defect.

    ``parameter`` is the boundary operator T; it defaults to the transition
    operator of ``g`` and can be replaced to test fault detection.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    t_op = transition_operator(g) if parameter is None else np.asarray(parameter)
    phi = phi_eigen_sum(g, e, k, interval)
    a, b = phi.interval
    rep = VerificationReport()
    e_ab = spectral_projector(e, _m_image((a, b)))

    xx = phi.sandwich()
    rep.add("isometry", "Phi*Phi = E_T(m([a,b]))", weighted_opnorm(g, xx - e_ab), tol)

    resid = 0.0
    for atom in phi.atoms:
        for f in phi.images(atom):
            resid = max(resid, *vertex_residuals(g, f))
    rep.add("eigen_residual", "ran Phi in ker(H - lambda): continuity + Kirchhoff", resid, tol)

    rep.add("disjointness", "Phi([a,c])* Phi([c,d]) = 0 for disjoint interiors",
            _disjointness(phi, rng), tol)

    e_omega = spectral_projector(e, _m_image(_random_window(rng, phi)))
    rep.add("transport", "E_H(Omega) = Phi E_T(m(Omega)) Phi*, pulled back by Phi*",
            weighted_opnorm(g, xx @ e_omega @ xx - e_omega), tol)

    yy = phi.sandwich(multiplier=_m)
    rep.add("conjugation", "m(H_J) = U T_m(J) U*, as Phi* m(H) Phi = T E_T",
            weighted_opnorm(g, yy - t_op @ e_ab), tol)

    lam_t = np.zeros_like(e_ab)
    for atom in phi.atoms:
        lam_t = lam_t + band_inverse(k, e.eigenvalues[atom.idx[0]]) * phi.projector(atom)
    zz = phi.sandwich(multiplier=lambda lam: lam)
    rep.add("reconstruction", "H_J = U m^-1(T_m(J)) U*, as Phi* H Phi = m^-1(T) E_T",
            weighted_opnorm(g, zz - lam_t) / max(1.0, abs(b)), tol)

    frame = 0.0
    for atom in phi.atoms:
        imgs = phi.images(atom)
        gram = np.array([[edgewave_inner(f, h) for h in imgs] for f in imgs])
        frame = max(frame, opnorm(gram - np.eye(len(imgs))))
    rep.add("frame_gram", "sqrt(n/m') gamma(lambda) e_j orthonormal in ker(H - lambda)", frame, tol)

    rep.add("parameter_selfadjoint", "T = T* in l2(X0, m0)",
            weighted_opnorm(g, t_op - weighted_adjoint(g, t_op)), tol)
    return rep


def _disjointness(phi: IntertwinerMap, rng) -> float:
    a, b = phi.interval
    if b <= a:
        return 0.0
    g, e, k = phi.graph, phi.eig, phi.band
    c, d = _random_split(rng, e, k, a, b, 2)
    pieces = [(a, c), (c, d), (d, b)]
    maps = [phi_eigen_sum(g, e, k, p) for p in pieces]
    projs = [spectral_projector(e, _m_image(p)) for p in pieces]
    worst = 0.0
    for i, pi in enumerate(maps):
        for j, pj in enumerate(maps):
            if i == j:
                continue
            worst = max(worst, weighted_opnorm(g, pi.sandwich(pj)))
            # |Phi_i E_j| <= sum_t |c_t| |gamma(lam_t)| |Q_t E_j|
            bound = sum(
                atom.coef * gamma_norm(g, atom.lam)
                * weighted_opnorm(g, pi.projector(atom) @ projs[j])
                for atom in pi.atoms
            )
            worst = max(worst, bound)
    return worst


def _random_window(rng, phi: IntertwinerMap) -> tuple[float, float]:
    """Random admissible subinterval of ``phi.interval`` around a random atom."""
    a, b = phi.interval
    if not phi.atoms:
        return (a, b)
    lams = [a] + [x.lam for x in phi.atoms] + [b]
    i = int(rng.integers(1, len(lams) - 1))
    lo = rng.uniform(0.1, 0.9)
    hi = rng.uniform(0.1, 0.9)
    return (lams[i] - lo * (lams[i] - lams[i - 1]), lams[i] + hi * (lams[i + 1] - lams[i]))


def gamma_norm(g: Graph, lam) -> float:
    """Operator norm of ``gamma(lam)`` from the weighted vertex space to L^2."""
    n = g.n_vertices
    gram = np.empty((n, n), dtype=complex)
    for x in range(n):
        xi = np.zeros(n)
        xi[x] = 1.0
        gram[:, x] = gamma_adjoint_apply(g, lam, gamma_apply(g, lam, xi))
    return math.sqrt(weighted_opnorm(g, gram))


def weyl_report(g: Graph, p: np.ndarray, rng: np.random.Generator, pairs: int = 20,
                scale: float = 30.0, tol: float = VERIFY_TOL) -> VerificationReport:
    """Weyl identity at random complex pairs (one row with the worst residual)."""
    worst = 0.0
    for _ in range(pairs):
        z1 = complex(rng.uniform(-scale, 3 * scale), rng.uniform(-scale, scale))
        z2 = complex(rng.uniform(-scale, 3 * scale), rng.uniform(-scale, scale))
        worst = max(worst, weyl_identity_residual(g, p, z1, z2))
    rep = VerificationReport()
    rep.add("weyl_identity", "M(z1) - M(conj z2) = (z1 - conj z2) gamma(z2)* gamma(z1)", worst, tol)
    return rep


def weyl_inverse_norm(g: Graph, p: np.ndarray, z) -> float:
    mz = weyl_matrix(g, p, z)
    try:
        inv = np.linalg.inv(mz)
    except np.linalg.LinAlgError:
        return math.inf
    return weighted_opnorm(g, inv)


def krein_correction_apply(g: Graph, e: EigDecomp | None, z, f: EdgeWave) -> EdgeWave:
    """``-gamma(z) M(z)^-1 gamma(conj z)^* f``: the resolvent difference applied to ``f``."""
    p = transition_operator(g)
    mz = weyl_matrix(g, p, z)
    inv_norm = weyl_inverse_norm(g, p, z)
    if inv_norm > SINGULAR_LIMIT:
        raise SingularWeyl(complex(z), inv_norm)
    eta = gamma_adjoint_apply(g, np.conj(complex(z)), f)
    zeta = np.linalg.solve(mz, eta)
    return -1.0 * gamma_apply(g, z, zeta)
