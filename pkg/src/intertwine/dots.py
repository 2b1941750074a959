"""Arrays of identical half-line dots coupled at the origin.

Each site carries a copy of ``-d^2/dx^2`` on ``(0, inf)`` with boundary
maps ``f(0)`` and ``f'(0)``.  For a real symmetric coupling ``T`` the
operator ``H_T`` is fixed by ``f'(0) = T f(0)``.  The Weyl function of one
dot is ``m(z) = i sqrt(z)``, which equals ``-sqrt(-lam)`` on the gap
``(-inf, 0)``, so bound states sit at ``lam = -mu^2`` for every negative
eigenvalue ``mu`` of ``T``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSize, ParseError
from .report import VerificationReport

__all__ = [
    "DotArrayModel",
    "DotAtom",
    "DotIntertwiner",
    "load_dot_model",
    "dot_spectrum",
    "dot_intertwiner",
    "dot_verify",
    "write_bound_states_csv",
]

DOT_TOL = 1e-10
ISOMETRY_TOL = 1e-12
ORACLE_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class DotArrayModel:
    t: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise InvalidSize(f"coupling must be a non-empty square matrix, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ParseError("coupling matrix has non-finite entries")
        if np.any(t != t.T):
            raise ParseError("coupling matrix is not symmetric")
        t.flags.writeable = False
        object.__setattr__(self, "t", t)

    @property
    def sites(self) -> int:
        return self.t.shape[0]

    @staticmethod
    def m(lam: float) -> float:
        """Dot Weyl function on the gap."""
        return -math.sqrt(-lam)

    @staticmethod
    def dm(lam: float) -> float:
        return 0.5 / math.sqrt(-lam)


def load_dot_model(text: str | bytes) -> DotArrayModel:
    """Parse ``{"T": [[...], ...]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or set(data) != {"T"}:
        raise ParseError('model must be an object with the single key "T"')
    rows = data["T"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError('"T" must be a list of rows')
    if any(len(r) != len(rows) for r in rows):
        raise InvalidSize("coupling matrix must be square")
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("coupling entries must be numbers") from None
    return DotArrayModel(arr)


def _clusters(model: DotArrayModel):
    vals, vecs = np.linalg.eigh(model.t)
    # deterministic signs: first non-negligible entry of each column positive
    for j in range(vecs.shape[1]):
        lead = vecs[np.argmax(np.abs(vecs[:, j]) > 1e-8), j]
        if lead < 0:
            vecs[:, j] = -vecs[:, j]
    scale = max(1.0, float(np.abs(vals).max()))
    tol = 1e-12 * scale
    groups, start = [], 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > tol:
            groups.append((float(vals[start:i].mean()), vecs[:, start:i]))
            start = i
    return groups


def dot_spectrum(model: DotArrayModel) -> list[tuple[float, int]]:
    """Bound states ``(lam, multiplicity)`` in the gap, ascending."""
    return [(-mu * mu, v.shape[1]) for mu, v in _clusters(model) if mu < 0]


@dataclass(frozen=True, eq=False)
class DotAtom:
    lam: float
    frame: np.ndarray  # orthonormal T-eigenvectors, one column per state

    @property
    def kappa(self) -> float:
        return math.sqrt(-self.lam)

    @property
    def mult(self) -> int:
        return self.frame.shape[1]

    @property
    def coefficients(self) -> np.ndarray:
        """Per-site amplitudes of ``c * exp(-kappa x)``; column j is state j."""
        return math.sqrt(2.0 * self.kappa) * self.frame


@dataclass(frozen=True, eq=False)
class DotIntertwiner:
    model: DotArrayModel
    atoms: tuple[DotAtom, ...]

    def source_projector(self) -> np.ndarray:
        n = self.model.sites
        out = np.zeros((n, n))
        for a in self.atoms:
            out += a.frame @ a.frame.T
        return out

    def gram(self) -> np.ndarray:
        """``Phi^* Phi`` from the closed form ``int e^{-(k+k')x} = 1/(k+k')``."""
        n = self.model.sites
        out = np.zeros((n, n))
        for a in self.atoms:
            for b in self.atoms:
                weight = 1.0 / (a.kappa + b.kappa)
                cross = a.coefficients.T @ b.coefficients
                out += weight * (a.frame @ cross @ b.frame.T)
        return out


def dot_intertwiner(model: DotArrayModel) -> DotIntertwiner:
    atoms = tuple(DotAtom(-mu * mu, v) for mu, v in _clusters(model) if mu < 0)
    return DotIntertwiner(model, atoms)


def dot_verify(model: DotArrayModel, length: float = 10.0, nodes_per_unit: int = 50,
               oracle: bool = True, tol: float = DOT_TOL) -> VerificationReport:
    phi = dot_intertwiner(model)
    rep = VerificationReport()
    iso = np.linalg.norm(phi.gram() - phi.source_projector(), 2) if phi.atoms else 0.0
    rep.add("isometry", "U^* U = E_T(m(J))", iso, min(tol, ISOMETRY_TOL))
    bc = eig = 0.0
    for a in phi.atoms:
        c = a.coefficients
        # f(0) = c, f'(0) = -kappa c, -f'' - lam f = (-kappa^2 - lam) c
        bc = max(bc, float(np.abs(-a.kappa * c - model.t @ c).max()))
        eig = max(eig, float(np.abs((-a.kappa**2 - a.lam) * c).max()))
    rep.add("boundary_condition", "f'(0) = T f(0)", bc, tol)
    rep.add("eigen_residual", "-f'' = lam f", eig, tol)
    if oracle:
        from .oracle import dot_oracle_spectrum

        lams = [lam for lam, mult in dot_spectrum(model) for _ in range(mult)]
        if lams:
            length = max(length, 10.0 / math.sqrt(-max(lams)))
        got = dot_oracle_spectrum(model.t, length, nodes_per_unit)
        if len(got) != len(lams):
            defect = math.inf
        else:
            defect = float(np.abs(np.sort(got) - np.sort(lams)).max()) if lams else 0.0
        rep.add("oracle_bound_states", "spec H_T in J = m^-1(spec T in m(J))", defect, ORACLE_TOL)
    return rep


def write_bound_states_csv(phi: DotIntertwiner, stream=None) -> str:
    """Rows ``state, site, kappa, coefficient``; ``state`` numbers the bound states."""
    buf = stream if stream is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["state", "site", "kappa", "coefficient"])
    state = 0
    for a in phi.atoms:
        coef = a.coefficients
        for j in range(a.mult):
            for site in range(phi.model.sites):
                writer.writerow([state, site, repr(a.kappa), repr(float(coef[site, j]))])
            state += 1
    return buf.getvalue() if stream is None else ""
