import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from intertwine.dots import (
    DotArrayModel,
    dot_intertwiner,
    dot_spectrum,
    dot_verify,
    load_dot_model,
    write_bound_states_csv,
)
from intertwine.errors import InvalidSize, ParseError


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return np.triu(a) + np.triu(a, 1).T


def test_swap_coupling():
    m = DotArrayModel([[0, 1], [1, 0]])
    assert dot_spectrum(m) == [(-1.0, 1)]
    (atom,) = dot_intertwiner(m).atoms
    assert atom.kappa == 1.0
    assert np.allclose(atom.frame[:, 0], np.array([1, -1]) / math.sqrt(2), atol=1e-15)


def test_single_site():
    m = DotArrayModel([[-2.0]])
    assert dot_spectrum(m) == [(-4.0, 1)]
    (atom,) = dot_intertwiner(m).atoms
    c = atom.coefficients[0, 0]
    # f(x) = c exp(-2x): f'(0) = -2 f(0) and unit norm
    assert math.isclose(-2 * c, -2.0 * c)
    norm = quad(lambda x: (c * math.exp(-2 * x)) ** 2, 0, np.inf)[0]
    assert math.isclose(norm, 1.0, rel_tol=1e-12)


def test_positive_coupling_has_no_bound_states():
    assert dot_spectrum(DotArrayModel(np.diag([0.0, 1.0, 2.5]))) == []
    rep = dot_verify(DotArrayModel([[0.0]]))
    assert rep.passed and all(c.defect == 0 for c in rep.checks)


def test_diagonal_coupling():
    m = DotArrayModel(np.diag([-1.0, -2.0, 3.0]))
    assert dot_spectrum(m) == [(-4.0, 1), (-1.0, 1)]
    phi = dot_intertwiner(m)
    assert abs(phi.gram()[0, 1]) == 0.0


def test_degenerate_coupling():
    m = DotArrayModel(-np.eye(3))
    assert dot_spectrum(m) == [(-1.0, 3)]


def test_verify_swap():
    rep = dot_verify(DotArrayModel([[0, 1], [1, 0]]))
    assert rep["boundary_condition"].defect <= 1e-12
    assert rep.passed


def test_verify_random_five_sites():
    rng = np.random.default_rng(7)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    t = q @ np.diag([-1.8, -1.2, -1.2, 0.4, 2.0]) @ q.T
    t = 0.5 * (t + t.T)
    rep = dot_verify(DotArrayModel(t))
    assert rep.passed, rep.to_dict()
    assert all(c.defect <= 1e-10 for c in rep.checks if c.name != "oracle_bound_states")


@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.1, 10))
def test_scaling_covariance(n, seed, s):
    t = random_symmetric(np.random.default_rng(seed), n)
    a = dot_spectrum(DotArrayModel(t))
    b = dot_spectrum(DotArrayModel(s * t))
    assert [m for _, m in a] == [m for _, m in b]
    for (la, _), (lb, _) in zip(a, b):
        assert math.isclose(lb, s * s * la, rel_tol=1e-12)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_count_matches_negative_eigenvalues(n, seed):
    t = random_symmetric(np.random.default_rng(seed), n)
    model = DotArrayModel(t)
    assert sum(m for _, m in dot_spectrum(model)) == int(np.sum(np.linalg.eigvalsh(t) < 0))
    for lam, _ in dot_spectrum(model):
        assert lam < 0
        # m(lam) = -sqrt(-lam) is an eigenvalue of T
        assert np.min(np.abs(np.linalg.eigvalsh(t) - model.m(lam))) <= 1e-12 * max(1, abs(lam))
    phi = dot_intertwiner(model)
    assert np.abs(phi.gram() - phi.source_projector()).max() <= 1e-12


def test_loader():
    m = load_dot_model('{"T": [[0, 1], [1, 0]]}')
    assert m.sites == 2
    for bad, exc in [
        ('{"T": [[0, 1], [2, 0]]}', ParseError),
        ('{"T": [[0, 1]]}', InvalidSize),
        ('{"T": [[0, 1], [1, 0]], "x": 1}', ParseError),
        ('{"T": [["a"]]}', ParseError),
        ('[1]', ParseError),
    ]:
        with pytest.raises(exc):
            load_dot_model(bad)


def test_bound_state_csv():
    text = write_bound_states_csv(dot_intertwiner(DotArrayModel([[0, 1], [1, 0]])))
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["state", "site", "kappa", "coefficient"]
    assert [float(r[3]) for r in rows[1:]] == pytest.approx([1.0, -1.0], abs=1e-15)
