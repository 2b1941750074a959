import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from intertwine.discrete import weighted_opnorm
from intertwine.errors import AmbiguousBoundary, EndpointOnSpectrum, SingularWeyl
from intertwine.gamma import edgewave_inner, gamma_apply, vertex_residuals
from intertwine.graph import builtin_graph, random_connected_graph
from intertwine.intertwiner import (
    anchored_partition,
    band_eigensystem,
    default_interval,
    exhaustion,
    krein_correction_apply,
    map_distance,
    phi_eigen_sum,
    phi_riemann_sum,
    sigma_excluded,
    stieltjes_report,
    stieltjes_table,
    verify_interval,
)
from intertwine.weyl import band_inverse, scalar_maps

from conftest import setup_graph

PI = math.pi


def test_band_eigensystem_examples(triangle, star4):
    _, _, e = triangle
    (x,) = band_eigensystem(e, 0, (4, 5))
    assert x.mult == 2 and math.isclose(x.lam, (2 * PI / 3) ** 2, rel_tol=1e-15)
    assert band_eigensystem(e, 0, (5, 6)) == []
    (y,) = band_eigensystem(star4[2], 0, (2, 3))
    assert y.mult == 2 and math.isclose(y.lam, (PI / 2) ** 2, rel_tol=1e-15)


def test_endpoint_checks(triangle):
    _, _, e = triangle
    with pytest.raises(EndpointOnSpectrum):
        band_eigensystem(e, 0, (0.0, 5.0))  # m(0) = 1 is an eigenvalue
    with pytest.raises(EndpointOnSpectrum):
        band_eigensystem(e, 0, (1.0, PI**2))
    with pytest.raises(EndpointOnSpectrum):
        band_eigensystem(e, 1, (5.0, 12.0))


def test_sigma_exclusions():
    _, _, e = setup_graph(builtin_graph("path", 2))
    assert sigma_excluded(e, 0) == [(-1.0, 1)]
    assert sorted(sigma_excluded(e, 1)) == [(-1.0, 1), (1.0, 1)]


def test_phi_images_are_eigenfunctions(triangle):
    g, _, e = triangle
    phi = phi_eigen_sum(g, e, 0, (4, 5))
    assert phi.rank == 2
    for atom in phi.atoms:
        assert atom.coef == math.sqrt(2)
        for f in phi.images(atom):
            assert max(vertex_residuals(g, f)) <= 1e-12


def test_empty_interval_is_zero_map(triangle):
    g, _, e = triangle
    phi = phi_eigen_sum(g, e, 0, (5, 6))
    assert phi.rank == 0
    assert np.array_equal(phi.sandwich(), np.zeros((3, 3)))


def test_path2_constant_mode():
    g, _, e = setup_graph(builtin_graph("path", 2))
    phi = phi_eigen_sum(g, e, 0, (-0.5, 9))
    (atom,) = phi.atoms
    assert atom.lam == 0.0
    (f,) = phi.images(atom)
    vals = f.values(np.linspace(0, 1, 9))
    assert np.allclose(vals, vals[0, 0], atol=1e-15)
    assert math.isclose(edgewave_inner(f, f).real, 1.0, rel_tol=1e-14)


@pytest.mark.parametrize(
    "family, n, k, interval",
    [
        ("cycle", 3, 0, (-0.5, 9.0)),
        ("cycle", 4, 1, (11.0, 30.0)),
        ("cycle", 6, 1, (10.5, 38.0)),
        ("star", 4, 0, (2.0, 3.0)),
        ("complete", 5, 0, (-1.0, 9.0)),
    ],
)
def test_verify_examples(family, n, k, interval):
    g, _, e = setup_graph(builtin_graph(family, n))
    rep = verify_interval(g, e, k, interval)
    assert [c.name for c in rep.checks] == [
        "isometry", "eigen_residual", "disjointness", "transport",
        "conjugation", "reconstruction", "frame_gram", "parameter_selfadjoint",
    ]
    assert rep.passed, rep.to_dict()
    assert max(c.defect for c in rep.checks) <= 1e-10


def test_cycle4_band1_contains_three_halves_pi():
    g, _, e = setup_graph(builtin_graph("cycle", 4))
    lams = [a.lam for a in phi_eigen_sum(g, e, 1, (11.0, 30.0)).atoms]
    assert len(lams) == 1 and math.isclose(lams[0], (1.5 * PI) ** 2, rel_tol=1e-15)


def test_verify_empty_interval(triangle):
    g, _, e = triangle
    rep = verify_interval(g, e, 0, (5.0, 5.0))
    assert rep.passed
    assert all(c.defect == 0.0 for c in rep.checks)


def test_fault_is_detected(triangle):
    g, p, e = triangle
    t = p.copy()
    t[0, 2] += 1e-3
    rep = verify_interval(g, e, 0, (-0.5, 9.0), parameter=t)
    assert set(rep.failing()) == {"conjugation", "parameter_selfadjoint"}


@given(st.integers(4, 10), st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_isometry_random(n, k, seed):
    rng = np.random.default_rng(seed)
    g, _, e = setup_graph(random_connected_graph(n, rng))
    lo, hi = default_interval(k)
    a, b = np.sort(rng.uniform(lo, hi, 2))
    try:
        phi = phi_eigen_sum(g, e, k, (a, b))
    except EndpointOnSpectrum:
        return
    gram = phi.sandwich()
    from intertwine.discrete import spectral_projector
    from intertwine.weyl import scalar_maps as sm

    ends = sorted((sm(a).m.real, sm(b).m.real))
    assert weighted_opnorm(g, gram - spectral_projector(e, ends)) <= 1e-10


def test_disjoint_pieces_are_orthogonal(triangle):
    g, _, e = triangle
    left = phi_eigen_sum(g, e, 0, (-0.5, 2.0))
    right = phi_eigen_sum(g, e, 0, (2.0, 9.0))
    assert left.rank == 1 and right.rank == 2
    assert weighted_opnorm(g, left.sandwich(right)) <= 1e-14


def test_exhaustion_stabilises():
    g, _, e = setup_graph(builtin_graph("cycle", 6))
    maps = exhaustion(g, e, 1, [4.0, 2.0, 1.0, 0.5, 0.25])
    ranks = [m.rank for m in maps]
    assert ranks == sorted(ranks) and ranks[-1] == 4
    last = {a.lam: a for a in maps[-1].atoms}
    for m in maps:
        for a in m.atoms:
            assert a.lam in last and np.array_equal(a.idx, last[a.lam].idx)
    assert map_distance(maps[-2], maps[-1]) == 0.0


def test_spectral_bijection(triangle):
    g, _, e = triangle
    phi = phi_eigen_sum(g, e, 0, default_interval(0))
    got = sorted((round(scalar_maps(a.lam).m.real, 12), a.mult) for a in phi.atoms)
    assert got == [(-0.5, 2), (1.0, 1)]


def test_riemann_sum_converges_linearly(triangle):
    g, _, e = triangle
    rows = stieltjes_table(g, e, 0, (4, 5), [0.2, 0.1, 0.05, 0.025])
    ratios = [rows[i + 1][1] / rows[i][1] for i in range(3)]
    assert all(0.3 <= r <= 0.7 for r in ratios)
    assert all(r[2] <= 1e-12 for r in rows)


def test_riemann_sum_empty_cells(triangle):
    g, _, e = triangle
    part, left, _ = anchored_partition((4, 5), [(2 * PI / 3) ** 2], 0.1)
    rs = phi_riemann_sum(g, e, 0, (4, 5), part, left)
    assert len(rs.atoms) == 1


def test_riemann_boundary_on_atom(triangle):
    g, _, e = triangle
    lam = (2 * PI / 3) ** 2
    with pytest.raises(AmbiguousBoundary):
        phi_riemann_sum(g, e, 0, (4, 5), [4, lam, 5], [4, lam])


def test_stieltjes_report_rows(triangle):
    g, _, e = triangle
    rows, ratios, rep = stieltjes_report(g, e, 0, (-0.5, 9.0))
    assert len(rows) == 4 and rep.passed


def test_krein_correction(triangle):
    g, _, e = triangle
    zero = gamma_apply(g, -4.0, np.zeros(3))
    out = krein_correction_apply(g, e, -1.0, zero)
    assert np.array_equal(out.a, np.zeros(3)) and np.array_equal(out.b, np.zeros(3))
    f = gamma_apply(g, -4.0, np.array([1.0, 0.0, 0.0]))
    assert np.all(np.isfinite(krein_correction_apply(g, e, -1.0, f).a))
    with pytest.raises(SingularWeyl):
        krein_correction_apply(g, e, band_inverse(0, -0.5) + 1e-14, f)
