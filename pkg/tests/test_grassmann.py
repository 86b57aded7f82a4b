import numpy as np
import pytest

from tuckercomplete import (
    TripleFrame,
    coherence,
    geodesic,
    proj_distance,
    tangent_project,
    trim,
    triple_distance,
)
from tuckercomplete.grassmann import check_frame, orthonormality_defect, random_frame


def rotation(rng, r):
    return np.linalg.qr(rng.standard_normal((r, r)))[0]


def test_coherence_extremes():
    d, r = 6, 2
    canonical = np.eye(d)[:, :r]
    assert coherence(canonical) == pytest.approx(d / r, rel=1e-15)
    spread = np.full((4, 1), 0.5)
    assert coherence(spread) == pytest.approx(1.0, rel=1e-15)


def test_coherence_projector_oracle():
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = random_frame(9, 3, rng)
        p = x @ x.T
        want = 9 / 3 * max(p[i, i] for i in range(9))  # e_i^T P e_i = ||P e_i||^2
        assert coherence(x) == pytest.approx(want, rel=1e-12)


def test_proj_distance_closed_forms():
    e1 = np.array([[1.0], [0.0]])
    e2 = np.array([[0.0], [1.0]])
    assert proj_distance(e1, e1) == 0.0
    assert proj_distance(e1, e2) == pytest.approx(1.0, rel=1e-14)
    xang = np.array([[np.cos(np.pi / 6)], [np.sin(np.pi / 6)]])
    assert proj_distance(xang, e1) == pytest.approx(0.5, rel=1e-12)  # |sin theta|
    with pytest.raises(ValueError):
        proj_distance(e1, np.eye(3)[:, :1])


def test_proj_distance_matches_projector_formula_and_invariance():
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = random_frame(8, 3, rng)
        u = random_frame(8, 3, rng)
        want = np.linalg.norm(u @ u.T - x @ x.T) / np.sqrt(2.0)
        assert proj_distance(x, u) == pytest.approx(want, abs=1e-12)
        xr = x @ rotation(rng, 3)
        ur = u @ rotation(rng, 3)
        assert abs(proj_distance(xr, ur) - proj_distance(x, u)) <= 1e-12


def test_triple_distance_composition():
    rng = np.random.default_rng(2)
    p = TripleFrame(*(random_frame(6, 2, rng) for _ in range(3)))
    q = TripleFrame(*(random_frame(6, 2, rng) for _ in range(3)))
    assert triple_distance(p, p) == 0.0
    want = sum(proj_distance(a, b) for a, b in zip(p, q))
    assert triple_distance(p, q) == pytest.approx(want, rel=1e-15)
    # one orthogonal r=1 component, others equal
    e1 = np.array([[1.0], [0.0]])
    e2 = np.array([[0.0], [1.0]])
    a = TripleFrame(e1, e1, e1)
    b = TripleFrame(e2, e1, e1)
    assert triple_distance(a, b) == pytest.approx(1.0, rel=1e-14)


def test_tangent_project():
    rng = np.random.default_rng(3)
    x = random_frame(7, 2, rng)
    assert np.max(np.abs(tangent_project(x, x))) <= 1e-14
    # columns orthogonal to span(x) pass through unchanged
    q = np.linalg.qr(rng.standard_normal((7, 7)))[0]
    basis = q - x @ (x.T @ q)
    g = basis[:, :2]
    np.testing.assert_allclose(tangent_project(x, g), g, atol=1e-13)
    # idempotence
    g2 = rng.standard_normal((7, 2))
    once = tangent_project(x, g2)
    twice = tangent_project(x, once)
    np.testing.assert_allclose(once, twice, atol=1e-12)
    assert np.max(np.abs(x.T @ once)) <= 1e-12


def test_geodesic_endpoints_and_planar_rotation():
    rng = np.random.default_rng(4)
    x = random_frame(6, 2, rng)
    d = tangent_project(x, rng.standard_normal((6, 2)))
    np.testing.assert_array_equal(geodesic(x, np.zeros_like(x), 1.7), x)
    np.testing.assert_allclose(geodesic(x, d, 0.0), x, atol=1e-14)

    theta = 0.9
    e1 = np.array([[1.0], [0.0]])
    h = geodesic(e1, np.array([[0.0], [theta]]), 1.0)
    np.testing.assert_allclose(h, [[np.cos(theta)], [np.sin(theta)]], atol=1e-14)


def test_geodesic_stays_orthonormal_and_initial_velocity():
    rng = np.random.default_rng(5)
    x = random_frame(8, 3, rng)
    d = tangent_project(x, rng.standard_normal((8, 3)))
    for t in np.linspace(0.0, 2.0, 9):
        assert orthonormality_defect(geodesic(x, d, t)) <= 1e-10
    # d/dt H at 0 equals the direction (forward difference, step 1e-7)
    step = 1e-7
    fd = (geodesic(x, d, step) - x) / step
    assert np.max(np.abs(fd - d)) <= 1e-6


def test_geodesic_planar_distance_monotone():
    e1 = np.array([[1.0], [0.0]])
    d = np.array([[0.0], [1.0]])  # unit speed, period pi
    ts = np.linspace(0.0, np.pi / 2, 20)
    dists = [proj_distance(e1, geodesic(e1, d, t)) for t in ts]
    assert all(b >= a - 1e-12 for a, b in zip(dists, dists[1:]))


def test_trim_noop_returns_same_object():
    rng = np.random.default_rng(6)
    x = random_frame(16, 2, rng)
    mu0 = max(1.0, coherence(x) / 3.0 + 0.5)
    assert trim(x, mu0) is x


def test_trim_concentrated_rank_one():
    x = np.zeros((8, 1))
    x[0, 0] = 1.0
    out = trim(x, 1.0)
    check_frame(out)
    assert coherence(out) <= 3.0


def test_trim_rejects_bad_mu0():
    with pytest.raises(ValueError):
        trim(np.eye(4)[:, :1], 0.5)


def test_trim_contract_monte_carlo():
    # for an incoherent truth U and X within delta <= 1/16, the trimmed
    # frame stays mu-bounded and at most 4x further from U
    rng = np.random.default_rng(7)
    d, r = 64, 2
    for _ in range(50):
        u = random_frame(d, r, rng)
        mu0 = max(1.0, coherence(u))
        dvec = tangent_project(u, rng.standard_normal((d, r)))
        dvec /= np.linalg.norm(dvec)
        target = rng.uniform(0.01, 1.0 / 16.0)
        x = geodesic(u, dvec, target)
        delta = proj_distance(x, u)
        assert delta <= 1.0 / 16.0 + 1e-12
        out = trim(x, mu0)
        assert coherence(out) <= 3.0 * mu0 + 1e-9
        assert proj_distance(out, u) <= 4.0 * delta + 1e-12
