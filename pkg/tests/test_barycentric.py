"""Karcher means on model surfaces and the pullback-vs-flat comparison."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discon import barycentric as bc
from discon.errors import (
    ConjugateLocusError,
    GridTooCoarseError,
    OutOfWorkingRegionError,
    PointsTooSpreadError,
)

PLANE = bc.plane()
SPHERE = bc.sphere(1.0)


def equilateral_on_sphere(eps, rho=1.0):
    """Geodesic equilateral triangle of side eps centered at the north pole."""
    s2 = (2.0 / 3.0) * (1.0 - math.cos(eps / rho))
    th = math.asin(math.sqrt(s2))
    pts = []
    for k in range(3):
        ph = 2.0 * math.pi * k / 3.0
        pts.append(rho * np.array([math.sin(th) * math.cos(ph),
                                   math.sin(th) * math.sin(ph),
                                   math.cos(th)]))
    return np.array(pts)


# --- exp / log ---------------------------------------------------------------

def test_plane_exp_is_translation():
    a = np.array([1.0, 2.0])
    v = np.array([-0.5, 0.25])
    assert np.array_equal(bc.exp_map(PLANE, a, v), a + v)
    assert np.array_equal(bc.log_map(PLANE, a, a + v), v)


def test_sphere_exp_pole_to_equator():
    a = np.array([0.0, 0.0, 1.0])
    v = np.array([math.pi / 2.0, 0.0, 0.0])
    p = bc.exp_map(SPHERE, a, v)
    assert np.allclose(p, [1.0, 0.0, 0.0], atol=1e-15)


def test_sphere_exp_log_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.normal(size=3)
        a /= np.linalg.norm(a)
        v = rng.normal(size=3)
        v -= (v @ a) * a
        v *= 0.5 / np.linalg.norm(v)
        p = bc.exp_map(SPHERE, a, v)
        assert bc.distance(SPHERE, a, p) == pytest.approx(np.linalg.norm(v),
                                                          abs=1e-10)
        assert np.allclose(bc.log_map(SPHERE, a, p), v, atol=1e-10)


def test_sphere_log_antipode_raises():
    a = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ConjugateLocusError):
        bc.log_map(SPHERE, a, -a)


def test_sphere_tangent_must_be_orthogonal():
    a = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        bc.exp_map(SPHERE, a, np.array([0.0, 0.0, 0.5]))


def test_sphere_point_off_surface_rejected():
    with pytest.raises(ValueError):
        bc.log_map(SPHERE, np.array([0.0, 0.0, 2.0]),
                   np.array([1.0, 0.0, 0.0]))


def curved_surface(c=0.4):
    # u(x, y) = c x: analytic gradient, moderate curvature near the origin.
    return bc.conformal_plane(u=lambda z: c * z[0],
                              grad_u=lambda z: np.array([c, 0.0]),
                              curvature_bound=0.0)


def test_conformal_gauge_reduces_to_plane():
    flat = bc.conformal_plane(u=lambda z: 0.0,
                              grad_u=lambda z: np.zeros(2))
    a = np.array([0.3, -0.7])
    v = np.array([1.1, 0.4])
    assert np.array_equal(bc.exp_map(flat, a, v), a + v)
    p = np.array([-0.2, 0.45])
    assert np.array_equal(bc.log_map(flat, a, p), p - a)
    assert bc.distance(flat, a, p) == np.linalg.norm(p - a)


def test_conformal_exp_log_roundtrip():
    s = curved_surface()
    a = np.array([0.1, 0.2])
    v = np.array([0.4, -0.3])
    p = bc.exp_map(s, a, v)
    assert np.allclose(bc.log_map(s, a, p), v, atol=1e-9)


def test_conformal_exp_speed_equals_arclength():
    # Independent oracle: the metric length of the integrated geodesic,
    # sampled densely, must equal the initial speed |v|_g.
    s = curved_surface(c=0.5)
    a = np.array([0.0, 0.0])
    v = np.array([0.3, 0.2])
    samples = [bc.exp_map(s, a, t * v) for t in np.linspace(0.0, 1.0, 400)]
    length = 0.0
    for x0, x1 in zip(samples, samples[1:]):
        mid = 0.5 * (x0 + x1)
        length += math.exp(s.u(mid)) * float(np.linalg.norm(x1 - x0))
    speed = math.exp(s.u(a)) * float(np.linalg.norm(v))
    assert length == pytest.approx(speed, rel=1e-6)


def test_conformal_working_region_enforced():
    s = bc.conformal_plane(u=lambda z: 0.0, grad_u=lambda z: np.zeros(2),
                           region_center=(0.0, 0.0), region_radius=1.0)
    with pytest.raises(OutOfWorkingRegionError):
        bc.exp_map(s, np.array([0.9, 0.0]), np.array([0.5, 0.0]))
    with pytest.raises(OutOfWorkingRegionError):
        bc.log_map(s, np.array([2.0, 0.0]), np.array([0.0, 0.0]))


# --- Karcher means -----------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_plane_mean_is_linear_barycenter(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    pts = rng.normal(scale=3.0, size=(k + 1, 2))
    lam = rng.dirichlet(np.ones(k + 1))
    got = bc.karcher_mean(PLANE, pts, lam)
    assert np.allclose(got, lam @ pts, atol=1e-12)


def test_mean_config_validation():
    with pytest.raises(ValueError):
        bc.KarcherConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        bc.KarcherConfig(step_size=1.5)
    with pytest.raises(ValueError):
        bc.BarycentricPoint(lam=np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        bc.BarycentricPoint(lam=np.array([1.5, -0.5]))


def test_sphere_midpoint_equidistant():
    p0 = np.array([math.sin(0.3), 0.0, math.cos(0.3)])
    p1 = np.array([-math.sin(0.3), 0.0, math.cos(0.3)])
    mid = bc.karcher_mean(SPHERE, np.array([p0, p1]), [0.5, 0.5])
    d0 = bc.distance(SPHERE, mid, p0)
    d1 = bc.distance(SPHERE, mid, p1)
    assert d0 == pytest.approx(d1, abs=1e-10)
    # Symmetry pins the midpoint to the pole.
    assert np.allclose(mid, [0.0, 0.0, 1.0], atol=1e-10)


def test_sphere_equilateral_center():
    pts = equilateral_on_sphere(0.9)
    got = bc.karcher_mean(SPHERE, pts, np.full(3, 1.0 / 3.0))
    assert np.allclose(got, [0.0, 0.0, 1.0], atol=1e-8)


def test_sphere_mean_first_order_condition():
    pts = equilateral_on_sphere(0.8)
    lam = np.array([0.5, 0.3, 0.2])
    cfg = bc.KarcherConfig(tolerance=1e-13)
    a = bc.karcher_mean(SPHERE, pts, lam, cfg)
    F = sum(w * bc.log_map(SPHERE, a, p) for w, p in zip(lam, pts))
    assert np.linalg.norm(F) <= 1e-13


def test_sphere_points_too_spread():
    th = 1.2   # polar angle beyond pi/4
    pts = equilateral_on_sphere(0.1)  # replaced below with a spread set
    pts = np.array([[math.sin(th), 0.0, math.cos(th)],
                    [-math.sin(th), 0.0, math.cos(th)],
                    [0.0, math.sin(th), math.cos(th)]])
    with pytest.raises(PointsTooSpreadError):
        bc.karcher_mean(SPHERE, pts, np.full(3, 1.0 / 3.0))


def test_conformal_spread_limit_uses_curvature_bound():
    s = bc.conformal_plane(u=lambda z: 0.0, grad_u=lambda z: np.zeros(2),
                           curvature_bound=4.0)
    # pi / (4 sqrt(C0)) = pi / 8 ~ 0.39; points 1 apart exceed it.
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(PointsTooSpreadError):
        bc.karcher_mean(s, pts, [0.5, 0.5])


def test_curved_two_point_mean_lies_on_geodesic():
    s = curved_surface(c=0.5)
    p0 = np.array([0.0, 0.0])
    p1 = np.array([0.5, 0.3])
    m = bc.karcher_mean(s, np.array([p0, p1]), [0.5, 0.5])
    d = bc.distance(s, p0, p1)
    assert (bc.distance(s, p0, m) + bc.distance(s, m, p1)
            == pytest.approx(d, abs=1e-8))


def test_zero_weight_point_is_ignored():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [5000.0, 5000.0]])
    lam = np.array([0.5, 0.5, 0.0])
    got = bc.karcher_mean(PLANE, pts, lam)
    assert np.allclose(got, [0.5, 0.0], atol=1e-12)


# --- psi_map -----------------------------------------------------------------

def lam_grid(n):
    rows = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            rows.append([(n - i - j) / n, i / n, j / n])
    return np.array(rows)


def test_psi_corners_hit_vertices():
    pts = equilateral_on_sphere(0.5)
    out = bc.psi_map(SPHERE, pts, np.eye(3))
    assert np.allclose(out, pts, atol=1e-12)


def test_psi_plane_is_affine():
    rng = np.random.default_rng(4)
    pts = rng.normal(size=(3, 2))
    grid = lam_grid(5)
    out = bc.psi_map(PLANE, pts, grid)
    assert np.allclose(out, grid @ pts, atol=1e-12)


def test_psi_facet_ignores_opposite_vertex():
    pts = equilateral_on_sphere(0.6)
    edge = np.array([[0.5, 0.5, 0.0], [0.25, 0.75, 0.0]])
    out1 = bc.psi_map(SPHERE, pts, edge)
    moved = pts.copy()
    # Perturb p2 along the sphere.
    moved[2] = bc.exp_map(SPHERE, pts[2],
                          0.05 * np.cross(pts[2], [0.0, 0.0, 1.0]))
    out2 = bc.psi_map(SPHERE, moved, edge)
    assert np.array_equal(out1, out2)


def test_conformal_flat_psi_matches_plane_bitwise():
    flat = bc.conformal_plane(u=lambda z: 0.0, grad_u=lambda z: np.zeros(2))
    rng = np.random.default_rng(8)
    pts = rng.normal(size=(3, 2))
    grid = lam_grid(4)
    assert np.array_equal(bc.psi_map(PLANE, pts, grid),
                          bc.psi_map(flat, pts, grid))


# --- pullback comparison ------------------------------------------------------

def test_pullback_plane_is_exact():
    rng = np.random.default_rng(12)
    pts = rng.normal(size=(3, 2))
    rep = bc.pullback_estimate(PLANE, pts, grid=6)
    assert rep.max_dev < 1e-8
    assert rep.nodes > 0


def test_pullback_conformal_flat_matches_plane_bitwise():
    flat = bc.conformal_plane(u=lambda z: 0.0, grad_u=lambda z: np.zeros(2))
    rng = np.random.default_rng(12)
    pts = rng.normal(size=(3, 2))
    a = bc.pullback_estimate(PLANE, pts, grid=4)
    b = bc.pullback_estimate(flat, pts, grid=4)
    assert a.max_dev == b.max_dev
    assert a.eps == b.eps
    assert a.beta == b.beta


def test_pullback_sphere_quadratic_scaling():
    # Halving the triangle scales the deviation by ~4: the empirical form
    # of the eps^2 error model.
    eps = 0.2
    rep1 = bc.pullback_estimate(SPHERE, equilateral_on_sphere(eps), grid=6)
    rep2 = bc.pullback_estimate(SPHERE, equilateral_on_sphere(eps / 2), grid=6)
    assert rep1.max_dev > 1e-6          # real signal, not noise
    ratio = rep1.max_dev / rep2.max_dev
    assert 3.2 <= ratio <= 4.8
    assert rep1.beta == pytest.approx(rep2.beta, rel=0.25)
    assert rep1.theta == pytest.approx(math.sqrt(3.0) / 2.0, rel=1e-3)


def test_richardson_gate():
    bc._richardson_gate(1e-3, 1.02e-3)          # stable: fine
    bc._richardson_gate(3e-12, 9e-12)           # below noise floor: fine
    with pytest.raises(GridTooCoarseError):
        bc._richardson_gate(1e-3, 2.5e-3)


def test_pullback_margin_guard():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        bc.pullback_estimate(PLANE, pts, grid=2, delta=0.4)
