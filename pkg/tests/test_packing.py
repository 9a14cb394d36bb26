"""Circle packing: tangency angles, label solvers, layout, bounds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discon import mesh, packing
from discon.errors import (
    EmptyChainsError,
    LayoutInconsistentError,
    NoConvergenceError,
    NotADiskError,
)

FLOWER = mesh.build_triangulation([(0, i, i % 6 + 1) for i in range(1, 7)])
FLOWER5 = mesh.build_triangulation([(0, i, i % 5 + 1) for i in range(1, 6)])

radii = st.floats(min_value=0.05, max_value=20.0)


# --- tangency angles -------------------------------------------------------

def test_euclidean_angle_112():
    # Unit circle, unit neighbor, radius-2 neighbor: center triangle has
    # sides (2, 3, 3), so cos(theta) = 1/3 at the unit circle.
    th = packing.tangency_angle(1.0, 1.0, 2.0, "euclidean")
    assert th == pytest.approx(math.acos(1.0 / 3.0), abs=1e-15)


def test_euclidean_angle_equal_radii():
    th = packing.tangency_angle(1.0, 1.0, 1.0, "euclidean")
    assert th == pytest.approx(math.pi / 3.0, abs=1e-15)


@settings(max_examples=150, deadline=None)
@given(r0=radii, r1=radii, r2=radii)
def test_euclidean_angles_sum_to_pi(r0, r1, r2):
    # The three tangency angles are the angles of the triangle of centers.
    ths = [packing.tangency_angle(r0, r1, r2, "euclidean"),
           packing.tangency_angle(r1, r2, r0, "euclidean"),
           packing.tangency_angle(r2, r0, r1, "euclidean")]
    assert sum(ths) == pytest.approx(math.pi, rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(r0=radii, r1=radii, r2=radii, scale=st.floats(0.1, 10.0))
def test_euclidean_angle_scale_invariant(r0, r1, r2, scale):
    a = packing.tangency_angle(r0, r1, r2, "euclidean")
    b = packing.tangency_angle(scale * r0, scale * r1, scale * r2, "euclidean")
    assert a == pytest.approx(b, rel=1e-12)


def test_euclidean_angle_monotone_in_center():
    last = math.pi
    for r0 in (0.1, 0.5, 1.0, 2.0, 10.0):
        th = packing.tangency_angle(r0, 1.0, 1.0, "euclidean")
        assert th < last
        last = th


def test_hyperbolic_angle_horocycle_petals():
    # Petal horocycles have infinite radius; with s0 = exp(-r0) = 1/2 the
    # angle collapses to 2 arcsin(s0) = pi / 3.
    th = packing.tangency_angle(math.log(2.0), math.inf, math.inf, "hyperbolic")
    assert th == pytest.approx(math.pi / 3.0, abs=1e-15)
    # The angle at a horocycle itself is zero.
    assert packing.tangency_angle(math.inf, math.log(2.0), 1.0,
                                  "hyperbolic") == 0.0


def test_hyperbolic_angle_center_shrinks_to_pi():
    # A huge center circle (r -> 0) sees its neighbors across an angle
    # approaching pi.
    th = packing.tangency_angle(1e-12, 1.2, 0.9, "hyperbolic")
    assert th == pytest.approx(math.pi, abs=1e-5)


def test_hyperbolic_angle_sum_below_pi():
    # Hyperbolic triangles are thin: angle sum strictly below pi.
    ths = [packing.tangency_angle(0.4, 0.5, 0.6, "hyperbolic"),
           packing.tangency_angle(0.5, 0.6, 0.4, "hyperbolic"),
           packing.tangency_angle(0.6, 0.4, 0.5, "hyperbolic")]
    assert sum(ths) < math.pi


@settings(max_examples=100, deadline=None)
@given(r0=st.floats(0.01, 5.0), r1=st.floats(0.01, 5.0), r2=st.floats(0.01, 5.0))
def test_hyperbolic_angle_range(r0, r1, r2):
    th = packing.tangency_angle(r0, r1, r2, "hyperbolic")
    assert 0.0 < th < math.pi
    # Hyperbolic angles are strictly below their euclidean counterparts.
    assert th < packing.tangency_angle(r0, r1, r2, "euclidean")


# --- solvers ---------------------------------------------------------------

def flower_hub_oracle(k: int) -> float:
    # Bisection on the closure equation 2k arcsin(1/(1+r)) = 2 pi for a
    # k-flower with unit petals; independent of the solver under test.
    def f(r):
        return 2 * k * math.asin(1.0 / (1.0 + r)) - 2 * math.pi
    lo, hi = 1e-6, 100.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_flower6_hub_radius_exact():
    # Six unit petals around a hub: the hub radius is exactly 1.
    lab = packing.solve_euclidean(FLOWER, boundary_radii=1.0, tol=1e-12)
    assert lab.values[0] == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(lab.values[1:], 1.0)


def test_flower5_hub_radius_vs_bisection():
    lab = packing.solve_euclidean(FLOWER5, boundary_radii=1.0, tol=1e-12)
    want = flower_hub_oracle(5)
    assert want == pytest.approx(1.0 / math.sin(math.pi / 5.0) - 1.0, abs=1e-10)
    assert lab.values[0] == pytest.approx(want, abs=1e-8)


def test_flower_scaled_boundary():
    # Doubling every boundary radius doubles the hub radius.
    lab = packing.solve_euclidean(FLOWER5, boundary_radii=2.0, tol=1e-12)
    assert lab.values[0] == pytest.approx(2.0 * flower_hub_oracle(5), abs=1e-8)


def test_hex_patch_uniform_from_bad_start():
    t, _ = mesh.build_hex_patch(4)
    init = np.full(t.n_vertices, 0.17)
    init[t.boundary_vertex_mask] = 1.0
    lab = packing.solve_euclidean(t, boundary_radii=1.0, tol=1e-12,
                                  initial=init)
    assert np.abs(lab.values - 1.0).max() < 1e-9
    rep = packing.packing_angle_report(t, lab)
    assert rep.interior_max_defect < 1e-10


def test_mixed_boundary_radii_converges():
    t, _ = mesh.build_hex_patch(3)
    rng = np.random.default_rng(3)
    br = rng.uniform(0.5, 2.0, size=int(t.boundary_vertex_mask.sum()))
    lab = packing.solve_euclidean(t, boundary_radii=br, tol=1e-11)
    rep = packing.packing_angle_report(t, lab)
    assert rep.interior_max_defect < 1e-9
    assert (lab.values > 0).all()


def test_no_convergence_raises():
    t, _ = mesh.build_hex_patch(3)
    init = np.full(t.n_vertices, 13.0)
    init[t.boundary_vertex_mask] = 1.0
    with pytest.raises(NoConvergenceError):
        packing.solve_euclidean(t, boundary_radii=1.0, tol=1e-12,
                                max_sweeps=2, initial=init)


def test_closed_surface_rejected():
    tet = mesh.build_triangulation([(0, 1, 2), (0, 3, 1), (1, 3, 2), (2, 3, 0)])
    with pytest.raises(NotADiskError):
        packing.solve_euclidean(tet, boundary_radii=1.0)


def test_maximal_flower_closed_form():
    # Horocycle petals, 12 arcsin(s) = 2 pi at the hub: s = 1/2 exactly.
    lab = packing.solve_maximal_hyperbolic(FLOWER, tol=1e-14)
    assert lab.values[0] == pytest.approx(0.5, abs=1e-12)
    assert (lab.values[1:] == 0.0).all()


def test_maximal_flower_hyperbolic_area():
    lab = packing.solve_maximal_hyperbolic(FLOWER, tol=1e-14)
    rep = packing.packing_angle_report(FLOWER, lab)
    # Each triangle has angles (pi/3, 0, 0): area 2 pi / 3; six of them.
    assert rep.hyperbolic_area == pytest.approx(4.0 * math.pi, abs=1e-10)
    assert rep.gauss_bonnet_residual == pytest.approx(0.0, abs=1e-10)


def test_maximal_hex_patch_interior_angles():
    t, _ = mesh.build_hex_patch(3)
    lab = packing.solve_maximal_hyperbolic(t, tol=1e-12)
    sums = packing.angle_sums(t, lab)
    interior = ~t.boundary_vertex_mask
    assert np.abs(sums[interior] - 2 * math.pi).max() < 1e-10
    assert (lab.values[t.boundary_vertex_mask] == 0.0).all()
    assert (lab.values[interior] > 0.0).all()
    assert (lab.values[interior] < 1.0).all()


# --- layout ----------------------------------------------------------------

def test_layout_flower_euclidean():
    lab = packing.solve_euclidean(FLOWER, boundary_radii=1.0, tol=1e-12)
    lay = packing.layout(FLOWER, lab, anchor=0)
    errs = lay.tangency_errors(FLOWER)
    assert errs.max() < 1e-9
    # Hub at the origin, petals on a circle of radius 2.
    assert np.linalg.norm(lay.realization.positions[0]) < 1e-12
    d = np.linalg.norm(lay.realization.positions[1:], axis=1)
    assert np.abs(d - 2.0).max() < 1e-9


def test_layout_hex_patch_matches_lattice():
    t, real = mesh.build_hex_patch(3, side=1.0)
    lab = packing.PackingLabel.euclidean(np.full(t.n_vertices, 0.5))
    lay = packing.layout(t, lab, anchor=0)
    assert lay.tangency_errors(t).max() < 1e-10
    rot, shift, rms = packing.fit_rigid_motion(lay.realization.positions,
                                               real.positions)
    assert rms < 1e-9


def test_layout_maximal_flower_hyperbolic():
    lab = packing.solve_maximal_hyperbolic(FLOWER, tol=1e-14)
    lay = packing.layout(FLOWER, lab, anchor=0)
    pos = lay.realization.positions
    rad = lay.radii
    # Hub: euclidean radius (1 - s)/(1 + s) = 1/3 at the origin.
    assert np.linalg.norm(pos[0]) < 1e-12
    assert rad[0] == pytest.approx(1.0 / 3.0, abs=1e-12)
    # Horocycle petals: euclidean radius 1/3, centers at 2/3.
    assert np.allclose(rad[1:], 1.0 / 3.0, atol=1e-9)
    assert np.allclose(np.linalg.norm(pos[1:], axis=1), 2.0 / 3.0, atol=1e-9)
    # All circles inside the closed unit disk.
    assert (np.linalg.norm(pos, axis=1) + rad <= 1.0 + 1e-9).all()
    assert lay.tangency_errors(FLOWER).max() < 1e-9


def test_layout_maximal_hex_patch_in_disk():
    t, _ = mesh.build_hex_patch(4)
    lab = packing.solve_maximal_hyperbolic(t, tol=1e-12)
    lay = packing.layout(t, lab, anchor=mesh.vertex_index_near(
        mesh.PlanarRealization(
            mesh.build_hex_patch(4)[1].positions, "euclidean"), (0.0, 0.0)))
    pos = lay.realization.positions
    rad = lay.radii
    assert (np.linalg.norm(pos, axis=1) + rad <= 1.0 + 1e-8).all()
    # Boundary horocycles are internally tangent to the unit circle.
    b = t.boundary_vertex_mask
    assert np.abs(np.linalg.norm(pos[b], axis=1) + rad[b] - 1.0).max() < 1e-8
    assert lay.tangency_errors(t).max() < 1e-8


def test_layout_detects_inconsistent_label():
    # A label far from closure cannot be laid out consistently.
    vals = np.array([0.2, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    lab = packing.PackingLabel.euclidean(vals)
    with pytest.raises(LayoutInconsistentError):
        packing.layout(FLOWER, lab, anchor=0, tol=1e-9)


# --- bounds and fits -------------------------------------------------------

def test_heron_area_radii():
    assert packing.heron_area(1.0, 2.0, 3.0) == pytest.approx(6.0, abs=1e-14)
    assert packing.heron_area(1.0, 1.0, 1.0) == pytest.approx(
        math.sqrt(3.0), abs=1e-15)


def test_length_area_bound_values():
    assert packing.length_area_bound([2, 3, 6]) == pytest.approx(1.0, abs=1e-15)
    assert packing.length_area_bound([4]) == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(EmptyChainsError):
        packing.length_area_bound([])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=1, max_size=12))
def test_length_area_bound_monotone(ns):
    # Adding one more chain can only tighten the bound.
    b1 = packing.length_area_bound(ns)
    b2 = packing.length_area_bound(ns + [7])
    assert b2 < b1


def test_separating_rings_hex():
    t, real = mesh.build_hex_patch(4)
    hub = mesh.vertex_index_near(real, (0.0, 0.0))
    # Around a boundary vertex, avoid the hub.
    v = int(t.boundary_vertices[0])
    rings = packing.separating_rings(t, v, hub)
    d = mesh.combinatorial_distance(t, v, hub)
    assert len(rings) == d - 1
    assert all(r >= 1 for r in rings)


def test_fit_rigid_motion_roundtrip():
    rng = np.random.default_rng(11)
    src = rng.normal(size=(40, 2))
    ang = 0.7
    R = np.array([[math.cos(ang), -math.sin(ang)],
                  [math.sin(ang), math.cos(ang)]])
    dst = src @ R.T + np.array([0.3, -1.2])
    rot, shift, rms = packing.fit_rigid_motion(src, dst)
    assert rms < 1e-12
    assert np.allclose(rot, R, atol=1e-12)


def test_fit_disk_automorphism_roundtrip():
    rng = np.random.default_rng(5)
    z = rng.uniform(-0.6, 0.6, size=(50, 2))
    pts = z[:, 0] + 1j * z[:, 1]
    a = 0.3 - 0.2j
    th = 1.1
    w = np.exp(1j * th) * (pts - a) / (1 - np.conj(a) * pts)
    tgt = np.stack([w.real, w.imag], axis=1)
    a_hat, th_hat, rms = packing.fit_disk_automorphism(z, tgt)
    assert rms < 1e-10
    assert abs(a_hat - a) < 1e-8


def test_schwarz_ratio_report():
    dom = np.array([1.0, 1.0, 1.0, 1.0])
    img = np.array([0.5, 0.6, 0.7, 0.8])
    rep = packing.schwarz_ratio_report(dom, img, [0, 3])
    assert rep.ratios[0] == pytest.approx(0.5)
    assert rep.ratios[1] == pytest.approx(0.8)
