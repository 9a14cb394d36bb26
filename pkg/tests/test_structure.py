"""Conformal structures, edge lengths, Gram matrices, fullness bounds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discon import mesh, structure
from discon.errors import (
    DegenerateTriangleError,
    EdgeExceedsEpsError,
    NonPositiveSquaredLengthError,
)

TRI = mesh.build_triangulation([(0, 1, 2)])

finite_f = st.floats(min_value=-3.0, max_value=3.0)


def test_circle_packing_lengths():
    # Radii 2 and 3: tangent circles, length 5 (alpha = eta = 1).
    f = np.array([math.log(2.0), math.log(3.0), math.log(4.0)])
    fac = structure.circle_packing_factors(TRI, np.exp(f))
    lengths = structure.edge_lengths(TRI, fac)
    want = {(0, 1): 5.0, (1, 2): 7.0, (0, 2): 6.0}
    for (i, j), val in want.items():
        assert lengths[TRI.edge_id(i, j)] == pytest.approx(val, abs=1e-14)


def test_vertex_scaling_lengths():
    L = np.array([2.0, 3.0, 1.5])
    w = np.array([0.1, -0.2, 0.3])
    fac = structure.vertex_scaling_factors(TRI, L, w)
    lengths = structure.edge_lengths(TRI, fac)
    for eid, (i, j) in enumerate(TRI.edges):
        base = L[TRI.edge_id(i, j)] if False else None
    # Edge order is canonical; map background lengths onto it.
    want = L * np.exp(w[TRI.edges[:, 0]] + w[TRI.edges[:, 1]])
    assert np.allclose(lengths, want, rtol=1e-15)


def test_negative_squared_length_raises():
    # eta < 0 with alpha = 0 forces a negative squared length.
    fac = structure.ConformalFactors(
        alpha=np.zeros(3), eta=np.array([-1.0, 1.0, 1.0]),
        f=np.zeros(3))
    with pytest.raises(NonPositiveSquaredLengthError) as ei:
        structure.edge_lengths(TRI, fac)
    assert ei.value.value <= 0


@settings(max_examples=60, deadline=None)
@given(f0=finite_f, f1=finite_f, f2=finite_f, c=st.floats(-2.0, 2.0))
def test_length_homogeneity(f0, f1, f2, c):
    # Shifting every factor by c scales all lengths by e^c.
    f = np.array([f0, f1, f2])
    fac = structure.circle_packing_factors(TRI, np.exp(f))
    shifted = structure.circle_packing_factors(TRI, np.exp(f + c))
    a = structure.edge_lengths(TRI, fac)
    b = structure.edge_lengths(TRI, shifted)
    assert np.allclose(b, math.exp(c) * a, rtol=1e-12)


def test_triangle_area_pythagorean():
    assert structure.triangle_area(3.0, 4.0, 5.0) == pytest.approx(6.0, abs=1e-14)


def test_triangle_area_equilateral():
    assert structure.triangle_area(1.0, 1.0, 1.0) == pytest.approx(
        math.sqrt(3.0) / 4.0, abs=1e-15)


def test_triangle_area_degenerate_raises():
    with pytest.raises(DegenerateTriangleError):
        structure.triangle_area(1.0, 1.0, 2.5)


def test_triangle_angles_right():
    ang = structure.triangle_angles(3.0, 4.0, 5.0)
    # Right angle sits opposite the hypotenuse: at corner 2 for sides
    # (l01, l12, l20) = (3, 4, 5)? Corner angles ordered by vertex.
    assert sum(ang) == pytest.approx(math.pi, abs=1e-14)
    assert max(ang) == pytest.approx(math.pi / 2.0, abs=1e-14)


def test_fullness_equilateral():
    # Side-eps equilateral triangle: fullness is sqrt(3)/2, independent of eps.
    for eps in (0.1, 1.0, 2.0):
        th = structure.fullness(eps, eps, eps, eps)
        assert th == pytest.approx(math.sqrt(3.0) / 2.0, abs=1e-14)


def test_fullness_edge_exceeds_eps():
    with pytest.raises(EdgeExceedsEpsError):
        structure.fullness(1.0, 1.0, 1.0, 0.9)


def test_fullness_thin_triangle_small():
    th = structure.fullness(1.0, 1.0, 0.01, 1.0)
    assert 0 < th < 0.01


def test_triangle_metric_equilateral():
    m = structure.triangle_metric(1.0, 1.0, 1.0)
    assert np.allclose(m.gram, [[1.0, 0.5], [0.5, 1.0]], atol=1e-15)
    evals = np.linalg.eigvalsh(m.gram)
    assert np.allclose(evals, [0.5, 1.5], atol=1e-14)
    assert m.area == pytest.approx(math.sqrt(3.0) / 4.0, abs=1e-15)
    # det g = 4 area^2
    assert np.linalg.det(m.gram) == pytest.approx(4 * m.area**2, abs=1e-14)


def test_triangle_metric_233():
    m = structure.triangle_metric(2.0, 3.0, 3.0)
    assert m.gram[0, 0] == pytest.approx(4.0)
    assert m.gram[1, 1] == pytest.approx(9.0)
    assert m.gram[0, 1] == pytest.approx(2.0)


def test_metric_norm_matches_embedding():
    # Place the triangle in the plane; the Gram matrix of (B-A, C-A) must
    # reproduce Euclidean norms of tangent vectors in edge coordinates.
    A = np.array([0.2, -0.1])
    B = np.array([1.3, 0.4])
    C = np.array([0.5, 1.1])
    a = np.linalg.norm(B - A)
    b = np.linalg.norm(C - B)
    c = np.linalg.norm(A - C)
    m = structure.triangle_metric(a, b, c)
    rng = np.random.default_rng(7)
    for _ in range(20):
        u, v = rng.normal(size=2)
        vec = u * (B - A) + v * (C - A)
        assert m.norm_squared(np.array([u, v])) == pytest.approx(
            float(vec @ vec), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    x=st.floats(0.2, 2.0), y=st.floats(0.2, 2.0),
    z=st.floats(-0.8, 0.8),
)
def test_eigenvalue_bounds_random(x, y, z):
    # Random nondegenerate triangle with all sides <= eps.
    A = np.zeros(2)
    B = np.array([x, 0.0])
    C = np.array([z * x, y])
    a = float(np.linalg.norm(B - A))
    b = float(np.linalg.norm(C - B))
    c = float(np.linalg.norm(A - C))
    eps = max(a, b, c)
    th = structure.fullness(a, b, c, eps)
    m = structure.triangle_metric(a, b, c)
    rep = structure.eigenvalue_bounds_check(m, th, eps)
    assert rep.passed, rep


def test_eigenvalue_bounds_report_fields():
    m = structure.triangle_metric(1.0, 1.0, 1.0)
    rep = structure.eigenvalue_bounds_check(m, math.sqrt(3) / 2, 1.0)
    assert rep.lower <= rep.sqrt_lambda_min <= rep.sqrt_lambda_max <= rep.upper


def test_perturbation_within_mu():
    g = structure.triangle_metric(1.0, 1.0, 1.0).gram
    lam_min = np.linalg.eigvalsh(g)[0]
    mu = 0.25
    # Perturb by mu * lam_min / n with n = 2 on the diagonal: within budget.
    gbar = g + np.eye(2) * (mu * lam_min / 2.0) * 0.99
    rep = structure.metric_perturbation_check(g, gbar, mu)
    assert rep.passed
    assert rep.worst_ratio <= mu


def test_perturbation_exceeds_mu():
    g = structure.triangle_metric(1.0, 1.0, 1.0).gram
    gbar = g * 2.0  # relative distortion 1.0 in every direction
    rep = structure.metric_perturbation_check(g, gbar, 0.5)
    assert not rep.passed
    assert rep.worst_ratio == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    x=st.floats(0.3, 1.5), y=st.floats(0.3, 1.5), z=st.floats(-0.5, 0.5),
    mu=st.floats(0.01, 0.9), seed=st.integers(0, 2**32 - 1),
)
def test_perturbation_lemma_random(x, y, z, mu, seed):
    # Entrywise bound |g_ij - gbar_ij| <= mu lam_min / n implies the
    # quadratic-form bound |(g - gbar)(v, v)| <= mu |v|_g^2.
    A = np.zeros(2)
    B = np.array([x, 0.0])
    C = np.array([z * x, y])
    a = float(np.linalg.norm(B - A))
    b = float(np.linalg.norm(C - B))
    c = float(np.linalg.norm(A - C))
    g = structure.triangle_metric(a, b, c).gram
    lam_min = float(np.linalg.eigvalsh(g)[0])
    rng = np.random.default_rng(seed)
    pert = rng.uniform(-1.0, 1.0, size=(2, 2))
    pert = (pert + pert.T) / 2.0
    scale = mu * lam_min / 2.0
    if np.abs(pert).max() > 0:
        pert *= scale / np.abs(pert).max()
    gbar = g + pert
    rep = structure.metric_perturbation_check(g, gbar, mu)
    assert rep.passed, rep
    # Spot check the quadratic form directly.
    for _ in range(8):
        v = rng.normal(size=2)
        lhs = abs(v @ (g - gbar) @ v)
        rhs = mu * (v @ g @ v)
        assert lhs <= rhs * (1 + 1e-9)


def test_angle_sum_report_single_triangle():
    ang = np.array([structure.triangle_angles(3.0, 4.0, 5.0)])
    rep = structure.angle_sum_report(TRI, ang)
    # chi = 1, all three vertices on the boundary: defects sum to 2 pi chi.
    assert rep.gauss_bonnet_residual == pytest.approx(0.0, abs=1e-12)
    assert rep.angle_sums.sum() == pytest.approx(math.pi, abs=1e-14)


def test_angle_sum_report_flat_hex():
    t, real = mesh.build_hex_patch(2)
    tri_pos = real.positions[t.triangles]
    angs = np.zeros((t.n_triangles, 3))
    for tid in range(t.n_triangles):
        A, B, C = tri_pos[tid]
        a = np.linalg.norm(B - A)
        b = np.linalg.norm(C - B)
        c = np.linalg.norm(A - C)
        angs[tid] = structure.triangle_angles(a, b, c)
    rep = structure.angle_sum_report(t, angs)
    assert rep.interior_max_defect == pytest.approx(0.0, abs=1e-12)
    assert rep.gauss_bonnet_residual == pytest.approx(0.0, abs=1e-12)
