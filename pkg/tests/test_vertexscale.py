"""Vertex scaling: curvature, analytic Jacobian, Newton flattening."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discon import mesh, structure, vertexscale
from discon.errors import DegenerateTriangleError, NoConvergenceError


def perturbed_torus(p, q, seed, amp=0.1):
    t, lengths, _ = vertexscale.build_flat_torus(p, q)
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-amp, amp, size=t.n_vertices)
    scale = np.exp(xi[t.edges[:, 0]] + xi[t.edges[:, 1]])
    return t, lengths * scale, xi


def test_flat_torus_is_flat():
    t, lengths, _ = vertexscale.build_flat_torus(4, 5, width=1.0, height=0.7)
    assert t.is_closed()
    assert t.euler_characteristic() == 0
    rep = vertexscale.curvature(t, lengths)
    assert rep.interior_max_defect < 1e-12


def test_flatten_recovers_conformal_factor():
    # Perturbing by e^(xi_i + xi_j) is itself a vertex scaling, so the
    # flattening factor is exactly -xi up to an additive constant.
    t, lengths, xi = perturbed_torus(5, 5, seed=1)
    res = vertexscale.flatten(t, lengths, tol=1e-12)
    want = -(xi - xi.mean())
    assert np.abs(res.w - want).max() < 1e-9
    assert res.report.interior_max_defect < 1e-12
    assert res.newton_steps <= 20


def test_flatten_perturbed_tori_batch():
    for seed in range(5):
        t, lengths, _ = perturbed_torus(4, 6, seed=seed)
        res = vertexscale.flatten(t, lengths, tol=1e-11)
        assert res.report.interior_max_defect < 1e-10
        assert res.newton_steps <= 20
        # Gauge: factors sum to zero.
        assert abs(res.w.sum()) < 1e-10


def test_flatten_edge_multiplicative_noise():
    t, lengths, _ = vertexscale.build_flat_torus(5, 4)
    rng = np.random.default_rng(42)
    noisy = lengths * (1.0 + 0.02 * rng.uniform(-1, 1, size=lengths.size))
    res = vertexscale.flatten(t, noisy, tol=1e-11)
    assert res.report.interior_max_defect < 1e-10


def test_flatten_already_flat_noop():
    t, lengths, _ = vertexscale.build_flat_torus(4, 4)
    res = vertexscale.flatten(t, lengths, tol=1e-12)
    assert np.abs(res.w).max() < 1e-12
    assert res.newton_steps <= 1


def test_flatten_target_sum_validated():
    t, lengths, _ = vertexscale.build_flat_torus(4, 4)
    bad = np.full(t.n_vertices, 0.1)
    with pytest.raises(ValueError):
        vertexscale.flatten(t, lengths, targets=bad)


def test_flatten_budget_exhausted():
    t, lengths, _ = perturbed_torus(4, 4, seed=9)
    with pytest.raises(NoConvergenceError):
        vertexscale.flatten(t, lengths, tol=1e-14, max_steps=1)


def test_jacobian_matches_finite_differences():
    t, lengths, _ = perturbed_torus(4, 4, seed=3)
    rng = np.random.default_rng(8)
    w = rng.uniform(-0.05, 0.05, size=t.n_vertices)
    err = vertexscale.curvature_gradient_check(t, lengths, w, h=1e-6)
    assert err < 1e-6


def test_jacobian_symmetric_psd():
    t, lengths, _ = perturbed_torus(5, 5, seed=4)
    jac = vertexscale.curvature_jacobian(
        t, vertexscale.scaled_lengths(lengths, t, np.zeros(t.n_vertices)))
    assert np.abs(jac - jac.T).max() < 1e-12
    # Rows sum to zero: constants are in the kernel.
    assert np.abs(jac.sum(axis=1)).max() < 1e-12
    evals = np.linalg.eigvalsh(jac)
    assert evals.min() > -1e-10


def test_scaled_lengths_formula():
    t, lengths, _ = vertexscale.build_flat_torus(3, 3)
    w = np.linspace(-0.1, 0.1, t.n_vertices)
    out = vertexscale.scaled_lengths(lengths, t, w)
    want = lengths * np.exp(w[t.edges[:, 0]] + w[t.edges[:, 1]])
    assert np.allclose(out, want, rtol=1e-15)


def test_corner_angles_sum_to_pi():
    t, lengths, _ = perturbed_torus(4, 4, seed=6)
    ang = vertexscale.corner_angles_from_lengths(t, lengths)
    assert np.allclose(ang.sum(axis=1), math.pi, atol=1e-12)


def test_corner_angles_degenerate_raises():
    t, lengths, _ = vertexscale.build_flat_torus(3, 3)
    bad = lengths.copy()
    bad[0] = lengths.max() * 10
    with pytest.raises(DegenerateTriangleError):
        vertexscale.corner_angles_from_lengths(t, bad)


def test_triangle_boundary_targets():
    t, real = mesh.build_hex_patch(2)
    b = t.boundary_vertices
    corners = [int(b[0]), int(b[2]), int(b[4])]
    targets = vertexscale.triangle_boundary_targets(t, corners)
    # Euler characteristic 1: targets integrate to 2 pi.
    assert targets.sum() == pytest.approx(2 * math.pi, abs=1e-12)
    assert targets[corners[0]] == pytest.approx(2 * math.pi / 3)
    assert targets[~t.boundary_vertex_mask].max() == 0.0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_flatten_random_torus_property(seed):
    t, lengths, xi = perturbed_torus(3, 4, seed=seed, amp=0.08)
    res = vertexscale.flatten(t, lengths, tol=1e-10)
    assert res.report.interior_max_defect < 1e-9
    want = -(xi - xi.mean())
    assert np.abs(res.w - want).max() < 1e-7
