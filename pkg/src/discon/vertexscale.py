"""Vertex scaling: prescribing curvature by per-vertex length rescaling.

A background metric assigns a length L_ij to every edge; the scaled metric
is ``l_ij = L_ij * exp(w_i + w_j)``.  The flattener runs Newton's method on
the angle defects K with the analytic cotangent Jacobian, keeping the gauge
``sum w = 0`` and halving steps that would break a triangle inequality.
No combinatorial surgery is performed: if no step length preserves all
triangle inequalities the solve stops with an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateTriangleError,
    DegenerationBlockedError,
    NoConvergenceError,
)
from .mesh import Triangulation, build_triangulation
from .structure import AngleSumReport, angle_sum_report, triangle_edge_lengths

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_STEPS = 50

# Relative slack demanded from every triangle inequality during line search.
_DEGENERACY_MARGIN = 1e-10


def corner_angles_from_lengths(t: Triangulation, lengths: np.ndarray) -> np.ndarray:
    """(T, 3) corner angles of the piecewise flat metric given by ``lengths``.

    Raises
    ------
    DegenerateTriangleError
        Carrying the first triangle id whose inequality fails.
    """
    tl = triangle_edge_lengths(t, lengths)
    a, b, c = tl[:, 0], tl[:, 1], tl[:, 2]  # l01, l12, l20
    margin = np.minimum(np.minimum(a + b - c, b + c - a), a + c - b)
    bad = margin <= _DEGENERACY_MARGIN * tl.max(axis=1)
    if bad.any():
        tid = int(np.nonzero(bad)[0][0])
        raise DegenerateTriangleError(tid, tuple(tl[tid]))
    cos0 = (a * a + c * c - b * b) / (2.0 * a * c)
    cos1 = (a * a + b * b - c * c) / (2.0 * a * b)
    cos2 = (b * b + c * c - a * a) / (2.0 * b * c)
    ang = np.arccos(np.clip(np.stack([cos0, cos1, cos2], axis=1), -1.0, 1.0))
    return ang


def scaled_lengths(background: np.ndarray, t: Triangulation,
                   w: np.ndarray) -> np.ndarray:
    ew = np.exp(np.asarray(w, dtype=float))
    return (np.asarray(background, dtype=float)
            * ew[t.edges[:, 0]] * ew[t.edges[:, 1]])


def curvature(t: Triangulation, lengths) -> AngleSumReport:
    """Angle defects: 2 pi minus angle sum at interior vertices, pi minus
    angle sum on the boundary."""
    ang = corner_angles_from_lengths(t, np.asarray(lengths, dtype=float))
    return angle_sum_report(t, ang)


def curvature_jacobian(t: Triangulation, lengths: np.ndarray) -> np.ndarray:
    """Dense matrix dK_i / dw_j of the scaled metric at the current lengths.

    Per triangle, the angle at corner i moves with the scale factors by
    d theta_i / d w_j = cot(theta_k) for the third corner k, and the
    diagonal entries follow from scale invariance (rows sum to zero).
    """
    ang = corner_angles_from_lengths(t, lengths)
    cot = 1.0 / np.tan(ang)
    n = t.n_vertices
    jac = np.zeros((n, n))
    tri = t.triangles
    for k in range(3):
        i = tri[:, (k + 1) % 3]
        j = tri[:, (k + 2) % 3]
        c = cot[:, k]
        # dK_i/dw_j = -sum over triangles of cot(angle at the third corner)
        np.add.at(jac, (i, j), -c)
        np.add.at(jac, (j, i), -c)
        np.add.at(jac, (i, i), c)
        np.add.at(jac, (j, j), c)
    return jac


@dataclass
class FlattenResult:
    w: np.ndarray
    lengths: np.ndarray
    report: AngleSumReport
    newton_steps: int


def flatten(t: Triangulation, background_lengths, targets=None,
            tol: float = DEFAULT_TOLERANCE,
            max_steps: int = DEFAULT_MAX_STEPS) -> FlattenResult:
    """Solve for w with prescribed angle defects.

    ``targets`` defaults to zero everywhere (flat); for surfaces with
    boundary pass explicit boundary defects.  The target total must match
    2 pi times the Euler characteristic.

    Raises
    ------
    NoConvergenceError
        Newton budget exhausted.
    DegenerationBlockedError
        No step length preserves the triangle inequalities.
    """
    base = np.asarray(background_lengths, dtype=float)
    if targets is None:
        targets = np.zeros(t.n_vertices)
    targets = np.asarray(targets, dtype=float)
    total = 2.0 * math.pi * t.euler_characteristic()
    if abs(targets.sum() - total) > 1e-9:
        raise ValueError(
            f"target defects sum to {targets.sum():.12g}, "
            f"Gauss-Bonnet requires {total:.12g}")

    w = np.zeros(t.n_vertices)
    lengths = scaled_lengths(base, t, w)
    report = curvature(t, lengths)
    for step in range(max_steps):
        resid = report.defects - targets
        if float(np.abs(resid).max()) <= tol:
            return FlattenResult(w=w, lengths=lengths, report=report,
                                 newton_steps=step)
        jac = curvature_jacobian(t, lengths)
        delta, *_ = np.linalg.lstsq(jac, -resid, rcond=None)
        delta -= delta.mean()
        lam = 1.0
        while True:
            w_try = w + lam * delta
            w_try -= w_try.mean()
            try:
                lengths_try = scaled_lengths(base, t, w_try)
                report_try = curvature(t, lengths_try)
                break
            except DegenerateTriangleError:
                lam *= 0.5
                if lam < 1e-12:
                    raise DegenerationBlockedError(
                        "no Newton step length keeps all triangles "
                        "nondegenerate") from None
        w, lengths, report = w_try, lengths_try, report_try
    resid = report.defects - targets
    if float(np.abs(resid).max()) <= tol:
        return FlattenResult(w=w, lengths=lengths, report=report,
                             newton_steps=max_steps)
    raise NoConvergenceError(
        f"flatten: residual {np.abs(resid).max():.3e} after {max_steps} steps",
        residual=float(np.abs(resid).max()))


def curvature_gradient_check(t: Triangulation, background_lengths,
                             w, h: float = 1e-5) -> float:
    """Max relative error between the analytic Jacobian and central
    differences of the defect vector."""
    base = np.asarray(background_lengths, dtype=float)
    w = np.asarray(w, dtype=float)
    jac = curvature_jacobian(t, scaled_lengths(base, t, w))
    fd = np.zeros_like(jac)
    for j in range(t.n_vertices):
        wp = w.copy()
        wp[j] += h
        wm = w.copy()
        wm[j] -= h
        kp = curvature(t, scaled_lengths(base, t, wp)).defects
        km = curvature(t, scaled_lengths(base, t, wm)).defects
        fd[:, j] = (kp - km) / (2.0 * h)
    scale = max(float(np.abs(jac).max()), 1e-30)
    return float(np.abs(jac - fd).max()) / scale


def triangle_boundary_targets(t: Triangulation, corners) -> np.ndarray:
    """Defect targets that flatten a disk onto a triangle: zero at interior
    and boundary-edge vertices, 2 pi / 3 at the three marked corners."""
    corners = [int(c) for c in corners]
    if len(corners) != 3 or len(set(corners)) != 3:
        raise ValueError("need three distinct corner vertices")
    if not all(t.boundary_vertex_mask[c] for c in corners):
        raise ValueError("corners must be boundary vertices")
    targets = np.zeros(t.n_vertices)
    targets[corners] = 2.0 * math.pi / 3.0
    return targets


def build_flat_torus(p: int, q: int, width: float = 1.0, height: float = 1.0):
    """Flat torus from a p x q fundamental-domain grid with wraparound.

    Each grid cell is split into two triangles.  Returns
    ``(triangulation, lengths, grid)`` where ``grid[j, i]`` is the vertex id
    of lattice node (i, j) and ``lengths`` is the canonical edge-length
    vector of the flat metric.
    """
    if p < 3 or q < 3:
        raise ValueError("need p, q >= 3 for a simplicial torus")
    grid = np.arange(p * q, dtype=np.int64).reshape(q, p)
    hx = width / p
    hy = height / q
    diag = math.hypot(hx, hy)
    tris = []
    seglen = {}

    def add_edge(a, b, val):
        key = (a, b) if a < b else (b, a)
        seglen[key] = val

    for j in range(q):
        for i in range(p):
            v00 = int(grid[j, i])
            v10 = int(grid[j, (i + 1) % p])
            v01 = int(grid[(j + 1) % q, i])
            v11 = int(grid[(j + 1) % q, (i + 1) % p])
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
            add_edge(v00, v10, hx)
            add_edge(v01, v11, hx)
            add_edge(v00, v01, hy)
            add_edge(v10, v11, hy)
            add_edge(v00, v11, diag)

    t = build_triangulation(tris, n_vertices=p * q)
    lengths = np.array([seglen[(int(a), int(b))] for a, b in t.edges])
    return t, lengths, grid
