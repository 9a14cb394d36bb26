"""Two-parameter conformal structure algebra and triangle metric tools.

The edge-length rule implemented here is

    l_ij^2 = alpha_i * exp(2 f_i) + alpha_j * exp(2 f_j)
             + 2 * eta_ij * exp(f_i + f_j)

Two instances matter in practice: tangent circle packings
(``alpha = 1``, ``eta = 1``, where ``exp(f)`` is the circle radius) and
vertex scaling (``alpha = 0``, ``eta = L^2 / 2``, where ``f = 2 w`` rescales
a background length ``L``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateTriangleError,
    EdgeExceedsEpsError,
    NonPositiveSquaredLengthError,
)
from .mesh import Triangulation

# Relative margin below which a triangle counts as degenerate.
NONDEGENERACY_MARGIN = 1e-12


@dataclass
class ConformalFactors:
    """Per-vertex alpha, per-edge eta (canonical edge order), per-vertex f."""

    alpha: np.ndarray
    eta: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        self.f = np.asarray(self.f, dtype=float)


def circle_packing_factors(t: Triangulation, radii) -> ConformalFactors:
    """Structure whose lengths are r_i + r_j (tangent circles)."""
    r = np.asarray(radii, dtype=float)
    return ConformalFactors(alpha=np.ones(t.n_vertices),
                            eta=np.ones(t.n_edges),
                            f=np.log(r))


def vertex_scaling_factors(t: Triangulation, background_lengths, w) -> ConformalFactors:
    """Structure whose lengths are L_ij * exp(w_i + w_j)."""
    ll = np.asarray(background_lengths, dtype=float)
    return ConformalFactors(alpha=np.zeros(t.n_vertices),
                            eta=0.5 * ll * ll,
                            f=2.0 * np.asarray(w, dtype=float))


def edge_lengths(t: Triangulation, factors: ConformalFactors) -> np.ndarray:
    """Edge lengths of the conformal structure, canonical edge order.

    Raises
    ------
    NonPositiveSquaredLengthError
        On the first edge (in canonical order) whose squared length is not
        positive.  The exception carries the edge and the offending value;
        policy on partial data is left to the caller.
    """
    i = t.edges[:, 0]
    j = t.edges[:, 1]
    ef = np.exp(factors.f)
    sq = (factors.alpha[i] * ef[i] ** 2 + factors.alpha[j] * ef[j] ** 2
          + 2.0 * factors.eta * ef[i] * ef[j])
    bad = np.nonzero(sq <= 0.0)[0]
    if bad.size:
        e = int(bad[0])
        raise NonPositiveSquaredLengthError(t.edges[e], sq[e])
    return np.sqrt(sq)


def triangle_edge_lengths(t: Triangulation, lengths: np.ndarray) -> np.ndarray:
    """Per-triangle lengths (l01, l12, l20) in vertex-corner order.

    Column k is the length of the edge from corner k to corner k+1.
    """
    return np.asarray(lengths, dtype=float)[t.tri_edges]


def triangle_area(a: float, b: float, c: float) -> float:
    """Triangle area from side lengths, stable for needle triangles.

    Sorts the sides and evaluates the rearranged Heron product so no
    catastrophic cancellation occurs.  Returns 0.0 for degenerate input and
    raises on input violating the (non-strict) triangle inequality.
    """
    a, b, c = sorted((float(a), float(b), float(c)), reverse=True)
    if c - (a - b) < 0:
        if c - (a - b) > -NONDEGENERACY_MARGIN * a:
            return 0.0
        raise DegenerateTriangleError(None, (a, b, c))
    s = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(max(s, 0.0))


def triangle_nondegenerate(a: float, b: float, c: float) -> tuple:
    """Strict triangle inequality test.

    Returns ``(ok, margin)`` where margin is the smallest inequality slack;
    ``ok`` requires the margin to exceed a relative threshold of the longest
    side.
    """
    margin = min(a + b - c, b + c - a, a + c - b)
    return margin > NONDEGENERACY_MARGIN * max(a, b, c), float(margin)


def triangle_angles(a: float, b: float, c: float) -> tuple:
    """Angles (at corner 0, 1, 2) of the triangle with l01=a, l12=b, l20=c.

    Raises
    ------
    DegenerateTriangleError
        If the strict triangle inequality fails.
    """
    ok, _ = triangle_nondegenerate(a, b, c)
    if not ok:
        raise DegenerateTriangleError(None, (a, b, c))
    # Corner 0 sits between sides a=l01 and c=l20, opposite b=l12.
    cos0 = (a * a + c * c - b * b) / (2.0 * a * c)
    cos1 = (a * a + b * b - c * c) / (2.0 * a * b)
    cos2 = (b * b + c * c - a * a) / (2.0 * b * c)
    ang0 = math.acos(min(1.0, max(-1.0, cos0)))
    ang1 = math.acos(min(1.0, max(-1.0, cos1)))
    ang2 = math.pi - ang0 - ang1
    if ang2 < 0.0:
        ang2 = math.acos(min(1.0, max(-1.0, cos2)))
    return ang0, ang1, ang2


def fullness(a: float, b: float, c: float, eps: float, ndim: int = 2) -> float:
    """Fullness theta of a triangle relative to the scale ``eps``.

    For ``ndim = 2`` this is ``n! Vol / eps^n = 2 * Area / eps^2``.  The
    triangle is (theta0, eps)-full iff the returned value is >= theta0.

    Raises
    ------
    EdgeExceedsEpsError
        If any side exceeds ``eps`` (the definition requires all edges
        to be at most eps).
    NotImplementedError
        For ``ndim != 2``; the signature is kept dimension-generic.
    """
    if ndim != 2:
        raise NotImplementedError("only 2-dimensional fullness is implemented")
    longest = max(a, b, c)
    if longest > eps * (1.0 + 1e-12):
        raise EdgeExceedsEpsError(
            f"edge length {longest} exceeds eps = {eps}")
    return 2.0 * triangle_area(a, b, c) / (eps * eps)


@dataclass
class TriangleMetric:
    """Constant metric of a realized triangle in unit-simplex coordinates.

    ``gram`` is the 2x2 Gram matrix of the edge vectors from corner 0:
    diagonal ``l01^2, l20^2``, off-diagonal ``l01 * l20 * cos(angle at 0)``.
    """

    gram: np.ndarray
    area: float

    @property
    def inverse(self) -> np.ndarray:
        det = self.gram[0, 0] * self.gram[1, 1] - self.gram[0, 1] ** 2
        return np.array([[self.gram[1, 1], -self.gram[0, 1]],
                         [-self.gram[0, 1], self.gram[0, 0]]]) / det

    def norm_squared(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self.gram @ v)


def triangle_metric(a: float, b: float, c: float) -> TriangleMetric:
    """Gram matrix and area of the triangle with l01=a, l12=b, l20=c.

    The Gram determinant equals ``4 * area^2``; both quantities are computed
    independently (polarization vs. stable Heron) and used as a cross-check
    by callers.

    Raises
    ------
    DegenerateTriangleError
        If the strict triangle inequality fails.
    """
    ok, _ = triangle_nondegenerate(a, b, c)
    if not ok:
        raise DegenerateTriangleError(None, (a, b, c))
    g01 = 0.5 * (a * a + c * c - b * b)
    gram = np.array([[a * a, g01], [g01, c * c]])
    return TriangleMetric(gram=gram, area=triangle_area(a, b, c))


@dataclass
class EigenvalueBoundsReport:
    """Spectral check of a (theta, eps)-full triangle's Gram matrix.

    The square roots of both eigenvalues must lie in
    ``[theta * eps * n^(1-n), eps * n]`` (n = 2 here).
    """

    sqrt_lambda_min: float
    sqrt_lambda_max: float
    lower: float
    upper: float
    passed: bool


def eigenvalue_bounds_check(metric: TriangleMetric, theta: float,
                            eps: float) -> EigenvalueBoundsReport:
    """Evaluate the fullness eigenvalue bounds; never raises."""
    g = metric.gram
    tr = g[0, 0] + g[1, 1]
    det = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    disc = max(0.25 * tr * tr - det, 0.0)
    root = math.sqrt(disc)
    lam_min = max(0.5 * tr - root, 0.0)
    lam_max = 0.5 * tr + root
    lower = theta * eps / 2.0
    upper = 2.0 * eps
    s_min = math.sqrt(lam_min)
    s_max = math.sqrt(lam_max)
    passed = (s_min >= lower * (1.0 - 1e-12)
              and s_max <= upper * (1.0 + 1e-12))
    return EigenvalueBoundsReport(sqrt_lambda_min=s_min, sqrt_lambda_max=s_max,
                                  lower=lower, upper=upper, passed=passed)


@dataclass
class PerturbationReport:
    """Worst relative quadratic-form deviation of a perturbed Gram matrix."""

    worst_ratio: float   # max over v of |(g - g_bar)(v, v)| / |v|_g^2
    mu: float
    passed: bool


def metric_perturbation_check(g: np.ndarray, g_bar: np.ndarray,
                              mu: float) -> PerturbationReport:
    """Quadratic-form perturbation bound.

    If every entry of ``g - g_bar`` is at most ``mu * lambda_min(g) / n`` in
    absolute value, then ``|(g - g_bar)(v, v)| <= mu * |v|_g^2`` for every
    vector v.  Reports whether the conclusion holds for the supplied pair
    (checked exactly via a generalized eigenvalue computation), regardless of
    whether the entry-wise hypothesis does.
    """
    g = np.asarray(g, dtype=float)
    g_bar = np.asarray(g_bar, dtype=float)
    diff = g - g_bar
    # max |v' diff v| / v' g v  ==  spectral radius of g^{-1/2} diff g^{-1/2}
    lam, vecs = np.linalg.eigh(g)
    if lam.min() <= 0:
        raise ValueError("g must be positive definite")
    half = vecs @ np.diag(1.0 / np.sqrt(lam)) @ vecs.T
    dev = float(np.abs(np.linalg.eigvalsh(half @ diff @ half)).max())
    return PerturbationReport(worst_ratio=dev, mu=mu,
                              passed=bool(dev <= mu * (1.0 + 1e-12)))


@dataclass
class AngleSumReport:
    """Angle sums and angle defects of a triangulated surface.

    ``defects[v]`` is ``2 pi - angle sum`` at interior vertices and
    ``pi - angle sum`` at boundary vertices.  ``gauss_bonnet_residual`` is
    the defect total minus ``2 pi chi`` (minus the total hyperbolic area
    when the angle data is hyperbolic), which vanishes for any consistent
    angle assignment.
    """

    angle_sums: np.ndarray
    defects: np.ndarray
    interior_max_defect: float
    gauss_bonnet_residual: float
    hyperbolic_area: float = 0.0


def angle_sum_report(t: Triangulation, corner_angles: np.ndarray,
                     hyperbolic_area: float = 0.0) -> AngleSumReport:
    """Aggregate per-corner angles into sums and defects.

    ``corner_angles`` is (T, 3), entry k the angle at ``triangles[t, k]``.
    """
    sums = np.zeros(t.n_vertices)
    np.add.at(sums, t.triangles.ravel(), corner_angles.ravel())
    target = np.where(t.boundary_vertex_mask, math.pi, 2.0 * math.pi)
    defects = target - sums
    interior = ~t.boundary_vertex_mask
    interior_max = float(np.abs(defects[interior]).max()) if interior.any() else 0.0
    chi = t.euler_characteristic()
    residual = float(defects.sum() - 2.0 * math.pi * chi - hyperbolic_area)
    return AngleSumReport(angle_sums=sums, defects=defects,
                          hyperbolic_area=hyperbolic_area,
                          interior_max_defect=interior_max,
                          gauss_bonnet_residual=residual)
