"""Riemannian barycentric (Karcher mean) maps on model surfaces.

Three surface kinds: the Euclidean plane, the round sphere of radius rho
(points are ambient 3-vectors), and a conformally flat plane exp(2u)|dz|^2
with a caller-supplied analytic gradient of u.  The weighted mean is the
zero of the tangent field F(a) = sum lambda_i log_a(p_i), found by the
fixed-point iteration a <- exp_a(step F).

The flat cases are wired so that zero curvature costs nothing: with u = 0
every correction term evaluates to exactly 0.0, and mean, map samples and
pullback reports agree with the plane kind bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConjugateLocusError,
    GridTooCoarseError,
    NoConvergenceError,
    OutOfWorkingRegionError,
    PointsTooSpreadError,
)
from .structure import triangle_metric

SHOOT_TOL = 1e-13
ODE_TOL = 1e-12
RICHARDSON_FLOOR = 1e-10


@dataclass(frozen=True)
class ModelSurface:
    """Model geometry for barycentric maps.

    kind is "plane", "sphere" or "conformal".  curvature_bound is C0 for
    the kind (0, 1/rho^2, or supplied); gradient_bound stores the supplied
    C1 for conformally flat metrics.  The working region of a conformal
    surface is the closed disk (region_center, region_radius); curvature
    bounds inside it are the caller's responsibility, never estimated here.
    """

    kind: str
    rho: float = 1.0
    u: object = None
    grad_u: object = None
    region_center: tuple = (0.0, 0.0)
    region_radius: float = math.inf
    curvature_bound: float = 0.0
    gradient_bound: float = 0.0

    def __post_init__(self):
        if self.kind not in ("plane", "sphere", "conformal"):
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.kind == "sphere" and self.rho <= 0:
            raise ValueError("sphere radius must be positive")
        if self.kind == "conformal" and (self.u is None or self.grad_u is None):
            raise ValueError("conformal kind needs u and grad_u callables")


def plane() -> ModelSurface:
    return ModelSurface(kind="plane")


def sphere(rho: float = 1.0) -> ModelSurface:
    return ModelSurface(kind="sphere", rho=rho, curvature_bound=1.0 / rho**2)


def conformal_plane(u, grad_u, region_center=(0.0, 0.0),
                    region_radius: float = math.inf,
                    curvature_bound: float = 0.0,
                    gradient_bound: float = 0.0) -> ModelSurface:
    return ModelSurface(kind="conformal", u=u, grad_u=grad_u,
                        region_center=tuple(region_center),
                        region_radius=float(region_radius),
                        curvature_bound=float(curvature_bound),
                        gradient_bound=float(gradient_bound))


@dataclass(frozen=True)
class BarycentricPoint:
    """Weights lambda_0..lambda_k, non-negative, summing to 1 (to 1e-14)."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        object.__setattr__(self, "lam", lam)
        if (lam < 0).any():
            raise ValueError("negative barycentric coordinate")
        if abs(lam.sum() - 1.0) > 1e-14 * max(1.0, lam.size):
            raise ValueError("barycentric coordinates must sum to 1")


@dataclass(frozen=True)
class KarcherConfig:
    tolerance: float = 1e-12
    max_iterations: int = 256
    step_size: float = 1.0

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not (0.0 < self.step_size <= 1.0):
            raise ValueError("step size must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("need at least one iteration")


DEFAULT_CONFIG = KarcherConfig()


# ---------------------------------------------------------------------------
# Geometry kernels


def _check_region(surface: ModelSurface, p) -> None:
    if surface.region_radius == math.inf:
        return
    d = math.hypot(p[0] - surface.region_center[0],
                   p[1] - surface.region_center[1])
    if d > surface.region_radius * (1 + 1e-12):
        raise OutOfWorkingRegionError(
            f"point {np.asarray(p).tolist()} leaves the working region")


def _check_sphere_point(surface: ModelSurface, p) -> None:
    r = float(np.linalg.norm(p))
    if abs(r - surface.rho) > 1e-9 * surface.rho:
        raise ValueError(f"point norm {r} is not the sphere radius {surface.rho}")


def _sphere_exp(rho: float, a: np.ndarray, v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        return a.copy()
    th = n / rho
    return math.cos(th) * a + (math.sin(th) * rho / n) * v


def _sphere_log(rho: float, a: np.ndarray, p: np.ndarray) -> np.ndarray:
    c = float(a @ p) / rho**2
    c = min(1.0, max(-1.0, c))
    th = math.acos(c)
    if th >= math.pi * (1.0 - 1e-9):
        raise ConjugateLocusError("target is at or near the antipode")
    perp = p - c * a
    n = float(np.linalg.norm(perp))
    if n == 0.0:
        return np.zeros(3)
    return (rho * th / n) * perp


def _conformal_rhs(surface: ModelSurface, x, xd):
    # Geodesic equation of exp(2u)|dz|^2: x'' = -2(grad u . x')x' + |x'|^2 grad u.
    _check_region(surface, x)
    g = np.asarray(surface.grad_u(x), dtype=float)
    return -2.0 * float(g @ xd) * xd + float(xd @ xd) * g


def _integrate_deviation(surface: ModelSurface, a, v, n_steps: int):
    """RK4 for the deviation w of the geodesic from the chord a + t v.

    With u identically zero every stage is exactly 0.0, so the result adds
    nothing to a + v.
    """
    w = np.zeros(2)
    wd = np.zeros(2)
    h = 1.0 / n_steps
    for k in range(n_steps):
        t = k * h

        def acc(dt, wof, wdof):
            x = a + (t + dt) * v + wof
            return _conformal_rhs(surface, x, v + wdof)

        k1w, k1v = wd, acc(0.0, w, wd)
        k2w = wd + 0.5 * h * k1v
        k2v = acc(0.5 * h, w + 0.5 * h * k1w, k2w)
        k3w = wd + 0.5 * h * k2v
        k3v = acc(0.5 * h, w + 0.5 * h * k2w, k3w)
        k4w = wd + h * k3v
        k4v = acc(h, w + h * k3w, k4w)
        w = w + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        wd = wd + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return w


def _conformal_exp(surface: ModelSurface, a, v) -> np.ndarray:
    scale = float(np.linalg.norm(v)) + 1.0
    n = 32
    w = _integrate_deviation(surface, a, v, n)
    while n <= 1024:
        w2 = _integrate_deviation(surface, a, v, 2 * n)
        if float(np.abs(w - w2).max()) <= ODE_TOL * scale:
            w = w2
            break
        w = w2
        n *= 2
    out = (a + v) + w
    _check_region(surface, out)
    return out


def _conformal_log(surface: ModelSurface, a, p) -> np.ndarray:
    # Shooting with identity preconditioner; d exp is near the identity at
    # the scales the spread checks admit.
    v = p - a
    scale = 1.0 + float(np.linalg.norm(v))
    for _ in range(50):
        r = p - _conformal_exp(surface, a, v)
        if float(np.abs(r).max()) <= SHOOT_TOL * scale:
            return v
        v = v + r
    raise NoConvergenceError("geodesic shooting stalled",
                             residual=float(np.abs(r).max()))


# ---------------------------------------------------------------------------
# Public charts


def exp_map(surface: ModelSurface, a, v) -> np.ndarray:
    """Riemannian exponential at ``a`` applied to tangent ``v``."""
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    if surface.kind == "plane":
        return a + v
    if surface.kind == "sphere":
        _check_sphere_point(surface, a)
        n = float(np.linalg.norm(v))
        # Rounding-scale vectors are projected silently; a sizable normal
        # component means the caller passed a non-tangent vector.
        if n > 1e-9 * surface.rho and abs(float(a @ v)) > 1e-6 * surface.rho * n:
            raise ValueError("tangent vector is not orthogonal to the base")
        return _sphere_exp(surface.rho, a, v - (a @ v) / surface.rho**2 * a)
    _check_region(surface, a)
    return _conformal_exp(surface, a, v)


def log_map(surface: ModelSurface, a, p) -> np.ndarray:
    """Inverse exponential: the tangent at ``a`` pointing to ``p``."""
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    if surface.kind == "plane":
        return p - a
    if surface.kind == "sphere":
        _check_sphere_point(surface, a)
        _check_sphere_point(surface, p)
        return _sphere_log(surface.rho, a, p)
    _check_region(surface, a)
    _check_region(surface, p)
    return _conformal_log(surface, a, p)


def distance(surface: ModelSurface, p, q) -> float:
    """Geodesic distance between two surface points."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if surface.kind == "plane":
        return float(np.linalg.norm(q - p))
    if surface.kind == "sphere":
        _check_sphere_point(surface, p)
        _check_sphere_point(surface, q)
        c = float(p @ q) / surface.rho**2
        return surface.rho * math.acos(min(1.0, max(-1.0, c)))
    v = log_map(surface, p, q)
    return float(np.linalg.norm(v)) * math.exp(float(surface.u(p)))


def _tangent_norm(surface: ModelSurface, a, v) -> float:
    n = float(np.linalg.norm(v))
    if surface.kind == "conformal":
        return n * math.exp(float(surface.u(a)))
    return n


def _spread_guard(surface: ModelSurface, pts: np.ndarray) -> None:
    if surface.kind == "plane":
        return
    if surface.kind == "sphere":
        center = pts.mean(axis=0)
        n = float(np.linalg.norm(center))
        if n == 0.0:
            raise PointsTooSpreadError("points average to the sphere center")
        center = center * (surface.rho / n)
        limit = math.pi * surface.rho / 4.0
        for p in pts:
            if distance(surface, center, p) >= limit:
                raise PointsTooSpreadError(
                    "points do not fit in a quarter-injectivity ball")
        return
    for p in pts:
        _check_region(surface, p)
    if surface.curvature_bound > 0.0:
        limit = math.pi / (4.0 * math.sqrt(surface.curvature_bound))
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if distance(surface, pts[i], pts[j]) >= limit:
                    raise PointsTooSpreadError(
                        "points exceed the curvature-bound spread limit")


def karcher_mean(surface: ModelSurface, points, lam,
                 cfg: KarcherConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Weighted Riemannian center of mass.

    Returns a point with |sum lambda_i log_a(p_i)|_g <= cfg.tolerance.
    Zero-weight points never enter the field, so facets depend only on
    their own vertices.  On the plane the start value already is the
    answer: the linear barycenter, returned exactly.
    """
    pts = np.asarray(points, dtype=float)
    if not isinstance(lam, BarycentricPoint):
        lam = BarycentricPoint(lam=np.asarray(lam, dtype=float))
    w = lam.lam
    if w.size != pts.shape[0]:
        raise ValueError("one weight per point required")
    _spread_guard(surface, pts)

    if surface.kind == "sphere":
        start = np.einsum("i,ij->j", w, pts)
        start = start * (surface.rho / float(np.linalg.norm(start)))
    else:
        start = np.einsum("i,ij->j", w, pts)

    active = [i for i in range(w.size) if w[i] != 0.0]

    def tangent_field(a):
        F = np.zeros(pts.shape[1])
        for i in active:
            F = F + w[i] * log_map(surface, a, pts[i])
        return F, _tangent_norm(surface, a, F)

    a = start
    F, res = tangent_field(a)
    step = cfg.step_size
    for _ in range(cfg.max_iterations):
        if res <= cfg.tolerance:
            return a
        trial = exp_map(surface, a, step * F)
        F_t, res_t = tangent_field(trial)
        if res_t >= res and step > 1.0 / 1024.0:
            step *= 0.5
            continue
        a, F, res = trial, F_t, res_t
        step = min(cfg.step_size, 2.0 * step)
    if res <= cfg.tolerance:
        return a
    raise NoConvergenceError("Karcher iteration stalled", residual=res)


def psi_map(surface: ModelSurface, points, lam_grid,
            cfg: KarcherConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Sample the barycentric map at each row of ``lam_grid``."""
    pts = np.asarray(points, dtype=float)
    grid = np.asarray(lam_grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[None, :]
    out = np.empty((grid.shape[0], pts.shape[1]))
    for i, row in enumerate(grid):
        out[i] = karcher_mean(surface, pts, row, cfg)
    return out


# ---------------------------------------------------------------------------
# Pullback metric vs. the flat simplex metric


@dataclass
class PullbackReport:
    eps: float        # longest geodesic edge
    theta: float      # fullness 2 area / eps^2 of the comparison triangle
    max_dev: float    # worst relative two-form deviation over grid nodes
    beta: float       # max_dev / eps^2
    delta: float      # barycentric finite-difference step actually used
    nodes: int


def _inv_sqrt_spd(g: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(g)
    return vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T


def _metric_pairing(surface: ModelSurface, base, d1, d2) -> float:
    if surface.kind == "conformal":
        return math.exp(2.0 * float(surface.u(base))) * float(d1 @ d2)
    return float(d1 @ d2)


def _node_deviation(surface, pts, lam, delta, g_delta, s_half, cfg):
    """Relative deviation of the finite-difference pullback at one node."""
    base = karcher_mean(surface, pts, lam, cfg)
    cols = []
    for k in (1, 2):
        lp = lam.copy()
        lm = lam.copy()
        lp[k] += delta
        lp[0] -= delta
        lm[k] -= delta
        lm[0] += delta
        fp = karcher_mean(surface, pts, lp, cfg)
        fm = karcher_mean(surface, pts, lm, cfg)
        d = (fp - fm) / (2.0 * delta)
        if surface.kind == "sphere":
            nrm = base / surface.rho
            d = d - float(d @ nrm) * nrm
        cols.append(d)
    pull = np.array(
        [[_metric_pairing(surface, base, cols[0], cols[0]),
          _metric_pairing(surface, base, cols[0], cols[1])],
         [_metric_pairing(surface, base, cols[1], cols[0]),
          _metric_pairing(surface, base, cols[1], cols[1])]])
    E = s_half @ (pull - g_delta) @ s_half
    return float(np.abs(np.linalg.eigvalsh(E)).max())


def _richardson_gate(dev_coarse: float, dev_fine: float) -> None:
    """Reject estimates whose finite-difference error dominates the signal.

    Below the noise floor both runs just measure rounding; that is the flat
    case and not an error.
    """
    top = max(dev_coarse, dev_fine)
    if top <= RICHARDSON_FLOOR:
        return
    if abs(dev_coarse - dev_fine) > 0.5 * top:
        raise GridTooCoarseError(
            f"finite differences unstable: {dev_coarse:.3e} vs {dev_fine:.3e}")


def pullback_estimate(surface: ModelSurface, points, grid: int = 8,
                      delta: float = 1.0 / 64.0,
                      cfg: KarcherConfig = DEFAULT_CONFIG) -> PullbackReport:
    """Compare the pulled-back surface metric with the flat simplex metric.

    The flat comparison triangle has the pairwise geodesic distances as its
    side lengths; deviations are measured in its metric, normalized by
    eps^2 so the report's beta is the empirical constant of the quadratic
    error model.  Both the requested difference step and its half are run;
    disagreement beyond 50 percent raises GridTooCoarse.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] != 3:
        raise ValueError("pullback comparison needs exactly 3 points")
    l01 = distance(surface, pts[0], pts[1])
    l12 = distance(surface, pts[1], pts[2])
    l20 = distance(surface, pts[2], pts[0])
    tm = triangle_metric(l01, l12, l20)
    g_delta = tm.gram
    eps = max(l01, l12, l20)
    theta = 2.0 * tm.area / eps**2
    s_half = _inv_sqrt_spd(g_delta)

    margin = 1.5 * delta
    nodes = []
    for i in range(1, grid):
        for j in range(1, grid - i):
            lam = np.array([grid - i - j, i, j], dtype=float) / grid
            if lam.min() >= margin:
                nodes.append(lam)
    if not nodes:
        raise ValueError("no interior grid nodes clear the stencil margin")

    dev_c = max(_node_deviation(surface, pts, lam, delta, g_delta, s_half, cfg)
                for lam in nodes)
    dev_f = max(_node_deviation(surface, pts, lam, delta / 2.0, g_delta,
                                s_half, cfg)
                for lam in nodes)
    _richardson_gate(dev_c, dev_f)
    return PullbackReport(eps=eps, theta=theta, max_dev=dev_f,
                          beta=dev_f / eps**2, delta=delta / 2.0,
                          nodes=len(nodes))
