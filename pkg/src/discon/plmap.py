"""Piecewise-linear maps between two planar realizations of one triangulation.

Diagnostics for discrete conformal data: the vertexwise factor-ratio field H,
its linear interpolation e^F, local rigidity (LDCR) tables s_m, pullback
metrics, two-sided sandwich checks, dilatation, and the generation-vs-distance
inequalities for combinatorial disks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateTriangleError,
    OrientationMismatchError,
    OutsideCarrierError,
)
from .mesh import CombinatorialDisk, PlanarRealization, Triangulation, generations
from .structure import ConformalFactors, TriangleMetric, edge_lengths, triangle_metric

VERTEX_MATCH_TOL = 1e-10
LOCATE_TOL = 1e-9

# D-frame probe vectors: basis, sum, difference.  A two-sided bound on this
# set controls the full quadratic form by polarization.
SAMPLE_VECTORS = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]])


def _as_positions(obj) -> np.ndarray:
    if isinstance(obj, PlanarRealization):
        return obj.positions
    if hasattr(obj, "realization"):
        return obj.realization.positions
    return np.asarray(obj, dtype=float)


@dataclass
class PLMap:
    """Simplicial map taking each domain triangle affinely onto its image.

    ``linear[t]`` is the 2x2 matrix and ``offset[t]`` the translation of the
    affine map on triangle ``t``; vertices are matched exactly, so the maps
    agree along shared edges.
    """

    t: Triangulation
    domain: np.ndarray   # (V, 2)
    image: np.ndarray    # (V, 2)
    linear: np.ndarray   # (T, 2, 2)
    offset: np.ndarray   # (T, 2)

    def triangle_corners(self, tid: int) -> np.ndarray:
        return self.domain[self.t.triangles[tid]]


def build_plmap(t: Triangulation, domain, image) -> PLMap:
    """Assemble the per-triangle affine maps from two realizations.

    Raises
    ------
    DegenerateTriangleError
        A domain triangle has (numerically) zero area.
    OrientationMismatchError
        An image triangle is degenerate or flipped relative to its domain
        triangle.
    """
    dom = _as_positions(domain)
    img = _as_positions(image)
    tri = t.triangles
    a, b, c = dom[tri[:, 0]], dom[tri[:, 1]], dom[tri[:, 2]]
    ta, tb, tc = img[tri[:, 0]], img[tri[:, 1]], img[tri[:, 2]]

    e1 = b - a
    e2 = c - a
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    scale = np.maximum(np.abs(e1).max(axis=1), np.abs(e2).max(axis=1)) ** 2
    bad = np.abs(det) <= 1e-14 * np.maximum(scale, 1e-300)
    if bad.any():
        tid = int(np.nonzero(bad)[0][0])
        raise DegenerateTriangleError(
            tid, lengths=(float(np.linalg.norm(e1[tid])),
                          float(np.linalg.norm(e2[tid])),
                          float(np.linalg.norm(e2[tid] - e1[tid]))))

    # Solve A [e1 e2] = [f1 f2] columnwise.
    f1 = tb - ta
    f2 = tc - ta
    inv = np.empty((t.n_triangles, 2, 2))
    inv[:, 0, 0] = e2[:, 1] / det
    inv[:, 0, 1] = -e2[:, 0] / det
    inv[:, 1, 0] = -e1[:, 1] / det
    inv[:, 1, 1] = e1[:, 0] / det
    F = np.stack([f1, f2], axis=2)           # (T, 2, 2), columns f1 f2
    linear = F @ inv
    offset = ta - np.einsum("tij,tj->ti", linear, a)

    idet = f1[:, 0] * f2[:, 1] - f1[:, 1] * f2[:, 0]
    flipped = idet * np.sign(det) <= 0
    if flipped.any():
        tid = int(np.nonzero(flipped)[0][0])
        raise OrientationMismatchError(
            f"image triangle {tid} is degenerate or reverses orientation")

    m = PLMap(t=t, domain=dom, image=img, linear=linear, offset=offset)
    # Vertices must be matched exactly; guards against ill-conditioned solves.
    for k in range(3):
        v = tri[:, k]
        got = np.einsum("tij,tj->ti", linear, dom[v]) + offset
        err = np.abs(got - img[v]).max()
        if err > VERTEX_MATCH_TOL * max(1.0, np.abs(img).max()):
            raise DegenerateTriangleError(
                int(np.argmax(np.abs(got - img[v]).max(axis=1))))
    return m


def locate(m: PLMap, p) -> tuple:
    """Containing triangle id and barycentric coordinates of ``p``.

    Brute force over triangles; on edges and vertices the lowest triangle id
    wins, which keeps evaluation deterministic.

    Raises
    ------
    OutsideCarrierError
        ``p`` lies in no triangle (up to a small relative slack).
    """
    p = np.asarray(p, dtype=float)
    tri = m.t.triangles
    a = m.domain[tri[:, 0]]
    b = m.domain[tri[:, 1]]
    c = m.domain[tri[:, 2]]
    # Signed areas of the three sub-triangles against the whole.
    def cross(u, v):
        return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    full = cross(b - a, c - a)
    l0 = cross(b - p, c - p) / full
    l1 = cross(c - p, a - p) / full
    l2 = cross(a - p, b - p) / full
    lam = np.stack([l0, l1, l2], axis=1)
    inside = (lam >= -LOCATE_TOL).all(axis=1)
    ids = np.nonzero(inside)[0]
    if ids.size == 0:
        raise OutsideCarrierError(f"point {p.tolist()} is outside the carrier")
    tid = int(ids[0])
    lamt = np.clip(lam[tid], 0.0, None)
    return tid, lamt / lamt.sum()


def evaluate(m: PLMap, points) -> np.ndarray:
    """Apply the PL map to one point or an array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty_like(pts)
    for i, p in enumerate(pts):
        tid, _ = locate(m, p)
        out[i] = m.linear[tid] @ p + m.offset[tid]
    if np.asarray(points).ndim == 1:
        return out[0]
    return out


@dataclass
class RatioField:
    """Pointwise ratio H(v) = exp(f_tilde(v) - f(v)) of conformal factors."""

    H: np.ndarray

    def __post_init__(self):
        if (self.H <= 0).any() or not np.isfinite(self.H).all():
            raise ValueError("ratio field must be positive and finite")


def ratio_field(f: ConformalFactors, f_tilde: ConformalFactors) -> RatioField:
    if f.f.shape != f_tilde.f.shape:
        raise ValueError("factor sets live on different vertex sets")
    return RatioField(H=np.exp(f_tilde.f - f.f))


def interpolate_eF(t: Triangulation, rf: RatioField, tid: int, lam) -> float:
    """Linear interpolation of H^2 over triangle ``tid`` at barycentric lam."""
    lam = np.asarray(lam, dtype=float)
    if (lam < -1e-12).any() or abs(lam.sum() - 1.0) > 1e-9:
        raise ValueError("barycentric coordinates must be a convex combination")
    h2 = rf.H[t.triangles[tid]] ** 2
    return float(lam @ h2)


@dataclass
class LDCREstimate:
    """Table m -> s_m of worst multiplicative factor deviations.

    s_m maximizes |exp(d) - 1| over both orientations of every edge whose
    endpoints both have generation >= m; the table is non-increasing in m.
    """

    s: np.ndarray          # index m, 0..max generation
    edge_generation: np.ndarray
    edge_deviation: np.ndarray

    def s_at(self, m: int) -> float:
        m = min(int(m), self.s.size - 1)
        return float(self.s[m])

    def alpha(self) -> float:
        """Measured properness bound: max of m * s_m over m >= 1."""
        if self.s.size <= 1:
            return 0.0
        ms = np.arange(1, self.s.size)
        return float((ms * self.s[1:]).max())


def estimate_ldcr(t: Triangulation, f: ConformalFactors,
                  f_tilde: ConformalFactors,
                  gens: np.ndarray | None = None) -> LDCREstimate:
    """Measure the local-rigidity table from two factor assignments.

    The deviation of an edge (v, w) is max over both orientations of
    |exp(u(w) - u(v)) - 1| with u = f_tilde - f, which equals
    exp(|u(w) - u(v)|) - 1.
    """
    if gens is None:
        gens = generations(t)
    u = f_tilde.f - f.f
    d = np.abs(u[t.edges[:, 1]] - u[t.edges[:, 0]])
    dev = np.expm1(d)
    egen = np.minimum(gens[t.edges[:, 0]], gens[t.edges[:, 1]])
    gmax = int(gens.max())
    s = np.zeros(gmax + 1)
    # Suffix maximum over edges ordered by their generation.
    order = np.argsort(egen, kind="stable")
    sorted_gen = egen[order]
    sorted_dev = dev[order]
    suffix = np.maximum.accumulate(sorted_dev[::-1])[::-1]
    for m in range(gmax + 1):
        k = np.searchsorted(sorted_gen, m, side="left")
        s[m] = suffix[k] if k < sorted_dev.size else 0.0
    return LDCREstimate(s=s, edge_generation=egen, edge_deviation=dev)


def pullback_metric(m: PLMap, tid: int) -> TriangleMetric:
    """Pullback of the image metric in the domain triangle's edge frame.

    The map is affine on the triangle, so the pullback Gram matrix is the
    image triangle's own Gram matrix expressed in side lengths.
    """
    tri = m.t.triangles[tid]
    pa, pb, pc = m.image[tri]
    return triangle_metric(float(np.linalg.norm(pb - pa)),
                           float(np.linalg.norm(pc - pb)),
                           float(np.linalg.norm(pa - pc)))


def domain_metric(m: PLMap, tid: int) -> TriangleMetric:
    tri = m.t.triangles[tid]
    pa, pb, pc = m.domain[tri]
    return triangle_metric(float(np.linalg.norm(pb - pa)),
                           float(np.linalg.norm(pc - pb)),
                           float(np.linalg.norm(pa - pc)))


def dilatation(m: PLMap, tid: int) -> float:
    """Singular-value ratio of the linear part; 1 for similarities."""
    sv = np.linalg.svd(m.linear[tid], compute_uv=False)
    return float(sv[0] / sv[-1])


def dilatation_field(m: PLMap) -> np.ndarray:
    sv = np.linalg.svd(m.linear, compute_uv=False)
    return sv[:, 0] / sv[:, -1]


def carrier_fullness(t: Triangulation, real: PlanarRealization):
    """(theta, eps) for a realized carrier.

    eps is the longest edge; theta the worst fullness 2 A / eps^2 over
    triangles, so every triangle is (theta, eps)-full.
    """
    pos = real.positions
    eps = float(np.linalg.norm(pos[t.edges[:, 0]] - pos[t.edges[:, 1]],
                               axis=1).max())
    areas = np.abs(real.signed_areas(t))
    theta = float(2.0 * areas.min() / eps**2)
    return theta, eps


# ---------------------------------------------------------------------------
# Sandwich checks


@dataclass
class EdgeSandwichReport:
    checked: int
    violations: int
    worst_margin: float   # most negative slack across all checked bounds
    passed: bool


def edge_sandwich_check(t: Triangulation, f: ConformalFactors,
                        f_tilde: ConformalFactors, ldcr: LDCREstimate,
                        gens: np.ndarray | None = None) -> EdgeSandwichReport:
    """Two-sided squared-length bound per edge.

    For every edge (v, w) with both generations >= m and s_m <= 1:
    H(v)^2 l^2 (1 - 3 s_m) <= l_tilde^2 <= H(v)^2 l^2 (1 + 3 s_m),
    checked from both endpoints with m the edge's own generation.
    """
    if gens is None:
        gens = generations(t)
    H = ratio_field(f, f_tilde).H
    l2 = edge_lengths(t, f) ** 2
    lt2 = edge_lengths(t, f_tilde) ** 2
    checked = 0
    violations = 0
    worst = math.inf
    for eid in range(t.n_edges):
        m = int(ldcr.edge_generation[eid])
        sm = ldcr.s_at(m)
        if sm > 1.0:
            continue
        for v in t.edges[eid]:
            base = H[v] ** 2 * l2[eid]
            lo = base * (1.0 - 3.0 * sm)
            hi = base * (1.0 + 3.0 * sm)
            slack = min(lt2[eid] - lo, hi - lt2[eid]) / max(base, 1e-300)
            worst = min(worst, slack)
            checked += 1
            if slack < -1e-12:
                violations += 1
    if checked == 0:
        worst = 0.0
    return EdgeSandwichReport(checked=checked, violations=violations,
                              worst_margin=float(worst),
                              passed=violations == 0)


@dataclass
class MetricSandwichReport:
    constant: float       # C = 216 / theta^2
    checked: int          # triangles actually probed
    skipped: int          # generation 0 or s_m > 1/6
    worst_low: float      # min of ratio - (1 - C s_m) over probes
    worst_high: float     # min of (1 + C s_m) - ratio over probes
    max_ratio_error: float  # max |ratio - 1|
    passed: bool


def metric_sandwich_check(m: PLMap, rf: RatioField, theta: float,
                          ldcr: LDCREstimate,
                          gens: np.ndarray | None = None,
                          triangle_mask: np.ndarray | None = None
                          ) -> MetricSandwichReport:
    """Two-sided quadratic-form bound on qualifying triangles.

    For each triangle whose minimum vertex generation mg satisfies mg >= 1
    and s_mg <= 1/6, and for probe vectors X in the D frame, asserts

        (1 - C s_mg) <= |X|^2_pullback / (e^F |X|^2_gD) <= (1 + C s_mg)

    with C = 216 / theta^2, where e^F is the interpolated H^2 evaluated at
    the triangle's vertices and barycenter (its extremes: e^F is linear).
    ``triangle_mask`` restricts the check to a subset of triangles; masked-out
    triangles count in neither ``checked`` nor ``skipped``.
    """
    if gens is None:
        gens = generations(m.t)
    C = 216.0 / theta**2
    tri = m.t.triangles
    tri_gen = gens[tri].min(axis=1)
    checked = skipped = 0
    worst_low = worst_high = math.inf
    max_err = 0.0
    bary = np.full(3, 1.0 / 3.0)
    corners = np.eye(3)
    for tid in range(m.t.n_triangles):
        if triangle_mask is not None and not triangle_mask[tid]:
            continue
        mg = int(tri_gen[tid])
        sm = ldcr.s_at(mg)
        if mg < 1 or sm > 1.0 / 6.0:
            skipped += 1
            continue
        gd = domain_metric(m, tid).gram
        gp = pullback_metric(m, tid).gram
        lo = 1.0 - C * sm
        hi = 1.0 + C * sm
        for lam in (corners[0], corners[1], corners[2], bary):
            ef = interpolate_eF(m.t, rf, tid, lam)
            for X in SAMPLE_VECTORS:
                denom = ef * float(X @ gd @ X)
                ratio = float(X @ gp @ X) / denom
                worst_low = min(worst_low, ratio - lo)
                worst_high = min(worst_high, hi - ratio)
                max_err = max(max_err, abs(ratio - 1.0))
        checked += 1
    if checked == 0:
        worst_low = worst_high = 0.0
    return MetricSandwichReport(constant=C, checked=checked, skipped=skipped,
                                worst_low=float(worst_low),
                                worst_high=float(worst_high),
                                max_ratio_error=float(max_err),
                                passed=worst_low >= -1e-12 and worst_high >= -1e-12)


@dataclass
class GradientBoundReport:
    checked: int
    skipped: int
    worst_margin: float   # min of bound - |de^F|^2 over probed triangles
    passed: bool


def ef_gradient_check(t: Triangulation, real: PlanarRealization,
                      rf: RatioField, ldcr: LDCREstimate,
                      gens: np.ndarray | None = None) -> GradientBoundReport:
    """Per-triangle Lipschitz bound on the interpolated factor.

    e^F is linear on each triangle; its differential in the D frame has
    components H^2(v_i) - H^2(v_0).  For a triangle of generation mg >= 1,

        |d e^F|^2_gD <= (6 alpha H^2(v_0) / (mg theta eps))^2

    with alpha the measured properness bound max m s_m and (theta, eps) the
    carrier fullness data.
    """
    if gens is None:
        gens = generations(t)
    theta, eps = carrier_fullness(t, real)
    alpha = ldcr.alpha()
    tri = t.triangles
    tri_gen = gens[tri].min(axis=1)
    h2 = rf.H ** 2
    checked = skipped = 0
    worst = math.inf
    for tid in range(t.n_triangles):
        mg = int(tri_gen[tid])
        if mg < 1 or ldcr.s_at(mg) > 1.0:
            skipped += 1
            continue
        pa, pb, pc = real.positions[tri[tid]]
        g = triangle_metric(float(np.linalg.norm(pb - pa)),
                            float(np.linalg.norm(pc - pb)),
                            float(np.linalg.norm(pa - pc))).gram
        w = np.array([h2[tri[tid, 1]] - h2[tri[tid, 0]],
                      h2[tri[tid, 2]] - h2[tri[tid, 0]]])
        grad_sq = float(w @ np.linalg.solve(g, w))
        bound = (6.0 * alpha * h2[tri[tid, 0]] / (mg * theta * eps)) ** 2
        worst = min(worst, bound - grad_sq)
        checked += 1
    if checked == 0:
        worst = 0.0
    return GradientBoundReport(checked=checked, skipped=skipped,
                               worst_margin=float(worst),
                               passed=worst >= -1e-12)


# ---------------------------------------------------------------------------
# Path estimates


@dataclass
class PathReport:
    domain_length: float
    image_length: float    # length of the image polyline
    direct: float          # |map(p) - map(q)|
    bound: float           # C * domain_length
    passed: bool


def path_lipschitz_bound(m: PLMap, p, q, C: float) -> PathReport:
    """Check |map(p) - map(q)| <= C * (segment length) along p -> q.

    The segment is split at triangle boundaries and each piece is pushed
    through its triangle's affine map, so the image polyline length is exact.

    Raises
    ------
    OutsideCarrierError
        Some point of the segment lies outside the carrier.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    seg = q - p
    L = float(np.linalg.norm(seg))
    if L == 0.0:
        return PathReport(0.0, 0.0, 0.0, 0.0, True)

    # Clip against each triangle to gather parameter breakpoints.
    cuts = {0.0, 1.0}
    tri = m.t.triangles
    for tid in range(m.t.n_triangles):
        a, b, c = m.domain[tri[tid]]
        t0, t1 = 0.0, 1.0
        ok = True
        for (u, v) in ((a, b), (b, c), (c, a)):
            # Inside = left of each directed edge for positive orientation.
            nrm = np.array([-(v - u)[1], (v - u)[0]])
            f0 = float(nrm @ (p - u))
            df = float(nrm @ seg)
            if abs(df) < 1e-15:
                if f0 < -1e-12:
                    ok = False
                    break
                continue
            tc = -f0 / df
            if df > 0:
                t0 = max(t0, tc)
            else:
                t1 = min(t1, tc)
        if ok and t1 > t0 + 1e-15:
            cuts.add(max(0.0, t0))
            cuts.add(min(1.0, t1))
    ts = sorted(cuts)
    img_len = 0.0
    prev_img = None
    direct_start = None
    for k in range(len(ts) - 1):
        t0, t1 = ts[k], ts[k + 1]
        if t1 - t0 < 1e-15:
            continue
        mid = p + 0.5 * (t0 + t1) * seg
        tid, _ = locate(m, mid)   # raises OutsideCarrier on gaps
        x0 = m.linear[tid] @ (p + t0 * seg) + m.offset[tid]
        x1 = m.linear[tid] @ (p + t1 * seg) + m.offset[tid]
        img_len += float(np.linalg.norm(x1 - x0))
        if direct_start is None:
            direct_start = x0
        prev_img = x1
    direct = float(np.linalg.norm(prev_img - direct_start))
    bound = C * L
    scale = max(bound, 1.0)
    return PathReport(domain_length=L, image_length=img_len, direct=direct,
                      bound=bound,
                      passed=direct <= bound + 1e-12 * scale)


# ---------------------------------------------------------------------------
# Generation-vs-distance inequalities


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - (a + t * ab)))


def boundary_distance(t: Triangulation, real: PlanarRealization, p) -> float:
    """Euclidean distance from ``p`` to the realized carrier boundary."""
    p = np.asarray(p, dtype=float)
    eids = np.nonzero(t.boundary_edge_mask)[0]
    pos = real.positions
    return min(_point_segment_distance(p, pos[t.edges[e, 0]], pos[t.edges[e, 1]])
               for e in eids)


@dataclass
class DiskDistanceReport:
    generation: int
    lower: float   # theta * m * eps
    delta: float   # realized distance center -> disk boundary
    upper: float   # m * eps
    passed: bool


def disk_distance_check(t: Triangulation, real: PlanarRealization,
                        disk: CombinatorialDisk, theta: float,
                        eps: float) -> DiskDistanceReport:
    """Check theta m eps <= dist(center, boundary of D_m) <= m eps."""
    m = disk.generation
    center = real.positions[disk.center]
    sub = disk.triangulation
    if sub is None:
        raise ValueError("generation-0 disk has no boundary polygon")
    sub_pos = real.positions[disk.vertices]
    eids = np.nonzero(sub.boundary_edge_mask)[0]
    delta = min(_point_segment_distance(center, sub_pos[sub.edges[e, 0]],
                                        sub_pos[sub.edges[e, 1]])
                for e in eids)
    lower = theta * m * eps
    upper = m * eps
    slack = 1e-9 * max(1.0, upper)
    return DiskDistanceReport(generation=m, lower=lower, delta=delta,
                              upper=upper,
                              passed=lower - slack <= delta <= upper + slack)


@dataclass
class GenerationBoundReport:
    checked: int
    worst_margin: float   # min over vertices of m - R / (2 eps)
    passed: bool


def generation_lower_bound_check(t: Triangulation, real: PlanarRealization,
                                 eps: float,
                                 gens: np.ndarray | None = None
                                 ) -> GenerationBoundReport:
    """Check m >= R / (2 eps) at every vertex of generation >= 1.

    R is the Euclidean distance from the vertex to the carrier boundary;
    m its combinatorial generation.
    """
    if gens is None:
        gens = generations(t)
    checked = 0
    worst = math.inf
    for v in range(t.n_vertices):
        mg = int(gens[v])
        if mg < 1:
            continue
        R = boundary_distance(t, real, real.positions[v])
        worst = min(worst, mg - R / (2.0 * eps))
        checked += 1
    if checked == 0:
        worst = 0.0
    return GenerationBoundReport(checked=checked, worst_margin=float(worst),
                                 passed=worst >= -1e-9)
