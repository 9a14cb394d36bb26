"""Tangent circle packing solvers and layouts.

Labels assign a radius to every vertex; a label is *solved* when every
interior angle sum equals 2 pi.  Two geometries are supported:

* Euclidean, with prescribed boundary radii.  Edge lengths are r_i + r_j.
* Hyperbolic maximal packings of a closed disk: every boundary circle is a
  horocycle (infinite hyperbolic radius) and the packing fills the unit
  disk of the Poincare model.

Hyperbolic radii r are stored as s = exp(-r) in [0, 1); s = 0 encodes a
horocycle.  The solver sweeps a closed-form per-vertex update (replace the
flower by the uniform flower with the same angle sum, then solve that model
for the radius giving angle sum 2 pi) and accelerates with guarded
supersteps.

Layouts realize a solved label as actual circles.  For the hyperbolic case
every circle is represented by its Euclidean center and radius inside the
unit disk, which is also the data the piecewise linear carrier map consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyChainsError,
    LayoutInconsistentError,
    NoConvergenceError,
    NotADiskError,
)
from .mesh import PlanarRealization, Triangulation, distances_from
from .structure import AngleSumReport, angle_sum_report

TWO_PI = 2.0 * math.pi

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_SWEEPS = 100_000

# Layout closure tolerance is independent of the label tolerance: position
# error accumulates along the placement tree.
DEFAULT_LAYOUT_TOLERANCE = 1e-6


@dataclass
class PackingLabel:
    """Per-vertex circle radii for a triangulation.

    ``geometry`` is "euclidean" or "hyperbolic".  For the hyperbolic case
    the label is stored as ``s = exp(-r)``; the ``radii`` property converts
    back (``inf`` for horocycles).
    """

    geometry: str
    values: np.ndarray  # euclidean: r > 0; hyperbolic: s in [0, 1)

    @property
    def radii(self) -> np.ndarray:
        if self.geometry == "euclidean":
            return self.values
        with np.errstate(divide="ignore"):
            return -np.log(self.values)

    @staticmethod
    def euclidean(radii) -> "PackingLabel":
        r = np.asarray(radii, dtype=float)
        if (r <= 0).any():
            raise ValueError("euclidean radii must be positive")
        return PackingLabel(geometry="euclidean", values=r)

    @staticmethod
    def hyperbolic_from_s(s) -> "PackingLabel":
        s = np.asarray(s, dtype=float)
        if (s < 0).any() or (s >= 1).any():
            raise ValueError("hyperbolic label needs s in [0, 1)")
        return PackingLabel(geometry="hyperbolic", values=s)


def tangency_angle(r0: float, r1: float, r2: float,
                   geometry: str = "euclidean") -> float:
    """Angle at the circle of radius r0 in the tangent triple (r0, r1, r2).

    Euclidean: ``2 asin(sqrt(r1 r2 / ((r0+r1)(r0+r2))))``.  Hyperbolic radii
    may be ``inf`` (horocycles); the angle at a horocycle is 0.
    """
    if geometry == "euclidean":
        return 2.0 * math.asin(math.sqrt(r1 * r2 / ((r0 + r1) * (r0 + r2))))
    if geometry != "hyperbolic":
        raise ValueError(f"unknown geometry {geometry!r}")
    s0 = math.exp(-r0) if math.isfinite(r0) else 0.0
    s1 = math.exp(-r1) if math.isfinite(r1) else 0.0
    s2 = math.exp(-r2) if math.isfinite(r2) else 0.0
    return _hyp_angle(s0, s1, s2)


def _hyp_angle(s0: float, s1: float, s2: float) -> float:
    if s0 == 0.0:
        return 0.0
    num = (1.0 - s1 * s1) * (1.0 - s2 * s2)
    den = (1.0 - (s0 * s1) ** 2) * (1.0 - (s0 * s2) ** 2)
    x = s0 * math.sqrt(num / den)
    return 2.0 * math.asin(min(1.0, x))


def _corner_arrays(t: Triangulation):
    """Center and petal vertex ids for all 3T corners."""
    tri = t.triangles
    cv = tri.ravel()
    p1 = np.roll(tri, -1, axis=1).ravel()
    p2 = np.roll(tri, -2, axis=1).ravel()
    return cv, p1, p2


def corner_angles(t: Triangulation, label: PackingLabel) -> np.ndarray:
    """(T, 3) matrix of corner angles for the label."""
    cv, p1, p2 = _corner_arrays(t)
    x = label.values
    if label.geometry == "euclidean":
        r0, r1, r2 = x[cv], x[p1], x[p2]
        arg = np.sqrt(r1 * r2 / ((r0 + r1) * (r0 + r2)))
        ang = 2.0 * np.arcsin(np.minimum(arg, 1.0))
    else:
        s0, s1, s2 = x[cv], x[p1], x[p2]
        num = (1.0 - s1 * s1) * (1.0 - s2 * s2)
        den = (1.0 - (s0 * s1) ** 2) * (1.0 - (s0 * s2) ** 2)
        ang = 2.0 * np.arcsin(np.minimum(s0 * np.sqrt(num / den), 1.0))
    return ang.reshape(t.n_triangles, 3)


def angle_sums(t: Triangulation, label: PackingLabel) -> np.ndarray:
    """Per-vertex angle sums of the label."""
    ang = corner_angles(t, label)
    sums = np.zeros(t.n_vertices)
    np.add.at(sums, t.triangles.ravel(), ang.ravel())
    return sums


def packing_angle_report(t: Triangulation, label: PackingLabel) -> AngleSumReport:
    """Angle sums, defects and the Gauss-Bonnet residual for the label."""
    ang = corner_angles(t, label)
    hyp_area = 0.0
    if label.geometry == "hyperbolic":
        hyp_area = float((math.pi - ang.sum(axis=1)).sum())
    return angle_sum_report(t, ang, hyperbolic_area=hyp_area)


def _angle_sums_from_values(t: Triangulation, values: np.ndarray,
                            geometry: str, cv, p1, p2) -> np.ndarray:
    if geometry == "euclidean":
        r0, r1, r2 = values[cv], values[p1], values[p2]
        arg = np.sqrt(r1 * r2 / ((r0 + r1) * (r0 + r2)))
        ang = 2.0 * np.arcsin(np.minimum(arg, 1.0))
    else:
        s0, s1, s2 = values[cv], values[p1], values[p2]
        num = (1.0 - s1 * s1) * (1.0 - s2 * s2)
        den = (1.0 - (s0 * s1) ** 2) * (1.0 - (s0 * s2) ** 2)
        ang = 2.0 * np.arcsin(np.minimum(s0 * np.sqrt(num / den), 1.0))
    sums = np.zeros(t.n_vertices)
    np.add.at(sums, cv, ang)
    return sums


def _uniform_update(values, sums, counts, update_mask, geometry):
    """Closed-form uniform-neighbor update for all flagged vertices."""
    x = values.copy()
    k = counts[update_mask]
    theta = sums[update_mask]
    beta = np.sin(theta / (2.0 * k))
    delta = np.sin(np.pi / k)
    if geometry == "euclidean":
        r = values[update_mask]
        # Petal radius of the uniform flower with the same angle sum.
        tt = beta * r / (1.0 - beta)
        x[update_mask] = tt * (1.0 - delta) / delta
    else:
        s = values[update_mask]
        # sin(theta/2k) = s (1 - sigma^2) / (1 - s^2 sigma^2)
        sigma2 = np.where(beta < s, (1.0 - beta / np.maximum(s, 1e-300))
                          / np.maximum(1.0 - beta * s, 1e-300), 0.0)
        sigma2 = np.clip(sigma2, 0.0, 1.0 - 1e-15)
        one = 1.0 - sigma2
        disc = one * one + 4.0 * delta * delta * sigma2
        new = np.where(
            sigma2 > 1e-12,
            (np.sqrt(disc) - one) / np.maximum(2.0 * delta * sigma2, 1e-300),
            delta * (1.0 + sigma2 * (1.0 - delta * delta)),
        )
        x[update_mask] = np.clip(new, 1e-300, 1.0 - 1e-15)
    return x


def _solve_label(t: Triangulation, init: np.ndarray, update_mask: np.ndarray,
                 geometry: str, tol: float, max_sweeps: int):
    """Guarded uniform-neighbor iteration with superstep acceleration."""
    cv, p1, p2 = _corner_arrays(t)
    counts = np.bincount(cv, minlength=t.n_vertices).astype(float)
    if (counts[update_mask] < 3).any():
        raise NotADiskError("an updated vertex has fewer than 3 corners")

    def residual(vals):
        sums = _angle_sums_from_values(t, vals, geometry, cv, p1, p2)
        return float(np.abs(sums[update_mask] - TWO_PI).max()), sums

    x = init.copy()
    res, sums = residual(x)
    prev_res = math.inf
    sweeps = 0
    while res > tol:
        if sweeps >= max_sweeps:
            raise NoConvergenceError(
                f"angle residual {res:.3e} after {sweeps} sweeps", residual=res)
        xn = _uniform_update(x, sums, counts, update_mask, geometry)
        res_n, sums_n = residual(xn)
        # Guarded superstep: extrapolate along the sweep direction while the
        # contraction ratio looks stable, fall back to the plain sweep result
        # whenever the extrapolation does not pay.
        if 0.0 < res_n < res:
            c = res_n / res
            lam = min(c / (1.0 - c), 20.0)
            if lam > 1e-3:
                cand = xn + lam * (xn - x)
                if geometry == "euclidean":
                    bad = cand <= 0
                    cand[bad] = xn[bad] * 0.5
                else:
                    np.clip(cand, 0.0, 1.0 - 1e-15, out=cand)
                    cand[~update_mask] = xn[~update_mask]
                res_c, sums_c = residual(cand)
                if res_c < res_n:
                    xn, res_n, sums_n = cand, res_c, sums_c
        if res_n >= res and res_n >= prev_res:
            # A full sweep that helps nothing twice in a row: damp by
            # averaging, which breaks two-cycle oscillation of the update.
            if geometry == "euclidean":
                xn = np.sqrt(x * xn)
            else:
                xn = 0.5 * (x + xn)
            res_n, sums_n = residual(xn)
        prev_res = res
        x, res, sums = xn, res_n, sums_n
        sweeps += 1
    return x, sweeps, res


def solve_euclidean(t: Triangulation, boundary_radii,
                    tol: float = DEFAULT_TOLERANCE,
                    max_sweeps: int = DEFAULT_MAX_SWEEPS,
                    initial=None) -> PackingLabel:
    """Solve for interior radii with prescribed boundary radii.

    ``boundary_radii`` is either a scalar (all boundary circles equal) or an
    array over all vertices whose boundary entries are used.

    Raises
    ------
    NotADiskError
        If the triangulation is not a closed disk.
    NoConvergenceError
        If the sweep budget is exhausted.
    """
    if not t.is_disk():
        raise NotADiskError("euclidean prescribed-boundary solve needs a disk")
    boundary = t.boundary_vertex_mask
    r = np.empty(t.n_vertices)
    br = np.asarray(boundary_radii, dtype=float)
    if br.ndim == 0:
        r[boundary] = float(br)
    else:
        r[boundary] = br[boundary] if br.size == t.n_vertices else br
    if (r[boundary] <= 0).any():
        raise ValueError("boundary radii must be positive")
    if initial is None:
        r[~boundary] = np.mean(r[boundary])
    else:
        ini = np.asarray(initial, dtype=float)
        r[~boundary] = ini[~boundary] if ini.size == t.n_vertices else ini
    values, _, _ = _solve_label(t, r, ~boundary, "euclidean", tol, max_sweeps)
    return PackingLabel.euclidean(values)


def solve_maximal_hyperbolic(t: Triangulation,
                             tol: float = DEFAULT_TOLERANCE,
                             max_sweeps: int = DEFAULT_MAX_SWEEPS) -> PackingLabel:
    """Maximal packing label: boundary circles are horocycles (s = 0).

    Raises
    ------
    NotADiskError
        If the triangulation is not a closed disk, or an interior vertex has
        fewer than three neighbors.
    NoConvergenceError
        If the sweep budget is exhausted.
    """
    if not t.is_disk():
        raise NotADiskError("maximal packing needs a closed disk")
    boundary = t.boundary_vertex_mask
    if boundary.all():
        raise NotADiskError("maximal packing needs an interior vertex")
    s = np.full(t.n_vertices, 0.5)
    s[boundary] = 0.0
    values, _, _ = _solve_label(t, s, ~boundary, "hyperbolic", tol, max_sweeps)
    return PackingLabel.hyperbolic_from_s(values)


# ---------------------------------------------------------------------------
# Layout


@dataclass
class Layout:
    """Realized circle packing.

    ``realization`` holds the circle centers (Euclidean centers also in the
    hyperbolic case, where circles live inside the unit disk and the
    realization is tagged "poincare").  ``radii`` are the Euclidean radii of
    the drawn circles, so the tangency condition is
    ``|c_i - c_j| = radii_i + radii_j`` for every edge in both geometries.
    """

    realization: PlanarRealization
    radii: np.ndarray
    label: PackingLabel

    def tangency_errors(self, t: Triangulation) -> np.ndarray:
        p = self.realization.positions
        i, j = t.edges[:, 0], t.edges[:, 1]
        d = np.hypot(*(p[i] - p[j]).T)
        return d - (self.radii[i] + self.radii[j])


def _place_third_euclidean(c1, r1, c2, r2, r3):
    d1 = r1 + r3
    d2 = r2 + r3
    dx, dy = c2[0] - c1[0], c2[1] - c1[1]
    d = math.hypot(dx, dy)
    a = (d * d + d1 * d1 - d2 * d2) / (2.0 * d)
    h2 = d1 * d1 - a * a
    h = math.sqrt(max(h2, 0.0))
    ux, uy = dx / d, dy / d
    # Positive-orientation side of c1 -> c2.
    return np.array([c1[0] + a * ux - h * uy, c1[1] + a * uy + h * ux])


def _place_third_hyperbolic(c1, r1, c2, r2, s3):
    """Circle tangent to two placed circles with hyperbolic label s3.

    Everything is in the Euclidean representation of the Poincare disk.  The
    unknowns are the Euclidean center c, the Euclidean radius rho, and the
    auxiliary u = |c|^2 - rho^2; the two tangency conditions and the label
    condition are linear in (c, rho, u) so the solution is a line, and the
    definition of u cuts it in (at most) two points.
    """
    s2_ = s3 * s3
    mat = np.array([
        [-2.0 * c1[0], -2.0 * c1[1], -2.0 * r1, 1.0],
        [-2.0 * c2[0], -2.0 * c2[1], -2.0 * r2, 1.0],
        [0.0, 0.0, 2.0 * (1.0 + s2_), (1.0 - s2_)],
    ])
    rhs = np.array([
        r1 * r1 - c1[0] ** 2 - c1[1] ** 2,
        r2 * r2 - c2[0] ** 2 - c2[1] ** 2,
        1.0 - s2_,
    ])
    x0, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    _, sv, vt = np.linalg.svd(mat)
    if sv.min() < 1e-13 * sv.max():
        raise LayoutInconsistentError("tangency system is rank deficient")
    d = vt[-1]
    # f(x) = cx^2 + cy^2 - rho^2 - u, quadratic along x0 + tau d.
    qa = d[0] * d[0] + d[1] * d[1] - d[2] * d[2]
    qb = 2.0 * (x0[0] * d[0] + x0[1] * d[1] - x0[2] * d[2]) - d[3]
    qc = x0[0] ** 2 + x0[1] ** 2 - x0[2] ** 2 - x0[3]
    sols = []
    if abs(qa) < 1e-14 * (abs(qb) + abs(qc)):
        if qb != 0.0:
            sols = [-qc / qb]
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0 and disc > -1e-10 * max(qb * qb, abs(4.0 * qa * qc)):
            disc = 0.0
        if disc < 0.0:
            raise LayoutInconsistentError("tangency system has no real solution")
        root = math.sqrt(disc)
        sols = [(-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)]
    best = None
    for tau in sols:
        cx, cy, rho, _ = x0 + tau * d
        if rho < -1e-12:
            continue
        cross = ((c2[0] - c1[0]) * (cy - c1[1])
                 - (c2[1] - c1[1]) * (cx - c1[0]))
        if best is None or cross > best[0]:
            best = (cross, np.array([cx, cy]), max(rho, 0.0))
    if best is None or best[0] <= 0.0:
        raise LayoutInconsistentError("no positively oriented placement")
    return best[1], best[2]


def layout(t: Triangulation, label: PackingLabel, anchor: int = 0,
           neighbor: int | None = None,
           tol: float = DEFAULT_LAYOUT_TOLERANCE) -> Layout:
    """Realize a solved label as circles in the plane or the unit disk.

    The anchor circle is centered at the origin and the chosen neighbor
    sits on the positive real axis.  Remaining circles are placed by
    breadth-first sweep over triangles, each vertex from the two already
    placed circles of one of its triangles.

    Raises
    ------
    LayoutInconsistentError
        If any tangency closes up worse than ``10 * tol`` (the label is not
        actually solved), or a placement degenerates.
    """
    hyp = label.geometry == "hyperbolic"
    if neighbor is None:
        neighbor = int(t.vertex_neighbors[anchor][0])
    if neighbor not in set(int(u) for u in t.vertex_neighbors[anchor]):
        raise ValueError("neighbor must be adjacent to anchor")

    pos = np.full((t.n_vertices, 2), np.nan)
    rad = np.full(t.n_vertices, np.nan)
    placed = np.zeros(t.n_vertices, dtype=bool)

    if hyp:
        s = label.values
        if s[anchor] <= 0.0:
            raise ValueError("anchor must be an interior circle")
        rho_a = (1.0 - s[anchor]) / (1.0 + s[anchor])
        pos[anchor] = (0.0, 0.0)
        rad[anchor] = rho_a
        far = (1.0 - s[anchor] * s[neighbor] ** 2) \
            / (1.0 + s[anchor] * s[neighbor] ** 2)
        pos[neighbor] = (0.5 * (rho_a + far), 0.0)
        rad[neighbor] = 0.5 * (far - rho_a)
    else:
        r = label.values
        pos[anchor] = (0.0, 0.0)
        rad[anchor] = r[anchor]
        pos[neighbor] = (r[anchor] + r[neighbor], 0.0)
        rad[neighbor] = r[neighbor]
    placed[anchor] = placed[neighbor] = True

    # Seed triangles: those containing the anchor edge.
    from collections import deque
    eid = t.edge_id(anchor, neighbor)
    seeds = [tt for tt in range(t.n_triangles) if eid in t.tri_edges[tt]]
    queue = deque(sorted(seeds))
    in_queue = np.zeros(t.n_triangles, dtype=bool)
    in_queue[seeds] = True
    done = np.zeros(t.n_triangles, dtype=bool)

    while queue:
        tt = queue.popleft()
        tri = t.triangles[tt]
        have = placed[tri]
        if have.sum() >= 2 and not done[tt]:
            if have.sum() == 2:
                k = int(np.nonzero(~have)[0][0])
                v = int(tri[k])
                a = int(tri[(k + 1) % 3])
                b = int(tri[(k + 2) % 3])
                # (a, b, v) is the positive cyclic order.
                if hyp:
                    pv, rv = _place_third_hyperbolic(pos[a], rad[a],
                                                     pos[b], rad[b],
                                                     label.values[v])
                    pos[v] = pv
                    rad[v] = rv
                else:
                    pos[v] = _place_third_euclidean(pos[a], rad[a],
                                                    pos[b], rad[b],
                                                    label.values[v])
                    rad[v] = label.values[v]
                placed[v] = True
            done[tt] = True
            for nb in t.tri_neighbors[tt]:
                if nb >= 0 and not done[nb] and not in_queue[nb]:
                    in_queue[nb] = True
                    queue.append(nb)
        elif not done[tt]:
            # Not ready yet; requeue (cannot starve: the triangle adjacency
            # graph of a connected surface is connected).
            in_queue[tt] = False
        if not queue:
            rest = [x for x in range(t.n_triangles)
                    if not done[x] and placed[t.triangles[x]].sum() >= 2]
            for x in sorted(rest):
                if not in_queue[x]:
                    in_queue[x] = True
                    queue.append(x)
            if not rest and not done.all() and not placed.all():
                raise LayoutInconsistentError(
                    "placement sweep stalled before covering the disk")

    geometry = "poincare" if hyp else "euclidean"
    real = PlanarRealization(positions=pos, geometry=geometry)
    out = Layout(realization=real, radii=rad, label=label)
    errs = out.tangency_errors(t)
    scale = float(np.max(rad))
    worst = int(np.argmax(np.abs(errs)))
    if abs(errs[worst]) > 10.0 * tol * max(scale, 1.0):
        raise LayoutInconsistentError(
            f"tangency closure failed: edge {tuple(t.edges[worst])} "
            f"off by {errs[worst]:.3e}",
            worst_edge=tuple(t.edges[worst]), violation=float(errs[worst]))
    return out


# ---------------------------------------------------------------------------
# Bounds and reports


def heron_area(r0: float, r1: float, r2: float) -> float:
    """Area of the triangle of centers of three mutually tangent circles.

    With side lengths r_i + r_j Heron's formula collapses to
    ``sqrt(r0 r1 r2 (r0 + r1 + r2))``.
    """
    if min(r0, r1, r2) < 0:
        raise ValueError("radii must be nonnegative")
    return math.sqrt(r0 * r1 * r2 * (r0 + r1 + r2))


def length_area_bound(chain_lengths) -> float:
    """Upper bound 1/sqrt(sum 1/n_j) from disjoint separating chains.

    ``chain_lengths`` are the combinatorial lengths n_j of disjoint chains
    of circles, each separating a given circle from the anchor circle and
    from a boundary point.
    """
    ns = list(chain_lengths)
    if not ns:
        raise EmptyChainsError("need at least one separating chain")
    if any(n <= 0 for n in ns):
        raise EmptyChainsError("chain lengths must be positive")
    return 1.0 / math.sqrt(sum(1.0 / float(n) for n in ns))


def separating_rings(t: Triangulation, v: int, avoid: int,
                     max_rings: int | None = None) -> list:
    """Sizes of the breadth-first rings around ``v`` that separate it from
    ``avoid``.

    Ring j is the set of vertices at combinatorial distance exactly j from
    ``v``; every path from ``v`` to a vertex beyond ring j crosses it.  Rings
    are used while they keep ``avoid`` strictly outside (j < d(v, avoid)),
    so each one also separates ``v`` from the anchor circle.
    """
    dist = distances_from(t, v)
    d_avoid = int(dist[avoid])
    if d_avoid <= 1:
        return []
    top = d_avoid - 1
    if max_rings is not None:
        top = min(top, max_rings)
    sizes = []
    for j in range(1, top + 1):
        nj = int((dist == j).sum())
        if nj == 0:
            break
        sizes.append(nj)
    return sizes


@dataclass
class RatioReport:
    """Image-to-domain radius ratios at probe vertices."""

    vertices: np.ndarray
    ratios: np.ndarray

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max())

    @property
    def min_ratio(self) -> float:
        return float(self.ratios.min())


def schwarz_ratio_report(domain_radii, image_radii, probes) -> RatioReport:
    """Ratios image_radius / domain_radius over the probe vertices."""
    probes = np.asarray(probes, dtype=np.int64)
    dr = np.asarray(domain_radii, dtype=float)[probes]
    ir = np.asarray(image_radii, dtype=float)[probes]
    return RatioReport(vertices=probes, ratios=ir / dr)


# ---------------------------------------------------------------------------
# Congruence fitting (used to compare layouts and to gauge-fix pipelines)


def fit_rigid_motion(source: np.ndarray, target: np.ndarray):
    """Best orientation-preserving rigid motion source -> target.

    Returns ``(rot, shift, rms)`` with ``rot`` a 2x2 rotation matrix.
    """
    src = np.asarray(source, dtype=float)
    dst = np.asarray(target, dtype=float)
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    a = src - cs
    b = dst - cd
    m = a.T @ b
    # 2D Kabsch restricted to rotations.
    theta = math.atan2(m[0, 1] - m[1, 0], m[0, 0] + m[1, 1])
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    shift = cd - rot @ cs
    res = (a @ rot.T) - b
    rms = math.sqrt(float((res * res).sum()) / src.shape[0])
    return rot, shift, rms


def fit_disk_automorphism(source: np.ndarray, target: np.ndarray,
                          max_iter: int = 60):
    """Best Mobius disk automorphism z -> e^{i theta} (z - a) / (1 - conj(a) z).

    Gauss-Newton over (Re a, Im a, theta) on squared complex residuals.
    Returns ``(a, theta, rms)``.
    """
    z = np.asarray(source[:, 0] + 1j * source[:, 1], dtype=complex) \
        if source.ndim == 2 else np.asarray(source, dtype=complex)
    w = np.asarray(target[:, 0] + 1j * target[:, 1], dtype=complex) \
        if target.ndim == 2 else np.asarray(target, dtype=complex)
    a = 0.0 + 0.0j
    # Initial rotation aligning the images in bulk.
    theta = float(np.angle(np.sum(w * np.conj(z)))) if z.size else 0.0

    def mob(a_, th_):
        return np.exp(1j * th_) * (z - a_) / (1.0 - np.conj(a_) * z)

    for _ in range(max_iter):
        f = mob(a, theta)
        res = f - w
        da = -np.exp(1j * theta) / (1.0 - np.conj(a) * z)
        dabar = np.exp(1j * theta) * (z - a) * z / (1.0 - np.conj(a) * z) ** 2
        dax = da + dabar
        day = 1j * (da - dabar)
        dth = 1j * f
        jac = np.stack([
            np.concatenate([dax.real, dax.imag]),
            np.concatenate([day.real, day.imag]),
            np.concatenate([dth.real, dth.imag]),
        ], axis=1)
        rhs = -np.concatenate([res.real, res.imag])
        step, *_ = np.linalg.lstsq(jac, rhs, rcond=None)
        scale = 1.0
        na = a + scale * (step[0] + 1j * step[1])
        if abs(na) >= 0.999:
            na *= 0.999 / abs(na)
        ntheta = theta + scale * step[2]
        a, theta = na, ntheta
        if np.abs(step).max() < 1e-14:
            break
    f = mob(a, theta)
    rms = math.sqrt(float((np.abs(f - w) ** 2).mean()))
    return a, theta, rms


def apply_disk_automorphism(a: complex, theta: float,
                            points: np.ndarray) -> np.ndarray:
    z = points[:, 0] + 1j * points[:, 1]
    w = np.exp(1j * theta) * (z - a) / (1.0 - np.conj(a) * z)
    return np.stack([w.real, w.imag], axis=1)
