"""Combinatorial triangulations, planar realizations, and hexagonal filling.

A :class:`Triangulation` is purely combinatorial: an indexed set of oriented
triangles with validated manifold structure.  Geometry enters through
:class:`PlanarRealization` (vertex positions in the plane or the Poincare
disk) or through edge-length data handled by the structure module.

Edges are kept in a canonical order: each edge is the pair ``(min, max)`` and
the edge list is sorted lexicographically.  Serialization relies on this
order.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DisconnectedError,
    EmptyCarrierError,
    NonManifoldError,
    NotADiskError,
    UnorientableError,
)

SQRT3 = math.sqrt(3.0)

# Slack used when classifying signed areas of realized triangles.
ORIENTATION_TOL = 1e-14


@dataclass
class Triangulation:
    """Oriented manifold triangulation, possibly with boundary.

    Attributes
    ----------
    triangles : (T, 3) int array
        Vertex indices, consistently oriented.
    n_vertices : int
        Number of vertices; every vertex appears in some triangle.
    edges : (E, 2) int array
        Canonical edge list: rows are (min, max), sorted lexicographically.
    tri_edges : (T, 3) int array
        ``tri_edges[t, k]`` is the edge id of ``(triangles[t, k],
        triangles[t, (k + 1) % 3])``.
    tri_neighbors : (T, 3) int array
        Triangle across edge ``tri_edges[t, k]``, or -1 on the boundary.
    """

    triangles: np.ndarray
    n_vertices: int
    edges: np.ndarray
    tri_edges: np.ndarray
    tri_neighbors: np.ndarray
    boundary_edge_mask: np.ndarray
    boundary_vertex_mask: np.ndarray
    vertex_neighbors: list = field(repr=False)
    edge_index: dict = field(repr=False)

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def boundary_vertices(self) -> np.ndarray:
        return np.nonzero(self.boundary_vertex_mask)[0]

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    def is_closed(self) -> bool:
        return not bool(self.boundary_edge_mask.any())

    def is_disk(self) -> bool:
        return (not self.is_closed()) and self.euler_characteristic() == 1

    def edge_id(self, i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        return self.edge_index[key]


def _vertex_link_ok(v: int, incident: list, boundary_vertex: bool) -> bool:
    """Check that the link of ``v`` is a single cycle (interior) or a single
    simple path (boundary)."""
    # Link edges: the side opposite v in each incident triangle.
    degree: dict = {}
    adj: dict = {}
    for (a, b) in incident:
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if not degree:
        return False
    if any(d > 2 for d in degree.values()):
        return False
    ends = [u for u, d in degree.items() if d == 1]
    if boundary_vertex:
        if len(ends) != 2:
            return False
    else:
        if ends:
            return False
    # Connectivity of the link graph.
    start = ends[0] if ends else next(iter(adj))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def build_triangulation(triangles: Iterable[Sequence[int]],
                        n_vertices: int | None = None) -> Triangulation:
    """Validate and index a triangle soup.

    Checks manifoldness (each edge in at most two triangles, vertex links
    single cycles or paths), reorients triangles to a consistent global
    orientation, and builds the canonical edge tables.

    Parameters
    ----------
    triangles : iterable of triples of int
        Vertex indices.  Orientations may be inconsistent; they are repaired.
    n_vertices : int, optional
        Total vertex count.  Defaults to ``max index + 1``.  Every vertex in
        range must be used by some triangle.

    Raises
    ------
    NonManifoldError
        Edge in three or more triangles, bad vertex link, isolated vertex,
        or a repeated vertex inside a triangle.
    UnorientableError
        No consistent orientation exists.
    """
    tris = np.asarray(list(triangles), dtype=np.int64)
    if tris.ndim != 2 or tris.shape[1] != 3 or tris.shape[0] == 0:
        raise NonManifoldError("need a nonempty (T, 3) triangle list")
    if (tris[:, 0] == tris[:, 1]).any() or (tris[:, 1] == tris[:, 2]).any() \
            or (tris[:, 0] == tris[:, 2]).any():
        raise NonManifoldError("triangle with a repeated vertex")
    if tris.min() < 0:
        raise NonManifoldError("negative vertex index")
    nv = int(tris.max()) + 1 if n_vertices is None else int(n_vertices)
    if tris.max() >= nv:
        raise NonManifoldError("vertex index out of range")

    used = np.zeros(nv, dtype=bool)
    used[tris.ravel()] = True
    if not used.all():
        raise NonManifoldError("isolated vertex (not used by any triangle)")

    # Canonical edges and per-edge triangle incidence.
    raw = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    raw_sorted = np.sort(raw, axis=1)
    edges, inverse, counts = np.unique(raw_sorted, axis=0,
                                       return_inverse=True,
                                       return_counts=True)
    if counts.max() > 2:
        raise NonManifoldError("edge shared by more than two triangles")
    nt = tris.shape[0]
    tri_edges = inverse.reshape(3, nt).T.copy()

    edge_tris = np.full((edges.shape[0], 2), -1, dtype=np.int64)
    for t in range(nt):
        for k in range(3):
            e = tri_edges[t, k]
            if edge_tris[e, 0] == -1:
                edge_tris[e, 0] = t
            elif edge_tris[e, 1] == -1:
                edge_tris[e, 1] = t

    # Duplicate triangles (same vertex set twice) produce a doubled edge pair
    # that still passes the count test; catch them directly.
    key = np.sort(tris, axis=1)
    if np.unique(key, axis=0).shape[0] != nt:
        raise NonManifoldError("duplicate triangle")

    # Orientation repair by BFS over the triangle adjacency.
    oriented = tris.copy()
    state = np.zeros(nt, dtype=np.int8)  # 0 unseen, 1 kept, 2 flipped
    for seed in range(nt):
        if state[seed]:
            continue
        state[seed] = 1
        queue = deque([seed])
        while queue:
            t = queue.popleft()
            for k in range(3):
                e = tri_edges[t, k]
                other = edge_tris[e, 0] if edge_tris[e, 1] == t else edge_tris[e, 1]
                if other == -1:
                    continue
                a, b = oriented[t, k], oriented[t, (k + 1) % 3]
                ov = oriented[other]
                # In a consistent orientation the shared edge appears in
                # opposite directions in the two triangles.
                same_dir = any(ov[m] == a and ov[(m + 1) % 3] == b
                               for m in range(3))
                needs_flip = same_dir
                if state[other] == 0:
                    if needs_flip:
                        oriented[other] = oriented[other][::-1]
                        state[other] = 2
                    else:
                        state[other] = 1
                    queue.append(other)
                else:
                    still_same = any(
                        oriented[other][m] == a
                        and oriented[other][(m + 1) % 3] == b
                        for m in range(3))
                    if still_same:
                        raise UnorientableError(
                            "orientation conflict across edge "
                            f"{tuple(edges[e])}")

    # Re-derive tri_edges for the repaired orientation via the canonical ids.
    edge_index = {(int(a), int(b)): i for i, (a, b) in enumerate(edges)}
    tri_edges = np.array([[edge_index[(min(int(a), int(b)), max(int(a), int(b)))]
                           for (a, b) in ((tr[0], tr[1]), (tr[1], tr[2]),
                                          (tr[2], tr[0]))]
                          for tr in oriented], dtype=np.int64)

    boundary_edge_mask = counts == 1
    boundary_vertex_mask = np.zeros(nv, dtype=bool)
    bv = edges[boundary_edge_mask].ravel()
    boundary_vertex_mask[bv] = True

    # Vertex links.
    link_edges: list = [[] for _ in range(nv)]
    for tr in oriented:
        link_edges[tr[0]].append((int(tr[1]), int(tr[2])))
        link_edges[tr[1]].append((int(tr[2]), int(tr[0])))
        link_edges[tr[2]].append((int(tr[0]), int(tr[1])))
    for v in range(nv):
        if not _vertex_link_ok(v, link_edges[v], bool(boundary_vertex_mask[v])):
            raise NonManifoldError(f"bad link at vertex {v}")

    tri_neighbors = np.full((nt, 3), -1, dtype=np.int64)
    for t in range(nt):
        for k in range(3):
            e = tri_edges[t, k]
            a, b = edge_tris[e]
            tri_neighbors[t, k] = b if a == t else a

    neighbor_sets: list = [[] for _ in range(nv)]
    for (a, b) in edges:
        neighbor_sets[a].append(int(b))
        neighbor_sets[b].append(int(a))
    vertex_neighbors = [np.array(sorted(s), dtype=np.int64)
                        for s in neighbor_sets]

    return Triangulation(
        triangles=oriented,
        n_vertices=nv,
        edges=edges,
        tri_edges=tri_edges,
        tri_neighbors=tri_neighbors,
        boundary_edge_mask=boundary_edge_mask,
        boundary_vertex_mask=boundary_vertex_mask,
        vertex_neighbors=vertex_neighbors,
        edge_index=edge_index,
    )


def distances_from(t: Triangulation, v: int) -> np.ndarray:
    """Graph distance from ``v`` to every vertex along edges (BFS).

    Unreachable vertices are marked -1.
    """
    dist = np.full(t.n_vertices, -1, dtype=np.int64)
    dist[v] = 0
    queue = deque([v])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for x in t.vertex_neighbors[u]:
            if dist[x] == -1:
                dist[x] = du + 1
                queue.append(x)
    return dist


def combinatorial_distance(t: Triangulation, v: int, w: int) -> int:
    """Graph distance between two vertices along edges.

    Raises
    ------
    DisconnectedError
        If ``w`` is not reachable from ``v``.
    """
    d = int(distances_from(t, v)[w])
    if d < 0:
        raise DisconnectedError(f"vertices {v} and {w} are in different components")
    return d


def generations(t: Triangulation) -> np.ndarray:
    """Distance to the boundary for every vertex (multi-source BFS).

    Returns the per-vertex generation: 0 on the boundary, and
    ``min over boundary vertices w of d_comb(v, w)`` elsewhere.

    Raises
    ------
    NotADiskError
        If the triangulation has no boundary (the generation of a vertex in
        a closed surface is undefined).
    """
    seeds = t.boundary_vertices
    if seeds.size == 0:
        raise NotADiskError("generation undefined: triangulation has no boundary")
    dist = np.full(t.n_vertices, -1, dtype=np.int64)
    dist[seeds] = 0
    queue = deque(int(s) for s in seeds)
    while queue:
        u = queue.popleft()
        du = dist[u]
        for x in t.vertex_neighbors[u]:
            if dist[x] == -1:
                dist[x] = du + 1
                queue.append(x)
    if (dist == -1).any():
        raise DisconnectedError("triangulation is not connected")
    return dist


def generation_of(t: Triangulation, v: int) -> int:
    """Largest m such that a combinatorial closed disk of generation m can be
    centered at ``v``; equals the distance from ``v`` to the boundary."""
    return int(generations(t)[v])


@dataclass
class CombinatorialDisk:
    """Sub-complex of all triangles within combinatorial distance ``generation``
    of ``center``; validated to be a closed disk."""

    center: int
    generation: int
    vertices: np.ndarray        # parent vertex ids, sorted
    triangles: np.ndarray       # parent triangle ids, sorted
    boundary_vertices: np.ndarray  # parent ids of the sub-complex boundary
    triangulation: Triangulation | None  # rebuilt sub-complex; None when m = 0


def combinatorial_disk(t: Triangulation, v: int, m: int) -> CombinatorialDisk:
    """Build and validate the generation-``m`` combinatorial closed disk at ``v``.

    The sub-complex consists of every triangle all of whose vertices are at
    combinatorial distance at most ``m`` from ``v``.  It must be a closed
    disk whose boundary vertices all sit at distance exactly ``m``.

    Raises
    ------
    NotADiskError
        If the sub-complex is not a closed disk of generation ``m``.
    """
    if m < 0:
        raise NotADiskError("generation must be non-negative")
    dist = np.full(t.n_vertices, -1, dtype=np.int64)
    dist[v] = 0
    queue = deque([v])
    while queue:
        u = queue.popleft()
        du = dist[u]
        if du >= m:
            continue
        for x in t.vertex_neighbors[u]:
            if dist[x] == -1:
                dist[x] = du + 1
                queue.append(x)
    in_ball = dist >= 0
    if m == 0:
        return CombinatorialDisk(center=v, generation=0,
                                 vertices=np.array([v], dtype=np.int64),
                                 triangles=np.array([], dtype=np.int64),
                                 boundary_vertices=np.array([v], dtype=np.int64),
                                 triangulation=None)
    keep = in_ball[t.triangles].all(axis=1)
    tri_ids = np.nonzero(keep)[0]
    if tri_ids.size == 0:
        raise NotADiskError(f"no triangle lies in the {m}-ball of vertex {v}")
    verts = np.unique(t.triangles[tri_ids])
    remap = -np.ones(t.n_vertices, dtype=np.int64)
    remap[verts] = np.arange(verts.size)
    try:
        sub = build_triangulation(remap[t.triangles[tri_ids]],
                                  n_vertices=verts.size)
    except (NonManifoldError, UnorientableError) as exc:
        raise NotADiskError(f"{m}-ball of vertex {v} is not a disk: {exc}") from exc
    if not sub.is_disk():
        raise NotADiskError(f"{m}-ball of vertex {v} is not a closed disk")
    sub_boundary = verts[sub.boundary_vertices]
    if not (dist[sub_boundary] == m).all():
        raise NotADiskError(
            f"{m}-ball of vertex {v}: boundary vertex closer than generation")
    # Mesh-boundary vertices may only appear on the sub-complex boundary.
    interior = np.setdiff1d(verts, sub_boundary)
    if t.boundary_vertex_mask[interior].any():
        raise NotADiskError(f"{m}-ball of vertex {v} overruns the mesh boundary")
    return CombinatorialDisk(center=v, generation=m, vertices=verts,
                             triangles=tri_ids, boundary_vertices=sub_boundary,
                             triangulation=sub)


@dataclass
class PlanarRealization:
    """Vertex positions for a triangulation.

    ``geometry`` is ``"euclidean"`` (plane) or ``"poincare"`` (unit-disk
    model; positions must satisfy |z| <= 1, with interior vertices strictly
    inside).
    """

    positions: np.ndarray  # (V, 2) float
    geometry: str = "euclidean"

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError("positions must be (V, 2)")
        if self.geometry not in ("euclidean", "poincare"):
            raise ValueError(f"unknown geometry {self.geometry!r}")

    def signed_areas(self, t: Triangulation) -> np.ndarray:
        p = self.positions
        a = p[t.triangles[:, 0]]
        b = p[t.triangles[:, 1]]
        c = p[t.triangles[:, 2]]
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                      - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def validate(self, t: Triangulation, tol: float = ORIENTATION_TOL) -> None:
        """Check nondegeneracy and a single orientation sign for all
        triangles; for the Poincare geometry also check |z| <= 1 + tol."""
        areas = self.signed_areas(t)
        scale = float(np.abs(self.positions).max()) or 1.0
        if (np.abs(areas) <= tol * scale * scale).any():
            raise NotADiskError("realization has a degenerate triangle")
        if (areas > 0).any() and (areas < 0).any():
            raise NotADiskError("realization mixes triangle orientations")
        if self.geometry == "poincare":
            norms = np.hypot(self.positions[:, 0], self.positions[:, 1])
            if (norms > 1.0 + 1e-9).any():
                raise NotADiskError("poincare position outside the closed disk")


# ---------------------------------------------------------------------------
# Domains and hexagonal filling


@dataclass(frozen=True)
class DiskDomain:
    """Open round disk."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def contains_disk(self, p, r: float) -> bool:
        dx = p[0] - self.center[0]
        dy = p[1] - self.center[1]
        return math.hypot(dx, dy) + r <= self.radius


@dataclass(frozen=True)
class PolygonDomain:
    """Open simple polygon; membership by winding number."""

    corners: tuple  # ((x, y), ...)

    def _winding(self, p) -> int:
        wn = 0
        pts = self.corners
        x, y = p
        for i in range(len(pts)):
            x0, y0 = pts[i]
            x1, y1 = pts[(i + 1) % len(pts)]
            if y0 <= y:
                if y1 > y and (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0) > 0:
                    wn += 1
            else:
                if y1 <= y and (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0) < 0:
                    wn -= 1
        return wn

    def _boundary_distance(self, p) -> float:
        best = math.inf
        pts = self.corners
        x, y = p
        for i in range(len(pts)):
            x0, y0 = pts[i]
            x1, y1 = pts[(i + 1) % len(pts)]
            ex, ey = x1 - x0, y1 - y0
            tt = ((x - x0) * ex + (y - y0) * ey) / (ex * ex + ey * ey)
            tt = min(1.0, max(0.0, tt))
            best = min(best, math.hypot(x - (x0 + tt * ex), y - (y0 + tt * ey)))
        return best

    def contains_disk(self, p, r: float) -> bool:
        return self._winding(p) != 0 and self._boundary_distance(p) >= r


def square_domain(half_width: float = 1.0) -> PolygonDomain:
    h = float(half_width)
    return PolygonDomain(corners=((-h, -h), (h, -h), (h, h), (-h, h)))


def _hex_positions(pairs: np.ndarray, spacing: float) -> np.ndarray:
    """Planar positions for axial lattice coordinates (i, j)."""
    x = spacing * (pairs[:, 0] + 0.5 * pairs[:, 1])
    y = spacing * (SQRT3 / 2.0) * pairs[:, 1]
    return np.stack([x, y], axis=1)


def _lattice_triangles(kept: set) -> list:
    """All lattice triangles whose three corners are in ``kept``.

    The down triangle at base cell (i, j) does not contain (i, j) itself,
    so bases must also range over cells one step left of a kept vertex.
    """
    bases = kept | {(a - 1, b) for (a, b) in kept}
    tris = []
    for (i, j) in sorted(bases):
        if (i, j) in kept and (i + 1, j) in kept and (i, j + 1) in kept:
            tris.append(((i, j), (i + 1, j), (i, j + 1)))
        if ((i + 1, j) in kept and (i + 1, j + 1) in kept
                and (i, j + 1) in kept):
            tris.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))
    return tris


def hex_fill(domain, n: int, anchor=(0.0, 0.0)):
    """Fill a domain with the regular hexagonal packing of mesh size 2/n.

    Lattice vertices carry circles of radius 1/n.  A triangle of the lattice
    is kept iff the closed circles of all three of its vertices lie inside
    the domain; the result is the edge-connected component of kept triangles
    containing the kept vertex nearest ``anchor``.

    Returns
    -------
    (Triangulation, PlanarRealization)
        A triangulated closed disk whose triangles are all equilateral with
        side 2/n, positively oriented.

    Raises
    ------
    EmptyCarrierError
        No triangle survives at this resolution.
    NotADiskError
        The kept component is not a closed disk.
    """
    if n < 1:
        raise EmptyCarrierError("need n >= 1")
    spacing = 2.0 / n
    radius = 1.0 / n

    # Conservative axial index bounds from the domain's reach around anchor.
    if isinstance(domain, DiskDomain):
        cx, cy = domain.center
        reach = domain.radius
    else:
        xs = [c[0] for c in domain.corners]
        ys = [c[1] for c in domain.corners]
        cx, cy = (min(xs) + max(xs)) / 2.0, (min(ys) + max(ys)) / 2.0
        reach = max(max(xs) - min(xs), max(ys) - min(ys))
    bound = int(math.ceil((reach + abs(cx) + abs(cy) + 2.0) / spacing)) * 2 + 2

    idx = np.arange(-bound, bound + 1)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    pairs = np.stack([ii.ravel(), jj.ravel()], axis=1)
    pos = _hex_positions(pairs, spacing)
    ok = np.array([domain.contains_disk(p, radius) for p in pos])
    if not ok.any():
        raise EmptyCarrierError(f"no circle of radius 1/{n} fits in the domain")

    kept = {(int(i), int(j)) for (i, j), o in zip(pairs, ok) if o}

    tri_corners = _lattice_triangles(kept)
    if not tri_corners:
        raise EmptyCarrierError(
            f"no triangle of the 1/{n} hexagonal packing fits in the domain")

    # Edge-connected components of the kept triangles.
    edge_map: dict = {}
    for tid, tri in enumerate(tri_corners):
        for k in range(3):
            e = tuple(sorted((tri[k], tri[(k + 1) % 3])))
            edge_map.setdefault(e, []).append(tid)
    comp = np.full(len(tri_corners), -1, dtype=np.int64)
    ncomp = 0
    for seed in range(len(tri_corners)):
        if comp[seed] != -1:
            continue
        comp[seed] = ncomp
        queue = deque([seed])
        while queue:
            u = queue.popleft()
            for k in range(3):
                e = tuple(sorted((tri_corners[u][k],
                                  tri_corners[u][(k + 1) % 3])))
                for w in edge_map[e]:
                    if comp[w] == -1:
                        comp[w] = ncomp
                        queue.append(w)
        ncomp += 1

    used_pairs = sorted({c for tri in tri_corners for c in tri})
    arr = np.array(used_pairs, dtype=np.int64)
    apos = _hex_positions(arr, spacing)
    d2 = (apos[:, 0] - anchor[0]) ** 2 + (apos[:, 1] - anchor[1]) ** 2
    anchor_pair = used_pairs[int(np.argmin(d2))]
    candidates = {int(comp[tid]) for tid, tri in enumerate(tri_corners)
                  if anchor_pair in tri}
    sizes = {c: int((comp == c).sum()) for c in candidates}
    chosen = max(sorted(candidates), key=lambda c: sizes[c])

    final = [tri_corners[tid] for tid in range(len(tri_corners))
             if comp[tid] == chosen]
    vlist = sorted({c for tri in final for c in tri},
                   key=lambda ij: (ij[1], ij[0]))
    vid = {p: i for i, p in enumerate(vlist)}
    tris = [(vid[a], vid[b], vid[c]) for (a, b, c) in final]

    try:
        t = build_triangulation(tris, n_vertices=len(vlist))
    except (NonManifoldError, UnorientableError) as exc:
        raise NotADiskError(f"kept component is not a disk: {exc}") from exc
    if not t.is_disk():
        raise NotADiskError(
            f"kept component has Euler characteristic "
            f"{t.euler_characteristic()}, expected 1")
    positions = _hex_positions(np.array(vlist, dtype=np.int64), spacing)
    real = PlanarRealization(positions=positions, geometry="euclidean")
    if (real.signed_areas(t) < 0).any():
        # build_triangulation picked the wrong global sign; flip all.
        t = build_triangulation([tr[::-1] for tr in t.triangles],
                                n_vertices=t.n_vertices)
    real.validate(t)
    return t, real


def build_hex_patch(m: int, side: float = 1.0, center=(0.0, 0.0)):
    """Hexagonal patch of generation ``m``: all lattice triangles within
    combinatorial distance ``m`` of a central vertex.

    Every triangle is equilateral with side ``side``; the central vertex has
    generation exactly ``m``.
    """
    if m < 1:
        raise NotADiskError("need generation m >= 1")
    idx = np.arange(-m, m + 1)
    kept = set()
    for i in idx:
        for j in idx:
            if (abs(i) + abs(j) + abs(i + j)) // 2 <= m:
                kept.add((int(i), int(j)))
    tris = _lattice_triangles(kept)
    vlist = sorted(kept, key=lambda ij: (ij[1], ij[0]))
    vid = {p: i for i, p in enumerate(vlist)}
    t = build_triangulation([(vid[a], vid[b], vid[c]) for (a, b, c) in tris],
                            n_vertices=len(vlist))
    pos = _hex_positions(np.array(vlist, dtype=np.int64), side)
    pos[:, 0] += center[0]
    pos[:, 1] += center[1]
    real = PlanarRealization(positions=pos, geometry="euclidean")
    if (real.signed_areas(t) < 0).any():
        t = build_triangulation([tr[::-1] for tr in t.triangles],
                                n_vertices=t.n_vertices)
    real.validate(t)
    return t, real


def vertex_index_near(real: PlanarRealization, point) -> int:
    """Index of the vertex nearest ``point`` (lowest index on ties)."""
    d2 = ((real.positions - np.asarray(point, dtype=float)) ** 2).sum(axis=1)
    return int(np.argmin(d2))
