"""Circle-packing Riemann-map convergence experiment.

For a plane domain filled with a hexagonal packing of circles of radius
1/n, the maximal packing of the same combinatorics in the unit disk induces
a piecewise-linear map from the carrier to the disk.  As n grows this map
converges to the Riemann map of the domain, up to a disk automorphism.
This module orchestrates the experiment: it builds the packings, runs the
full diagnostic suite on each, compares vertex images against a reference
conformal map, and emits deterministic artifacts (CSV of per-n rows, JSON
layouts, SVG figures).

Reference maps: the disk target is the identity (any disk automorphism is
absorbed by the gauge fit), the square and ellipse targets are evaluated at
runtime and validated on load against shipped high-precision sample
fixtures computed independently.  Other domains must supply their own
samples via ``domain="file:<path>"``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import mesh, packing, plmap, serialize, structure
from .errors import UnsupportedDomainError
from .mesh import Triangulation
from .packing import Layout

DEFAULT_NS = (4, 8, 16, 32, 64)
PROBE_SHRINK = 0.25
TREND_SLACK = 0.10
ORACLE_CHECK_TOL = 1e-12
FILE_ORACLE_MATCH_TOL = 1e-9
GAUSS_NODES = 64

CONVERGENCE_COLUMNS = (
    "n", "eps", "s1", "alpha", "max_boundary_radius", "la_margin",
    "oracle_error", "max_dilatation", "max_h", "sandwich_checked",
    "sandwich_passed", "edge_sandwich_passed",
)


# ---------------------------------------------------------------------------
# Reference conformal maps


def _fixture_payload(name: str) -> dict:
    path = resources.files("discon") / "fixtures" / name
    return json.loads(path.read_text())


class _SquareOracle:
    """Conformal map of the square (-h,h)^2 onto the unit disk, 0 -> 0.

    The inverse map is the degree-4 Schwarz-Christoffel integral
    F(z) = int_0^z (1 - t^4)^{-1/2} dt, which sends the disk to the diamond
    |x| + |y| <= c with c = F(1).  The square map is F^{-1} conjugated by a
    45-degree rotation and scaled by c/sqrt(2).  F is evaluated by
    Gauss-Legendre quadrature and inverted by Newton iteration; on load the
    result is checked against the shipped fixture samples.
    """

    def __init__(self):
        data = _fixture_payload("square_disk.json")
        self.c = float(data["c"])
        self.half_width = float(data["half_width"])
        x, w = np.polynomial.legendre.leggauss(GAUSS_NODES)
        self._nodes = 0.5 * (x + 1.0)
        self._weights = 0.5 * w
        self._validate(data)

    def _forward(self, z: np.ndarray) -> np.ndarray:
        # F(z) = z * int_0^1 (1 - (z u)^4)^{-1/2} du; the integrand stays in
        # the right half-plane for |z u| < 1, so the principal root is the
        # analytic branch.
        zu = z[:, None] * self._nodes[None, :]
        return z * np.sum(self._weights[None, :] / np.sqrt(1.0 - zu ** 4),
                          axis=1)

    def _inverse(self, target: np.ndarray) -> np.ndarray:
        z = target / self.c
        for _ in range(80):
            f = self._forward(z) - target
            z = z - f * np.sqrt(1.0 - z ** 4)
            if np.abs(f).max() < 1e-15:
                return z
        raise RuntimeError("square reference map: Newton did not converge")

    def map(self, points: np.ndarray) -> np.ndarray:
        w = (points[:, 0] + 1j * points[:, 1]) / self.half_width
        rot = np.exp(0.25j * np.pi)
        z = rot * self._inverse((self.c / math.sqrt(2.0)) * w / rot)
        return np.stack([z.real, z.imag], axis=1)

    def _validate(self, data: dict) -> None:
        got = self.map(np.asarray(data["points"], dtype=float))
        err = np.abs(got - np.asarray(data["images"], dtype=float)).max()
        if err > ORACLE_CHECK_TOL:
            raise RuntimeError(
                f"square reference map disagrees with its fixture by {err:g}")


class _EllipseOracle:
    """Conformal map of the ellipse with foci +-1 onto the unit disk.

    With modulus m solved so the boundary lands on the unit circle, the map
    is sqrt(k) sn(2K arcsin(z)/pi | m), k = sqrt(m).  sn is evaluated for
    complex argument by descending Landen transformations down to a sine,
    K by the arithmetic-geometric mean.  Validated on load against the
    shipped fixture samples.
    """

    def __init__(self):
        data = _fixture_payload("ellipse_disk.json")
        self.m = float(data["modulus_m"])
        self.semi_axes = tuple(float(v) for v in data["semi_axes"])
        if not 0.0 < self.m < 1.0:
            raise ValueError("elliptic modulus must lie in (0, 1)")
        self.k = math.sqrt(self.m)
        self.K = math.pi / (2.0 * _agm(1.0, math.sqrt(1.0 - self.m)))
        self._validate(data)

    def map(self, points: np.ndarray) -> np.ndarray:
        z = (points[:, 0] + 1j * points[:, 1]).astype(complex)
        u = (2.0 * self.K / math.pi) * np.arcsin(z)
        w = math.sqrt(self.k) * _sn(u, self.m)
        return np.stack([w.real, w.imag], axis=1)

    def _validate(self, data: dict) -> None:
        got = self.map(np.asarray(data["points"], dtype=float))
        err = np.abs(got - np.asarray(data["images"], dtype=float)).max()
        if err > ORACLE_CHECK_TOL:
            raise RuntimeError(
                f"ellipse reference map disagrees with its fixture by {err:g}")


def _agm(a: float, b: float) -> float:
    for _ in range(60):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        if abs(a - b) <= 1e-17 * a:
            break
    return 0.5 * (a + b)


def _sn(u: np.ndarray, m: float) -> np.ndarray:
    """Jacobi sn for complex argument by descending Landen transformations."""
    k = math.sqrt(m)
    seq = []
    while k > 1e-15:
        kp = math.sqrt(max(0.0, 1.0 - k * k))
        k = (1.0 - kp) / (1.0 + kp)
        seq.append(k)
    scale = 1.0
    for kk in seq:
        scale *= 1.0 + kk
    s = np.sin(u / scale)
    for kk in reversed(seq):
        s = (1.0 + kk) * s / (1.0 + kk * s * s)
    return s


class _FileOracle:
    """Reference map backed by a user-supplied sample file.

    The JSON file holds parallel "points" and "images" arrays; requested
    points must match stored sample points within FILE_ORACLE_MATCH_TOL.
    """

    def __init__(self, path: str):
        with open(path) as fh:
            data = json.load(fh)
        self.points = np.asarray(data["points"], dtype=float)
        self.images = np.asarray(data["images"], dtype=float)
        if self.points.shape != self.images.shape or self.points.ndim != 2:
            raise ValueError("sample file needs matching (N, 2) arrays")

    def map(self, points: np.ndarray) -> np.ndarray:
        out = np.empty_like(points, dtype=float)
        for i, p in enumerate(points):
            d = np.hypot(*(self.points - p).T)
            j = int(d.argmin())
            if d[j] > FILE_ORACLE_MATCH_TOL:
                raise ValueError(
                    f"no stored sample within {FILE_ORACLE_MATCH_TOL:g} of "
                    f"({p[0]:.12g}, {p[1]:.12g}); nearest is {d[j]:g} away")
            out[i] = self.images[j]
        return out


_ORACLES: dict = {}


def conformal_oracle(domain: str, points) -> np.ndarray:
    """Reference conformal map values at the given points.

    ``domain`` is "disk" (identity; the gauge fit absorbs automorphisms),
    "square", "ellipse", or "file:<path>" for precomputed samples.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("points must be (N, 2)")
    if domain == "disk":
        return points.copy()
    if domain in ("square", "ellipse") or domain.startswith("file:"):
        if domain not in _ORACLES:
            if domain == "square":
                _ORACLES[domain] = _SquareOracle()
            elif domain == "ellipse":
                _ORACLES[domain] = _EllipseOracle()
            else:
                _ORACLES[domain] = _FileOracle(domain[len("file:"):])
        return _ORACLES[domain].map(points)
    raise UnsupportedDomainError(
        f"domain {domain!r} has no built-in reference map; precompute "
        f"samples with an independent method and pass domain='file:<path>' "
        f"(JSON with parallel 'points' and 'images' arrays)")


# ---------------------------------------------------------------------------
# Experiment configuration and rows


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one convergence run.

    The probe set K defaults to the domain shrunk by ``shrink`` toward the
    anchor; estimates away from the boundary are only claimed there.
    ``probe_corners`` overrides it with an explicit polygon.
    """

    domain: str = "disk"
    ns: tuple = DEFAULT_NS
    anchor: tuple = (0.0, 0.0)
    pack_tol: float = packing.DEFAULT_TOLERANCE
    layout_tol: float = packing.DEFAULT_LAYOUT_TOLERANCE
    shrink: float = PROBE_SHRINK
    probe_corners: tuple | None = None
    out_dir: str | None = None

    def __post_init__(self):
        ns = tuple(int(n) for n in self.ns)
        if not ns or any(n < 2 for n in ns):
            raise ValueError("ns must hold integers >= 2")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("ns must be strictly increasing")
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "anchor",
                           (float(self.anchor[0]), float(self.anchor[1])))
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if self.probe_corners is not None:
            corners = tuple((float(x), float(y))
                            for x, y in self.probe_corners)
            if len(corners) < 3:
                raise ValueError("probe polygon needs at least 3 corners")
            dom = _domain_object(self.domain)
            if not all(dom.contains_disk(c, 1e-9) for c in corners):
                raise ValueError("probe polygon must lie inside the domain")
            object.__setattr__(self, "probe_corners", corners)


@dataclass(frozen=True)
class ConvergenceRow:
    """Measured quantities for one packing resolution n.

    ``la_margin`` is the worst slack of the separating-chain radius bound
    over boundary vertices, or None when no boundary vertex has a
    separating chain (tiny carriers).  All other measurements are finite
    and non-negative.
    """

    n: int
    eps: float
    s1: float
    alpha: float
    max_boundary_radius: float
    la_margin: float | None
    oracle_error: float
    max_dilatation: float
    max_h: float
    sandwich_checked: int
    sandwich_passed: bool
    edge_sandwich_passed: bool

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        values = (self.eps, self.s1, self.alpha, self.max_boundary_radius,
                  self.oracle_error, self.max_dilatation, self.max_h)
        if not all(math.isfinite(v) and v >= 0.0 for v in values):
            raise ValueError("row entries must be finite and non-negative")
        if self.la_margin is not None and not math.isfinite(self.la_margin):
            raise ValueError("la_margin must be finite when present")

    def csv_cells(self) -> list:
        return [self.n, self.eps, self.s1, self.alpha,
                self.max_boundary_radius,
                "" if self.la_margin is None else self.la_margin,
                self.oracle_error, self.max_dilatation, self.max_h,
                self.sandwich_checked, self.sandwich_passed,
                self.edge_sandwich_passed]


@dataclass(frozen=True)
class TrendReport:
    """Monotone-trend verdict for one row quantity.

    Not strict: a value may exceed its predecessor by ``slack`` before the
    run is flagged.
    """

    quantity: str
    values: tuple
    slack: float
    passed: bool


@dataclass
class RunResult:
    config: ExperimentConfig
    rows: list
    trends: list
    files: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        rows_ok = all(
            r.sandwich_passed and r.edge_sandwich_passed
            and (r.la_margin is None or r.la_margin >= 0.0)
            for r in self.rows)
        return rows_ok and all(tr.passed for tr in self.trends)

    @property
    def alpha_max(self) -> float:
        return max(r.alpha for r in self.rows)


def check_trend(quantity: str, values, slack: float = TREND_SLACK
                ) -> TrendReport:
    values = tuple(float(v) for v in values)
    ok = all(b <= (1.0 + slack) * a for a, b in zip(values, values[1:]))
    return TrendReport(quantity=quantity, values=values, slack=slack,
                       passed=ok)


# ---------------------------------------------------------------------------
# The experiment


def _domain_object(domain: str):
    if domain == "disk":
        return mesh.DiskDomain()
    if domain == "square":
        return mesh.square_domain(1.0)
    raise UnsupportedDomainError(
        f"carrier filling supports 'disk' and 'square', not {domain!r}; "
        f"conformal_oracle additionally evaluates 'ellipse' and "
        f"'file:<path>' sample maps")


def _probe_mask(cfg: ExperimentConfig, positions: np.ndarray) -> np.ndarray:
    """Vertices inside the compact probe set K (closed, small tolerance)."""
    if cfg.probe_corners is not None:
        poly = mesh.PolygonDomain(np.asarray(cfg.probe_corners))
        return np.fromiter((poly.contains_disk(p, 0.0) for p in positions),
                           dtype=bool, count=len(positions))
    ax, ay = cfg.anchor
    keep = 1.0 - cfg.shrink
    center = np.array([cfg.shrink * ax, cfg.shrink * ay])
    rel = positions - center
    if cfg.domain == "disk":
        return np.hypot(rel[:, 0], rel[:, 1]) <= keep + 1e-12
    return np.abs(rel).max(axis=1) <= keep + 1e-12


def run_single(cfg: ExperimentConfig, n: int):
    """One resolution: build packings, map, diagnostics.

    Returns ``(row, triangulation, layout)`` so callers can emit artifacts.
    """
    dom = _domain_object(cfg.domain)
    t, real = mesh.hex_fill(dom, n, anchor=cfg.anchor)
    label = packing.solve_maximal_hyperbolic(t, tol=cfg.pack_tol)
    anchor_v = mesh.vertex_index_near(real, cfg.anchor)
    lay = packing.layout(t, label, anchor=anchor_v, tol=cfg.layout_tol)
    phi = plmap.build_plmap(t, real, lay)

    gens = mesh.generations(t)
    domain_radii = np.full(t.n_vertices, 1.0 / n)
    f_dom = structure.circle_packing_factors(t, domain_radii)
    f_img = structure.circle_packing_factors(t, lay.radii)
    ldcr = plmap.estimate_ldcr(t, f_dom, f_img, gens=gens)
    edge_rep = plmap.edge_sandwich_check(t, f_dom, f_img, ldcr, gens=gens)

    theta, eps = plmap.carrier_fullness(t, real)
    kin = _probe_mask(cfg, real.positions)
    tri_mask = kin[t.triangles].all(axis=1)
    rf = plmap.ratio_field(f_dom, f_img)
    ms = plmap.metric_sandwich_check(phi, rf, theta, ldcr, gens=gens,
                                     triangle_mask=tri_mask)

    kv = np.flatnonzero(kin)
    if kv.size == 0:
        raise ValueError(f"no carrier vertices inside the probe set at n={n}")
    schwarz = packing.schwarz_ratio_report(domain_radii, lay.radii, kv)
    max_dil = float(plmap.dilatation_field(phi)[tri_mask].max()) \
        if tri_mask.any() else 1.0

    bverts = np.flatnonzero(t.boundary_vertex_mask)
    max_br = float(lay.radii[bverts].max())
    margins = []
    for v in bverts:
        sizes = packing.separating_rings(t, int(v), anchor_v)
        if sizes:
            margins.append(packing.length_area_bound(sizes)
                           - float(lay.radii[v]))
    la_margin = min(margins) if margins else None

    target = conformal_oracle(cfg.domain, real.positions[kv])
    image_pts = lay.realization.positions[kv]
    a, th, _ = packing.fit_disk_automorphism(image_pts, target)
    mapped = packing.apply_disk_automorphism(a, th, image_pts)
    err = float(np.hypot(*(mapped - target).T).max())

    row = ConvergenceRow(
        n=n, eps=eps, s1=ldcr.s_at(1), alpha=ldcr.alpha(),
        max_boundary_radius=max_br, la_margin=la_margin, oracle_error=err,
        max_dilatation=max_dil, max_h=schwarz.max_ratio,
        sandwich_checked=ms.checked, sandwich_passed=ms.passed,
        edge_sandwich_passed=edge_rep.passed)
    return row, t, lay


def run_convergence(cfg: ExperimentConfig) -> RunResult:
    """Full convergence experiment over ``cfg.ns`` with trend checks."""
    rows = []
    artifacts = {}
    for n in cfg.ns:
        row, t, lay = run_single(cfg, n)
        rows.append(row)
        if cfg.out_dir is not None:
            d = serialize.layout_to_dict(t, lay)
            artifacts[f"layout_n{n:03d}.json"] = serialize.dumps_json(d)
            artifacts[f"figure_n{n:03d}.svg"] = serialize.packing_svg(
                t, lay.realization.positions, lay.radii)
    trends = [
        check_trend("oracle_error", [r.oracle_error for r in rows]),
        check_trend("max_boundary_radius",
                    [r.max_boundary_radius for r in rows]),
    ]
    result = RunResult(config=cfg, rows=rows, trends=trends)
    if cfg.out_dir is not None:
        artifacts["rows.csv"] = serialize.csv_text(
            CONVERGENCE_COLUMNS, [r.csv_cells() for r in rows])
        result.files = emit(artifacts, cfg.out_dir)
    return result


def emit(artifacts: dict, out_dir: str) -> list:
    """Write named text artifacts; byte-identical for identical inputs."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name in sorted(artifacts):
        path = os.path.join(out_dir, name)
        serialize.write_text(path, artifacts[name])
        paths.append(path)
    return paths
