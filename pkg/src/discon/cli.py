"""Command line interface.

Subcommands: ``hexfill`` (fill a domain with a hexagonal packing),
``pack`` (solve a circle-packing label and lay it out), ``flatten``
(vertex scaling to prescribed angle defects), ``map`` (build a
piecewise-linear map and evaluate it), ``diagnose`` (per-item CSV reports
for the distortion estimates), ``converge`` (the full convergence
experiment).  Every command exits 0 only if its enabled checks pass.

Inputs and outputs use the JSON formats of the serialize module.  For
flatten, a mesh file may carry an ``edge_lengths`` array (canonical edge
order); otherwise background lengths are measured from the positions.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import mesh, packing, pipeline, plmap, serialize, structure, vertexscale
from .errors import DisconError

DIAGNOSE_CHECKS = ("ldcr", "edge_sandwich", "metric_sandwich", "dilatation",
                   "pullback")
BARYCENTRIC_COLUMNS = ("eps", "theta", "max_dev", "empirical_beta")
PLANE_PULLBACK_TOL = 1e-8


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    serialize.write_text(path, text)
    return path


def _load_mesh_arg(path: str):
    t, real = serialize.mesh_from_dict(_load_json(path))
    return t, real


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_hexfill(args) -> int:
    if args.domain == "disk":
        dom = mesh.DiskDomain()
    elif args.domain == "square":
        dom = mesh.square_domain(args.half_width)
    else:
        raise DisconError(f"unknown domain {args.domain!r}")
    anchor = tuple(float(v) for v in args.anchor.split(","))
    t, real = mesh.hex_fill(dom, args.n, anchor=anchor)
    path = _write(args.out, "mesh.json",
                  serialize.dumps_json(serialize.mesh_to_dict(t, real)))
    print(f"hexfill: {t.n_vertices} vertices, {t.n_triangles} triangles "
          f"-> {path}")
    return 0


def _cmd_pack(args) -> int:
    t, real = _load_mesh_arg(args.mesh)
    if args.boundary_radius is not None:
        label = packing.solve_euclidean(t, args.boundary_radius,
                                        tol=args.tol,
                                        max_sweeps=args.max_sweeps)
    else:
        label = packing.solve_maximal_hyperbolic(t, tol=args.tol,
                                                 max_sweeps=args.max_sweeps)
    # Euclidean radii in the disk depend on the layout gauge; anchoring at
    # the innermost circle keeps them comparable across resolutions.
    interior = np.flatnonzero(~t.boundary_vertex_mask)
    if interior.size:
        centroid = real.positions.mean(axis=0)
        d = np.hypot(*(real.positions[interior] - centroid).T)
        anchor = int(interior[d.argmin()])
    else:
        anchor = 0
    lay = packing.layout(t, label, anchor=anchor)
    worst = float(np.abs(lay.tangency_errors(t)).max())
    d = serialize.layout_to_dict(t, lay)
    _write(args.out, "layout.json", serialize.dumps_json(d))
    _write(args.out, "figure.svg",
           serialize.packing_svg(t, lay.realization.positions, lay.radii))
    print(f"pack: {label.geometry} label, worst tangency error {worst:.3e}")
    return 0


def _cmd_flatten(args) -> int:
    t, real = _load_mesh_arg(args.mesh)
    payload = _load_json(args.mesh)
    if "edge_lengths" in payload:
        background = np.asarray(payload["edge_lengths"], dtype=float)
    else:
        i, j = t.edges[:, 0], t.edges[:, 1]
        background = np.hypot(*(real.positions[i] - real.positions[j]).T)
    if args.target == "flat-torus":
        targets = None
    else:
        if args.corners is None:
            raise DisconError("--target triangle requires --corners i,j,k")
        corners = [int(c) for c in args.corners.split(",")]
        targets = vertexscale.triangle_boundary_targets(t, corners)
    result = vertexscale.flatten(t, background, targets=targets,
                                 tol=args.tol)
    factors = structure.vertex_scaling_factors(t, background, result.w)
    _write(args.out, "factors.json",
           serialize.dumps_json(serialize.factors_to_dict(factors)))
    resid = float(np.abs(result.report.defects
                         - (targets if targets is not None else 0.0)).max())
    report = {"max_residual": resid, "newton_steps": result.newton_steps,
              "target": args.target, "tol": args.tol}
    _write(args.out, "flatten_report.json", serialize.dumps_json(report))
    print(f"flatten: residual {resid:.3e} in {result.newton_steps} steps")
    return 0 if resid <= args.tol else 1


def _cmd_map(args) -> int:
    t, real = _load_mesh_arg(args.mesh)
    _, lay = serialize.layout_from_dict(_load_json(args.layout))
    phi = plmap.build_plmap(t, real, lay)
    dil = plmap.dilatation_field(phi)
    report = {"triangles": t.n_triangles,
              "max_dilatation": float(dil.max()),
              "mean_dilatation": float(dil.mean())}
    _write(args.out, "map_report.json", serialize.dumps_json(report))
    if args.points is not None:
        pts = np.asarray(_load_json(args.points)["points"], dtype=float)
        images = plmap.evaluate(phi, pts)
        _write(args.out, "images.json",
               serialize.dumps_json({"points": pts, "images": images}))
    print(f"map: max dilatation {report['max_dilatation']:.6f}")
    return 0


def _diag_ldcr(t, ldcr, gens):
    rows = []
    for m in range(1, len(ldcr.s)):
        s = float(ldcr.s[m])
        rows.append((m, "s_m", "", s, 1.0, s <= 1.0))
    return "m", rows


def _diag_edge_sandwich(t, f_dom, f_img, ldcr):
    H = plmap.ratio_field(f_dom, f_img).H
    l2 = structure.edge_lengths(t, f_dom) ** 2
    lt2 = structure.edge_lengths(t, f_img) ** 2
    rows = []
    for eid in range(t.n_edges):
        m = int(ldcr.edge_generation[eid])
        sm = ldcr.s_at(m)
        if sm > 1.0:
            continue
        # Worst endpoint: the bound must hold from both ends of the edge.
        v = max(t.edges[eid], key=lambda vv: abs(lt2[eid] / (H[vv] ** 2
                                                            * l2[eid]) - 1.0))
        base = H[v] ** 2 * l2[eid]
        ratio = lt2[eid] / base
        lo, hi = 1.0 - 3.0 * sm, 1.0 + 3.0 * sm
        rows.append((eid, "edge_ratio", lo, ratio, hi,
                     lo - 1e-12 <= ratio <= hi + 1e-12))
    return "edge_id", rows


def _diag_metric_sandwich(phi, rf, theta, ldcr, gens):
    C = 216.0 / theta ** 2
    tri_gen = gens[phi.t.triangles].min(axis=1)
    corners = np.eye(3)
    bary = np.full(3, 1.0 / 3.0)
    rows = []
    for tid in range(phi.t.n_triangles):
        mg = int(tri_gen[tid])
        sm = ldcr.s_at(mg)
        if mg < 1 or sm > 1.0 / 6.0:
            continue
        gd = plmap.domain_metric(phi, tid).gram
        gp = plmap.pullback_metric(phi, tid).gram
        worst = 1.0
        for lam in (corners[0], corners[1], corners[2], bary):
            ef = plmap.interpolate_eF(phi.t, rf, tid, lam)
            for X in plmap.SAMPLE_VECTORS:
                ratio = float(X @ gp @ X) / (ef * float(X @ gd @ X))
                if abs(ratio - 1.0) > abs(worst - 1.0):
                    worst = ratio
        lo, hi = 1.0 - C * sm, 1.0 + C * sm
        rows.append((tid, "form_ratio", lo, worst, hi,
                     lo - 1e-12 <= worst <= hi + 1e-12))
    return "triangle_id", rows


def _diag_dilatation(phi):
    dil = plmap.dilatation_field(phi)
    rows = [(tid, "dilatation", 1.0, float(dil[tid]), "",
             math.isfinite(dil[tid]) and dil[tid] >= 1.0 - 1e-12)
            for tid in range(phi.t.n_triangles)]
    return "triangle_id", rows


def _diag_pullback(t, real, grid: int):
    from . import barycentric
    interior = np.flatnonzero(~t.boundary_vertex_mask[t.triangles].any(axis=1))
    tid = int(interior[0]) if interior.size else 0
    pts = real.positions[t.triangles[tid]]
    rep = barycentric.pullback_estimate(barycentric.plane(), pts, grid=grid)
    row = (rep.eps, rep.theta, rep.max_dev, rep.beta)
    return row, rep.max_dev <= PLANE_PULLBACK_TOL


def _cmd_diagnose(args) -> int:
    t, real = _load_mesh_arg(args.mesh)
    _, lay = serialize.layout_from_dict(_load_json(args.layout))
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = [c for c in checks if c not in DIAGNOSE_CHECKS]
    if unknown:
        raise DisconError(f"unknown checks {unknown}; "
                          f"available: {', '.join(DIAGNOSE_CHECKS)}")
    if args.domain_radius is not None:
        r_dom = args.domain_radius
    else:
        i, j = t.edges[:, 0], t.edges[:, 1]
        r_dom = 0.5 * float(np.hypot(
            *(real.positions[i] - real.positions[j]).T).min())
    gens = mesh.generations(t)
    f_dom = structure.circle_packing_factors(t, np.full(t.n_vertices, r_dom))
    f_img = structure.circle_packing_factors(t, lay.radii)
    ldcr = plmap.estimate_ldcr(t, f_dom, f_img, gens=gens)
    phi = plmap.build_plmap(t, real, lay)
    rf = plmap.ratio_field(f_dom, f_img)
    theta, _ = plmap.carrier_fullness(t, real)

    all_ok = True
    for check in checks:
        if check == "ldcr":
            key, rows = _diag_ldcr(t, ldcr, gens)
        elif check == "edge_sandwich":
            key, rows = _diag_edge_sandwich(t, f_dom, f_img, ldcr)
        elif check == "metric_sandwich":
            key, rows = _diag_metric_sandwich(phi, rf, theta, ldcr, gens)
        elif check == "dilatation":
            key, rows = _diag_dilatation(phi)
        else:
            row, ok = _diag_pullback(t, real, args.grid)
            _write(args.out, "pullback.csv",
                   serialize.csv_text(BARYCENTRIC_COLUMNS, [row]))
            all_ok = all_ok and ok
            print(f"pullback: {'PASS' if ok else 'FAIL'} "
                  f"(max_dev {row[2]:.3e})")
            continue
        ok = all(r[-1] for r in rows)
        all_ok = all_ok and ok
        _write(args.out, f"{check}.csv", serialize.diagnostic_csv(key, rows))
        print(f"{check}: {'PASS' if ok else 'FAIL'} ({len(rows)} rows)")
    return 0 if all_ok else 1


def _cmd_converge(args) -> int:
    settings = {}
    if args.config is not None:
        settings.update(_load_json(args.config))
    if "ns" in settings:
        settings["ns"] = tuple(settings["ns"])
    if "anchor" in settings:
        settings["anchor"] = tuple(settings["anchor"])
    if "probe_corners" in settings and settings["probe_corners"] is not None:
        settings["probe_corners"] = tuple(
            tuple(c) for c in settings["probe_corners"])
    if args.out is not None:
        settings["out_dir"] = args.out
    if args.tol is not None:
        settings["pack_tol"] = args.tol
    cfg = pipeline.ExperimentConfig(**settings)
    result = pipeline.run_convergence(cfg)
    for row in result.rows:
        print(f"n={row.n:4d} eps={row.eps:.5f} err={row.oracle_error:.6f} "
              f"max_br={row.max_boundary_radius:.5f} alpha={row.alpha:.4f} "
              f"dil={row.max_dilatation:.5f}")
    for tr in result.trends:
        print(f"trend {tr.quantity}: {'PASS' if tr.passed else 'FAIL'}")
    print(f"converge: {'PASS' if result.passed else 'FAIL'}")
    return 0 if result.passed else 1


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="discon",
        description="discrete conformal maps: circle packings, vertex "
                    "scaling, distortion diagnostics, convergence runs")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for sampled suites (default 0; the built-in "
                        "commands are deterministic)")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("hexfill", help="fill a domain with a hexagonal "
                                       "circle packing")
    q.add_argument("--domain", default="disk", choices=("disk", "square"))
    q.add_argument("--n", type=int, required=True,
                   help="circles have radius 1/n")
    q.add_argument("--half-width", type=float, default=1.0)
    q.add_argument("--anchor", default="0,0")
    q.add_argument("--out", required=True)
    q.set_defaults(fn=_cmd_hexfill)

    q = sub.add_parser("pack", help="solve a packing label and lay it out")
    q.add_argument("--mesh", required=True)
    q.add_argument("--boundary-radius", type=float, default=None,
                   help="uniform Euclidean boundary radius; omit for the "
                        "maximal hyperbolic packing")
    q.add_argument("--tol", type=float, default=packing.DEFAULT_TOLERANCE)
    q.add_argument("--max-sweeps", type=int,
                   default=packing.DEFAULT_MAX_SWEEPS)
    q.add_argument("--out", required=True)
    q.set_defaults(fn=_cmd_pack)

    q = sub.add_parser("flatten", help="vertex scaling to prescribed "
                                       "angle defects")
    q.add_argument("--mesh", required=True)
    q.add_argument("--target", required=True,
                   choices=("flat-torus", "triangle"))
    q.add_argument("--corners", default=None,
                   help="three boundary vertex ids for --target triangle")
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--out", required=True)
    q.set_defaults(fn=_cmd_flatten)

    q = sub.add_parser("map", help="build the PL map mesh -> layout")
    q.add_argument("--mesh", required=True)
    q.add_argument("--layout", required=True)
    q.add_argument("--points", default=None,
                   help="JSON with a 'points' array to evaluate")
    q.add_argument("--out", required=True)
    q.set_defaults(fn=_cmd_map)

    q = sub.add_parser("diagnose", help="per-item CSV distortion reports")
    q.add_argument("--mesh", required=True)
    q.add_argument("--layout", required=True)
    q.add_argument("--checks", default=",".join(DIAGNOSE_CHECKS),
                   help=f"comma list from: {', '.join(DIAGNOSE_CHECKS)}")
    q.add_argument("--domain-radius", type=float, default=None,
                   help="uniform domain circle radius (default: half the "
                        "shortest domain edge)")
    q.add_argument("--grid", type=int, default=8,
                   help="barycentric grid resolution for the pullback check")
    q.add_argument("--out", required=True)
    q.set_defaults(fn=_cmd_diagnose)

    q = sub.add_parser("converge", help="circle-packing convergence "
                                        "experiment")
    q.add_argument("--config", default=None,
                   help="JSON with ExperimentConfig fields")
    q.add_argument("--out", default=None)
    q.add_argument("--tol", type=float, default=None,
                   help="packing solver tolerance override")
    q.set_defaults(fn=_cmd_converge)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.random.seed(args.seed)
    try:
        return args.fn(args)
    except (DisconError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
