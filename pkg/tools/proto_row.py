"""Scratch check: one convergence-experiment row end to end, measured constants."""
import math
import sys
import time
import numpy as np

sys.path.insert(0, '/root/pkg/src')
from discon import mesh, packing, plmap, structure


def row(domain_name, n):
    t0 = time.perf_counter()
    dom = mesh.DiskDomain() if domain_name == 'disk' else mesh.square_domain(1.0)
    t, real = mesh.hex_fill(dom, n)
    tv = time.perf_counter()
    label = packing.solve_maximal_hyperbolic(t)
    ts = time.perf_counter()
    av = mesh.vertex_index_near(real, (0.0, 0.0))
    lay = packing.layout(t, label, anchor=av)
    tl = time.perf_counter()
    phi = plmap.build_plmap(t, real, lay)
    gens = mesh.generations(t)
    V = t.n_vertices
    f_dom = structure.circle_packing_factors(t, np.full(V, 1.0 / n))
    f_img = structure.circle_packing_factors(t, lay.radii)
    ldcr = plmap.estimate_ldcr(t, f_dom, f_img, gens=gens)
    s1 = ldcr.s_at(1)
    alpha = ldcr.alpha()
    edge_rep = plmap.edge_sandwich_check(t, f_dom, f_img, ldcr, gens=gens)
    rf = plmap.ratio_field(f_dom, f_img)
    theta, eps = plmap.carrier_fullness(t, real)
    # K: shrink 25% toward origin
    pos = real.positions
    if domain_name == 'disk':
        kin = np.hypot(pos[:, 0], pos[:, 1]) <= 0.75 + 1e-12
    else:
        kin = np.abs(pos).max(axis=1) <= 0.75 + 1e-12
    tri_mask = kin[t.triangles].all(axis=1)
    ms = plmap.metric_sandwich_check(phi, rf, theta, ldcr, gens=gens,
                                     triangle_mask=tri_mask)
    tm = time.perf_counter()
    kv = np.flatnonzero(kin)
    sch = packing.schwarz_ratio_report(np.full(V, 1.0 / n), lay.radii, kv)
    dil = plmap.dilatation_field(phi)
    max_dil = float(dil[tri_mask].max())
    td = time.perf_counter()
    bverts = np.flatnonzero(t.boundary_vertex_mask)
    max_br = float(lay.radii[bverts].max())
    margins = []
    for v in bverts:
        sizes = packing.separating_rings(t, int(v), av)
        if sizes:
            margins.append(packing.length_area_bound(sizes) - lay.radii[v])
    la_margin = float(min(margins)) if margins else math.inf
    tb = time.perf_counter()
    # oracle
    from proto_oracle import sq_map, gl_nodes
    dpts = pos[kv]
    ipts = lay.realization.positions[kv]
    if domain_name == 'disk':
        target = dpts
    else:
        target, _ = sq_map(dpts, gl_nodes(64))
    a, th, rms = packing.fit_disk_automorphism(ipts, target)
    mapped = packing.apply_disk_automorphism(a, th, ipts)
    err = float(np.hypot(*(mapped - target).T).max())
    te = time.perf_counter()
    print(f'{domain_name} n={n:3d} V={V:5d} s1={s1:.4f} alpha={alpha:.4f} '
          f'maxbr={max_br:.4f} la_m={la_margin:.3f} err={err:.5f} '
          f'dil={max_dil:.4f} maxH={sch.max_ratio:.3f} '
          f'ms(chk={ms.checked},skip={ms.skipped},pass={ms.passed},'
          f'maxratio={ms.max_ratio_error:.4f}) edge={edge_rep.passed} '
          f'theta={theta:.6f} eps={eps:.5f}')
    print(f'  times: fill={tv-t0:.2f} solve={ts-tv:.2f} layout={tl-ts:.2f} '
          f'diag={tm-tl:.2f} dil={td-tm:.2f} la={tb-td:.2f} orc={te-tb:.2f} '
          f'total={te-t0:.2f}')
    return err, max_br, alpha


if __name__ == '__main__':
    sys.path.insert(0, '/root/pkg/tools')
    for name in ('disk', 'square'):
        errs, brs, als = [], [], []
        for n in (4, 8, 16, 32, 64):
            e, b, a = row(name, n)
            errs.append(e)
            brs.append(b)
            als.append(a)
        print(name, 'err ratios:', [round(errs[i + 1] / errs[i], 3)
                                    for i in range(len(errs) - 1)])
        print(name, 'br  ratios:', [round(brs[i + 1] / brs[i], 3)
                                    for i in range(len(brs) - 1)])
        print(name, 'alpha max:', max(als))
