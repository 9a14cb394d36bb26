"""Scratch check: runtime oracle evaluators vs shipped fixtures."""
import json
import math
import numpy as np

SQ = json.load(open('/root/pkg/src/discon/fixtures/square_disk.json'))
EL = json.load(open('/root/pkg/src/discon/fixtures/ellipse_disk.json'))


def gl_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def sq_forward(z, nodes):
    u, w = nodes
    zu = z[:, None] * u[None, :]
    return z * np.sum(w[None, :] / np.sqrt(1.0 - zu ** 4), axis=1)


def sq_inverse(target, nodes, iters=80):
    z = target / SQ['c']
    for _ in range(iters):
        f = sq_forward(z, nodes) - target
        z = z - f * np.sqrt(1.0 - z ** 4)
        if np.abs(f).max() < 1e-15:
            break
    return z, np.abs(f).max()


def sq_map(points, nodes):
    w = points[:, 0] + 1j * points[:, 1]
    rot = np.exp(1j * np.pi / 4)
    c = SQ['c']
    zd = (c / math.sqrt(2.0)) * w / rot
    z, res = sq_inverse(zd, nodes)
    out = rot * z
    return np.stack([out.real, out.imag], axis=1), res


for n in (64, 96, 128):
    nodes = gl_nodes(n)
    pts = np.asarray(SQ['points'])
    img = np.asarray(SQ['images'])
    got, res = sq_map(pts, nodes)
    err = np.abs(got - img).max()
    print(f'square GL-{n}: max err vs fixture {err:.3e} newton res {res:.3e}')

# ellipse: sn via descending Landen
def agm(a, b):
    for _ in range(60):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        if abs(a - b) < 1e-17 * a:
            break
    return 0.5 * (a + b)


def sn_landen(u, m):
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


m = EL['modulus_m']
k = math.sqrt(m)
K = math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - m)))
print('K(m) =', K, 'landen levels:', end=' ')
kk = k
lv = 0
while kk > 1e-15:
    kp = math.sqrt(1 - kk * kk)
    kk = (1 - kp) / (1 + kp)
    lv += 1
print(lv)

pts = np.asarray(EL['points'])
img = np.asarray(EL['images'])
z = pts[:, 0] + 1j * pts[:, 1]
u = (2.0 * K / math.pi) * np.arcsin(z.astype(complex))
w = math.sqrt(k) * sn_landen(u, m)
err = np.abs(np.stack([w.real, w.imag], axis=1) - img).max()
print(f'ellipse interior: max err vs fixture {err:.3e}')

bp = np.asarray(EL['boundary_points'])
bi = np.asarray(EL['boundary_images'])
zb = bp[:, 0] + 1j * bp[:, 1]
ub = (2.0 * K / math.pi) * np.arcsin(zb.astype(complex))
wb = math.sqrt(k) * sn_landen(ub, m)
err_b = np.abs(np.stack([wb.real, wb.imag], axis=1) - bi).max()
print(f'ellipse boundary: max err vs fixture {err_b:.3e}  max |w| dev {np.abs(np.abs(wb)-1).max():.3e}')

# square boundary check straight from fixture data
sb = np.asarray(SQ['boundary_images'])
print('square fixture boundary |z|-1 max:', np.abs(np.hypot(sb[:,0], sb[:,1]) - 1).max())
