"""Generate high-accuracy reference samples for conformal maps to the disk.

Run from the repository root:

    python3 tools/generate_oracle_fixtures.py

Writes JSON fixtures under src/discon/fixtures/.  Everything is computed
with mpmath at 50 digits and cross-checked internally before a single float
is written; the package itself never imports this script.

Square fixture
--------------
The map of the unit disk onto the diamond |x| + |y| <= c is
F(z) = int_0^z (1 - t^4)^{-1/2} dt with c = F(1) = B(1/4, 1/2) / 4.
The axis-aligned square [-1, 1]^2 is the diamond rotated by pi/4 and scaled
by sqrt(2)/c, so the square-to-disk map with g(0) = 0, g'(0) > 0 is

    g(w) = e^{i pi/4} F^{-1}(e^{-i pi/4} (c / sqrt 2) w).

c is verified against the Beta closed form, and g against its dihedral
symmetries; boundary samples must land on the unit circle to 40 digits.

Ellipse fixture
---------------
For the ellipse with foci +-1 and semi-axes (cosh s, sinh s) the map to the
disk has the form g(z) = sqrt(k) sn(2K arcsin(z) / pi | m), with modulus m
(k = sqrt(m), K = K(m)) depending on s.  The script does not trust any
remembered modulus relation: it solves |g(cosh s)| = 1 for m numerically,
then validates |g| = 1 on a dense boundary sample and checks the boundary
argument is monotone (degree one).  If validation fails nothing is written.
"""

import json
import pathlib

import mpmath as mp

mp.mp.dps = 80

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "src" / "discon" / "fixtures"
CHECK = mp.mpf(10) ** -40


def c2(z):
    return [float(mp.re(z)), float(mp.im(z))]


# --- square -----------------------------------------------------------------

def sc_forward(z):
    """Disk -> diamond integral, straight contour from 0."""
    return mp.quad(lambda t: 1 / mp.sqrt(1 - t ** 4), [0, z])


def make_square_fixture():
    c = sc_forward(mp.mpf(1))
    c_beta = mp.beta(mp.mpf(1) / 4, mp.mpf(1) / 2) / 4
    assert abs(c - c_beta) < CHECK, "quadrature disagrees with Beta closed form"

    rot = mp.expjpi(mp.mpf(1) / 4)
    scale = c / mp.sqrt(2)

    def sc_inverse(w):
        z = w / c
        for _ in range(200):
            F = sc_forward(z) - w
            if abs(F) < CHECK:
                return z
            z = z - F * mp.sqrt(1 - z ** 4)
        raise RuntimeError(f"Newton stalled at w = {w}")

    def g(w):
        return rot * sc_inverse(w / rot * scale)

    # Symmetry cross-checks at an asymmetric probe point.
    probe = mp.mpc("0.3741", "-0.2093")
    gp = g(probe)
    assert abs(g(1j * probe) - 1j * gp) < CHECK
    assert abs(g(mp.conj(probe)) - mp.conj(gp)) < CHECK

    coords = [mp.mpf(v) / 10 for v in (-9, -6, -3, 0, 3, 6, 9)]
    interior = [mp.mpc(x, y) for x in coords for y in coords]
    interior += [mp.mpc("0.75", "0.75"), mp.mpc("-0.75", "0.75"),
                 mp.mpc("0.123456", "-0.654321"), mp.mpc("0.5", "0.0"),
                 mp.mpc("0.0", "-0.85")]
    offsets = [mp.mpf(v) / 10 for v in (-8, -4, 0, 4, 8)]
    boundary = ([mp.mpc(1, y) for y in offsets]
                + [mp.mpc(-1, y) for y in offsets]
                + [mp.mpc(x, 1) for x in offsets]
                + [mp.mpc(x, -1) for x in offsets])

    images = [g(w) for w in interior]
    bimages = [g(w) for w in boundary]
    for z in bimages:
        assert abs(abs(z) - 1) < CHECK, "boundary sample left the unit circle"

    data = {
        "domain": "square",
        "half_width": 1.0,
        "c": float(c),
        "gprime0": float(scale),
        "points": [c2(w) for w in interior],
        "images": [c2(z) for z in images],
        "boundary_points": [c2(w) for w in boundary],
        "boundary_images": [c2(z) for z in bimages],
        "dps": 80,
    }
    out = OUT_DIR / "square_disk.json"
    out.write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")
    print(f"square: c = {mp.nstr(c, 20)}, wrote {out}")


# --- ellipse ----------------------------------------------------------------

def make_ellipse_fixture():
    s = mp.log(2)                 # semi-axes (1.25, 0.75), foci +-1
    a = mp.cosh(s)
    b = mp.sinh(s)

    def g(z, m):
        k = mp.sqrt(m)
        K = mp.ellipk(m)
        return mp.sqrt(k) * mp.ellipfun("sn", 2 * K * mp.asin(z) / mp.pi, m)

    def boundary(th):
        return mp.mpc(a * mp.cos(th), b * mp.sin(th))

    def defect(m):
        return abs(g(boundary(mp.mpf(0)), m)) - 1

    try:
        m = mp.findroot(defect, mp.mpf("0.1"))
    except Exception as exc:
        print(f"ellipse: modulus solve failed ({exc}); fixture skipped")
        return
    if not (0 < m < 1):
        print(f"ellipse: modulus {m} outside (0,1); fixture skipped")
        return

    # Full validation: the boundary must land on the circle everywhere and
    # wind around it exactly once with monotone argument.
    n_check = 48
    args = []
    for i in range(n_check):
        th = 2 * mp.pi * i / n_check
        z = g(boundary(th), m)
        if abs(abs(z) - 1) > mp.mpf(10) ** -30:
            print(f"ellipse: boundary modulus defect {abs(abs(z)-1)} at "
                  f"theta={th}; fixture skipped")
            return
        args.append(mp.arg(z))
    total = mp.mpf(0)
    for i in range(n_check):
        d = args[(i + 1) % n_check] - args[i]
        while d <= -mp.pi:
            d += 2 * mp.pi
        while d > mp.pi:
            d -= 2 * mp.pi
        if d <= 0:
            print("ellipse: boundary argument not monotone; fixture skipped")
            return
        total += d
    assert abs(total - 2 * mp.pi) < mp.mpf(10) ** -30
    gp0 = g(mp.mpf(10) ** -25, m) / mp.mpf(10) ** -25
    assert abs(mp.im(gp0)) < mp.mpf(10) ** -20 and mp.re(gp0) > 0

    rs = [mp.mpf(v) / 10 for v in (0, 3, 6, 8)]
    ths = [2 * mp.pi * i / 12 for i in range(12)]
    interior = [mp.mpc(r * a * mp.cos(th), r * b * mp.sin(th))
                for r in rs for th in ths]
    bpts = [boundary(2 * mp.pi * i / 20) for i in range(20)]
    data = {
        "domain": "ellipse",
        "semi_axes": [float(a), float(b)],
        "modulus_m": float(m),
        "gprime0": float(mp.re(gp0)),
        "points": [c2(w) for w in interior],
        "images": [c2(g(w, m)) for w in interior],
        "boundary_points": [c2(w) for w in bpts],
        "boundary_images": [c2(g(w, m)) for w in bpts],
        "dps": 80,
    }
    out = OUT_DIR / "ellipse_disk.json"
    out.write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")
    print(f"ellipse: m = {mp.nstr(m, 20)}, wrote {out}")


if __name__ == "__main__":
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    make_square_fixture()
    make_ellipse_fixture()
