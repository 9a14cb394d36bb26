"""Deterministic file formats: JSON round-trips, CSV reports, SVG figures.

Every float is written with fixed formatting (17 significant digits in JSON
and CSV, 6 decimals in SVG) and every dict is emitted with sorted keys, so
identical inputs produce byte-identical files.  Non-finite values are
rejected rather than serialized.

Mesh JSON:    {"geometry": "euclidean"|"poincare", "triangles": [[i,j,k]...],
               "vertices": [[x,y]...]}
Layout JSON:  mesh JSON plus "radii": [r...]
Factors JSON: {"alpha": [...], "eta": [...], "f": [...]} with eta indexed by
              the canonical edge order of the mesh it belongs to.
Report CSV:   first column names the row key (triangle_id, edge_id or m),
              then quantity, lower, value, upper, pass.
"""

from __future__ import annotations

import json

import numpy as np

from .mesh import PlanarRealization, Triangulation, build_triangulation
from .packing import Layout, PackingLabel
from .structure import ConformalFactors

DIAGNOSTIC_COLUMNS = ("quantity", "lower", "value", "upper", "pass")


def format_float(x: float) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return format(x, ".17g")


def dumps_json(obj) -> str:
    """Canonical JSON text: sorted keys, fixed float format, one newline."""
    return _encode(obj) + "\n"


def _encode(obj) -> str:
    if isinstance(obj, dict):
        keys = sorted(obj)
        if any(not isinstance(k, str) for k in keys):
            raise TypeError("JSON object keys must be strings")
        return "{" + ",".join(json.dumps(k) + ":" + _encode(obj[k])
                              for k in keys) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_text(path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# JSON round-trips


def mesh_to_dict(t: Triangulation, real: PlanarRealization) -> dict:
    return {
        "geometry": real.geometry,
        "triangles": t.triangles,
        "vertices": real.positions,
    }


def mesh_from_dict(d: dict):
    t = build_triangulation([tuple(tri) for tri in d["triangles"]])
    real = PlanarRealization(positions=np.asarray(d["vertices"], dtype=float),
                             geometry=d["geometry"])
    if real.positions.shape[0] != t.n_vertices:
        raise ValueError("vertex count does not match triangle indices")
    return t, real


def layout_to_dict(t: Triangulation, lay: Layout) -> dict:
    d = mesh_to_dict(t, lay.realization)
    d["radii"] = lay.radii
    return d


def layout_from_dict(d: dict):
    """Rebuild (triangulation, layout); the stored radii are Euclidean."""
    t, real = mesh_from_dict(d)
    radii = np.asarray(d["radii"], dtype=float)
    if radii.shape != (t.n_vertices,):
        raise ValueError("radii length does not match vertex count")
    lay = Layout(realization=real, radii=radii,
                 label=PackingLabel.euclidean(radii))
    return t, lay


def factors_to_dict(f: ConformalFactors) -> dict:
    return {"alpha": f.alpha, "eta": f.eta, "f": f.f}


def factors_from_dict(d: dict) -> ConformalFactors:
    return ConformalFactors(alpha=np.asarray(d["alpha"], dtype=float),
                            eta=np.asarray(d["eta"], dtype=float),
                            f=np.asarray(d["f"], dtype=float))


# ---------------------------------------------------------------------------
# CSV reports


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    text = str(value)
    if any(ch in text for ch in ",\n\r\""):
        raise ValueError(f"CSV cell needs no quoting by contract: {text!r}")
    return text


def csv_text(header, rows) -> str:
    header = list(header)
    lines = [",".join(header)]
    for row in rows:
        row = list(row)
        if len(row) != len(header):
            raise ValueError("row width does not match header")
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def diagnostic_csv(key_name: str, entries) -> str:
    """Report CSV for one check.

    ``key_name`` names the row key (``triangle_id``, ``edge_id`` or ``m``);
    each entry is (key, quantity, lower, value, upper, ok).
    """
    if key_name not in ("triangle_id", "edge_id", "m"):
        raise ValueError(f"unknown diagnostic key {key_name!r}")
    return csv_text((key_name,) + DIAGNOSTIC_COLUMNS, entries)


# ---------------------------------------------------------------------------
# SVG figures


def packing_svg(t: Triangulation, positions, radii) -> str:
    """Circle packing figure: carrier edges as lines, one circle per vertex.

    Coordinates are written y-flipped at 1e-6 precision with a viewBox
    fitted to the circles.
    """
    pos = np.asarray(positions, dtype=float)
    rad = np.asarray(radii, dtype=float)
    if pos.shape[0] != rad.shape[0]:
        raise ValueError("positions and radii must align")
    x, y = pos[:, 0], -pos[:, 1]
    x0, x1 = (x - rad).min(), (x + rad).max()
    y0, y1 = (y - rad).min(), (y + rad).max()
    span = max(x1 - x0, y1 - y0)
    margin = 0.02 * span
    sw = 0.004 * span

    def f(v: float) -> str:
        if not np.isfinite(v):
            raise ValueError("cannot serialize non-finite coordinate")
        return format(v, ".6f")

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">'
        .format(f(x0 - margin), f(y0 - margin),
                f(x1 - x0 + 2 * margin), f(y1 - y0 + 2 * margin)),
        '<g fill="none" stroke="#777" stroke-width="{}">'.format(f(sw)),
    ]
    for i, j in t.edges:
        parts.append('<line x1="{}" y1="{}" x2="{}" y2="{}"/>'
                     .format(f(x[i]), f(y[i]), f(x[j]), f(y[j])))
    parts.append('</g>')
    parts.append('<g fill="none" stroke="#000" stroke-width="{}">'
                 .format(f(sw)))
    for v in range(pos.shape[0]):
        parts.append('<circle cx="{}" cy="{}" r="{}"/>'
                     .format(f(x[v]), f(y[v]), f(rad[v])))
    parts.append('</g>')
    parts.append('</svg>')
    return "\n".join(parts) + "\n"
