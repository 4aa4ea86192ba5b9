"""Plot-ready file writers for reconstruction fields and extracted shapes.

* CSV: first row holds the node coordinates, then the samples in row-major
  order, one row per index of the leading ``d - 1`` axes.
* PGM (``P2``): 2D fields (3D fields write their middle slice along the last
  axis). Values are mapped affinely ``min -> 0``, ``max -> 255``; the mapping
  lives in a ``.json`` sidecar. Image rows run from high to low ``x2``.
* SVG: contours as polylines in physical coordinates, optional dotted truth.
* STL (ASCII): marching-cubes triangle soup.
"""

from __future__ import annotations

import json

import numpy as np

from .reconstruct import ReconstructionField, Region


def _num(v: float) -> str:
    return repr(float(v))


def write_field_csv(fld: ReconstructionField, path) -> None:
    rows = fld.samples.reshape(-1, fld.resolution)
    with open(path, "w") as fh:
        fh.write(",".join(_num(x) for x in fld.nodes) + "\n")
        for row in rows:
            fh.write(",".join(_num(v) for v in row) + "\n")


def write_field_pgm(fld: ReconstructionField, path, sidecar=None) -> dict:
    img = fld.samples if fld.d == 2 else fld.samples[:, :, fld.resolution // 2]
    lo, hi = float(img.min()), float(img.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    grey = np.rint((img - lo) * scale).astype(int)
    grey = grey.T[::-1]
    with open(path, "w") as fh:
        fh.write(f"P2\n{grey.shape[1]} {grey.shape[0]}\n255\n")
        for row in grey:
            fh.write(" ".join(map(str, row)) + "\n")
    mapping = {"min": lo, "max": hi, "maxval": 255, "columns": "x1 ascending", "rows": "x2 descending",
               "slice": None if fld.d == 2 else {"axis": 2, "index": fld.resolution // 2}}
    if sidecar is not None:
        with open(sidecar, "w") as fh:
            json.dump(mapping, fh, sort_keys=True, indent=1)
            fh.write("\n")
    return mapping


def write_contours_svg(region: Region, path, truth_loops=None, size_px: int = 600) -> None:
    a = region.a
    stroke = a / 300
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size_px}" height="{size_px}" '
           f'viewBox="{_num(-a / 2)} {_num(-a / 2)} {_num(a)} {_num(a)}">',
           '<g transform="scale(1,-1)" fill="none">']

    def poly(pts, style):
        coords = " ".join(f"{_num(x)},{_num(y)}" for x, y in pts)
        return f'<polyline points="{coords}" {style}/>'

    for loop in truth_loops or ():
        closed = np.vstack([loop, loop[:1]])
        out.append(poly(closed, f'stroke="black" stroke-width="{_num(stroke)}" '
                                f'stroke-dasharray="{_num(3 * stroke)},{_num(3 * stroke)}"'))
    for c in region.contours:
        out.append(poly(c, f'stroke="red" stroke-width="{_num(stroke)}"'))
    out += ["</g>", "</svg>"]
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def write_stl(region: Region, path, name: str = "reconstruction") -> None:
    v, f = region.vertices, region.faces
    with open(path, "w") as fh:
        fh.write(f"solid {name}\n")
        if v is not None and len(f):
            tri = v[f]
            normals = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
            length = np.linalg.norm(normals, axis=1, keepdims=True)
            normals = np.divide(normals, length, out=np.zeros_like(normals), where=length > 0)
            for n, t in zip(normals, tri):
                fh.write(f"facet normal {' '.join(map(_num, n))}\n outer loop\n")
                for p in t:
                    fh.write(f"  vertex {' '.join(map(_num, p))}\n")
                fh.write(" endloop\nendfacet\n")
        fh.write(f"endsolid {name}\n")


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1, allow_nan=False)
        fh.write("\n")
