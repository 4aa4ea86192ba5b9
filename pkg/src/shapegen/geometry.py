"""Parametric shape families, indicator functions and geometric oracles.

Every body is a unit-density source ``chi_D``. A :class:`ShapeSpec` describes
``D`` in local coordinates; the body is then translated so that the centre
of its bounding box sits at ``spec.center`` (the origin by default).

Kinds and their ``params``:

=================  ==========================================================
Disk               ``(R,)``
Rectangle          ``(width, height)``
Box                ``(Lx, Ly, Lz)``
Kite               ``(beta1, beta2)``, both in [0.5, 1.8]
Apple              ``(beta1,)`` in [1, 2]
RoundedTriangle    ``(beta2,)`` in [0.5, 1.5]
Mannequin          ``(height, relative_weight)``, see :func:`mannequin`
MultiDomain        ``()``; the bodies live in ``components``
=================  ==========================================================
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError, DomainError, SupportError

KINDS = ("Disk", "Rectangle", "Box", "Kite", "Apple", "RoundedTriangle", "MultiDomain", "Mannequin")
PARAM_COUNT = {"Disk": 1, "Rectangle": 2, "Box": 3, "Kite": 2, "Apple": 1, "RoundedTriangle": 1,
               "MultiDomain": 0, "Mannequin": 2}
PARAM_RANGE = {
    "Kite": [(0.5, 1.8), (0.5, 1.8)],
    "Apple": [(1.0, 2.0)],
    "RoundedTriangle": [(0.5, 1.5)],
    "Mannequin": [(1.4, 2.0), (0.5, 1.5)],
}
PARAMETRIC_2D = ("Disk", "Kite", "Apple", "RoundedTriangle")

# number of polyline vertices used for interior tests
POLYLINE_VERTICES = 4096


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    params: tuple = ()
    center: tuple | None = None
    components: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown shape kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "components", tuple(self.components))
        if len(params) != PARAM_COUNT[self.kind]:
            raise ConfigError(f"{self.kind} takes {PARAM_COUNT[self.kind]} params, got {len(params)}")
        if not all(math.isfinite(p) for p in params):
            raise ConfigError(f"{self.kind} params must be finite")
        for p, (lo, hi) in zip(params, PARAM_RANGE.get(self.kind, [])):
            if not lo <= p <= hi:
                raise DomainError(f"{self.kind} parameter {p} outside [{lo}, {hi}]")
        if self.kind in ("Disk", "Rectangle", "Box") and min(params) <= 0:
            raise ConfigError(f"{self.kind} dimensions must be positive")
        if self.kind == "MultiDomain":
            if len(self.components) < 2:
                raise ConfigError("MultiDomain needs at least two components")
            dims = {c.dim for c in self.components}
            if len(dims) != 1:
                raise ConfigError("MultiDomain components must share a dimension")
            if any(c.kind == "MultiDomain" for c in self.components):
                raise ConfigError("nested MultiDomain is not supported")
        center = self.center
        if center is None:
            center = (0.0,) * self.dim
        center = tuple(float(c) for c in center)
        if len(center) != self.dim:
            raise ConfigError(f"center of a {self.dim}D shape must have {self.dim} coordinates")
        object.__setattr__(self, "center", center)
        if self.kind == "MultiDomain":
            _check_disjoint(self)

    @property
    def dim(self) -> int:
        if self.kind == "MultiDomain":
            return self.components[0].dim
        return 3 if self.kind in ("Box", "Mannequin") else 2

    def with_params(self, params) -> "ShapeSpec":
        return ShapeSpec(self.kind, tuple(params), self.center, self.components)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "params": list(self.params), "center": list(self.center)}
        if self.components:
            out["components"] = [c.to_json() for c in self.components]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ShapeSpec":
        try:
            comps = tuple(cls.from_json(c) for c in obj.get("components", ()))
            return cls(obj["kind"], tuple(obj.get("params", ())), obj.get("center"), comps)
        except KeyError as exc:
            raise ConfigError(f"shape spec is missing field {exc}") from None


@dataclass(frozen=True)
class CharacteristicPoint:
    """Characteristic values ``(lambda^(1), ..., lambda^(M))`` with axis labels."""

    values: tuple
    labels: tuple = ()

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigError("a characteristic point needs at least one value")
        labels = tuple(self.labels) or tuple(f"lambda{j + 1}" for j in range(len(values)))
        if len(labels) != len(values):
            raise ConfigError("labels and values differ in length")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.values)


# --- constructors ---------------------------------------------------------

def disk(radius, center=None):
    return ShapeSpec("Disk", (radius,), center)


def rectangle(width, height, center=None):
    return ShapeSpec("Rectangle", (width, height), center)


def box(lx, ly, lz, center=None):
    return ShapeSpec("Box", (lx, ly, lz), center)


def kite(beta1, beta2, center=None):
    return ShapeSpec("Kite", (beta1, beta2), center)


def apple(beta1, center=None):
    return ShapeSpec("Apple", (beta1,), center)


def rounded_triangle(beta2, center=None):
    return ShapeSpec("RoundedTriangle", (beta2,), center)


def multi_domain(components, center=None):
    return ShapeSpec("MultiDomain", (), center, tuple(components))


def mannequin(height, relative_weight, center=None):
    """Six-ellipsoid stand-in for a human body.

    The vertical proportions are fixed in units of ``height / 7.5``: legs span
    3.5 units from the floor, the torso the next 3 units and the head the top
    unit, so the vertical extent equals ``height`` exactly. All lateral
    semi-axes scale with ``cbrt(relative_weight)``. The six ellipsoids have
    pairwise disjoint interiors (head and torso touch at a single point).
    """
    return ShapeSpec("Mannequin", (height, relative_weight), center)


# --- local geometry ---------------------------------------------------------

def _apple_radius(t):
    p = 0.5 + 0.4 * np.cos(t) + 0.1 * np.sin(2 * t)
    q = 1.0 + 0.7 * np.cos(t)
    dp = -0.4 * np.sin(t) + 0.2 * np.cos(2 * t)
    dq = -0.7 * np.sin(t)
    return p / q, (dp * q - p * dq) / q**2


def _triangle_radius(t):
    return 1.0 + 0.15 * np.cos(3 * t), -0.45 * np.sin(3 * t)


def curve(shape: ShapeSpec, t):
    """Local boundary points and their t-derivatives for a 2D parametric kind.

    Returns two arrays of shape ``(len(t), 2)``; orientation is counter-clockwise.
    """
    t = np.asarray(t, dtype=float)
    c, s = np.cos(t), np.sin(t)
    if shape.kind == "Kite":
        b1, b2 = shape.params
        pts = np.stack([b1 * (c + 0.65 * np.cos(2 * t) - 0.65), 1.5 * b2 * s], axis=-1)
        der = np.stack([b1 * (-s - 1.3 * np.sin(2 * t)), 1.5 * b2 * c], axis=-1)
        return pts, der
    if shape.kind == "Disk":
        r, dr = np.full_like(t, shape.params[0]), np.zeros_like(t)
    elif shape.kind == "Apple":
        r, dr = _apple_radius(t)
        r, dr = shape.params[0] * r, shape.params[0] * dr
    elif shape.kind == "RoundedTriangle":
        r, dr = _triangle_radius(t)
        r, dr = shape.params[0] * r, shape.params[0] * dr
    else:
        raise ConfigError(f"{shape.kind} has no parametric boundary")
    pts = np.stack([r * c, r * s], axis=-1)
    der = np.stack([dr * c - r * s, dr * s + r * c], axis=-1)
    return pts, der


@functools.lru_cache(maxsize=None)
def _unit_extent(kind: str):
    """Exact (to ~1e-14) bounding box of the unit-scale curve of a polar kind."""
    radius = _apple_radius if kind == "Apple" else _triangle_radius
    n = 4096
    t = 2 * np.pi * np.arange(n) / n
    r = radius(t)[0]
    coords = (r * np.cos(t), r * np.sin(t))
    lo, hi = [], []
    for axis in range(2):
        trig = np.cos if axis == 0 else np.sin
        for sign, sink in ((1.0, lo), (-1.0, hi)):
            j = int(np.argmin(sign * coords[axis]))
            res = minimize_scalar(lambda u: sign * radius(u)[0] * trig(u),
                                  bounds=(t[j] - 2 * np.pi / n, t[j] + 2 * np.pi / n),
                                  method="bounded", options={"xatol": 1e-13})
            sink.append(min(sign * coords[axis][j], float(res.fun)) * sign)
    return np.array(lo), np.array(hi)


# min over t of cos t + 0.65 cos 2t - 0.65, attained at cos t = -1/2.6
_KITE_XMIN = -1 / 2.6 + 0.65 * (2 / 2.6**2 - 1) - 0.65


# torso, head, left/right leg, left/right arm, in units of (height/7.5, cbrt(rw) * height)
_MANNEQUIN_TABLE = (
    # z_lo, z_hi (height/7.5 units), lateral centre x, semi-axis x, semi-axis y (height * cbrt(rw) units)
    (3.5, 6.5, 0.0, 0.105, 0.065),
    (6.5, 7.5, 0.0, 0.055, 0.06),
    (0.0, 3.5, -0.055, 0.047, 0.055),
    (0.0, 3.5, 0.055, 0.047, 0.055),
    (3.4, 6.3, -0.158, 0.038, 0.04),
    (3.4, 6.3, 0.158, 0.038, 0.04),
)


def ellipsoids(shape: ShapeSpec):
    """Local ``(centres, semi_axes)`` arrays, each ``(6, 3)``, of a Mannequin."""
    if shape.kind != "Mannequin":
        raise ConfigError("only Mannequin shapes are built from ellipsoids")
    height, rw = shape.params
    unit, lateral = height / 7.5, height * np.cbrt(rw)
    centres, semi = [], []
    for z_lo, z_hi, xc, ax, ay in _MANNEQUIN_TABLE:
        centres.append((xc * lateral, 0.0, 0.5 * (z_lo + z_hi) * unit))
        semi.append((ax * lateral, ay * lateral, 0.5 * (z_hi - z_lo) * unit))
    return np.array(centres), np.array(semi)


def _local_bbox(shape: ShapeSpec):
    kind, p = shape.kind, shape.params
    if kind == "Disk":
        return np.array([-p[0], -p[0]]), np.array([p[0], p[0]])
    if kind in ("Rectangle", "Box"):
        half = 0.5 * np.array(p)
        return -half, half
    if kind == "Kite":
        return np.array([_KITE_XMIN * p[0], -1.5 * p[1]]), np.array([p[0], 1.5 * p[1]])
    if kind in ("Apple", "RoundedTriangle"):
        lo, hi = _unit_extent(kind)
        return p[0] * lo, p[0] * hi
    if kind == "Mannequin":
        c, s = ellipsoids(shape)
        return (c - s).min(axis=0), (c + s).max(axis=0)
    raise AssertionError(kind)


class Placed(NamedTuple):
    shape: ShapeSpec
    shift: np.ndarray


def placed_primitives(shape: ShapeSpec) -> list[Placed]:
    """Primitive bodies with the translation that maps local to world coordinates."""
    if shape.kind != "MultiDomain":
        lo, hi = _local_bbox(shape)
        return [Placed(shape, np.asarray(shape.center) - 0.5 * (lo + hi))]
    parts = [placed_primitives(c)[0] for c in shape.components]
    boxes = [(_local_bbox(p.shape)[0] + p.shift, _local_bbox(p.shape)[1] + p.shift) for p in parts]
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    offset = np.asarray(shape.center) - 0.5 * (lo + hi)
    return [Placed(p.shape, p.shift + offset) for p in parts]


def standalone_components(shape: ShapeSpec) -> list[ShapeSpec]:
    """Each primitive of ``shape`` as its own ShapeSpec, at its world position."""
    out = []
    for prim, shift in placed_primitives(shape):
        lo, hi = _local_bbox(prim)
        out.append(ShapeSpec(prim.kind, prim.params, tuple(0.5 * (lo + hi) + shift)))
    return out


def bounding_box(shape: ShapeSpec):
    """World-coordinate bounding box ``(lo, hi)``."""
    los, his = [], []
    for prim, shift in placed_primitives(shape):
        lo, hi = _local_bbox(prim)
        los.append(lo + shift)
        his.append(hi + shift)
    return np.min(los, axis=0), np.max(his, axis=0)


def check_support(shape: ShapeSpec, a: float) -> None:
    """Raise :class:`SupportError` unless the closed support lies in (-a/2, a/2)^d."""
    lo, hi = bounding_box(shape)
    if lo.min() <= -a / 2 or hi.max() >= a / 2:
        raise SupportError(f"{shape.kind}{shape.params} with bounding box "
                           f"[{lo.tolist()}, {hi.tolist()}] escapes V0 for a={a}")


# --- interior tests ---------------------------------------------------------

@functools.lru_cache(maxsize=256)
def _cached_polygon(shape: ShapeSpec) -> np.ndarray:
    t = 2 * np.pi * np.arange(POLYLINE_VERTICES) / POLYLINE_VERTICES
    return curve(shape, t)[0]


def winding_number(polygon: np.ndarray, pts: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Winding number of a closed polygon around each point (vectorized, chunked)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    v0 = polygon
    v1 = np.roll(polygon, -1, axis=0)
    out = np.empty(len(pts), dtype=np.int64)
    for start in range(0, len(pts), chunk):
        p = pts[start:start + chunk]
        px, py = p[:, :1], p[:, 1:]
        cross = (v1[:, 0] - v0[:, 0]) * (py - v0[:, 1]) - (px - v0[:, 0]) * (v1[:, 1] - v0[:, 1])
        up = (v0[:, 1] <= py) & (v1[:, 1] > py) & (cross > 0)
        down = (v0[:, 1] > py) & (v1[:, 1] <= py) & (cross < 0)
        out[start:start + chunk] = up.sum(axis=1) - down.sum(axis=1)
    return out


def _scanline_inside(polygon: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Interior mask on the tensor grid ``xs x ys`` (shape ``(len(xs), len(ys))``)."""
    v0 = polygon
    v1 = np.roll(polygon, -1, axis=0)
    mask = np.zeros((len(xs), len(ys)), dtype=bool)
    y0, y1 = v0[:, 1], v1[:, 1]
    for j, y in enumerate(ys):
        up = (y0 <= y) & (y1 > y)
        down = (y0 > y) & (y1 <= y)
        hit = up | down
        if not hit.any():
            continue
        a, b = v0[hit], v1[hit]
        xc = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
        sign = np.where(up[hit], 1, -1)
        order = np.argsort(xc, kind="stable")
        xc, sign = xc[order], sign[order]
        # winding = signed count of crossings strictly to the right of x
        right = np.concatenate([np.cumsum(sign[::-1])[::-1], [0]])
        k = np.searchsorted(xc, xs, side="right")
        mask[:, j] = right[k] != 0
    return mask


def indicator_points(shape: ShapeSpec, pts) -> np.ndarray:
    """Boolean interior mask for an ``(n, d)`` array of world points."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != shape.dim:
        raise ConfigError(f"points are {pts.shape[1]}D but the shape is {shape.dim}D")
    inside = np.zeros(len(pts), dtype=bool)
    for prim, shift in placed_primitives(shape):
        q = pts - shift
        kind, p = prim.kind, prim.params
        if kind == "Disk":
            inside |= np.einsum("ij,ij->i", q, q) <= p[0] ** 2
        elif kind in ("Rectangle", "Box"):
            inside |= np.all(np.abs(q) <= 0.5 * np.array(p), axis=1)
        elif kind == "Mannequin":
            c, s = ellipsoids(prim)
            for ci, si in zip(c, s):
                inside |= (((q - ci) / si) ** 2).sum(axis=1) <= 1.0
        else:
            inside |= winding_number(_cached_polygon(prim), q) != 0
    return inside


def indicator(shape: ShapeSpec, x) -> int:
    """``chi_D(x)``: 1 inside or on the boundary, 0 outside."""
    x = np.asarray(x, dtype=float)
    if x.shape != (shape.dim,):
        raise ConfigError(f"expected a {shape.dim}D point, got shape {x.shape}")
    return int(indicator_points(shape, x[None])[0])


def indicator_grid(shape: ShapeSpec, axes: Sequence[np.ndarray]) -> np.ndarray:
    """Interior mask on the tensor grid ``axes[0] x ... x axes[d-1]`` (``ij`` indexing)."""
    if len(axes) != shape.dim:
        raise ConfigError(f"need {shape.dim} grid axes, got {len(axes)}")
    axes = [np.asarray(ax, dtype=float) for ax in axes]
    mask = np.zeros(tuple(len(ax) for ax in axes), dtype=bool)
    for prim, shift in placed_primitives(shape):
        loc = [ax - s for ax, s in zip(axes, shift)]
        kind, p = prim.kind, prim.params
        if kind in ("Rectangle", "Box"):
            parts = [np.abs(ax) <= 0.5 * L for ax, L in zip(loc, p)]
            mask |= functools.reduce(np.multiply.outer, parts).astype(bool)
        elif kind == "Disk":
            x, y = np.meshgrid(*loc, indexing="ij")
            mask |= x**2 + y**2 <= p[0] ** 2
        elif kind == "Mannequin":
            for ci, si in zip(*ellipsoids(prim)):
                parts = [((ax - c) / s) ** 2 for ax, c, s in zip(loc, ci, si)]
                mask |= (parts[0][:, None, None] + parts[1][None, :, None] + parts[2][None, None, :]) <= 1.0
        else:
            mask |= _scanline_inside(_cached_polygon(prim), loc[0], loc[1])
    return mask


def _check_disjoint(shape: ShapeSpec) -> None:
    parts = placed_primitives(shape)
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            (li, hi_), (lj, hj) = [(_local_bbox(p.shape)[0] + p.shift, _local_bbox(p.shape)[1] + p.shift)
                                   for p in (parts[i], parts[j])]
            if np.any(hi_ < lj) or np.any(hj < li):
                continue
            a, b = parts[i].shape, parts[j].shape
            pa = _surface_samples(a, 512)
            pb = _surface_samples(b, 512)
            if indicator_points(b, pa).any() or indicator_points(a, pb).any():
                raise DomainError(f"MultiDomain components {i} and {j} overlap")


# --- boundaries ---------------------------------------------------------------

class BoxBoundary(NamedTuple):
    corners: np.ndarray
    faces: tuple


# corner index bits: x -> 1, y -> 2, z -> 4; faces listed counter-clockwise seen from outside
BOX_FACES = ((0, 2, 6, 4), (1, 5, 7, 3), (0, 4, 5, 1), (2, 3, 7, 6), (0, 1, 3, 2), (4, 6, 7, 5))


def boundary_polyline(shape: ShapeSpec, n: int = POLYLINE_VERTICES):
    """Boundary samples in world coordinates.

    Parametric kinds return ``n`` points at ``t = 2*pi*j/n``. A Rectangle
    returns its four corners counter-clockwise from the lower left; a Box
    returns a :class:`BoxBoundary` with its eight corners and face loops.
    """
    if n < 3:
        raise ConfigError("need at least 3 boundary samples")
    if shape.kind == "MultiDomain":
        raise ConfigError("use boundary_polylines for MultiDomain shapes")
    (prim, shift), = placed_primitives(shape)
    if shape.kind == "Rectangle":
        w, h = 0.5 * np.array(shape.params)
        return np.array([[-w, -h], [w, -h], [w, h], [-w, h]]) + shift
    if shape.kind == "Box":
        half = 0.5 * np.array(shape.params)
        bits = np.array([[(i >> k) & 1 for k in range(3)] for i in range(8)])
        return BoxBoundary((2 * bits - 1) * half + shift, BOX_FACES)
    if shape.kind not in PARAMETRIC_2D:
        raise ConfigError(f"boundary_polyline is not defined for {shape.kind}")
    t = 2 * np.pi * np.arange(n) / n
    return curve(prim, t)[0] + shift


def boundary_polylines(shape: ShapeSpec, n: int = POLYLINE_VERTICES) -> list[np.ndarray]:
    """Closed boundary point loops of a 2D shape, one per component; rectangles are densified."""
    if shape.dim != 2:
        raise ConfigError("boundary_polylines is 2D only")
    loops = []
    for prim, shift in placed_primitives(shape):
        if prim.kind == "Rectangle":
            corners = boundary_polyline(ShapeSpec("Rectangle", prim.params), 4)
            s = np.arange(n // 4) / (n // 4)
            edges = [c0 + s[:, None] * (c1 - c0) for c0, c1 in zip(corners, np.roll(corners, -1, axis=0))]
            loops.append(np.concatenate(edges) + shift)
        else:
            t = 2 * np.pi * np.arange(n) / n
            loops.append(curve(prim, t)[0] + shift)
    return loops


def _surface_samples(shape: ShapeSpec, n: int) -> np.ndarray:
    if shape.dim == 2:
        return np.concatenate(boundary_polylines(shape, n))
    rng = np.random.default_rng(0)
    u = rng.normal(size=(n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    pts = []
    for prim, shift in placed_primitives(shape):
        if prim.kind == "Box":
            half = 0.5 * np.array(prim.params)
            pts.append(u / np.abs(u / half).max(axis=1, keepdims=True) + shift)
        else:
            for c, s in zip(*ellipsoids(prim)):
                pts.append(c + u * s + shift)
    return np.concatenate(pts)


# --- measure ----------------------------------------------------------------

def measure(shape: ShapeSpec) -> float:
    """Area (2D) or volume (3D) of the body."""
    total = 0.0
    for prim, _ in placed_primitives(shape):
        kind, p = prim.kind, prim.params
        if kind == "Disk":
            total += math.pi * p[0] ** 2
        elif kind in ("Rectangle", "Box"):
            total += math.prod(p)
        elif kind == "Mannequin":
            total += float(sum(4 / 3 * math.pi * np.prod(s) for s in ellipsoids(prim)[1]))
        else:
            # Green's theorem, trapezoid rule: spectrally accurate for smooth periodic curves
            n = POLYLINE_VERTICES
            pts, der = curve(prim, 2 * np.pi * np.arange(n) / n)
            total += 0.5 * float(np.sum(pts[:, 0] * der[:, 1] - pts[:, 1] * der[:, 0])) * 2 * np.pi / n
    return total


# --- families ---------------------------------------------------------------

@dataclass(frozen=True)
class ShapeFamily:
    """Maps characteristic values onto parameter slots of a template shape.

    ``bindings[j]`` is the slot driven by axis ``j``: ``(i,)`` addresses
    ``template.params[i]``, ``(c, i)`` addresses ``components[c].params[i]``.
    """

    template: ShapeSpec
    bindings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "bindings", tuple(tuple(int(v) for v in b) for b in self.bindings))
        for b in self.bindings:
            if len(b) == 1 and b[0] < len(self.template.params):
                continue
            if len(b) == 2 and b[0] < len(self.template.components) \
                    and b[1] < len(self.template.components[b[0]].params):
                continue
            raise ConfigError(f"binding {b} does not address a parameter of {self.template.kind}")

    def shape(self, values: Iterable[float]) -> ShapeSpec:
        values = list(values)
        if len(values) != len(self.bindings):
            raise ConfigError(f"family has {len(self.bindings)} axes, got {len(values)} values")
        params = list(self.template.params)
        comps = [list(c.params) for c in self.template.components]
        for slot, v in zip(self.bindings, values):
            if len(slot) == 1:
                params[slot[0]] = v
            else:
                comps[slot[0]][slot[1]] = v
        children = tuple(c.with_params(p) for c, p in zip(self.template.components, comps))
        return ShapeSpec(self.template.kind, tuple(params), self.template.center, children)

    def to_json(self) -> dict:
        return {"template": self.template.to_json(), "bindings": [list(b) for b in self.bindings]}

    @classmethod
    def from_json(cls, obj: dict) -> "ShapeFamily":
        try:
            return cls(ShapeSpec.from_json(obj["template"]), tuple(obj["bindings"]))
        except KeyError as exc:
            raise ConfigError(f"shape family is missing field {exc}") from None
