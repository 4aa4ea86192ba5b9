"""Truncated multi-frequency Fourier reconstruction of a source from its shape generator.

With ``phi_xi(x) = exp(i 2 pi xi . x / a)`` on ``V0 = (-a/2, a/2)^d``:

* ``f_xi = u_inf(xi) / (a^d C_{d,k})`` for ``xi != 0``;
* the ``xi = 0`` sample is taken at the shifted frequency ``2 pi mu e1 / a``, so
  ``f_0`` is recovered by removing the truncated cross terms
  ``int_V0 phi_xi conj(phi_xi0)`` from it;
* ``f_N = f_0 + sum_{1 <= |xi|_inf <= N} f_xi phi_xi`` is sampled at cell centres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree
from skimage import measure as skmeasure

from . import geometry
from .errors import ConfigError
from .farfield import ShapeGenerator, cell_centres
from .geometry import ShapeSpec

DEFAULT_LEVEL = 0.5


def truncation_order(delta: float, tau: float, d: int) -> int:
    """``N = [tau * delta^(-2/(2+d))]``, ``[X]`` being the largest integer below ``X + 1``."""
    if not 0 < delta < 1:
        raise ConfigError(f"noise level must lie in (0, 1) to fix N, got {delta}")
    if tau < d:
        raise ConfigError(f"tau must be >= d = {d}, got {tau}")
    x = tau * delta ** (-2.0 / (2 + d))
    # the largest integer strictly below X + 1 is ceil(X); X within rounding
    # of an integer (2 * 0.01**-0.5 = 20) is treated as that integer
    n = round(x)
    if abs(x - n) <= 1e-9 * max(1.0, abs(x)):
        return int(n)
    return int(math.ceil(x))


def cross_term(xi, mu: float, a: float, d: int | None = None) -> float:
    """``int_V0 phi_xi(y) conj(phi_xi0(y)) dy`` for ``xi != 0``, ``xi0 = (mu, 0, ...)``."""
    xi = np.asarray(xi)
    d = d if d is not None else len(xi)
    if len(xi) != d:
        raise ConfigError(f"xi must have {d} components")
    if not np.any(xi):
        raise ConfigError("the cross term is defined for xi != 0 only")
    if np.any(xi[1:]):
        return 0.0
    x1 = float(xi[0])
    return -a**d * math.cos(x1 * math.pi) * math.sin(mu * math.pi) / ((x1 - mu) * math.pi)


@dataclass(eq=False)
class FourierCoefficients:
    """Coefficients on ``|xi|_inf <= N``; ``coeff[xi + N]`` holds ``f_xi``."""

    d: int
    a: float
    N: int
    mu: float
    coeff: np.ndarray

    def __post_init__(self):
        self.coeff = np.asarray(self.coeff, dtype=complex)
        if self.coeff.shape != (2 * self.N + 1,) * self.d:
            raise ConfigError(f"coefficient array must have shape {(2 * self.N + 1,) * self.d}")

    def get(self, xi) -> complex:
        return complex(self.coeff[tuple(np.asarray(xi) + self.N)])


def fourier_coeffs(gen: ShapeGenerator) -> FourierCoefficients:
    adm = gen.adm
    d, a, N, mu = adm.d, adm.a, adm.N, adm.mu
    f = gen.integrals() / a**d
    zero = adm.zero_index
    # only xi = (xi1, 0, ..., 0) contributes; lexicographic in xi1
    re, im = [], []
    for x1 in range(-N, N + 1):
        if x1 == 0:
            continue
        xi = (x1,) + (0,) * (d - 1)
        c = cross_term(xi, mu, a, d) * f[adm.index(xi)]
        re.append(c.real)
        im.append(c.imag)
    correction = complex(math.fsum(re), math.fsum(im))
    f0 = mu * math.pi / (a**d * math.sin(mu * math.pi)) * (gen.integrals()[zero] - correction)
    f = f.copy()
    f[zero] = f0
    return FourierCoefficients(d, a, N, mu, f.reshape((2 * N + 1,) * d))


@dataclass(eq=False)
class ReconstructionField:
    d: int
    a: float
    resolution: int
    samples: np.ndarray
    level: float = DEFAULT_LEVEL
    imag_residual: float = 0.0

    def __post_init__(self):
        if self.resolution < 16:
            raise ConfigError(f"mesh resolution must be >= 16, got {self.resolution}")
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != (self.resolution,) * self.d:
            raise ConfigError("sample array does not match the mesh")

    @property
    def nodes(self) -> np.ndarray:
        return cell_centres(self.a, self.resolution)

    @property
    def cell(self) -> float:
        return self.a / self.resolution

    def __eq__(self, other):
        return isinstance(other, ReconstructionField) and \
            (self.d, self.a, self.resolution, self.level, self.imag_residual) == \
            (other.d, other.a, other.resolution, other.level, other.imag_residual) \
            and np.array_equal(self.samples, other.samples)

    def to_json(self) -> dict:
        return {"d": self.d, "a": self.a, "resolution": self.resolution, "level": self.level,
                "imag_residual": self.imag_residual, "samples": [float(v) for v in self.samples.reshape(-1)]}

    @classmethod
    def from_json(cls, obj) -> "ReconstructionField":
        res, d = int(obj["resolution"]), int(obj["d"])
        samples = np.array(obj["samples"], dtype=float).reshape((res,) * d)
        return cls(d, float(obj["a"]), res, samples, float(obj["level"]), float(obj["imag_residual"]))


def synthesis_matrix(a: float, N: int, resolution: int) -> np.ndarray:
    """``P[m, xi + N] = exp(i 2 pi xi x_m / a)`` at the cell-centre nodes."""
    x = cell_centres(a, resolution)
    return np.exp(1j * (2 * np.pi / a) * np.outer(x, np.arange(-N, N + 1)))


def evaluate_complex(coeffs: FourierCoefficients, resolution: int) -> np.ndarray:
    """``f_N`` at every mesh node, by separable synthesis along each axis."""
    P = synthesis_matrix(coeffs.a, coeffs.N, resolution)
    out = coeffs.coeff
    for axis in range(coeffs.d):
        out = np.moveaxis(np.tensordot(P, out, axes=([1], [axis])), 0, axis)
    return out


def evaluate_field(coeffs: FourierCoefficients, resolution: int, level: float = DEFAULT_LEVEL) -> ReconstructionField:
    if resolution < 16:
        raise ConfigError(f"mesh resolution must be >= 16, got {resolution}")
    values = evaluate_complex(coeffs, resolution)
    imag = float(np.sqrt(np.mean(values.imag**2)))
    return ReconstructionField(coeffs.d, coeffs.a, resolution, values.real.copy(), level, imag)


@dataclass(eq=False)
class Region:
    """Super-level set of a field: mask plus contour loops (2D) or a triangle soup (3D)."""

    mask: np.ndarray
    level: float
    a: float
    resolution: int
    contours: list = field(default_factory=list)
    vertices: np.ndarray | None = None
    faces: np.ndarray | None = None

    @property
    def empty(self) -> bool:
        return not self.mask.any()

    @property
    def d(self) -> int:
        return self.mask.ndim

    def measure(self) -> float:
        """Area/volume by cell counting."""
        return float(self.mask.sum()) * (self.a / self.resolution) ** self.d

    def boundary_points(self) -> np.ndarray:
        if self.d == 2:
            return np.concatenate(self.contours) if self.contours else np.empty((0, 2))
        return self.vertices if self.vertices is not None else np.empty((0, 3))

    def components(self):
        """``(labels, count)`` of face-connected components of the mask."""
        return ndimage.label(self.mask)


def extract_shape(fld: ReconstructionField, level: float | None = None) -> Region:
    level = fld.level if level is None else level
    s = fld.samples
    if not np.all(np.isfinite(s)):
        raise ConfigError("field contains non-finite samples")
    mask = s >= level
    region = Region(mask, level, fld.a, fld.resolution)
    if not mask.any() or mask.all():
        if fld.d == 3:
            region.vertices, region.faces = np.empty((0, 3)), np.empty((0, 3), dtype=np.int64)
        return region
    h = fld.cell
    origin = -fld.a / 2 + h / 2
    if fld.d == 2:
        region.contours = [origin + h * c for c in skmeasure.find_contours(s, level)]
    else:
        verts, faces, _, _ = skmeasure.marching_cubes(s, level, spacing=(h, h, h))
        region.vertices, region.faces = verts + origin, faces.astype(np.int64)
    return region


def truth_mask(truth: ShapeSpec, a: float, resolution: int) -> np.ndarray:
    x = cell_centres(a, resolution)
    return geometry.indicator_grid(truth, [x] * truth.dim)


def _truth_boundary(truth: ShapeSpec) -> np.ndarray:
    if truth.dim == 2:
        return np.concatenate(geometry.boundary_polylines(truth, geometry.POLYLINE_VERTICES))
    return geometry._surface_samples(truth, 20000)


def hausdorff(a_pts: np.ndarray, b_pts: np.ndarray) -> float:
    da = cKDTree(b_pts).query(a_pts)[0].max()
    db = cKDTree(a_pts).query(b_pts)[0].max()
    return float(max(da, db))


def jaccard(m1: np.ndarray, m2: np.ndarray) -> float:
    union = np.logical_or(m1, m2).sum()
    return float(np.logical_and(m1, m2).sum() / union) if union else 1.0


def error_metrics(fld: ReconstructionField, region: Region, truth: ShapeSpec) -> dict:
    """Field l2 error, cell-count Jaccard index and boundary Hausdorff distance.

    An empty region scores Jaccard 0 and the Hausdorff sentinel ``a * sqrt(d)``
    (the diameter of V0).
    """
    if truth.dim != fld.d:
        raise ConfigError("truth shape and field differ in dimension")
    chi = truth_mask(truth, fld.a, fld.resolution)
    l2 = float(np.linalg.norm(fld.samples - chi) / np.linalg.norm(chi))
    if region.empty:
        return {"l2_field_error": l2, "jaccard": 0.0, "hausdorff": fld.a * math.sqrt(fld.d)}
    pts = region.boundary_points()
    hd = hausdorff(pts, _truth_boundary(truth)) if len(pts) else fld.a * math.sqrt(fld.d)
    return {"l2_field_error": l2, "jaccard": jaccard(region.mask, chi), "hausdorff": hd}


def component_jaccards(region: Region, truth: ShapeSpec) -> list[float]:
    """Per truth component: Jaccard against the best-overlapping reconstructed component."""
    labels, count = region.components()
    out = []
    for part in geometry.standalone_components(truth):
        tm = truth_mask(part, region.a, region.resolution)
        best = 0.0
        for lab in range(1, count + 1):
            best = max(best, jaccard(labels == lab, tm))
        out.append(best)
    return out
