"""Shape generators: far-field patterns of unit-density sources on the admissible lattice.

For a source ``chi_D`` the far field at wavenumber ``k`` and direction ``xhat`` is

    u_inf(xhat, k) = C_{d,k} * I(k * xhat),   I(w) = int_D exp(-i w . y) dy.

Two quadratures for ``I`` are provided:

``"exact"``
    closed forms for Rectangle, Box and the Mannequin ellipsoids; the
    divergence theorem turned into a periodic trapezoid rule on the boundary
    (``2 * cells`` nodes, spectrally accurate) for Disk and the other
    parametric 2D kinds.
``"midpoint"``
    tensor cell rule over V0 masked by the indicator at cell centres, each
    cell contributing the exact integral of the exponential over the cell.
    Works for any indicator but converges only like the mask does.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import ConfigError
from .geometry import ShapeSpec

QUAD_METHODS = ("exact", "midpoint")


@dataclass(frozen=True)
class QuadratureConfig:
    cells: int = 1024
    method: str = "exact"

    def __post_init__(self):
        if int(self.cells) < 16:
            raise ConfigError(f"quadrature resolution must be >= 16 cells/axis, got {self.cells}")
        if self.method not in QUAD_METHODS:
            raise ConfigError(f"unknown quadrature method {self.method!r}")
        object.__setattr__(self, "cells", int(self.cells))

    def to_json(self):
        return {"cells": self.cells, "method": self.method}

    @classmethod
    def from_json(cls, obj):
        return cls(**obj)


@dataclass(frozen=True, eq=False)
class AdmissibleSet:
    """Lattice ``|xi|_inf <= N`` with wavenumbers and directions, lexicographic in xi.

    ``xi = 0`` carries the shifted sample ``k0 = 2*pi*mu/a``, ``xhat0 = e1``.
    """

    d: int
    a: float
    mu: float
    N: int
    xi: np.ndarray = field(init=False, repr=False)
    k: np.ndarray = field(init=False, repr=False)
    xhat: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ConfigError(f"dimension must be 2 or 3, got {self.d}")
        if not self.a > 0:
            raise ConfigError(f"box side a must be positive, got {self.a}")
        if not 0 < self.mu < 1:
            raise ConfigError(f"mu must lie in (0, 1), got {self.mu}")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"truncation order N must be a positive integer, got {self.N}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "N", int(self.N))
        xi = np.array(list(itertools.product(range(-self.N, self.N + 1), repeat=self.d)), dtype=np.int64)
        norm = np.linalg.norm(xi, axis=1)
        zero = self.zero_index
        safe = np.where(norm == 0, 1.0, norm)
        k = 2 * np.pi * norm / self.a
        xhat = xi / safe[:, None]
        k[zero] = 2 * np.pi * self.mu / self.a
        xhat[zero] = np.eye(self.d)[0]
        for name, arr in (("xi", xi), ("k", k), ("xhat", xhat)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self):
        return (2 * self.N + 1) ** self.d

    def __eq__(self, other):
        return isinstance(other, AdmissibleSet) and \
            (self.d, self.a, self.mu, self.N) == (other.d, other.a, other.mu, other.N)

    @property
    def zero_index(self) -> int:
        return len(self) // 2

    @property
    def omega(self) -> np.ndarray:
        """Frequency vectors ``k * xhat``; computed as ``(2*pi/a) * xi`` to avoid rounding."""
        w = (2 * np.pi / self.a) * self.xi.astype(float)
        w[self.zero_index, 0] = 2 * np.pi * self.mu / self.a
        return w

    def index(self, xi) -> int:
        xi = np.asarray(xi, dtype=np.int64)
        if xi.shape != (self.d,) or np.abs(xi).max() > self.N:
            raise ConfigError(f"{xi.tolist()} is not on the lattice |xi|_inf <= {self.N}")
        out = 0
        for x in xi:
            out = out * (2 * self.N + 1) + int(x) + self.N
        return out

    def constants(self) -> np.ndarray:
        return c_const(self.d, self.k)

    def to_json(self):
        return {"d": self.d, "a": self.a, "mu": self.mu, "N": self.N}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["d"]), obj["a"], obj["mu"], int(obj["N"]))


def admissible_set(d: int, a: float, mu: float, N: int) -> AdmissibleSet:
    return AdmissibleSet(d, a, mu, N)


def c_const(d: int, k):
    """``C_{d,k} = -i/sqrt(8 pi) * (k/2pi)^((d-2)/2) * exp(-i (d-1) pi/4)``."""
    k = np.asarray(k, dtype=float)
    return (-1j / math.sqrt(8 * math.pi)) * (k / (2 * math.pi)) ** ((d - 2) / 2) \
        * np.exp(-1j * (d - 1) * math.pi / 4)


@dataclass(eq=False)
class ShapeGenerator:
    adm: AdmissibleSet
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (len(self.adm),):
            raise ConfigError(f"expected {len(self.adm)} values, got {self.values.shape}")

    def integrals(self) -> np.ndarray:
        """De-normalised values ``I(xi) = value / C_{d,k}``."""
        return self.values / self.adm.constants()

    def value(self, xi) -> complex:
        return complex(self.values[self.adm.index(xi)])

    def __eq__(self, other):
        return isinstance(other, ShapeGenerator) and self.adm == other.adm \
            and np.array_equal(self.values, other.values)

    def to_json(self) -> dict:
        out = self.adm.to_json()
        out["values"] = [[float(v.real), float(v.imag)] for v in self.values]
        return out

    @classmethod
    def from_json(cls, obj) -> "ShapeGenerator":
        vals = np.array(obj["values"], dtype=float).reshape(-1, 2)
        return cls(AdmissibleSet.from_json(obj), vals[:, 0] + 1j * vals[:, 1])

    def write_csv(self, path) -> None:
        """Rows ``xi_1, ..., xi_d, k, re, im`` in lexicographic order."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"xi{j + 1}" for j in range(self.adm.d)] + ["k", "re", "im"])
            for xi, k, v in zip(self.adm.xi, self.adm.k, self.values):
                w.writerow([*map(int, xi), repr(float(k)), repr(float(v.real)), repr(float(v.imag))])


# --- exact route --------------------------------------------------------------

def _sinc(x):
    return np.sinc(x / np.pi)


def _ball_factor(q):
    """``3 (sin q - q cos q) / q^3``, the unit-ball transform divided by its volume."""
    q = np.asarray(q, dtype=float)
    small = q < 1e-2
    qs = np.where(small, 1.0, q)
    big = 3 * (np.sin(qs) - qs * np.cos(qs)) / qs**3
    q2 = q * q
    series = 1 - q2 / 10 + q2 * q2 / 280
    return np.where(small, series, big)


def _boundary_integral(prim: ShapeSpec, omega: np.ndarray, nodes: int, chunk: int = 256) -> np.ndarray:
    # div(i w/|w|^2 e^{-i w.y}) = e^{-i w.y}; outward normal * ds = (y2', -y1') dt for CCW curves
    t = 2 * np.pi * np.arange(nodes) / nodes
    pts, der = geometry.curve(prim, t)
    w2 = np.einsum("ij,ij->i", omega, omega)
    out = np.empty(len(omega), dtype=complex)
    for s in range(0, len(omega), chunk):
        om = omega[s:s + chunk]
        flux = om[:, :1] * der[None, :, 1] - om[:, 1:] * der[None, :, 0]
        phase = np.exp(-1j * (om @ pts.T))
        out[s:s + chunk] = (flux * phase).sum(axis=1) * (2 * np.pi / nodes)
    return 1j * out / w2


def _exact_integrals(shape: ShapeSpec, omega: np.ndarray, cells: int) -> np.ndarray:
    total = np.zeros(len(omega), dtype=complex)
    for prim, shift in geometry.placed_primitives(shape):
        kind, p = prim.kind, prim.params
        if kind in ("Rectangle", "Box"):
            local = np.prod([L * _sinc(0.5 * L * omega[:, j]) for j, L in enumerate(p)], axis=0).astype(complex)
        elif kind == "Mannequin":
            local = np.zeros(len(omega), dtype=complex)
            for c, s in zip(*geometry.ellipsoids(prim)):
                q = np.linalg.norm(omega * s, axis=1)
                local += (4 / 3 * np.pi * np.prod(s)) * _ball_factor(q) * np.exp(-1j * (omega @ c))
        else:
            local = _boundary_integral(prim, omega, 2 * cells)
        total += local * np.exp(-1j * (omega @ shift))
    return total


# --- midpoint route -------------------------------------------------------------

def cell_centres(a: float, cells: int) -> np.ndarray:
    return -a / 2 + a * (np.arange(cells) + 0.5) / cells


def _midpoint_integrals(shape: ShapeSpec, adm: AdmissibleSet, cells: int) -> np.ndarray:
    a, N, d = adm.a, adm.N, adm.d
    h = a / cells
    y = cell_centres(a, cells)
    mask = geometry.indicator_grid(shape, [y] * d).astype(float)

    def factors(w):
        return h * _sinc(0.5 * h * w)[:, None] * np.exp(-1j * np.outer(w, y))

    lattice = factors((2 * np.pi / a) * np.arange(-N, N + 1))
    out = mask.astype(complex)
    for axis in range(d):
        out = np.tensordot(lattice, out, axes=([1], [axis]))
        out = np.moveaxis(out, 0, axis)
    out = out.reshape(-1)
    # xi = 0 slot samples (2*pi*mu/a) e1 instead of the origin
    g = factors(np.array([2 * np.pi * adm.mu / a]))[0]
    out[adm.zero_index] = (g @ mask.reshape(cells, -1)).sum() * h ** (d - 1)
    return out


def fourier_integrals(shape: ShapeSpec, adm: AdmissibleSet, quad: QuadratureConfig) -> np.ndarray:
    """``I(k xhat) = int_D exp(-i k xhat . y) dy`` for every admissible entry."""
    if shape.dim != adm.d:
        raise ConfigError(f"{shape.dim}D shape against a {adm.d}D admissible set")
    geometry.check_support(shape, adm.a)
    if quad.method == "midpoint":
        return _midpoint_integrals(shape, adm, quad.cells)
    return _exact_integrals(shape, adm.omega, quad.cells)


def farfield(shape: ShapeSpec, adm: AdmissibleSet, quad: QuadratureConfig | None = None) -> ShapeGenerator:
    """Shape generator of ``shape`` sampled on ``adm``."""
    quad = quad or QuadratureConfig()
    return ShapeGenerator(adm, adm.constants() * fourier_integrals(shape, adm, quad))


def add_noise(gen: ShapeGenerator, delta: float, seed: int) -> ShapeGenerator:
    """Add complex Gaussian noise rescaled to relative l2 norm exactly ``delta``."""
    if delta < 0:
        raise ConfigError(f"noise level must be non-negative, got {delta}")
    if delta == 0:
        return ShapeGenerator(gen.adm, gen.values.copy())
    rng = np.random.default_rng(seed)
    n = len(gen.values)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    z *= delta * np.linalg.norm(gen.values) / np.linalg.norm(z)
    return ShapeGenerator(gen.adm, gen.values + z)


def relative_error(a: ShapeGenerator, b: ShapeGenerator) -> float:
    """``||a - b||_2 / ||b||_2``."""
    return float(np.linalg.norm(a.values - b.values) / np.linalg.norm(b.values))
