"""Tensor-product natural cubic B-spline learning models.

A model maps characteristic values ``Lambda = (lambda_1, ..., lambda_M)`` to a
shape generator, one independent spline per admissible entry:

    T(Lambda) = sum_{g_1..g_M} c[g_1, ..., g_M] * prod_j B_{g_j}(lambda_j)

with ``k_j + 3`` basis functions along an axis of ``k_j + 1`` knots. Two bases
are available: clamped (``k+1``-regular) B-splines by the Cox-de Boor
recurrence on arbitrary knots ("nonuniform", Model I) and translates of the
cardinal cubic ``beta3`` on equidistant knots ("cardinal", Model II).

Coefficients are fitted axis by axis: along each axis every fibre is a 1D
natural cubic spline (interpolation at the knots, zero second derivative at
both ends), solved as a banded ``(k+3) x (k+3)`` system.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigError, DomainError
from .farfield import AdmissibleSet, ShapeGenerator
from .geometry import CharacteristicPoint

BASIS_KINDS = ("nonuniform", "cardinal")
UNIFORM_RTOL = 1e-12
NODE_RTOL = 1e-12


# --- grids -------------------------------------------------------------------

@dataclass(frozen=True)
class GridAxis:
    label: str
    knots: tuple
    uniform: bool | None = None

    def __post_init__(self):
        knots = tuple(float(v) for v in self.knots)
        if len(knots) < 2:
            raise ConfigError(f"axis {self.label!r} needs at least 2 knots")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise ConfigError(f"knots of axis {self.label!r} must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        equi = self._equidistant()
        if self.uniform is None:
            object.__setattr__(self, "uniform", equi)
        elif self.uniform and not equi:
            raise ConfigError(f"axis {self.label!r} is flagged uniform but its knots are not equidistant")

    def _equidistant(self) -> bool:
        lo, hi = self.knots[0], self.knots[-1]
        h = (hi - lo) / self.k
        scale = max(abs(lo), abs(hi), h)
        return all(abs(lam - (lo + g * h)) <= UNIFORM_RTOL * scale for g, lam in enumerate(self.knots))

    @property
    def k(self) -> int:
        """Index of the last knot (``k_j``)."""
        return len(self.knots) - 1

    @property
    def h(self) -> float:
        return (self.knots[-1] - self.knots[0]) / self.k

    @property
    def bounds(self):
        return self.knots[0], self.knots[-1]

    @classmethod
    def linspace(cls, label, lo, hi, count):
        return cls(label, tuple(np.linspace(lo, hi, count)), True)

    def to_json(self):
        return {"label": self.label, "knots": list(self.knots), "uniform": bool(self.uniform)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["label"], tuple(obj["knots"]), obj.get("uniform"))


@dataclass(frozen=True)
class CharacteristicGrid:
    axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ConfigError("a characteristic grid needs at least one axis")

    @property
    def M(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(ax.knots) for ax in self.axes)

    @property
    def labels(self) -> tuple:
        return tuple(ax.label for ax in self.axes)

    @property
    def uniform(self) -> bool:
        return all(ax.uniform for ax in self.axes)

    def indices(self):
        """Multi-indices in row-major order (last axis fastest)."""
        return itertools.product(*(range(n) for n in self.shape))

    def node(self, index) -> CharacteristicPoint:
        return CharacteristicPoint(tuple(ax.knots[g] for ax, g in zip(self.axes, index)), self.labels)

    def to_json(self):
        return {"axes": [ax.to_json() for ax in self.axes]}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(GridAxis.from_json(a) for a in obj["axes"]))


def _values(point) -> tuple:
    if isinstance(point, CharacteristicPoint):
        return point.values
    return tuple(float(v) for v in np.atleast_1d(point))


def grid_index(grid: CharacteristicGrid, point) -> tuple:
    """Multi-index ``(g_1, ..., g_M)`` of a point lying on a grid node."""
    values = _values(point)
    if len(values) != grid.M:
        raise ConfigError(f"grid has {grid.M} axes, point has {len(values)} values")
    out = []
    for ax, v in zip(grid.axes, values):
        knots = np.asarray(ax.knots)
        g = int(np.argmin(np.abs(knots - v)))
        if abs(knots[g] - v) > NODE_RTOL * max(1.0, abs(v)):
            raise DomainError(f"{v} is not a knot of axis {ax.label!r}")
        out.append(g)
    return tuple(out)


# --- bases -------------------------------------------------------------------

def clamped_knots(knots, degree: int = 3) -> np.ndarray:
    """``degree+1``-regular knot vector with the grid points as interior knots."""
    knots = np.asarray(knots, dtype=float)
    return np.concatenate([[knots[0]] * degree, knots, [knots[-1]] * degree])


def bspline_basis(knot_vector, l: int, degree: int, lam: float) -> float:
    """``B_{l,degree}(lam)`` by the Cox-de Boor recurrence (0/0 := 0).

    The degree-0 pieces are half-open ``[t_l, t_{l+1})``, except that the last
    non-empty interval is closed so the right end point is covered.
    """
    t = np.asarray(knot_vector, dtype=float)
    n_basis = len(t) - degree - 1
    if not 0 <= l < n_basis:
        raise ConfigError(f"basis index {l} out of range [0, {n_basis})")
    if not t[0] <= lam <= t[-1]:
        raise DomainError(f"{lam} outside the knot span [{t[0]}, {t[-1]}]")
    last = int(np.nonzero(t < t[-1])[0][-1])

    def rec(i, p):
        if p == 0:
            if t[i] <= lam < t[i + 1]:
                return 1.0
            return 1.0 if (lam == t[-1] and i == last) else 0.0
        left = right = 0.0
        if t[i + p] != t[i]:
            left = (lam - t[i]) / (t[i + p] - t[i]) * rec(i, p - 1)
        if t[i + p + 1] != t[i + 1]:
            right = (t[i + p + 1] - lam) / (t[i + p + 1] - t[i + 1]) * rec(i + 1, p - 1)
        return left + right

    return rec(l, degree)


def basis_matrix(knot_vector, lam, degree: int = 3, deriv: int = 0) -> np.ndarray:
    """All B-splines (or their ``deriv``-th derivatives) at the points ``lam``.

    Returns an array of shape ``(len(lam), len(knot_vector) - degree - 1)``.
    """
    t = np.asarray(knot_vector, dtype=float)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    last = int(np.nonzero(t < t[-1])[0][-1])
    B = ((t[None, :-1] <= lam[:, None]) & (lam[:, None] < t[None, 1:])).astype(float)
    B[lam == t[-1], last] = 1.0

    def ratio(num, den):
        return np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den != 0)

    for p in range(1, degree - deriv + 1):
        n = len(t) - p - 1
        tl, tr = t[:n], t[p:p + n]
        tl1, tr1 = t[1:n + 1], t[p + 1:p + 1 + n]
        B = ratio(lam[:, None] - tl, tr - tl) * B[:, :n] + ratio(tr1 - lam[:, None], tr1 - tl1) * B[:, 1:n + 1]
    for p in range(degree - deriv + 1, degree + 1):
        n = len(t) - p - 1
        padded = np.concatenate([B, np.zeros((len(lam), 1))], axis=1)
        B = p * (ratio(padded[:, :n], t[p:p + n] - t[:n]) - ratio(padded[:, 1:n + 1], t[p + 1:p + 1 + n] - t[1:n + 1]))
    return B


def cardinal_b3(t):
    """Centred cubic B-spline ``beta3``, supported on [-2, 2]."""
    t = np.abs(np.asarray(t, dtype=float))
    inner = (4 - 6 * t**2 + 3 * t**3) / 6
    outer = (2 - t) ** 3 / 6
    return np.where(t <= 1, inner, np.where(t <= 2, outer, 0.0))


def _cardinal_b3_deriv(t, deriv):
    s = np.sign(t)
    t = np.abs(np.asarray(t, dtype=float))
    if deriv == 0:
        return cardinal_b3(t)
    if deriv == 1:
        return s * np.where(t <= 1, (-12 * t + 9 * t**2) / 6, np.where(t <= 2, -0.5 * (2 - t) ** 2, 0.0))
    if deriv == 2:
        return np.where(t <= 1, -2 + 3 * t, np.where(t <= 2, 2 - t, 0.0))
    raise ConfigError("cardinal basis derivatives are implemented up to order 2")


def cardinal_matrix(axis: GridAxis, lam, deriv: int = 0) -> np.ndarray:
    """``L_g(lam) = beta3((lam - a)/h - (g - 1))`` for ``g = 0..k+2``."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    a, h = axis.knots[0], axis.h
    u = (lam - a) / h
    g = np.arange(axis.k + 3)
    return _cardinal_b3_deriv(u[:, None] - (g[None, :] - 1), deriv) / h**deriv


def axis_matrix(axis: GridAxis, basis: str, lam, deriv: int = 0) -> np.ndarray:
    if basis == "nonuniform":
        return basis_matrix(clamped_knots(axis.knots), lam, 3, deriv)
    if basis == "cardinal":
        if not axis.uniform:
            raise ConfigError(f"cardinal basis needs equidistant knots on axis {axis.label!r}")
        return cardinal_matrix(axis, lam, deriv)
    raise ConfigError(f"unknown basis kind {basis!r}")


def natural_system(axis: GridAxis, basis: str) -> np.ndarray:
    """Rows ``[S''(a); S(lambda_0..lambda_k); S''(b)]`` of the 1D natural-spline system."""
    a, b = axis.bounds
    return np.vstack([axis_matrix(axis, basis, [a], 2),
                      axis_matrix(axis, basis, axis.knots, 0),
                      axis_matrix(axis, basis, [b], 2)])


def _banded(A: np.ndarray, lower: int = 2, upper: int = 2) -> np.ndarray:
    n = A.shape[0]
    ab = np.zeros((lower + upper + 1, n))
    for i in range(n):
        for j in range(max(0, i - lower), min(n, i + upper + 1)):
            ab[upper + i - j, j] = A[i, j]
    outside = A.copy()
    for i in range(n):
        outside[i, max(0, i - lower):min(n, i + upper + 1)] = 0
    assert not outside.any(), "natural spline system is not (2, 2)-banded"
    return ab


# --- models ------------------------------------------------------------------

@dataclass(eq=False)
class TrainingDataset:
    """Complete tensor of generators: ``values[g_1, ..., g_M, entry]``."""

    grid: CharacteristicGrid
    adm: AdmissibleSet
    values: np.ndarray
    family: object = None
    quad: object = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        expected = (*self.grid.shape, len(self.adm))
        if self.values.shape != expected:
            raise ConfigError(f"incomplete training tensor: expected shape {expected}, got {self.values.shape}")

    def generator(self, index) -> ShapeGenerator:
        return ShapeGenerator(self.adm, self.values[tuple(index)])

    def __len__(self):
        return int(np.prod(self.grid.shape))

    def __eq__(self, other):
        return isinstance(other, TrainingDataset) and self.grid == other.grid \
            and self.adm == other.adm and np.array_equal(self.values, other.values)


@dataclass(eq=False)
class SplineModel:
    grid: CharacteristicGrid
    adm: AdmissibleSet
    basis: str
    coeffs: np.ndarray

    def __post_init__(self):
        if self.basis not in BASIS_KINDS:
            raise ConfigError(f"unknown basis kind {self.basis!r}")
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        expected = (*(ax.k + 3 for ax in self.grid.axes), len(self.adm))
        if self.coeffs.shape != expected:
            raise ConfigError(f"coefficient tensor must have shape {expected}, got {self.coeffs.shape}")

    @property
    def extents(self) -> tuple:
        return self.coeffs.shape[:-1]

    def __eq__(self, other):
        return isinstance(other, SplineModel) and self.grid == other.grid and self.adm == other.adm \
            and self.basis == other.basis and np.array_equal(self.coeffs, other.coeffs)

    def evaluate(self, point, derivs=None) -> np.ndarray:
        """Raw model values (one per admissible entry), optionally differentiated per axis."""
        values = _values(point)
        if len(values) != self.grid.M:
            raise ConfigError(f"model has {self.grid.M} axes, point has {len(values)} values")
        derivs = derivs or (0,) * self.grid.M
        out = self.coeffs
        for ax, v, dv in zip(self.grid.axes, values, derivs):
            lo, hi = ax.bounds
            if not lo <= v <= hi:
                raise DomainError(f"{ax.label}={v} outside the training range [{lo}, {hi}]")
            row = axis_matrix(ax, self.basis, [v], dv)[0]
            out = np.tensordot(row, out, axes=([0], [0]))
        return out

    def to_json(self) -> dict:
        flat = np.moveaxis(self.coeffs, -1, 0).reshape(len(self.adm), -1)
        return {"grid": self.grid.to_json(), "adm": self.adm.to_json(), "basis": self.basis,
                "coeffs": [[[float(z.real), float(z.imag)] for z in entry] for entry in flat]}

    @classmethod
    def from_json(cls, obj) -> "SplineModel":
        grid = CharacteristicGrid.from_json(obj["grid"])
        adm = AdmissibleSet.from_json(obj["adm"])
        raw = np.array(obj["coeffs"], dtype=float)
        flat = raw[..., 0] + 1j * raw[..., 1]
        extents = tuple(ax.k + 3 for ax in grid.axes)
        return cls(grid, adm, obj["basis"], np.moveaxis(flat.reshape(len(adm), *extents), 0, -1))


def fit(dataset: TrainingDataset, basis: str = "nonuniform") -> SplineModel:
    """Natural tensor spline through every node of a complete dataset."""
    if basis not in BASIS_KINDS:
        raise ConfigError(f"unknown basis kind {basis!r}")
    coeffs = dataset.values
    for axis_no, ax in enumerate(dataset.grid.axes):
        ab = _banded(natural_system(ax, basis))
        moved = np.moveaxis(coeffs, axis_no, 0)
        rest = moved.shape[1:]
        rhs = np.zeros((ax.k + 3, int(np.prod(rest))), dtype=complex)
        rhs[1:-1] = moved.reshape(ax.k + 1, -1)
        # the basis is real: solve real and imaginary parts with the same factorisation
        packed = np.concatenate([rhs.real, rhs.imag], axis=1)
        sol = solve_banded((2, 2), ab, packed, check_finite=False)
        half = sol.shape[1] // 2
        solved = (sol[:, :half] + 1j * sol[:, half:]).reshape(ax.k + 3, *rest)
        coeffs = np.moveaxis(solved, 0, axis_no)
    return SplineModel(dataset.grid, dataset.adm, basis, coeffs)


def predict(model: SplineModel, point) -> ShapeGenerator:
    """Predicted shape generator at new characteristic values (no extrapolation)."""
    return ShapeGenerator(model.adm, model.evaluate(point))
