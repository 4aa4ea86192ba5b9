"""Experiment configuration and the end-to-end generation pipeline.

A :class:`PipelineConfig` is read from one JSON object. Required keys are
``d``, ``a``, ``grid`` and ``family``; everything else has a default::

    {"name": "kite", "d": 2, "a": 10.0, "mu": 0.1, "tau": 2.0, "delta": 0.01,
     "grid": [{"label": "beta1", "lo": 0.5, "hi": 1.8, "count": 14}, ...],
     "family": {"template": {"kind": "Kite", "params": [1, 1]}, "bindings": [[0], [1]]},
     "queries": [[0.93, 1.76]], "truth": true}

A grid axis is either ``{"label", "lo", "hi", "count"}`` (equidistant) or
``{"label", "knots": [...]}``.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import export
from .errors import ConfigError, StorageError
from .farfield import (AdmissibleSet, QuadratureConfig, ShapeGenerator, add_noise, admissible_set,
                       farfield, relative_error)
from .geometry import ShapeFamily, boundary_polylines, measure
from .learner import BASIS_KINDS, CharacteristicGrid, GridAxis, SplineModel, TrainingDataset, fit, predict
from .reconstruct import (ReconstructionField, component_jaccards, error_metrics, evaluate_field,
                          extract_shape, fourier_coeffs, truncation_order)

log = logging.getLogger(__name__)

REQUIRED = ("d", "a", "grid", "family")


@dataclass
class PipelineConfig:
    d: int
    a: float
    grid: list
    family: dict
    name: str = "experiment"
    mu: float = 0.1
    tau: float | None = None
    delta: float = 0.01
    N: int | None = None
    quad_train: int | None = None
    quad_verify: int | None = None
    quad_method: str = "exact"
    basis: str = "nonuniform"
    level: float = 0.5
    mesh: int = 100
    seed: int = 0
    train_noise: float = 0.0
    threads: int = 1
    queries: list = field(default_factory=list)
    truth: bool = True
    out: str = "out"

    def __post_init__(self):
        self.d = int(self.d)
        if self.d not in (2, 3):
            raise ConfigError(f"d must be 2 or 3, got {self.d}")
        self.a = float(self.a)
        if self.a <= 0:
            raise ConfigError(f"a must be positive, got {self.a}")
        if self.tau is None:
            self.tau = float(self.d)
        if self.tau < self.d:
            raise ConfigError(f"tau must be >= d = {self.d}, got {self.tau}")
        if not 0 < self.mu < 1:
            raise ConfigError(f"mu must lie in (0, 1), got {self.mu}")
        if not 0 <= self.delta < 1:
            raise ConfigError(f"delta must lie in [0, 1), got {self.delta}")
        if not 0 <= self.train_noise < 1:
            raise ConfigError(f"train_noise must lie in [0, 1), got {self.train_noise}")
        if int(self.mesh) < 16:
            raise ConfigError(f"mesh resolution must be >= 16, got {self.mesh}")
        if self.basis not in BASIS_KINDS:
            raise ConfigError(f"basis must be one of {BASIS_KINDS}, got {self.basis!r}")
        if self.N is None and self.delta == 0:
            raise ConfigError("N must be given explicitly when delta = 0")
        if self.quad_train is None:
            self.quad_train = 1024 if self.d == 2 else 128
        if self.quad_verify is None:
            self.quad_verify = 1536 if self.d == 2 else 192
        if self.quad_train == self.quad_verify:
            log.warning("training and verification quadrature coincide (inverse crime)")

    # --- construction --------------------------------------------------------

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        missing = [k for k in REQUIRED if k not in obj]
        if missing:
            raise ConfigError(f"config is missing required field '{missing[0]}'")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(obj) - names)
        if unknown:
            raise ConfigError(f"unknown config field '{unknown[0]}'")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path, overrides=()) -> "PipelineConfig":
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise StorageError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(apply_overrides(obj, overrides))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    # --- derived objects -----------------------------------------------------

    def order(self) -> int:
        return int(self.N) if self.N is not None else truncation_order(self.delta, self.tau, self.d)

    def admissible(self) -> AdmissibleSet:
        return admissible_set(self.d, self.a, self.mu, self.order())

    def characteristic_grid(self) -> CharacteristicGrid:
        axes = []
        for spec in self.grid:
            try:
                if "knots" in spec:
                    axes.append(GridAxis(spec["label"], tuple(spec["knots"])))
                else:
                    axes.append(GridAxis.linspace(spec["label"], spec["lo"], spec["hi"], int(spec["count"])))
            except KeyError as exc:
                raise ConfigError(f"grid axis is missing field {exc}") from None
        return CharacteristicGrid(tuple(axes))

    def shape_family(self) -> ShapeFamily:
        return ShapeFamily.from_json(self.family)

    def quad(self, which: str) -> QuadratureConfig:
        cells = self.quad_train if which == "train" else self.quad_verify
        return QuadratureConfig(cells, self.quad_method)


def apply_overrides(obj: dict, overrides) -> dict:
    """Apply ``key=value`` strings; values are parsed as JSON when possible, dotted keys nest."""
    obj = json.loads(json.dumps(obj))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        target = obj
        *path, leaf = key.split(".")
        for part in path:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
        target[leaf] = value
    return obj


# --- stages ------------------------------------------------------------------

def generate_dataset(cfg: PipelineConfig, progress=None) -> TrainingDataset:
    """Training generators at every grid node (optionally perturbed by ``train_noise``)."""
    data = ds.build_dataset(cfg.characteristic_grid(), cfg.shape_family(), cfg.admissible(),
                            cfg.quad("train"), progress=progress, threads=cfg.threads)
    if cfg.train_noise > 0:
        flat = data.values.reshape(-1, len(data.adm))
        for i in range(flat.shape[0]):
            flat[i] = add_noise(ShapeGenerator(data.adm, flat[i]), cfg.train_noise, cfg.seed + 1 + i).values
    return data


def _query_key(lam) -> str:
    return "_".join(f"{v:g}" for v in lam)


@dataclass
class QueryResult:
    lam: tuple
    predicted: ShapeGenerator
    noisy: ShapeGenerator
    field: ReconstructionField
    region: object
    metrics: dict


def reconstruct_generator(gen: ShapeGenerator, cfg: PipelineConfig):
    fld = evaluate_field(fourier_coeffs(gen), int(cfg.mesh), cfg.level)
    return fld, extract_shape(fld)


def run_query(model: SplineModel, cfg: PipelineConfig, lam, family: ShapeFamily | None = None) -> QueryResult:
    """Predict at ``lam``, add the measurement noise, reconstruct and score."""
    lam = tuple(float(v) for v in lam)
    pred = predict(model, lam)
    noisy = add_noise(pred, cfg.delta, cfg.seed)
    fld, region = reconstruct_generator(noisy, cfg)
    metrics = {"lambda": list(lam), "N": model.adm.N, "delta": cfg.delta, "level": cfg.level,
               "imag_residual": fld.imag_residual, "recovered_measure": region.measure()}
    if family is not None and cfg.truth:
        shape = family.shape(lam)
        truth = farfield(shape, model.adm, cfg.quad("verify"))
        metrics["generator_error"] = relative_error(pred, truth)
        metrics["true_measure"] = measure(shape)
        metrics["measure_error"] = abs(region.measure() - metrics["true_measure"]) / metrics["true_measure"]
        metrics.update(error_metrics(fld, region, shape))
        metrics["hausdorff_cells"] = metrics["hausdorff"] / fld.cell
        labels, count = region.components()
        metrics["components"] = int(count)
        if shape.kind == "MultiDomain":
            metrics["component_jaccard"] = component_jaccards(region, shape)
    return QueryResult(lam, pred, noisy, fld, region, metrics)


def write_query(result: QueryResult, cfg: PipelineConfig, out: Path, family: ShapeFamily | None = None) -> list[Path]:
    """Emit field (.sfld.json/.csv/.pgm), contour (.svg) or isosurface (.stl), generator and metrics."""
    out.mkdir(parents=True, exist_ok=True)
    stem = out / f"{cfg.name}_{_query_key(result.lam)}"
    paths = []

    def p(suffix):
        path = Path(f"{stem}{suffix}")
        paths.append(path)
        return path

    ds.save(result.predicted, p(".sgen.json"))
    ds.save(result.field, p(".sfld.json"))
    export.write_field_csv(result.field, p(".field.csv"))
    export.write_field_pgm(result.field, p(".pgm"), sidecar=p(".pgm.json"))
    if cfg.d == 2:
        truth = None
        if family is not None and cfg.truth:
            truth = boundary_polylines(family.shape(result.lam), 512)
        export.write_contours_svg(result.region, p(".svg"), truth)
    else:
        export.write_stl(result.region, p(".stl"), cfg.name)
    export.write_json(result.metrics, p(".metrics.json"))
    return paths


def run_pipeline(cfg: PipelineConfig, data: TrainingDataset | None = None, queries=None,
                 write: bool = True) -> list[QueryResult]:
    """Full scheme: dataset -> fit -> predict -> noise -> Fourier reconstruction -> metrics."""
    data = data if data is not None else generate_dataset(cfg)
    if data.adm != cfg.admissible():
        raise ConfigError("dataset admissible set does not match the configuration")
    family = data.family if data.family is not None else cfg.shape_family()
    model = fit(data, cfg.basis)
    results = []
    for lam in (queries if queries is not None else cfg.queries):
        res = run_query(model, cfg, lam, family)
        log.info("query %s: %s", res.lam, {k: v for k, v in res.metrics.items() if isinstance(v, float)})
        if write:
            write_query(res, cfg, Path(cfg.out), family)
        results.append(res)
    return results


# --- noise-rate sweep --------------------------------------------------------

def l2_error_parseval(gen: ShapeGenerator, exact: ShapeGenerator, true_measure: float) -> float:
    """Continuous ``||f_N - chi_D||_{L2(V0)}`` by Parseval.

    ``exact`` is a noise-free generator of the same body on the same lattice;
    its ``xi != 0`` coefficients are exact Fourier coefficients and the true
    mean is ``measure / a^d``. The tail beyond ``N`` is
    ``measure / a^d - sum_{|xi| <= N} |f_xi|^2``.
    """
    adm = gen.adm
    vol = adm.a**adm.d
    rec = fourier_coeffs(gen).coeff.reshape(-1)
    true = exact.integrals() / vol
    true[adm.zero_index] = true_measure / vol
    inside = float(np.sum(np.abs(rec - true) ** 2))
    tail = max(true_measure / vol - float(np.sum(np.abs(true) ** 2)), 0.0)
    return math.sqrt(vol * (inside + tail))


def stability_sweep(cfg: PipelineConfig, deltas) -> dict:
    """Noise-rate experiment on the config's template body (no learning step).

    For every delta: ``N = truncation_order(delta, tau, d)``, exact generator,
    relative noise ``delta``, reconstruction, and the L2 error against the
    indicator. Returns the rows and the least-squares log-log slope.
    """
    deltas = [float(dl) for dl in deltas]
    if len(deltas) < 3:
        raise ConfigError(f"a stability sweep needs at least 3 noise levels, got {len(deltas)}")
    if any(not 0 < dl < 1 for dl in deltas):
        raise ConfigError("every noise level must lie in (0, 1); N is undefined for delta = 0")
    shape = cfg.shape_family().template
    true_measure = measure(shape)
    rows = []
    for dl in deltas:
        N = truncation_order(dl, cfg.tau, cfg.d)
        adm = admissible_set(cfg.d, cfg.a, cfg.mu, N)
        exact = farfield(shape, adm, cfg.quad("verify"))
        noisy = add_noise(farfield(shape, adm, cfg.quad("train")), dl, cfg.seed)
        fld = evaluate_field(fourier_coeffs(noisy), int(cfg.mesh), cfg.level)
        mesh_err = error_metrics(fld, extract_shape(fld), shape)["l2_field_error"]
        rows.append({"delta": dl, "N": N, "l2_error": l2_error_parseval(noisy, exact, true_measure),
                     "mesh_l2_error": mesh_err})
    x = np.log([r["delta"] for r in rows])
    y = np.log([r["l2_error"] for r in rows])
    slope = float(np.polyfit(x, y, 1)[0]) if len(set(deltas)) > 1 else float("nan")
    return {"rows": rows, "slope": slope}


def write_sweep(result: dict, path) -> None:
    with open(path, "w") as fh:
        fh.write("delta,N,l2_error,mesh_l2_error\n")
        for r in result["rows"]:
            fh.write(f"{r['delta']!r},{r['N']},{r['l2_error']!r},{r['mesh_l2_error']!r}\n")
