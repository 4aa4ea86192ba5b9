"""``shapegen`` command line.

Exit codes: 0 success, 2 configuration error, 3 domain error (bounds or
support), 4 I/O or storage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import dataset as ds
from . import export
from . import pipeline as pl
from .errors import ConfigError, DomainError, StorageError
from .farfield import ShapeGenerator, add_noise
from .learner import SplineModel, TrainingDataset, fit, predict
from .reconstruct import ReconstructionField, error_metrics, extract_shape

log = logging.getLogger("shapegen")

DEFAULT_DELTAS = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _config(args) -> pl.PipelineConfig:
    if not getattr(args, "config", None):
        raise ConfigError("--config is required for this command")
    overrides = list(getattr(args, "set", ()))
    for flag in ("out", "seed", "threads", "level", "train_noise"):
        value = getattr(args, flag, None)
        if value is not None:
            overrides.append(f"{flag}={json.dumps(value)}")
    return pl.PipelineConfig.from_file(args.config, overrides)


def _grid_tag(cfg) -> str:
    return "x".join(str(n) for n in cfg.characteristic_grid().shape)


def _dataset_path(cfg) -> Path:
    return Path(cfg.out) / f"{cfg.name}_{_grid_tag(cfg)}{ds.EXTENSIONS['dataset']}"


def _model_path(cfg) -> Path:
    return Path(cfg.out) / f"{cfg.name}_{_grid_tag(cfg)}{ds.EXTENSIONS['model']}"


def _load(path, kind):
    obj = ds.load(path)
    if not isinstance(obj, kind):
        raise StorageError(f"{path} does not hold a {kind.__name__}")
    return obj


def _progress(done, total):
    if done == total or done % max(1, total // 10) == 0:
        log.info("far fields: %d/%d", done, total)


def _lambdas(args, cfg) -> list:
    if args.lam:
        return [_floats(v) for v in args.lam]
    if not cfg.queries:
        raise ConfigError("no query given: use --lambda or the config's 'queries'")
    return cfg.queries


# --- commands ------------------------------------------------------------------

def cmd_gen_dataset(args) -> int:
    cfg = _config(args)
    data = pl.generate_dataset(cfg, progress=_progress)
    path = Path(args.output) if args.output else _dataset_path(cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    ds.save(data, path)
    print(path)
    return 0


def _dataset_or_build(args, cfg) -> TrainingDataset:
    if args.dataset:
        return _load(args.dataset, TrainingDataset)
    return pl.generate_dataset(cfg, progress=_progress)


def cmd_fit(args) -> int:
    cfg = _config(args)
    model = fit(_dataset_or_build(args, cfg), args.basis or cfg.basis)
    path = Path(args.output) if args.output else _model_path(cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    ds.save(model, path)
    print(path)
    return 0


def cmd_predict(args) -> int:
    cfg = _config(args)
    model = _load(args.model, SplineModel) if args.model else fit(_dataset_or_build(args, cfg), cfg.basis)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for lam in _lambdas(args, cfg):
        gen = predict(model, lam)
        stem = out / f"{cfg.name}_{pl._query_key(lam)}"
        ds.save(gen, f"{stem}{ds.EXTENSIONS['generator']}")
        gen.write_csv(f"{stem}.sgen.csv")
        print(f"{stem}{ds.EXTENSIONS['generator']}")
    return 0


def cmd_reconstruct(args) -> int:
    cfg = _config(args)
    gen = _load(args.generator, ShapeGenerator)
    if args.noise:
        gen = add_noise(gen, cfg.delta, cfg.seed)
    fld, region = pl.reconstruct_generator(gen, cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = out / Path(args.generator).name.replace(ds.EXTENSIONS["generator"], "")
    ds.save(fld, f"{stem}{ds.EXTENSIONS['field']}")
    export.write_field_csv(fld, f"{stem}.field.csv")
    export.write_field_pgm(fld, f"{stem}.pgm", sidecar=f"{stem}.pgm.json")
    if fld.d == 2:
        export.write_contours_svg(region, f"{stem}.svg")
    else:
        export.write_stl(region, f"{stem}.stl", cfg.name)
    print(f"{stem}{ds.EXTENSIONS['field']}")
    return 0


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    data = _load(args.dataset, TrainingDataset) if args.dataset else None
    results = pl.run_pipeline(cfg, data, _lambdas(args, cfg))
    for res in results:
        m = res.metrics
        summary = ", ".join(f"{k}={m[k]:.4g}" for k in ("generator_error", "jaccard", "hausdorff_cells",
                                                        "measure_error") if k in m)
        print(f"{pl._query_key(res.lam)}: {summary}")
    return 0


def cmd_stability_sweep(args) -> int:
    cfg = _config(args)
    deltas = _floats(args.deltas) if args.deltas else list(DEFAULT_DELTAS)
    result = pl.stability_sweep(cfg, deltas)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    pl.write_sweep(result, out / f"{cfg.name}_stability.csv")
    slope = result["slope"]
    export.write_json({"deltas": deltas, "slope": None if slope != slope else slope},
                      out / f"{cfg.name}_stability.json")
    for r in result["rows"]:
        print(f"delta={r['delta']:g} N={r['N']} l2_error={r['l2_error']:.6g}")
    print(f"slope={slope:.4f}")
    return 0


def cmd_metrics(args) -> int:
    cfg = _config(args)
    fld = _load(args.field, ReconstructionField)
    lam = _floats(args.lam[0]) if args.lam else None
    if lam is None:
        raise ConfigError("metrics needs --lambda to derive the ground-truth shape")
    shape = cfg.shape_family().shape(lam)
    region = extract_shape(fld, cfg.level)
    metrics = error_metrics(fld, region, shape)
    metrics["hausdorff_cells"] = metrics["hausdorff"] / fld.cell
    path = Path(args.output) if args.output else Path(args.field).with_suffix("").with_suffix(".metrics.json")
    export.write_json(metrics, path)
    print(path)
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand's unset flags from clobbering ones given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="experiment JSON file")
    common.add_argument("--set", action="append", metavar="K=V", help="override a config key (repeatable)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="noise seed")
    common.add_argument("--threads", type=int, help="worker threads (0 = auto); results do not depend on it")
    common.add_argument("--level", type=float, help="extraction level (default 0.5)")
    common.add_argument("--train-noise", dest="train_noise", type=float,
                        help="relative noise added to every training generator")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="shapegen", parents=[common],
                                     description="Far-field shape generators, spline learning and Fourier reconstruction.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("gen-dataset", cmd_gen_dataset, "compute the training generators of the config grid")
    p.add_argument("-o", "--output")
    p = add("fit", cmd_fit, "fit the tensor spline model")
    p.add_argument("--dataset")
    p.add_argument("--basis", choices=("nonuniform", "cardinal"))
    p.add_argument("-o", "--output")
    p = add("predict", cmd_predict, "predict generators at new characteristic values")
    p.add_argument("--model")
    p.add_argument("--dataset")
    p.add_argument("--lambda", dest="lam", action="append", metavar="V1,V2,...")
    p = add("reconstruct", cmd_reconstruct, "Fourier reconstruction of a stored generator")
    p.add_argument("--generator", required=True)
    p.add_argument("--noise", action="store_true", help="add the config's relative noise first")
    p = add("pipeline", cmd_pipeline, "dataset, fit, predict, noise, reconstruct and score")
    p.add_argument("--dataset")
    p.add_argument("--lambda", dest="lam", action="append", metavar="V1,V2,...")
    p = add("stability-sweep", cmd_stability_sweep, "noise-rate experiment on the template body")
    p.add_argument("--deltas", help="comma-separated noise levels (at least 3)")
    p = add("metrics", cmd_metrics, "score a stored field against the true body")
    p.add_argument("--field", required=True)
    p.add_argument("--lambda", dest="lam", action="append", metavar="V1,V2,...")
    p.add_argument("-o", "--output")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"shapegen: domain error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"shapegen: config error: {exc}", file=sys.stderr)
        return 2
    except (StorageError, OSError) as exc:
        print(f"shapegen: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
