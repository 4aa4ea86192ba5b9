#!/usr/bin/env python3
"""Noise-rate experiment: L2 reconstruction error of a template body against delta.

    python scripts/stability.py configs/rectangle_stability.json --deltas 1e-3,3e-3,1e-2,3e-2,1e-1

Prints the per-delta rows, the fitted log-log slope and, for reference, the
noise-free truncation error (the floor the noise term sits on).
"""

import argparse

import numpy as np

from shapegen import pipeline as pl
from shapegen.farfield import admissible_set, farfield
from shapegen.geometry import measure
from shapegen.reconstruct import truncation_order


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("config")
    parser.add_argument("--deltas", default="1e-3,3e-3,1e-2,3e-2,1e-1")
    parser.add_argument("--csv", help="write the rows to this CSV file")
    args = parser.parse_args()

    cfg = pl.PipelineConfig.from_file(args.config)
    deltas = [float(v) for v in args.deltas.split(",")]
    result = pl.stability_sweep(cfg, deltas)
    shape = cfg.shape_family().template

    print(f"{'delta':>8} {'N':>4} {'l2_error':>10} {'truncation':>11} {'mesh_l2':>10}")
    floors = []
    for r in result["rows"]:
        adm = admissible_set(cfg.d, cfg.a, cfg.mu, truncation_order(r["delta"], cfg.tau, cfg.d))
        exact = farfield(shape, adm, cfg.quad("verify"))
        floors.append(pl.l2_error_parseval(exact, exact, measure(shape)))
        print(f"{r['delta']:>8g} {r['N']:>4d} {r['l2_error']:>10.5f} {floors[-1]:>11.5f} {r['mesh_l2_error']:>10.5f}")
    print(f"slope {result['slope']:.4f} (truncation only: "
          f"{np.polyfit(np.log(deltas), np.log(floors), 1)[0]:.4f})")
    if args.csv:
        pl.write_sweep(result, args.csv)


if __name__ == "__main__":
    main()
