#!/usr/bin/env python3
"""Displacement-vs-imbalance curve families at strong loss (gamma_a = 2).

Produces, under the output directory:
  model_a_curves.*     intercell Kerr shift: the 0-plateau melts as U grows
  model_b_curves.*     intracell Kerr shift: the 1-plateau melts instead
  model_a_negated.*    sign-flipped couplings: monotone approach to 1
  horizon_gt{10,25,50,100}.*   linear model, sharpening quantization with T
"""
import argparse
import pathlib

from rltransport import ModelKind, SimConfig, SweepSpec, default_delta_g_grid, run_sweep
from rltransport.output import emit_csv, emit_json, emit_svg

U_VALUES = (0.0, 0.5, 3.0, 5.0)
GAMMA_A = 2.0


def emit(result, prefix: pathlib.Path) -> None:
    emit_csv(result, f"{prefix}.csv")
    emit_json(result, f"{prefix}.json")
    emit_svg(result, f"{prefix}.svg")
    print(f"wrote {prefix}.{{csv,json,svg}}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--quick", action="store_true",
                    help="coarse 21-point grid instead of the 81-point default")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = default_delta_g_grid(21 if args.quick else 81)
    sim = SimConfig(half_width=60, horizon=50.0 / GAMMA_A)

    for kind, name in ((ModelKind.A, "model_a_curves"), (ModelKind.B, "model_b_curves")):
        spec = SweepSpec(model=kind, delta_g_grid=grid, u_values=U_VALUES,
                         gamma_a=GAMMA_A, sim=sim)
        emit(run_sweep(spec, workers=args.workers), outdir / name)

    negated = SweepSpec(model=ModelKind.A, delta_g_grid=grid, u_values=U_VALUES,
                        gamma_a=GAMMA_A, sim=sim, negate_linear=True)
    emit(run_sweep(negated, workers=args.workers), outdir / "model_a_negated")

    for gamma_t in (10.0, 25.0, 50.0, 100.0):
        spec = SweepSpec(model=ModelKind.LINEAR, delta_g_grid=grid, u_values=(0.0,),
                         gamma_a=GAMMA_A,
                         sim=SimConfig(half_width=60, horizon=gamma_t / GAMMA_A))
        emit(run_sweep(spec, workers=args.workers), outdir / f"horizon_gt{gamma_t:g}")


if __name__ == "__main__":
    main()
