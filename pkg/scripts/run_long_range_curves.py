#!/usr/bin/env python3
"""Long-range transport curves for the lossy-site-driven models C and D.

At weak loss (gamma_a = 0.2) the displacement escapes the [0, 1] window:
model C runs left past -1, model D right past +1.  At strong loss the same
sweeps stay pinned inside the window.  Writes model_{c,d}_gamma*.{csv,json,svg}.
"""
import argparse
import pathlib

from rltransport import ModelKind, SimConfig, SweepSpec, default_delta_g_grid, run_sweep
from rltransport.output import emit_csv, emit_json, emit_svg

U_VALUES = (0.0, 0.5, 3.0, 5.0)


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

    jobs = [
        (ModelKind.C, 0.2, "model_c_gamma0.2"),
        (ModelKind.C, 2.0, "model_c_gamma2"),
        (ModelKind.D, 0.2, "model_d_gamma0.2"),
    ]
    for kind, gamma_a, name in jobs:
        sim = SimConfig(half_width=150 if gamma_a < 1 else 60,
                        horizon=50.0 / gamma_a)
        spec = SweepSpec(model=kind, delta_g_grid=grid, u_values=U_VALUES,
                         gamma_a=gamma_a, sim=sim)
        result = run_sweep(spec, workers=args.workers)
        prefix = outdir / name
        emit_csv(result, f"{prefix}.csv")
        emit_json(result, f"{prefix}.json")
        emit_svg(result, f"{prefix}.svg")
        print(f"wrote {prefix}.{{csv,json,svg}}")


if __name__ == "__main__":
    main()
