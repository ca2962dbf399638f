#!/usr/bin/env python3
"""Time-resolved occupancy, contrast, and displacement for single runs.

Covers the headline regimes: the nonlinearity-activated forward bond of
model A at strong loss, and model C at weak loss from confinement through
unidirectional leftward transport, plus the balanced symmetric-diffusion
case.  Each run writes <name>.occupancy.svg, <name>.contrast.svg,
<name>.displacement.csv and <name>.csv (the full long-format trajectory).
"""
import argparse
import pathlib

from rltransport import SimConfig, heatmap_run, make_params, mean_displacement
from rltransport.output import emit_csv, emit_svg

RUNS = [
    # name,                kind, delta_g, gamma_a, U
    ("model_a_dg-0.4_u0.5", "a", -0.4, 2.0, 0.5),
    ("model_a_dg-0.4_u3",   "a", -0.4, 2.0, 3.0),
    ("model_a_dg-0.4_u5",   "a", -0.4, 2.0, 5.0),
    ("model_c_dg-0.4_u0.5", "c", -0.4, 0.2, 0.5),
    ("model_c_dg-0.4_u3",   "c", -0.4, 0.2, 3.0),
    ("model_c_dg-0.4_u5",   "c", -0.4, 0.2, 5.0),
    ("model_c_dg0_u0.5",    "c", 0.0, 0.2, 0.5),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results", help="output directory")
    args = ap.parse_args()

    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, kind, delta_g, gamma_a, U in RUNS:
        params = make_params(kind, delta_g, gamma_a, U)
        sim = SimConfig(half_width=150 if gamma_a < 1 else 60,
                        horizon=50.0 / gamma_a)
        run = heatmap_run(params, sim)
        md = mean_displacement(run.trajectory)
        prefix = outdir / name
        emit_csv(run, f"{prefix}.csv")
        emit_csv(run.displacement, f"{prefix}.displacement.csv")
        emit_svg(run, f"{prefix}.occupancy.svg")
        emit_svg(run.contrast, f"{prefix}.contrast.svg")
        print(f"{name}: <dm> = {md.value:+.4f} (residual {md.residual_norm:.1e}) "
              f"-> {prefix}.*")


if __name__ == "__main__":
    main()
