"""Command-line front end.

Subcommands: evolve, sweep, contrast, check-norm, winding.  Any flag can
also come from an INI-style config file (section per subcommand); explicit
command-line flags win.  Exit codes: 0 success, 1 usage error, 2 integration
divergence, 3 I/O error.
"""
from __future__ import annotations

import argparse
import configparser
import re
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .integrate import (
    IntegrationDivergedError,
    SimConfig,
    default_half_width,
    evolve,
)
from .models import (
    LatticeState,
    ModelKind,
    ModelParams,
    ParameterError,
    SingleSite,
    make_params,
    winding_number,
)
from .observables import mean_displacement, norm_rate_residual
from .output import emit_csv, emit_json, emit_meta, emit_svg
from .sweeps import DEFAULT_U_VALUES, SweepSpec, default_delta_g_grid, heatmap_run, run_sweep

__all__ = ["UsageError", "RunManifest", "parse_cli", "run", "main"]

SUBCOMMANDS = ("evolve", "sweep", "contrast", "check-norm", "winding")
FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    """Bad command line or config file; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # accept negative-number values like "-0.4:0.4:0.1" or "-0.4,-0.2"
        self._negative_number_matcher = re.compile(r"^-\.?\d")

    def error(self, message):
        raise UsageError(message)


@dataclass
class RunManifest:
    """Fully resolved run request: what to simulate and where to write it."""

    subcommand: str
    params: ModelParams | None
    sim: SimConfig | None
    sweep: SweepSpec | None
    winding_grid: tuple[float, ...]
    negate_linear: bool
    out_prefix: str
    formats: tuple[str, ...]
    workers: int | None
    seed: int
    states: int
    argv: tuple[str, ...]


_DEFAULTS = {
    "model": "linear",
    "delta_g": None,
    "delta_g_grid": None,
    "u": None,
    "gamma_a": 2.0,
    "dt": 1e-3,
    "horizon_gamma_t": 50.0,
    "horizon_t": None,
    "n": None,
    "negate_linear": False,
    "initial": "0:b",
    "sample_stride": None,
    "out": None,
    "format": "csv,json",
    "workers": None,
    "seed": 1234,
    "states": 100,
}

_COERCE = {
    "model": str, "delta_g": float, "delta_g_grid": str, "u": str,
    "gamma_a": float, "dt": float, "horizon_gamma_t": float, "horizon_t": float,
    "n": int, "negate_linear": None, "initial": str, "sample_stride": int,
    "out": str, "format": str, "workers": int, "seed": int, "states": int,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="rltransport", allow_abbrev=False,
                     description="Transport in lossy dimerized lattices "
                                 "with nonlinear hoppings.")
    subparsers = parser.add_subparsers(dest="subcommand")
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name, allow_abbrev=False)
        sub.add_argument("--model", default=None,
                         help="one of linear|a|b|c|d|e (default linear)")
        sub.add_argument("--delta-g", type=float, default=None,
                         help="coupling imbalance in [-0.5, 0.5]")
        sub.add_argument("--delta-g-grid", default=None, metavar="START:STOP:STEP",
                         help="inclusive imbalance grid (sweep/winding)")
        sub.add_argument("--u", default=None,
                         help="nonlinear coefficient; comma list for sweep")
        sub.add_argument("--gamma-a", type=float, default=None,
                         help="loss rate of the A sites (default 2)")
        sub.add_argument("--dt", type=float, default=None, help="time step (default 1e-3)")
        sub.add_argument("--horizon-gamma-t", type=float, default=None,
                         help="horizon as gamma_a*T (default 50)")
        sub.add_argument("--horizon-t", type=float, default=None,
                         help="horizon as absolute time (overrides --horizon-gamma-t)")
        sub.add_argument("--n", type=int, default=None,
                         help="lattice half width (default 60, or 150 for gamma_a < 1)")
        sub.add_argument("--negate-linear", action="store_const", const=True,
                         default=None, help="flip the signs of mu and nu")
        sub.add_argument("--initial", default=None, metavar="M:A|B",
                         help="initial single-site excitation (default 0:b)")
        sub.add_argument("--sample-stride", type=int, default=None,
                         help="record every k-th step")
        sub.add_argument("--out", default=None, help="output path prefix")
        sub.add_argument("--format", default=None,
                         help="comma subset of csv,json,svg (default csv,json)")
        sub.add_argument("--config", default=None, help="INI config file")
        sub.add_argument("--workers", type=int, default=None,
                         help="worker processes for sweeps")
        sub.add_argument("--seed", type=int, default=None,
                         help="RNG seed for check-norm states")
        sub.add_argument("--states", type=int, default=None,
                         help="number of random states for check-norm")
    return parser


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _load_config(path: str, subcommand: str) -> dict:
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path}: {exc}") from exc
    if not parser.has_section(subcommand):
        return {}
    values = {}
    for key, raw in parser.items(subcommand):
        dest = key.replace("-", "_")
        if dest not in _DEFAULTS:
            raise UsageError(f"unknown config key {key!r} in [{subcommand}]")
        if dest == "negate_linear":
            values[dest] = _parse_bool(raw)
        else:
            coerce = _COERCE[dest]
            try:
                values[dest] = coerce(raw)
            except ValueError as exc:
                raise UsageError(f"bad config value {key} = {raw!r}: {exc}") from exc
    return values


def _parse_u_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise UsageError(f"bad --u list {text!r}: {exc}") from exc
    if not values:
        raise UsageError(f"bad --u list {text!r}: empty")
    return values


def _parse_grid(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"bad grid {text!r}: expected START:STOP:STEP")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from exc
    if step <= 0 or stop < start:
        raise UsageError(f"bad grid {text!r}: need STOP >= START and STEP > 0")
    count = int(round((stop - start) / step))
    grid = tuple(start + i * step for i in range(count + 1)
                 if start + i * step <= stop + step * 1e-9)
    return grid


def _parse_initial(text: str) -> SingleSite:
    parts = text.split(":")
    if len(parts) != 2 or parts[1].lower() not in ("a", "b"):
        raise UsageError(f"bad --initial {text!r}: expected M:a or M:b")
    try:
        cell = int(parts[0])
    except ValueError as exc:
        raise UsageError(f"bad --initial {text!r}: {exc}") from exc
    return SingleSite(cell, parts[1].lower())


def parse_cli(argv: list[str]) -> RunManifest:
    """Resolve flags, config file, and defaults into a RunManifest."""
    if not argv:
        raise UsageError("missing subcommand; expected one of: " + ", ".join(SUBCOMMANDS))
    ns = _build_parser().parse_args(argv)
    if ns.subcommand is None:
        raise UsageError("missing subcommand; expected one of: " + ", ".join(SUBCOMMANDS))
    sub = ns.subcommand

    from_file = _load_config(ns.config, sub) if ns.config else {}
    opt = {}
    for key, default in _DEFAULTS.items():
        cli_value = getattr(ns, key)
        opt[key] = cli_value if cli_value is not None else from_file.get(key, default)

    try:
        return _resolve(sub, opt, argv)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def _resolve(sub: str, opt: dict, argv: list[str]) -> RunManifest:
    model = ModelKind.parse(opt["model"])
    gamma_a = float(opt["gamma_a"])
    negate = bool(opt["negate_linear"])

    if opt["delta_g"] is not None and opt["delta_g_grid"] is not None:
        raise UsageError("conflicting flags: give --delta-g or --delta-g-grid, not both")
    if sub in ("evolve", "contrast", "check-norm") and opt["delta_g_grid"] is not None:
        raise UsageError(f"--delta-g-grid is not valid for {sub}; use --delta-g")

    u_values = _parse_u_list(opt["u"]) if opt["u"] is not None else None
    if sub != "sweep" and u_values is not None and len(u_values) > 1:
        raise UsageError(f"conflicting U settings: {sub} takes a single --u value")
    if model is ModelKind.LINEAR and u_values is not None and any(u != 0.0 for u in u_values):
        raise UsageError("conflicting model/U settings: model linear has no nonlinear "
                         "term; pick one of a|b|c|d|e for U > 0")

    if opt["horizon_t"] is not None:
        horizon = float(opt["horizon_t"])
    else:
        if gamma_a <= 0:
            raise UsageError("gamma_a = 0 has no gamma_a*T horizon; pass --horizon-t")
        horizon = float(opt["horizon_gamma_t"]) / gamma_a

    half_width = int(opt["n"]) if opt["n"] is not None else default_half_width(gamma_a)
    initial = _parse_initial(opt["initial"])
    sim = SimConfig(half_width=half_width, horizon=horizon, dt=float(opt["dt"]),
                    sample_stride=opt["sample_stride"], initial=initial)

    formats = tuple(tok.strip() for tok in str(opt["format"]).split(",") if tok.strip())
    if not formats:
        raise UsageError("no output format selected; expected a subset of csv,json,svg")
    for fmt in formats:
        if fmt not in FORMATS:
            raise UsageError(f"unknown output format {fmt!r}; expected csv, json or svg")

    out_prefix = opt["out"] if opt["out"] is not None else sub
    delta_g = float(opt["delta_g"]) if opt["delta_g"] is not None else 0.0

    params = None
    sweep = None
    winding_grid: tuple[float, ...] = ()
    if sub == "sweep":
        grid = (_parse_grid(opt["delta_g_grid"]) if opt["delta_g_grid"] is not None
                else (delta_g,) if opt["delta_g"] is not None
                else default_delta_g_grid())
        if u_values is None:
            u_values = (0.0,) if model is ModelKind.LINEAR else DEFAULT_U_VALUES
        sweep = SweepSpec(model=model, delta_g_grid=grid, u_values=u_values,
                          gamma_a=gamma_a, sim=sim, negate_linear=negate)
    elif sub == "winding":
        winding_grid = (_parse_grid(opt["delta_g_grid"]) if opt["delta_g_grid"] is not None
                        else (delta_g,))
    else:
        u = u_values[0] if u_values else 0.0
        params = make_params(model, delta_g, gamma_a, u, negate)

    return RunManifest(subcommand=sub, params=params, sim=sim, sweep=sweep,
                       winding_grid=winding_grid, negate_linear=negate,
                       out_prefix=out_prefix, formats=formats,
                       workers=opt["workers"], seed=int(opt["seed"]),
                       states=int(opt["states"]), argv=tuple(argv))


def _write_meta(manifest: RunManifest, wall: float, extra: dict | None = None) -> None:
    sim = manifest.sweep.sim if manifest.sweep is not None else manifest.sim
    info = {
        "engine_version": __version__,
        "subcommand": manifest.subcommand,
        "command": list(manifest.argv),
        "dt": sim.dt if sim else None,
        "horizon": sim.horizon if sim else None,
        "half_width": sim.half_width if sim else None,
        "wall_time_s": wall,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        info.update(extra)
    emit_meta(manifest.out_prefix, info)


def _run_single(manifest: RunManifest) -> int:
    started = time.perf_counter()
    result = heatmap_run(manifest.params, manifest.sim)
    md = mean_displacement(result.trajectory)
    print(f"model {manifest.params.kind.value}  delta_g={manifest.params.delta_g:g}  "
          f"U={manifest.params.U:g}  gamma_a={manifest.params.gamma_a:g}")
    print(f"mean displacement = {md.value:.6f}  residual norm = {md.residual_norm:.3e}"
          + ("  [truncation-unsafe]" if result.trajectory.truncation_unsafe else ""))
    prefix = manifest.out_prefix
    if manifest.subcommand == "evolve":
        if "csv" in manifest.formats:
            emit_csv(result, f"{prefix}.csv")
        if "json" in manifest.formats:
            emit_json(result, f"{prefix}.json")
        if "svg" in manifest.formats:
            emit_svg(result, f"{prefix}.occupancy.svg")
            emit_svg(result.contrast, f"{prefix}.contrast.svg")
    else:  # contrast
        if "csv" in manifest.formats:
            emit_csv(result.contrast, f"{prefix}.csv")
        if "json" in manifest.formats:
            emit_json(result.contrast, f"{prefix}.json")
        if "svg" in manifest.formats:
            emit_svg(result.contrast, f"{prefix}.svg")
    _write_meta(manifest, time.perf_counter() - started,
                {"model": manifest.params.kind.value,
                 "delta_g": manifest.params.delta_g, "U": manifest.params.U,
                 "gamma_a": manifest.params.gamma_a,
                 "mean_displacement": md.value,
                 "residual_norm": md.residual_norm})
    return 0


def _run_sweep(manifest: RunManifest) -> int:
    started = time.perf_counter()
    result = run_sweep(manifest.sweep, workers=manifest.workers)
    for curve in result.curves:
        values = [p.mean_displacement for p in curve.points if p.mean_displacement is not None]
        holes = sum(1 for p in curve.points if p.error is not None)
        lo, hi = (min(values), max(values)) if values else (float("nan"),) * 2
        print(f"U={curve.u:g}: {len(curve.points)} points, "
              f"<dm> in [{lo:.4f}, {hi:.4f}]" + (f", {holes} failed" if holes else ""))
    prefix = manifest.out_prefix
    if "csv" in manifest.formats:
        emit_csv(result, f"{prefix}.csv")
    if "json" in manifest.formats:
        emit_json(result, f"{prefix}.json")
    if "svg" in manifest.formats:
        emit_svg(result, f"{prefix}.svg")
    _write_meta(manifest, time.perf_counter() - started,
                {"model": manifest.sweep.model.value,
                 "gamma_a": manifest.sweep.gamma_a,
                 "u_values": list(manifest.sweep.u_values),
                 "grid_points": len(manifest.sweep.delta_g_grid)})
    return 0


def _run_winding(manifest: RunManifest) -> int:
    started = time.perf_counter()
    sign = -1.0 if manifest.negate_linear else 1.0
    rows = []
    for dg in manifest.winding_grid:
        mu = sign * (0.5 - dg)
        nu = sign * (0.5 + dg)
        try:
            w = winding_number(mu, nu)
            rows.append({"delta_g": dg, "mu": mu, "nu": nu, "winding": w, "error": None})
        except ParameterError as exc:
            rows.append({"delta_g": dg, "mu": mu, "nu": nu, "winding": None,
                         "error": str(exc)})
    for row in rows:
        tag = row["winding"] if row["winding"] is not None else f"({row['error']})"
        print(f"delta_g={row['delta_g']:+.4f}  mu={row['mu']:+.4f}  "
              f"nu={row['nu']:+.4f}  winding={tag}")
    prefix = manifest.out_prefix
    if "csv" in manifest.formats:
        emit_csv(rows, f"{prefix}.csv")
    if "json" in manifest.formats:
        emit_json(rows, f"{prefix}.json")
    if "svg" in manifest.formats:
        emit_svg([r for r in rows if r["winding"] is not None], f"{prefix}.svg")
    _write_meta(manifest, time.perf_counter() - started,
                {"points": len(rows)})
    return 0


def _run_check_norm(manifest: RunManifest) -> int:
    started = time.perf_counter()
    params = manifest.params
    rng = np.random.default_rng(manifest.seed)
    n_cells = 2 * manifest.sim.half_width + 1
    worst = 0.0
    for _ in range(manifest.states):
        a = rng.normal(size=n_cells) + 1j * rng.normal(size=n_cells)
        b = rng.normal(size=n_cells) + 1j * rng.normal(size=n_cells)
        nrm = np.sqrt(np.sum(np.abs(a) ** 2 + np.abs(b) ** 2))
        state = LatticeState(manifest.sim.half_width, a / nrm, b / nrm,
                             np.zeros(n_cells))
        worst = max(worst, norm_rate_residual(params, state))
    traj = evolve(params, manifest.sim)
    final = traj.final
    conservation = abs(final.norm() + final.total_decay() - 1.0)
    rate_ok = worst < 1e-12
    cons_ok = conservation < 1e-6
    print(f"model {params.kind.value}  delta_g={params.delta_g:g}  U={params.U:g}  "
          f"gamma_a={params.gamma_a:g}")
    print(f"norm-rate residual over {manifest.states} random states: "
          f"max {worst:.3e}  [{'PASS' if rate_ok else 'FAIL'}]")
    print(f"norm + decay - 1 after evolution: {conservation:.3e}  "
          f"[{'PASS' if cons_ok else 'FAIL'}]")
    report = {"max_norm_rate_residual": worst, "conservation_error": conservation,
              "states": manifest.states, "norm_rate_pass": rate_ok,
              "conservation_pass": cons_ok}
    if "json" in manifest.formats:
        emit_json(report, f"{manifest.out_prefix}.json")
    _write_meta(manifest, time.perf_counter() - started, report)
    return 0


def run(manifest: RunManifest) -> int:
    """Execute a parsed manifest; returns the process exit code."""
    if manifest.subcommand in ("evolve", "contrast"):
        return _run_single(manifest)
    if manifest.subcommand == "sweep":
        return _run_sweep(manifest)
    if manifest.subcommand == "winding":
        return _run_winding(manifest)
    return _run_check_norm(manifest)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        manifest = parse_cli(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return run(manifest)
    except (UsageError, ParameterError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except IntegrationDivergedError as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
