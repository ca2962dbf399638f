"""CSV, JSON, and self-contained SVG emitters.

Data files are deterministic for identical inputs: full-precision decimals,
no timestamps.  Run provenance (wall time, engine version, ...) goes into a
sidecar ``<prefix>.meta.json`` instead.
"""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .observables import ContrastSeries, DisplacementSeries
from .sweeps import HeatmapRun, SweepResult

__all__ = ["emit_csv", "emit_json", "emit_svg", "emit_meta", "read_sweep_csv",
           "SWEEP_COLUMNS", "TRAJECTORY_COLUMNS"]

SWEEP_COLUMNS = ["model", "delta_g", "U", "gamma_a", "mean_displacement",
                 "residual_norm", "truncation_flag"]
TRAJECTORY_COLUMNS = ["t", "m", "abs_a_sq", "abs_b_sq", "Z_m", "Delta_m_t", "norm"]


def _full(x) -> str:
    """Shortest decimal that round-trips the double exactly."""
    return repr(float(x))


# ---------------------------------------------------------------- CSV

def emit_csv(result, path) -> None:
    """Write a result as CSV; the layout depends on the result type."""
    if isinstance(result, SweepResult):
        _sweep_csv(result, path)
    elif isinstance(result, HeatmapRun):
        _trajectory_csv(result, path)
    elif isinstance(result, ContrastSeries):
        _contrast_csv(result, path)
    elif isinstance(result, DisplacementSeries):
        _displacement_csv(result, path)
    elif isinstance(result, list):  # winding table rows
        _winding_csv(result, path)
    else:
        raise TypeError(f"no CSV layout for {type(result).__name__}")


def _open_writer(path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def _sweep_csv(result: SweepResult, path) -> None:
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(SWEEP_COLUMNS)
        spec = result.spec
        for curve in result.curves:
            for point in curve.points:
                value = "" if point.mean_displacement is None else _full(point.mean_displacement)
                residual = "" if point.residual_norm is None else _full(point.residual_norm)
                writer.writerow([spec.model.value, _full(point.delta_g), _full(curve.u),
                                 _full(spec.gamma_a), value, residual,
                                 "true" if point.truncation_unsafe else "false"])


def _trajectory_csv(run: HeatmapRun, path) -> None:
    norms = run.occupancy.sum(axis=1)
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(TRAJECTORY_COLUMNS)
        aa = run.trajectory.a.real**2 + run.trajectory.a.imag**2
        bb = run.trajectory.b.real**2 + run.trajectory.b.imag**2
        for s, t in enumerate(run.times):
            dm_t = run.displacement.values[s]
            for j, m in enumerate(run.cells):
                writer.writerow([_full(t), int(m), _full(aa[s, j]), _full(bb[s, j]),
                                 _full(run.contrast.Z[s, j]), _full(dm_t), _full(norms[s])])


def _contrast_csv(series: ContrastSeries, path) -> None:
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(["t", "m", "Z_m"])
        for s, t in enumerate(series.times):
            for j, m in enumerate(series.cells):
                writer.writerow([_full(t), int(m), _full(series.Z[s, j])])


def _displacement_csv(series: DisplacementSeries, path) -> None:
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(["t", "Delta_m_t"])
        for t, v in zip(series.times, series.values):
            writer.writerow([_full(t), _full(v)])


def _winding_csv(rows: list, path) -> None:
    fh, writer = _open_writer(path)
    with fh:
        writer.writerow(["delta_g", "mu", "nu", "winding"])
        for row in rows:
            w = "" if row.get("winding") is None else str(int(row["winding"]))
            writer.writerow([_full(row["delta_g"]), _full(row["mu"]),
                             _full(row["nu"]), w])


def read_sweep_csv(path) -> list[dict]:
    """Parse a sweep CSV back into per-point dicts (exact float round-trip)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for record in csv.DictReader(fh):
            rows.append({
                "model": record["model"],
                "delta_g": float(record["delta_g"]),
                "U": float(record["U"]),
                "gamma_a": float(record["gamma_a"]),
                "mean_displacement": (float(record["mean_displacement"])
                                      if record["mean_displacement"] else None),
                "residual_norm": (float(record["residual_norm"])
                                  if record["residual_norm"] else None),
                "truncation_flag": record["truncation_flag"] == "true",
            })
    return rows


# ---------------------------------------------------------------- JSON

def _sweep_payload(result: SweepResult) -> dict:
    spec = result.spec
    return {
        "model": spec.model.value,
        "gamma_a": spec.gamma_a,
        "negate_linear": spec.negate_linear,
        "run": {"dt": spec.sim.dt, "horizon": spec.sim.horizon,
                "half_width": spec.sim.half_width},
        "curves": [
            {"U": curve.u,
             "points": [{"delta_g": p.delta_g,
                         "mean_displacement": p.mean_displacement,
                         "residual_norm": p.residual_norm,
                         "truncation_unsafe": p.truncation_unsafe,
                         "error": p.error} for p in curve.points]}
            for curve in result.curves
        ],
    }


def emit_json(result, path) -> None:
    """Write a result as structured JSON (deterministic, no timestamps)."""
    if isinstance(result, SweepResult):
        payload = _sweep_payload(result)
    elif isinstance(result, HeatmapRun):
        payload = {
            "times": result.times.tolist(),
            "cells": result.cells.tolist(),
            "abs_a_sq": (result.trajectory.a.real**2 + result.trajectory.a.imag**2).tolist(),
            "abs_b_sq": (result.trajectory.b.real**2 + result.trajectory.b.imag**2).tolist(),
            "contrast": result.contrast.Z.tolist(),
            "displacement": result.displacement.values.tolist(),
            "norm": result.occupancy.sum(axis=1).tolist(),
        }
    elif isinstance(result, ContrastSeries):
        payload = {"times": result.times.tolist(), "cells": result.cells.tolist(),
                   "Z": result.Z.tolist()}
    elif isinstance(result, DisplacementSeries):
        payload = {"times": result.times.tolist(), "values": result.values.tolist(),
                   "final_value": result.final_value,
                   "residual_norm": result.residual_norm}
    elif isinstance(result, (list, dict)):
        payload = result
    else:
        raise TypeError(f"no JSON layout for {type(result).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def emit_meta(prefix, info: dict) -> None:
    with open(f"{prefix}.meta.json", "w", encoding="utf-8") as fh:
        json.dump(info, fh, sort_keys=True, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------- SVG

_PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]

_VIRIDIS = [(0x44, 0x01, 0x54), (0x48, 0x28, 0x78), (0x3e, 0x4a, 0x89),
            (0x31, 0x68, 0x8e), (0x26, 0x82, 0x8e), (0x1f, 0x9e, 0x89),
            (0x35, 0xb7, 0x79), (0x6e, 0xce, 0x58), (0xb5, 0xde, 0x2b),
            (0xfd, 0xe7, 0x25)]


def _fmt(x) -> str:
    return f"{float(x):.6g}"


def _color(v: float) -> str:
    v = min(max(v, 0.0), 1.0)
    pos = v * (len(_VIRIDIS) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(_VIRIDIS) - 1)
    f = pos - lo
    rgb = tuple(round(a + f * (b - a)) for a, b in zip(_VIRIDIS[lo], _VIRIDIS[hi]))
    return "#%02x%02x%02x" % rgb


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1.0, 2.0, 5.0, 10.0) if s * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    x = first
    while x <= hi + step * 1e-9:
        ticks.append(0.0 if abs(x) < step * 1e-9 else x)
        x += step
    return ticks


class _Canvas:
    """Minimal SVG assembler: a fixed frame with margins and data transforms."""

    W, H = 660, 460
    ML, MR, MT, MB = 72, 24, 28, 56

    def __init__(self, xlim, ylim, xlabel, ylabel):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x0, self.x1 = self.x0 - 0.5, self.x0 + 0.5
        if self.y1 <= self.y0:
            self.y0, self.y1 = self.y0 - 0.5, self.y0 + 0.5
        self.body: list[str] = []
        self.xlabel, self.ylabel = xlabel, ylabel

    def px(self, x):
        frac = (x - self.x0) / (self.x1 - self.x0)
        return self.ML + frac * (self.W - self.ML - self.MR)

    def py(self, y):
        frac = (y - self.y0) / (self.y1 - self.y0)
        return self.H - self.MB - frac * (self.H - self.MT - self.MB)

    def add(self, element: str) -> None:
        self.body.append(element)

    def axes(self) -> None:
        left, right = self.ML, self.W - self.MR
        top, bottom = self.MT, self.H - self.MB
        self.add(f'<rect x="{left}" y="{top}" width="{right-left}" height="{bottom-top}" '
                 'fill="none" stroke="#333" stroke-width="1"/>')
        for tx in _nice_ticks(self.x0, self.x1):
            px = self.px(tx)
            self.add(f'<line x1="{_fmt(px)}" y1="{bottom}" x2="{_fmt(px)}" y2="{bottom+5}" '
                     'stroke="#333" stroke-width="1"/>')
            self.add(f'<text x="{_fmt(px)}" y="{bottom+20}" font-size="12" '
                     f'text-anchor="middle" fill="#333">{_fmt(tx)}</text>')
        for ty in _nice_ticks(self.y0, self.y1):
            py = self.py(ty)
            self.add(f'<line x1="{left-5}" y1="{_fmt(py)}" x2="{left}" y2="{_fmt(py)}" '
                     'stroke="#333" stroke-width="1"/>')
            self.add(f'<text x="{left-8}" y="{_fmt(py+4)}" font-size="12" '
                     f'text-anchor="end" fill="#333">{_fmt(ty)}</text>')
        self.add(f'<text x="{(left+right)/2}" y="{self.H-14}" font-size="14" '
                 f'text-anchor="middle" fill="#000">{self.xlabel}</text>')
        self.add(f'<text x="18" y="{(top+bottom)/2}" font-size="14" text-anchor="middle" '
                 f'transform="rotate(-90 18 {(top+bottom)/2})" fill="#000">{self.ylabel}</text>')

    def document(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.W}" '
                f'height="{self.H}" viewBox="0 0 {self.W} {self.H}">'
                f'<rect width="{self.W}" height="{self.H}" fill="#ffffff"/>')
        return head + "".join(self.body) + "</svg>\n"


def _line_plot(series, xlabel, ylabel) -> str:
    """series: list of (label, xs, ys); None in ys splits the polyline."""
    xs_all = [x for (_, xs, _) in series for x in xs]
    ys_all = [y for (_, _, ys) in series for y in ys if y is not None]
    if not xs_all:
        xs_all, ys_all = [0.0], [0.0]
    if not ys_all:
        ys_all = [0.0]
    pad = 0.05 * (max(ys_all) - min(ys_all) or 1.0)
    canvas = _Canvas((min(xs_all), max(xs_all)),
                     (min(ys_all) - pad, max(ys_all) + pad), xlabel, ylabel)
    canvas.axes()
    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        segment: list[str] = []
        segments = [segment]
        for x, y in zip(xs, ys):
            if y is None:
                segment = []
                segments.append(segment)
            else:
                segment.append(f"{_fmt(canvas.px(x))},{_fmt(canvas.py(y))}")
        for seg in segments:
            if len(seg) >= 2:
                canvas.add(f'<polyline points="{" ".join(seg)}" fill="none" '
                           f'stroke="{color}" stroke-width="1.6"/>')
            elif len(seg) == 1:
                cx, cy = seg[0].split(",")
                canvas.add(f'<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>')
        if label:
            ly = canvas.MT + 16 + 16 * idx
            lx = canvas.W - canvas.MR - 130
            canvas.add(f'<line x1="{lx}" y1="{ly-4}" x2="{lx+24}" y2="{ly-4}" '
                       f'stroke="{color}" stroke-width="1.6"/>')
            canvas.add(f'<text x="{lx+30}" y="{ly}" font-size="12" fill="#000">{label}</text>')
    return canvas.document()


def _bin_columns(times: np.ndarray, grid: np.ndarray, max_cols: int):
    """Average neighbouring time samples down to at most max_cols columns."""
    n = len(times)
    if n <= max_cols:
        return times, grid
    edges = np.linspace(0, n, max_cols + 1).astype(int)
    t_out = np.array([times[lo:hi].mean() for lo, hi in zip(edges[:-1], edges[1:])])
    g_out = np.stack([grid[lo:hi].mean(axis=0) for lo, hi in zip(edges[:-1], edges[1:])])
    return t_out, g_out


def _heatmap(times, cells, grid, xlabel, ylabel, signed=False) -> str:
    times, grid = _bin_columns(np.asarray(times, float), np.asarray(grid, float), 220)
    canvas = _Canvas((times[0], times[-1]), (cells[0] - 0.5, cells[-1] + 0.5),
                     xlabel, ylabel)
    n_t = len(times)
    left, right = canvas.ML, canvas.W - canvas.MR
    bottom, top = canvas.H - canvas.MB, canvas.MT
    cw = (right - left) / n_t
    ch = (bottom - top) / len(cells)
    if signed:
        vmax = float(np.max(np.abs(grid))) or 1.0
        vmin = -vmax
    else:
        vmax = float(np.max(grid)) or 1.0
        vmin = 0.0
    # paint the dominant value once and only emit rects that differ from it
    background = float(np.median(grid))
    canvas.add(f'<rect x="{left}" y="{top}" width="{right-left}" height="{bottom-top}" '
               f'fill="{_color((background - vmin) / (vmax - vmin))}"/>')
    floor = 2e-4 * (vmax - vmin)
    for s in range(n_t):
        x = left + s * cw
        for j in range(len(cells)):
            v = grid[s, j]
            if abs(v - background) <= floor:
                continue
            y = bottom - (j + 1) * ch
            canvas.add(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cw + 0.25)}" '
                       f'height="{_fmt(ch + 0.25)}" fill="{_color((v - vmin) / (vmax - vmin))}"/>')
    canvas.axes()
    # compact colorbar
    bar_x = right - 14
    for i in range(40):
        frac = i / 39
        y = bottom - (bottom - top - 80) * frac - 40
        canvas.add(f'<rect x="{bar_x}" y="{_fmt(y - 3)}" width="8" height="3.2" '
                   f'fill="{_color(frac)}" stroke="none"/>')
    canvas.add(f'<text x="{bar_x-4}" y="{bottom-36}" font-size="10" text-anchor="end" '
               f'fill="#000">{_fmt(vmin)}</text>')
    canvas.add(f'<text x="{bar_x-4}" y="{top+44}" font-size="10" text-anchor="end" '
               f'fill="#000">{_fmt(vmax)}</text>')
    return canvas.document()


def emit_svg(result, path) -> None:
    """Render a result as a self-contained SVG plot."""
    if isinstance(result, SweepResult):
        series = [(f"U={_fmt(curve.u)}",
                   [p.delta_g for p in curve.points],
                   [p.mean_displacement for p in curve.points])
                  for curve in result.curves]
        doc = _line_plot(series, "δg", "⟨Δm⟩")
    elif isinstance(result, HeatmapRun):
        doc = _heatmap(result.times, result.cells, result.occupancy, "t", "m")
    elif isinstance(result, ContrastSeries):
        doc = _heatmap(result.times, result.cells, result.Z, "t", "m", signed=True)
    elif isinstance(result, DisplacementSeries):
        doc = _line_plot([(None, result.times.tolist(), result.values.tolist())],
                         "t", "Δm(t)")
    elif isinstance(result, list):  # winding table rows
        doc = _line_plot([(None,
                           [row["delta_g"] for row in result],
                           [float(row["winding"]) for row in result])],
                         "δg", "winding")
    else:
        raise TypeError(f"no SVG layout for {type(result).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(doc)
