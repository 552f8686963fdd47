"""Self-contained SVG heatmaps over the (lambda, mu) grid.

No raster or plotting dependency: the renderer writes one SVG rect per
grid cell plus a labeled color bar.  Output is byte-identical for
identical inputs, so rendered maps can be diffed and cached.

Color conventions follow the figure style the sweep reproduces: the
coexistence fraction and the model-evidence difference use a diverging
red-white-blue ramp (low values red, high values blue, midpoint white),
everything else a sequential white-to-blue ramp.  Cells whose metric is
undefined render grey.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .sweep import read_results_csv, summarize_records

__all__ = ["PlotSpec", "PlotError", "METRICS", "emit_heatmap"]

METRICS = (
    "omega_cross",
    "omega_p1",
    "omega_p2",
    "alpha",
    "log_evidence_diff",
    "degree_variance",
    "js_distance",
)

_DIVERGING = {"alpha", "log_evidence_diff"}
_GREY = "#808080"
# diverging endpoints (red / white / blue) and the sequential ramp top
_RED = (165, 0, 38)
_WHITE = (255, 255, 255)
_BLUE = (49, 54, 149)
_SEQ_TOP = (8, 48, 107)


class PlotError(ValueError):
    """Invalid plot request (unknown metric, non-rectangular grid, ...)."""


@dataclass(frozen=True)
class PlotSpec:
    metric: str
    omega_t: float = 0.75

    def __post_init__(self):
        if self.metric not in METRICS:
            raise PlotError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not 0.0 < self.omega_t <= 1.0:
            raise PlotError("omega_t must lie in (0, 1]")

    @property
    def diverging(self) -> bool:
        return self.metric in _DIVERGING


def _lerp(a, b, t):
    return tuple(round(x + (y - x) * t) for x, y in zip(a, b))


def _hex(rgb) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _color(value: float, vmin: float, vmax: float, diverging: bool) -> str:
    span = vmax - vmin
    t = 0.5 if span == 0 else (value - vmin) / span
    t = min(1.0, max(0.0, t))
    if diverging:
        if t < 0.5:
            return _hex(_lerp(_RED, _WHITE, t * 2))
        return _hex(_lerp(_WHITE, _BLUE, (t - 0.5) * 2))
    return _hex(_lerp(_WHITE, _SEQ_TOP, t))


def _metric_values(results_path, spec: PlotSpec):
    """Map (lambda, mu) -> metric value or None (undefined)."""
    rows = read_results_csv(results_path)
    if not rows:
        raise PlotError(f"no rows in {results_path}")
    if spec.metric in ("omega_cross", "omega_p1", "omega_p2", "alpha"):
        table = summarize_records(rows, spec.omega_t)
        key = "alpha" if spec.metric == "alpha" else f"mean_{spec.metric}"
        return {(e["lambda"], e["mu"]): e[key] for e in table}
    # remaining metrics live in the per-cell summary next to the raw table
    summary_path = os.path.join(os.path.dirname(os.path.abspath(results_path)), "summary.csv")
    if not os.path.exists(summary_path):
        raise PlotError(f"metric {spec.metric!r} needs {summary_path}")
    import csv

    values = {}
    with open(summary_path, newline="") as fh:
        for row in csv.DictReader(fh):
            cell = (float(row["lambda"]), float(row["mu"]))
            if spec.metric == "log_evidence_diff":
                ndc, dc = row.get("log_evidence_ndc"), row.get("log_evidence_dc")
                values[cell] = float(dc) - float(ndc) if ndc and dc else None
            else:
                values[cell] = float(row[spec.metric])
    return values


def _scale(spec: PlotSpec, values):
    defined = [v for v in values if v is not None]
    if spec.metric in ("omega_cross", "omega_p1", "omega_p2", "alpha"):
        return 0.0, 1.0
    if spec.metric == "log_evidence_diff":
        m = max((abs(v) for v in defined), default=1.0) or 1.0
        return -m, m
    top = max(defined, default=1.0)
    return 0.0, top if top > 0 else 1.0


def emit_heatmap(results_path, spec: PlotSpec, out_path) -> None:
    """Render the metric over the grid: lambda on x, mu on y (origin bottom-left)."""
    values = _metric_values(results_path, spec)
    lams = sorted({k[0] for k in values})
    mus = sorted({k[1] for k in values})
    missing = [(l, m) for l in lams for m in mus if (l, m) not in values]
    if missing:
        raise PlotError(f"non-rectangular grid: missing cells {missing[:5]}")
    vmin, vmax = _scale(spec, values.values())

    cell = 24
    left, top, bottom = 70, 40, 55
    width = left + cell * len(lams) + 110
    height = top + cell * len(mus) + bottom
    bar_x = left + cell * len(lams) + 30
    bar_h = cell * len(mus)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{left + cell * len(lams) / 2:.6g}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{spec.metric}</text>',
    ]
    for col, lam in enumerate(lams):
        for row, mu in enumerate(mus):
            v = values[(lam, mu)]
            fill = _GREY if v is None else _color(v, vmin, vmax, spec.diverging)
            x = left + col * cell
            y = top + (len(mus) - 1 - row) * cell
            parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>')

    step = max(1, len(lams) // 10)
    for col in range(0, len(lams), step):
        x = left + col * cell + cell / 2
        parts.append(
            f'<text x="{x:.6g}" y="{top + cell * len(mus) + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{lams[col]:.6g}</text>'
        )
    for row in range(0, len(mus), step):
        y = top + (len(mus) - 1 - row) * cell + cell / 2 + 4
        parts.append(
            f'<text x="{left - 8}" y="{y:.6g}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{mus[row]:.6g}</text>'
        )
    parts.append(
        f'<text x="{left + cell * len(lams) / 2:.6g}" y="{height - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">lambda</text>'
    )
    parts.append(
        f'<text x="18" y="{top + bar_h / 2:.6g}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {top + bar_h / 2:.6g})">mu</text>'
    )

    # color bar: 64 bands from vmax (top) to vmin (bottom) with end labels
    bands = 64
    band_h = bar_h / bands
    for i in range(bands):
        frac = 1.0 - (i + 0.5) / bands
        v = vmin + frac * (vmax - vmin)
        y = top + i * band_h
        parts.append(
            f'<rect x="{bar_x}" y="{y:.6g}" width="16" height="{band_h + 0.5:.6g}" '
            f'fill="{_color(v, vmin, vmax, spec.diverging)}"/>'
        )
    for frac, v in ((1.0, vmax), (0.5, (vmin + vmax) / 2), (0.0, vmin)):
        y = top + (1.0 - frac) * bar_h
        parts.append(
            f'<text x="{bar_x + 22}" y="{y + 4:.6g}" font-family="sans-serif" '
            f'font-size="10">{v:.6g}</text>'
        )
    parts.append("</svg>")
    with open(out_path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
