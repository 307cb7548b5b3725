"""Seed aggregation of learning curves and a small self-contained SVG writer.

The band is a normal-approximation 95% interval of the mean across seeds:
mean +/- 1.96 * sd / sqrt(n), with the sample sd (ddof=1).  A single seed
gives a band of width zero.
"""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import DataError
from .trainer import read_metrics

Z95 = 1.96
AGG_HEADER = ("arm", "epoch", "n_seeds", "mean", "half_width", "lower", "upper")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def band(values):
    """Mean and 95% half-width of a 1-D sample."""
    v = np.asarray(values, float)
    if v.size == 0:
        raise DataError("no values to aggregate")
    mean = float(v.mean())
    if v.size == 1:
        return mean, 0.0
    return mean, float(Z95 * v.std(ddof=1) / np.sqrt(v.size))


def arm_of(metrics_path) -> str:
    """Arm name for a metrics file, from the run's config snapshot if present."""
    path = Path(metrics_path)
    snap = path.parent / "config.json"
    if snap.exists():
        return json.loads(snap.read_text())["arm"]
    # <task>-<difficulty>-<arm>-seed<k>
    parts = path.parent.name.split("-")
    if len(parts) >= 4 and parts[-1].startswith("seed"):
        return "-".join(parts[2:-1])
    raise DataError(f"cannot tell the arm of {path}")


def aggregate(paths, metric="eval_success") -> dict:
    """arm -> list of (epoch, n, mean, half_width) over the seeds of that arm.

    Runs that stopped early contribute only to the epochs they reached.
    """
    per_arm = defaultdict(lambda: defaultdict(list))
    for p in sorted(map(str, paths)):
        for row in read_metrics(p):
            per_arm[arm_of(p)][row.epoch].append(getattr(row, metric))
    out = {}
    for arm in sorted(per_arm):
        out[arm] = [(e, len(v), *band(v)) for e, v in sorted(per_arm[arm].items())]
    return out


def _num(x):
    return repr(round(float(x), 10))


def write_aggregate(path, agg) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_HEADER)
        for arm, rows in agg.items():
            for epoch, n, mean, hw in rows:
                w.writerow([arm, epoch, n, _num(mean), _num(hw), _num(mean - hw), _num(mean + hw)])


def render_svg(agg, title="eval success", width=640, height=400) -> str:
    left, right, top, bottom = 60, 150, 30, 45
    pw, ph = width - left - right, height - top - bottom
    max_epoch = max((r[0] for rows in agg.values() for r in rows), default=1)
    x0 = min((r[0] for rows in agg.values() for r in rows), default=0)

    def sx(e):
        return left + pw * (e - x0) / max(max_epoch - x0, 1)

    def sy(v):
        return top + ph * (1.0 - min(max(v, 0.0), 1.0))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<title>{escape(title)}</title>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = sy(tick)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" font-size="11" text-anchor="end">{tick:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" font-size="12" text-anchor="middle">epoch</text>')
    out.append(f'<text x="{left}" y="{top - 10}" font-size="12">{escape(title)}</text>')
    for i, (arm, rows) in enumerate(agg.items()):
        color = PALETTE[i % len(PALETTE)]
        upper = [(sx(e), sy(m + h)) for e, _, m, h in rows]
        lower = [(sx(e), sy(m - h)) for e, _, m, h in reversed(rows)]
        poly = " ".join(f"{x:.2f},{y:.2f}" for x, y in upper + lower)
        line = " ".join(f"{sx(e):.2f},{sy(m):.2f}" for e, _, m, _ in rows)
        # raw numbers ride along so the plot can be audited without the CSV
        series = ";".join(f"{e}:{_num(m)}:{_num(h)}" for e, _, m, h in rows)
        out.append(f'<g class="arm" data-arm="{escape(arm)}" data-series="{series}">')
        out.append(f'<polygon points="{poly}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        out.append('</g>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 34}" y="{ly}" font-size="11">{escape(arm)}</text>')
    out.append('</svg>')
    return "\n".join(out) + "\n"
