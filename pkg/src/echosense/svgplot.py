"""Minimal native SVG line plots for CSV outputs.

Plots are a convenience; the CSVs are the contract.  No plotting library
is pulled in for this.
"""

from __future__ import annotations

import csv
from pathlib import Path

_W, _H, _PAD = 640, 420, 60


def _scale(vals, lo, hi, out_lo, out_hi):
    span = (hi - lo) or 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in vals]


def plot_lines(path, x, series: dict, x_label="", y_label="") -> None:
    """Write a simple multi-series line plot as SVG."""
    xs = [float(v) for v in x]
    all_y = [float(v) for ys in series.values() for v in ys]
    if not xs or not all_y:
        return
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(all_y), max(all_y)
    px = _scale(xs, x_lo, x_hi, _PAD, _W - _PAD)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
              "#8c564b", "#17becf", "#7f7f7f"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" '
        f'y2="{_H - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" '
        f'stroke="black"/>',
        f'<text x="{_W // 2}" y="{_H - 15}" text-anchor="middle" '
        f'font-size="13">{x_label}</text>',
        f'<text x="18" y="{_H // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {_H // 2})">{y_label}</text>',
        f'<text x="{_PAD}" y="{_H - _PAD + 18}" font-size="11">{x_lo:.4g}</text>',
        f'<text x="{_W - _PAD}" y="{_H - _PAD + 18}" text-anchor="end" '
        f'font-size="11">{x_hi:.4g}</text>',
        f'<text x="{_PAD - 5}" y="{_H - _PAD}" text-anchor="end" '
        f'font-size="11">{y_lo:.4g}</text>',
        f'<text x="{_PAD - 5}" y="{_PAD + 4}" text-anchor="end" '
        f'font-size="11">{y_hi:.4g}</text>',
    ]
    for i, (name, ys) in enumerate(series.items()):
        py = _scale([float(v) for v in ys], y_lo, y_hi, _H - _PAD, _PAD)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{_W - _PAD + 4}" y="{_PAD + 16 * i + 10}" '
                     f'font-size="11" fill="{color}">{name}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))


def plot_csv(csv_path, svg_path) -> None:
    """Plot every numeric column of a CSV against its first numeric column."""
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return
    numeric = []
    for name in rows[0]:
        try:
            [float(r[name]) for r in rows]
        except (TypeError, ValueError):
            continue
        numeric.append(name)
    skip = {"index", "seed", "n", "n_pi"}
    axes = [n for n in numeric if n not in skip]
    if len(axes) < 2:
        return
    x_name = axes[0]
    series = {n: [float(r[n]) for r in rows] for n in axes[1:6]}
    plot_lines(svg_path, [float(r[x_name]) for r in rows], series,
               x_label=x_name)
