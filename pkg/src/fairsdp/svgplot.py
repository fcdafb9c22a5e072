"""Minimal SVG line charts of sweep results (score vs. lambda)."""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Sequence
from xml.sax.saxutils import escape

from .sweep import SweepPoint

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=60, right=150, top=30, bottom=50)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
METRIC_NAMES = {"ami": "AMI", "ari": "ARI", "v": "V-measure"}


def _f(x: float) -> str:
    return f"{x:.2f}"


def _series(points: Sequence[SweepPoint], metric: str):
    """Mean temporal/specificity score per (mu, lambda), averaged over seeds."""
    acc: dict[tuple[float, str], dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
    for p in points:
        for kind in ("temporal", "specificity"):
            v = getattr(p, f"{kind}_{metric}")
            if not math.isnan(v):
                acc[(p.mu, kind)][p.lam].append(v)
    series = []
    for (mu, kind) in sorted(acc, key=lambda k: (k[0], k[1] != "temporal")):
        pts = sorted((lam, sum(vs) / len(vs)) for lam, vs in acc[(mu, kind)].items())
        series.append((mu, kind, pts))
    return series


def render_svg(points: Sequence[SweepPoint], metric: str = "ami") -> str:
    if metric not in METRIC_NAMES:
        raise ValueError(f"metric must be one of {sorted(METRIC_NAMES)}")
    if not points:
        raise ValueError("no sweep points to plot")
    series = _series(points, metric)
    lams = [p.lam for p in points]
    xmin, xmax = min(lams), max(lams)
    if xmin == xmax:
        xmin, xmax = xmin - 0.5, xmax + 0.5
    values = [v for _, _, pts in series for _, v in pts]
    ymin = min([0.0] + values)
    ymax = max([1.0] + values)

    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def sx(lam):
        return x0 + (lam - xmin) / (xmax - xmin) * (x1 - x0)

    def sy(v):
        return y0 - (v - ymin) / (ymax - ymin) * (y0 - y1)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for i in range(5):
        lam = xmin + (xmax - xmin) * i / 4
        v = ymin + (ymax - ymin) * i / 4
        out.append(f'<text x="{_f(sx(lam))}" y="{y0 + 18}" text-anchor="middle">{lam:.2f}</text>')
        out.append(f'<text x="{x0 - 8}" y="{_f(sy(v) + 4)}" text-anchor="end">{v:.2f}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">lambda</text>')
    name = METRIC_NAMES[metric]
    out.append(
        f'<text x="15" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {(y0 + y1) / 2:.1f})">{escape(name)}</text>'
    )
    for i, (mu, kind, pts) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        dash = "" if kind == "temporal" else ' stroke-dasharray="6 3"'
        coords = " ".join(f"{_f(sx(lam))},{_f(sy(v))}" for lam, v in pts)
        if len(pts) > 1:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{coords}"/>')
        for lam, v in pts:
            out.append(f'<circle cx="{_f(sx(lam))}" cy="{_f(sy(v))}" r="2.5" fill="{color}"/>')
        ly = MARGIN["top"] + 18 * i
        lx = x1 + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>')
        label = escape(f"{kind} {name} (mu={mu:g})")
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
