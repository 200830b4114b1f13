"""Standalone SVG line chart of greedy counts against the horizon."""
from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from ..covering import ComplexityProfile

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 200, 40, 60


def _series(profiles: Sequence[ComplexityProfile]):
    out = []
    for prof in profiles:
        for metric in prof.metrics:
            for eps in prof.eps_values:
                pts = prof.counts(metric, eps)
                if pts:
                    label = f"{prof.name + ': ' if prof.name else ''}{metric}, eps={eps:g}"
                    out.append((label, pts))
    return out


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def render_chart(profiles, title: str = "") -> str:
    if isinstance(profiles, ComplexityProfile):
        profiles = [profiles]
    series = _series(profiles)
    if not series:
        raise ValueError("profile is empty")
    ns = [n for _, pts in series for n, _ in pts]
    cs = [c for _, pts in series for _, c in pts]
    log_x = min(ns) >= 1 and max(ns) / min(ns) >= 100
    fx = (lambda n: math.log10(n)) if log_x else float
    x_lo, x_hi = fx(min(ns)), fx(max(ns))
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    y_lo, y_hi = 0.0, max(cs) * 1.1 if max(cs) > 0 else 1.0
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(n):
        return LEFT + (fx(n) - x_lo) / (x_hi - x_lo) * pw

    def py(c):
        return TOP + ph - (c - y_lo) / (y_hi - y_lo) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
             f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
             f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        parts.append(f'<text x="{LEFT}" y="22" font-size="15">{escape(title)}</text>')
    parts.append(f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>')
    parts.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>')
    for t in _ticks(x_lo, x_hi):
        x = LEFT + (t - x_lo) / (x_hi - x_lo) * pw
        lab = f"{10 ** t:.3g}" if log_x else f"{t:.3g}"
        parts.append(f'<line x1="{x:.2f}" y1="{TOP + ph}" x2="{x:.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{TOP + ph + 19}" text-anchor="middle">{lab}</text>')
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        parts.append(f'<line x1="{LEFT - 5}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    x_label = "horizon n (log scale)" if log_x else "horizon n"
    parts.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">{x_label}</text>')
    parts.append(f'<text x="18" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {TOP + ph / 2:.2f})">greedy count</text>')
    for idx, (label, pts) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        coords = " ".join(f"{px(n):.2f},{py(c):.2f}" for n, c in pts)
        if len(pts) > 1:
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        for n, c in pts:
            parts.append(f'<circle cx="{px(n):.2f}" cy="{py(c):.2f}" r="3" fill="{color}"/>')
        ly = TOP + 14 + 18 * idx
        lx = WIDTH - RIGHT + 15
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 26}" y="{ly}">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_chart(profiles, path: str, title: str = "") -> str:
    """Write the chart to ``path`` and return the SVG text."""
    svg = render_chart(profiles, title)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(svg)
    return svg


__all__ = ["render_chart", "emit_chart"]
