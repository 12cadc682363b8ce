"""Minimal deterministic SVG scatter and line plots (no plotting dependency)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

WIDTH, HEIGHT, PAD = 480, 400, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, k: int = 5):
    return [lo + (hi - lo) * i / (k - 1) for i in range(k)]


def svg_document(points, kind: str = "qq", title: str = "") -> str:
    """SVG text for a QQ scatter (with identity line) or a trend line plot.

    ``points`` is an (N, 2) array. For ``kind="trend"`` the x values are
    plotted on a log10 axis and consecutive points are joined.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] != 2:
        raise ValueError("need a nonempty (N, 2) array of points")
    if kind not in ("qq", "trend"):
        raise ValueError(f"unknown plot kind {kind!r}")
    xs = np.log10(pts[:, 0]) if kind == "trend" else pts[:, 0]
    ys = pts[:, 1]
    if kind == "qq":
        lo = float(min(xs.min(), ys.min()))
        hi = float(max(xs.max(), ys.max()))
        if hi == lo:
            lo, hi = lo - 1.0, hi + 1.0
        x_lo = y_lo = lo
        x_hi = y_hi = hi
    else:
        x_lo, x_hi = float(xs.min()), float(xs.max())
        y_lo, y_hi = 0.0, float(ys.max()) * 1.1
        if x_hi == x_lo:
            x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
        if y_hi == y_lo:
            y_hi = y_lo + 1.0

    def sx(v):
        return PAD + (v - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * PAD)

    def sy(v):
        return HEIGHT - PAD - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
    ]
    for v in _ticks(x_lo, x_hi):
        label = f"{10 ** v:.4g}" if kind == "trend" else f"{v:.2f}"
        out.append(f'<text x="{_fmt(sx(v))}" y="{HEIGHT - PAD + 15}" text-anchor="middle" '
                   f'font-size="10">{label}</text>')
    for v in _ticks(y_lo, y_hi):
        out.append(f'<text x="{PAD - 5}" y="{_fmt(sy(v) + 3)}" text-anchor="end" '
                   f'font-size="10">{v:.3g}</text>')
    if kind == "qq":
        out.append(f'<line x1="{_fmt(sx(lo))}" y1="{_fmt(sy(lo))}" x2="{_fmt(sx(hi))}" '
                   f'y2="{_fmt(sy(hi))}" stroke="red" stroke-width="1"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2" fill="steelblue"/>')
    else:
        path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="2"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" fill="steelblue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(points, kind: str, path, title: str = "") -> Path:
    """Write the plot to ``path``; nothing is written if the input is invalid."""
    text = svg_document(points, kind, title)
    path = Path(path)
    path.write_text(text)
    return path
