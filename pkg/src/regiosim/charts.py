"""Minimal deterministic SVG line charts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=40, bottom=50)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


@dataclass(frozen=True)
class Series:
    label: str
    y: Sequence[float]
    color: str | None = None
    dashed: bool = False


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step * 1e-9, step)


def line_chart(
    x: Sequence[float],
    series: Sequence[Series],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    band: tuple[Sequence[float], Sequence[float]] | None = None,
    hline: tuple[float, str] | None = None,
) -> str:
    """Render lines over a shared x axis, with an optional shaded band and reference line."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(s.y, dtype=float) for s in series]
    pool = [v[np.isfinite(v)] for v in ys]
    if band is not None:
        pool += [np.asarray(b, float)[np.isfinite(b)] for b in band]
    if hline is not None:
        pool.append(np.array([hline[0]]))
    vals = np.concatenate(pool) if pool else np.array([0.0])
    if vals.size == 0:
        vals = np.array([0.0])
    y0, y1 = float(vals.min()), float(vals.max())
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5 * max(abs(y0), 1.0), y1 + 0.5 * max(abs(y1), 1.0)
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    x0, x1 = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5

    L, R, T, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]

    def px(v):
        return L + (v - x0) / (x1 - x0) * (R - L)

    def py(v):
        return B - (v - y0) / (y1 - y0) * (B - T)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
    ]
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{L}" y1="{_fmt(py(t))}" x2="{R}" y2="{_fmt(py(t))}" stroke="#e5e5e5"/>')
        out.append(
            f'<text x="{L - 6}" y="{_fmt(py(t) + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">{_tick_label(t)}</text>'
        )
    for t in _nice_ticks(x0, x1):
        out.append(
            f'<text x="{_fmt(px(t))}" y="{B + 16}" text-anchor="middle" font-family="sans-serif" font-size="11">{_tick_label(t)}</text>'
        )
    out.append(f'<line x1="{L}" y1="{B}" x2="{R}" y2="{B}" stroke="black"/>')
    out.append(f'<line x1="{L}" y1="{T}" x2="{L}" y2="{B}" stroke="black"/>')
    out.append(
        f'<text x="{(L + R) / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(xlabel)}</text>'
    )
    out.append(
        f'<text x="16" y="{(T + B) / 2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(T + B) / 2:.0f})">{escape(ylabel)}</text>'
    )

    if band is not None and x.size:
        lo, hi = (np.asarray(b, float) for b in band)
        pts = [f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, hi)]
        pts += [f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x[::-1], lo[::-1])]
        out.append(f'<polygon points="{" ".join(pts)}" fill="{PALETTE[0]}" fill-opacity="0.2" stroke="none"/>')

    if hline is not None:
        value, label = hline
        out.append(
            f'<line class="reference" x1="{L}" y1="{_fmt(py(value))}" x2="{R}" y2="{_fmt(py(value))}" '
            f'stroke="#555" stroke-dasharray="6,4"/>'
        )
        out.append(
            f'<text x="{R - 4}" y="{_fmt(py(value) - 5)}" text-anchor="end" font-family="sans-serif" font-size="11">{escape(label)}</text>'
        )

    for i, (s, v) in enumerate(zip(series, ys)):
        color = s.color or PALETTE[i % len(PALETTE)]
        ok = np.isfinite(v)
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x[ok], v[ok]))
        dash = ' stroke-dasharray="4,3"' if s.dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>')
        ly = T + 14 + 16 * i
        out.append(f'<line x1="{R - 150}" y1="{ly}" x2="{R - 130}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{R - 125}" y="{ly + 4}" font-family="sans-serif" font-size="11">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
