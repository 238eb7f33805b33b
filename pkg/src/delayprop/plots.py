"""Minimal deterministic SVG charts for sweep curves and likelihood
histograms. Hand-rolled so that identical inputs produce byte-identical
files, which the CLI determinism contract requires."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

WIDTH, HEIGHT = 640, 400
MARGIN = 48
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def line_chart(series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
               title: str, x_label: str, y_label: str,
               log_x: bool = False) -> str:
    """SVG polyline chart; one series per label."""
    xs_all, ys_all = [], []
    for xs, ys in series.values():
        xs_all.extend(math.log10(x) if log_x else x for x in xs)
        ys_all.extend(ys)
    if not xs_all:
        raise ValueError("no data to plot")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x: float) -> float:
        x = math.log10(x) if log_x else x
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

    def py(y: float) -> float:
        return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

    parts = [_header(title)]
    parts.append(_axes(x_label, y_label, x_lo, x_hi, y_lo, y_hi, log_x))
    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" '
                     f'points="{points}"/>')
        for x, y in zip(xs, ys):
            parts.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" '
                         f'r="3" fill="{color}"/>')
        parts.append(f'<text x="{WIDTH - MARGIN + 4}" y="{_fmt(py(ys[-1]))}" '
                     f'font-size="11" fill="{color}">{_esc(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def histogram_chart(samples: Mapping[str, Sequence[float]], title: str,
                    x_label: str, n_bins: int = 30) -> str:
    """Overlaid frequency histograms with shared binning."""
    values = [v for s in samples.values() for v in s]
    if not values:
        raise ValueError("no data to plot")
    lo, hi = min(values), max(values)
    if hi == lo:
        hi = lo + 1.0
    width = (hi - lo) / n_bins

    counted = {}
    peak = 1
    for label, s in samples.items():
        counts = [0] * n_bins
        for v in s:
            k = min(int((v - lo) / width), n_bins - 1)
            counts[k] += 1
        counted[label] = counts
        peak = max(peak, max(counts))

    def px(i: float) -> float:
        return MARGIN + i / n_bins * (WIDTH - 2 * MARGIN)

    def py(c: float) -> float:
        return HEIGHT - MARGIN - c / peak * (HEIGHT - 2 * MARGIN)

    parts = [_header(title)]
    parts.append(_axes(x_label, "count", lo, hi, 0, peak, False))
    for i, (label, counts) in enumerate(counted.items()):
        color = PALETTE[i % len(PALETTE)]
        for k, c in enumerate(counts):
            if c == 0:
                continue
            parts.append(
                f'<rect x="{_fmt(px(k))}" y="{_fmt(py(c))}" '
                f'width="{_fmt(px(k + 1) - px(k))}" '
                f'height="{_fmt(py(0) - py(c))}" fill="{color}" '
                f'fill-opacity="0.45"/>')
        parts.append(f'<text x="{MARGIN + 8}" y="{MARGIN + 14 * (i + 1)}" '
                     f'font-size="11" fill="{color}">{_esc(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def _header(title: str) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n'
            f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" '
            f'font-size="14">{_esc(title)}</text>')


def _axes(x_label: str, y_label: str, x_lo: float, x_hi: float,
          y_lo: float, y_hi: float, log_x: bool) -> str:
    x_note = " (log scale)" if log_x else ""
    return (
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>\n'
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>\n'
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-size="12">{_esc(x_label)}{x_note} '
        f'[{x_lo:.4g} .. {x_hi:.4g}]</text>\n'
        f'<text x="14" y="{HEIGHT // 2}" font-size="12" '
        f'transform="rotate(-90 14 {HEIGHT // 2})" text-anchor="middle">'
        f'{_esc(y_label)} [{y_lo:.4g} .. {y_hi:.4g}]</text>')


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))
