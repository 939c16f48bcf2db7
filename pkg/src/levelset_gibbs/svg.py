"""Minimal self-contained SVG output: polylines, bars and point markers.

Outputs are verification artifacts, not publication figures, so the
emitter sticks to primitives and has no plotting dependency.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["Series", "emit_svg"]

_W, _H = 640, 400
_MARGIN = 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#000000")


@dataclass
class Series:
    """One drawable series: kind is 'line', 'bars' or 'points'."""

    x: list
    y: list
    kind: str = "line"
    label: str = ""

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have equal length")
        if len(self.x) == 0:
            raise ValueError("series must be nonempty")
        if self.kind not in ("line", "bars", "points"):
            raise ValueError(f"unknown series kind {self.kind!r}")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    return [lo + span * i / (n - 1) for i in range(n)]


def emit_svg(series, path, title: str = "", xlabel: str = "", ylabel: str = ""):
    """Write the series to a standalone SVG file; returns the path."""
    series = list(series)
    if not series:
        raise ValueError("no series to draw")
    xs = [v for s in series for v in s.x]
    ys = [v for s in series for v in s.y]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(min(ys), 0.0), max(ys)
    if xhi <= xlo:
        xhi = xlo + 1.0
    if yhi <= ylo:
        yhi = ylo + 1.0
    pad_y = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad_y, yhi + pad_y

    def px(x):
        return _MARGIN + (x - xlo) / (xhi - xlo) * (_W - 2 * _MARGIN)

    def py(y):
        return _H - _MARGIN - (y - ylo) / (yhi - ylo) * (_H - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_W - 2 * _MARGIN}" '
        f'height="{_H - 2 * _MARGIN}" fill="none" stroke="#888"/>',
    ]
    if title:
        parts.append(f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{_W / 2:.1f}" y="{_H - 10}" text-anchor="middle" '
                     f'font-size="12">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="14" y="{_H / 2:.1f}" text-anchor="middle" '
                     f'font-size="12" transform="rotate(-90 14 {_H / 2:.1f})">'
                     f'{ylabel}</text>')
    for t in _ticks(xlo, xhi):
        parts.append(f'<text x="{px(t):.1f}" y="{_H - _MARGIN + 16}" '
                     f'text-anchor="middle" font-size="10">{t:.3g}</text>')
    for t in _ticks(ylo, yhi):
        parts.append(f'<text x="{_MARGIN - 6}" y="{py(t):.1f}" '
                     f'text-anchor="end" font-size="10">{t:.3g}</text>')

    for i, s in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        if s.kind == "line":
            pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.x, s.y))
            parts.append(f'<polyline points="{pts}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"/>')
        elif s.kind == "bars":
            if len(s.x) > 1:
                w = 0.9 * (px(s.x[1]) - px(s.x[0]))
            else:
                w = 10.0
            y0 = py(max(ylo, 0.0))
            for x, y in zip(s.x, s.y):
                top = py(y)
                parts.append(
                    f'<rect x="{px(x) - w / 2:.2f}" y="{min(top, y0):.2f}" '
                    f'width="{w:.2f}" height="{abs(y0 - top):.2f}" '
                    f'fill="{color}" fill-opacity="0.45"/>')
        else:  # points
            for x, y in zip(s.x, s.y):
                parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" '
                             f'r="4" fill="{color}"/>')
        if s.label:
            parts.append(f'<text x="{_W - _MARGIN - 4}" y="{_MARGIN + 14 + 14 * i}" '
                         f'text-anchor="end" font-size="11" fill="{color}">'
                         f'{s.label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
    return path
