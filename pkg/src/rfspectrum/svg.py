"""Minimal SVG plotting: bars, polylines and scatter points on shared axes."""
from __future__ import annotations

from html import escape
from pathlib import Path

import numpy as np

PALETTE = ("#4a6fd1", "#d14a4a", "#3a9a5b", "#c78a1e", "#7a4ac7", "#333333")


class Figure:
    def __init__(self, title: str = "", width: int = 640, height: int = 400, margin: int = 50):
        self.title = title
        self.width, self.height, self.margin = width, height, margin
        self.layers = []
        self._legend = []

    def bars(self, edges, heights, label="", color=None, opacity=0.55):
        self.layers.append(("bars", np.asarray(edges, float), np.asarray(heights, float), color, opacity))
        self._legend.append((label, color))
        return self

    def line(self, x, y, label="", color=None, dashed=False):
        self.layers.append(("line", np.asarray(x, float), np.asarray(y, float), color, dashed))
        self._legend.append((label, color))
        return self

    def scatter(self, x, y, label="", color=None, radius=2.5):
        self.layers.append(("scatter", np.asarray(x, float), np.asarray(y, float), color, radius))
        self._legend.append((label, color))
        return self

    def _bounds(self):
        xs, ys = [], []
        for kind, a, b, *_ in self.layers:
            if kind == "bars":
                xs += [a.min(), a.max()]
                ys += [0.0, b.max()]
            else:
                xs += [a.min(), a.max()]
                ys += [b.min(), b.max()]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.05 * (y1 - y0)
        return x0, x1, y0 - (pad if y0 < 0 else 0), y1 + pad

    def render(self) -> str:
        W, H, m = self.width, self.height, self.margin
        x0, x1, y0, y1 = self._bounds()

        def sx(v):
            return m + (np.asarray(v) - x0) / (x1 - x0) * (W - 2 * m)

        def sy(v):
            return H - m - (np.asarray(v) - y0) / (y1 - y0) * (H - 2 * m)

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
               f'<rect width="{W}" height="{H}" fill="white"/>',
               f'<text x="{W / 2}" y="{m / 2}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="14">{escape(self.title)}</text>',
               f'<line x1="{m}" y1="{H - m}" x2="{W - m}" y2="{H - m}" stroke="black"/>',
               f'<line x1="{m}" y1="{m}" x2="{m}" y2="{H - m}" stroke="black"/>']
        for tick in np.linspace(x0, x1, 5):
            out.append(f'<text x="{sx(tick):.1f}" y="{H - m + 16}" text-anchor="middle" '
                       f'font-family="sans-serif" font-size="10">{tick:.3g}</text>')
        for tick in np.linspace(y0, y1, 5):
            out.append(f'<text x="{m - 6}" y="{sy(tick):.1f}" text-anchor="end" '
                       f'font-family="sans-serif" font-size="10">{tick:.3g}</text>')
        for i, (kind, a, b, color, extra) in enumerate(self.layers):
            color = color or PALETTE[i % len(PALETTE)]
            if kind == "bars":
                for left, right, h in zip(a[:-1], a[1:], b):
                    if h <= 0:
                        continue
                    out.append(f'<rect x="{sx(left):.2f}" y="{sy(h):.2f}" width="{max(sx(right) - sx(left) - 0.5, 0.5):.2f}" '
                               f'height="{sy(0) - sy(h):.2f}" fill="{color}" fill-opacity="{extra}"/>')
            elif kind == "line":
                pts = " ".join(f"{u:.2f},{v:.2f}" for u, v in zip(sx(a), sy(b)))
                dash = ' stroke-dasharray="5,3"' if extra else ""
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.3"{dash}/>')
            else:
                for u, v in zip(sx(a), sy(b)):
                    out.append(f'<circle cx="{u:.2f}" cy="{v:.2f}" r="{extra}" fill="{color}"/>')
        y = m + 6
        for i, (label, color) in enumerate(self._legend):
            if not label:
                continue
            color = color or PALETTE[i % len(PALETTE)]
            out.append(f'<rect x="{W - m - 150}" y="{y}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{W - m - 135}" y="{y + 9}" font-family="sans-serif" font-size="11">'
                       f'{escape(label)}</text>')
            y += 16
        out.append("</svg>")
        return "\n".join(out)

    def save(self, path, comments=()) -> Path:
        path = Path(path)
        header = "".join(f"<!-- {escape(c)} -->\n" for c in comments)
        path.write_text(header + self.render())
        return path
