"""Spectrum decay reports: a CSV table and a small semilog SVG plot."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray

    @property
    def singular_values(self):
        return np.sqrt(self.eigenvalues)

    @property
    def cumulative_fraction(self):
        """Captured share of the retained energy; ends at exactly 1."""
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.size == 0:
            return lam
        c = np.cumsum(lam) / np.sum(lam)
        c[-1] = 1.0
        return np.maximum.accumulate(c)

    def rows(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        return [(m + 1, lam[m], self.singular_values[m], self.cumulative_fraction[m])
                for m in range(lam.size)]

    def to_csv(self, path):
        lines = ["m,lambda,sigma,cumulative_fraction"]
        lines += [f"{m},{lam:.17g},{sig:.17g},{cum:.17g}" for m, lam, sig, cum in self.rows()]
        Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))

    def to_svg(self, path, title="eigenvalue decay"):
        Path(path).write_bytes(svg_semilog(self.eigenvalues, title).encode("ascii"))


def svg_semilog(values, title="", width=480, height=320, margin=48):
    """Semilog-y polyline of positive ``values`` against their 1-based index."""
    vals = np.asarray(values, dtype=float)
    vals = vals[vals > 0]
    x0, y0, x1, y1 = margin, height - margin, width - margin // 2, margin // 2
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{width // 2}" y="{margin // 2 - 6 if margin > 24 else 12}" '
        f'text-anchor="middle" font-size="12">{_escape(title)}</text>',
    ]
    if vals.size:
        logs = np.log10(vals)
        lo, hi = np.floor(logs.min()), np.ceil(logs.max())
        if hi == lo:
            hi = lo + 1
        n = vals.size
        xs = x0 + (x1 - x0) * (np.arange(n) / max(n - 1, 1))
        ys = y0 - (y0 - y1) * (logs - lo) / (hi - lo)
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
        for dec in range(int(lo), int(hi) + 1):
            y = y0 - (y0 - y1) * (dec - lo) / (hi - lo)
            parts.append(f'<text x="{x0 - 4}" y="{y + 4:.2f}" text-anchor="end" '
                         f'font-size="10">1e{dec}</text>')
        parts.append(f'<text x="{x0}" y="{y0 + 16}" font-size="10">1</text>')
        parts.append(f'<text x="{x1}" y="{y0 + 16}" text-anchor="end" font-size="10">{n}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
