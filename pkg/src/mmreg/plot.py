"""Accuracy-vs-PSNR curves as a bare SVG, one polyline per algorithm."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .evaluate import SweepResult

_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
W, H, PAD = 640, 420, 60


def accuracy_svg(results: Sequence[SweepResult], title: str = "registration accuracy") -> str:
    pts: dict[str, list[tuple[float, float]]] = {}
    for r in results:
        if r.psnr_db is not None and math.isfinite(r.std_err_px):
            pts.setdefault(r.algorithm, []).append((r.psnr_db, r.std_err_px))
    xs = [x for p in pts.values() for x, _ in p] or [0.0, 1.0]
    ys = [y for p in pts.values() for _, y in p] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y1 = max(ys) * 1.05 or 1.0
    if x1 == x0:
        x1 = x0 + 1.0

    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (W - 2 * PAD)

    def sy(y):
        return H - PAD - y / y1 * (H - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 15}" text-anchor="middle" font-size="13">PSNR (dB)</text>',
        f'<text x="16" y="{H / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {H / 2})">std of error (px)</text>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y1 * i / 4
        out.append(f'<text x="{sx(xv):.1f}" y="{H - PAD + 18}" text-anchor="middle" font-size="11">{xv:g}</text>')
        out.append(f'<text x="{PAD - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end" font-size="11">{yv:.3g}</text>')
    for k, (name, p) in enumerate(pts.items()):
        colour = _COLOURS[k % len(_COLOURS)]
        p = sorted(p)
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in p)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{coords}"/>')
        ly = PAD + 16 * k
        out.append(f'<line x1="{W - PAD - 130}" y1="{ly}" x2="{W - PAD - 110}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{W - PAD - 104}" y="{ly + 4}" font-size="12">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_accuracy_svg(path, results: Sequence[SweepResult], title: str = "registration accuracy") -> None:
    Path(path).write_text(accuracy_svg(results, title), encoding="utf-8", newline="\n")
