"""Dependency-free SVG figures: embedding scatter and metric-vs-parameter lines."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .embed import TRUE, Embedding

_PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
            "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
_W, _H, _PAD = 480, 360, 40


def _scale(v: np.ndarray, lo_px: float, hi_px: float) -> np.ndarray:
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi == lo:
        return np.full(v.shape, (lo_px + hi_px) / 2)
    return lo_px + (v - lo) / (hi - lo) * (hi_px - lo_px)


def _frame(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}"><rect width="100%" height="100%" fill="white"/>'
            f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>')
    return head + "".join(body) + "</svg>\n"


def scatter_svg(emb: Embedding, path: str | Path, title: str = "embedding") -> None:
    """Predicted windows as dots, true vectors as larger squares, coloured by source."""
    xs = _scale(emb.coords[:, 0], _PAD, _W - _PAD)
    ys = _scale(emb.coords[:, 1], _H - _PAD, _PAD)
    colour = {s: _PALETTE[k % len(_PALETTE)] for k, s in enumerate(sorted(set(emb.sources.tolist())))}
    dots, marks = [], []
    for x, y, s, kind in zip(xs, ys, emb.sources.tolist(), emb.kinds):
        c = colour[s]
        if kind == TRUE:
            marks.append(f'<rect x="{x - 5:.2f}" y="{y - 5:.2f}" width="10" height="10" '
                         f'fill="{c}" stroke="black"/>')
        else:
            dots.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{c}" fill-opacity="0.6"/>')
    Path(path).write_text(_frame(dots + marks, title))


def line_svg(xs, series: dict[str, list[float]], path: str | Path, title: str = "",
             xlabel: str = "", ylabel: str = "") -> None:
    """One polyline per named series over shared x values."""
    xs = np.asarray(xs, dtype=float)
    allv = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    lo, hi = float(np.nanmin(allv)), float(np.nanmax(allv))
    px = _scale(xs, _PAD, _W - _PAD)
    body = [f'<text x="{_W / 2}" y="{_H - 8}" text-anchor="middle" font-size="11">{escape(xlabel)}</text>',
            f'<text x="12" y="{_H / 2}" font-size="11" transform="rotate(-90 12 {_H / 2})">'
            f'{escape(ylabel)}</text>']
    for k, (name, vals) in enumerate(series.items()):
        v = np.asarray(vals, dtype=float)
        py = (_H - _PAD) - (v - lo) / ((hi - lo) or 1.0) * (_H - 2 * _PAD)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        c = _PALETTE[k % len(_PALETTE)]
        body.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="2"/>')
        body.append(f'<text x="{_W - _PAD}" y="{_PAD + 14 * k}" text-anchor="end" font-size="11" '
                    f'fill="{c}">{escape(name)}</text>')
    Path(path).write_text(_frame(body, title))
