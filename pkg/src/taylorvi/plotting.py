"""Static SVG plots of harness CSV files, written without any plotting library.

Three kinds are supported: ``energy_trace`` (energy error against time from
a trajectory CSV), ``orbit_xy`` (first two position components of a
trajectory CSV) and ``loglog`` (one or more convergence CSVs, one series
each).  Output is deterministic: identical input gives identical bytes.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Sequence, Union
from xml.sax.saxutils import escape

import numpy as np

from .harness import read_csv

__all__ = ["PLOT_KINDS", "SchemaError", "emit_plot", "render_svg"]

PLOT_KINDS = ("energy_trace", "orbit_xy", "loglog")

WIDTH, HEIGHT = 640, 420
MARGIN = 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


class SchemaError(ValueError):
    """The CSV columns do not fit the requested plot kind."""


def _columns(path, needed):
    header, rows, _ = read_csv(path)
    missing = [c for c in needed if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    idx = [header.index(c) for c in needed]
    data = np.array([[float(r[i]) for i in idx] for r in rows], dtype=float).reshape(-1, len(needed))
    return data.T


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


def _fmt(x):
    return f"{x:.3g}"


def render_svg(series, xlabel, ylabel, title="", logx=False, logy=False):
    """SVG text for ``series``, a list of ``(label, x, y)``.

    Log axes drop non-positive values; non-finite points are dropped too.
    """
    clean = []
    for label, x, y in series:
        x, y = np.asarray(x, float), np.asarray(y, float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logx:
            keep &= x > 0
        if logy:
            keep &= y > 0
        x, y = x[keep], y[keep]
        clean.append((label, np.log10(x) if logx else x, np.log10(y) if logy else y))
    allx = np.concatenate([s[1] for s in clean]) if clean else np.array([])
    ally = np.concatenate([s[2] for s in clean]) if clean else np.array([])
    x0, x1 = (float(allx.min()), float(allx.max())) if allx.size else (0.0, 1.0)
    y0, y1 = (float(ally.min()), float(ally.max())) if ally.size else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(v):
        return MARGIN + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="{MARGIN / 2:.1f}" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for v in _ticks(x0, x1):
        lab = _fmt(10**v) if logx else _fmt(v)
        out.append(f'<text x="{sx(v):.2f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" font-size="10">{lab}</text>')
    for v in _ticks(y0, y1):
        lab = _fmt(10**v) if logy else _fmt(v)
        out.append(f'<text x="{MARGIN - 6}" y="{sy(v) + 3:.2f}" text-anchor="end" font-size="10">{lab}</text>')
    out.append(f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    out.append(
        f'<text x="14" y="{HEIGHT / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {HEIGHT / 2:.1f})">{escape(ylabel)}</text>'
    )
    for i, (label, x, y) in enumerate(clean):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        out.append(
            f'<polyline class="series" data-label="{escape(label)}" fill="none" stroke="{color}" '
            f'stroke-width="1.2" points="{pts}"/>'
        )
        if len(clean) > 1:
            ly = MARGIN + 14 + 14 * i
            out.append(f'<text x="{WIDTH - MARGIN - 4}" y="{ly}" text-anchor="end" font-size="10" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(csv_paths: Union[str, os.PathLike, Sequence], kind: str, out=None) -> Path:
    """Render ``csv_paths`` as an SVG of ``kind`` and return the SVG path.

    ``loglog`` accepts several convergence CSVs, one series each, labelled
    by file stem.  ``out`` defaults to the first CSV with an ``.svg`` suffix.
    """
    if kind not in PLOT_KINDS:
        raise SchemaError(f"unknown plot kind {kind!r}; choose from {list(PLOT_KINDS)}")
    paths = [csv_paths] if isinstance(csv_paths, (str, os.PathLike)) else list(csv_paths)
    if not paths:
        raise ValueError("no CSV given")
    if kind != "loglog" and len(paths) != 1:
        raise SchemaError(f"{kind} takes exactly one CSV")
    paths = [Path(p) for p in paths]
    if kind == "energy_trace":
        t, e = _columns(paths[0], ["t", "energy_error"])
        svg = render_svg([(paths[0].stem, t, e)], "t", "energy error", paths[0].stem)
    elif kind == "orbit_xy":
        x, y = _columns(paths[0], ["q0", "q1"])
        svg = render_svg([(paths[0].stem, x, y)], "q0", "q1", paths[0].stem)
    else:
        series = []
        for p in paths:
            h, err = _columns(p, ["h", "global_error"])
            series.append((p.stem, h, err))
        svg = render_svg(series, "h", "global error", "convergence", logx=True, logy=True)
    out = paths[0].with_suffix(".svg") if out is None else Path(out)
    out.write_text(svg)
    return out

