"""Deterministic SVG pictures of numerical-range tubes and selections."""

import numpy as np

from .algebra import Conflict, f_trace, y_set
from .errors import RenderError
from .psi import block_ranges, psi

PANEL = 240
MARGIN = 24
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def _f(x):
    return f"{x:.3f}"


def default_points(algebra, count=5):
    n = algebra.n_points
    if n <= count:
        return list(range(n))
    return sorted({int(round(x)) for x in np.linspace(0, n - 1, count)})


class _View:
    """Maps the complex plane box onto a square panel."""

    def __init__(self, zs):
        zs = np.asarray(zs, dtype=np.complex128)
        lo_x, hi_x = zs.real.min(), zs.real.max()
        lo_y, hi_y = zs.imag.min(), zs.imag.max()
        span = max(hi_x - lo_x, hi_y - lo_y, 1e-6) * 1.15
        self.cx = 0.5 * (lo_x + hi_x)
        self.cy = 0.5 * (lo_y + hi_y)
        self.scale = (PANEL - 2 * MARGIN) / span

    def xy(self, z, ox):
        x = ox + PANEL / 2 + (z.real - self.cx) * self.scale
        y = PANEL / 2 + 10 - (z.imag - self.cy) * self.scale
        return x, y


def _poly(view, verts, ox):
    return " ".join(f"{_f(x)},{_f(y)}" for x, y in (view.xy(z, ox) for z in verts))


def _shape(view, region, ox, style):
    verts = region.vertices()
    if len(verts) == 0:
        return ""
    if region.diameter() * view.scale < 1.0:
        x, y = view.xy(complex(np.mean(verts)), ox)
        return f'<circle cx="{_f(x)}" cy="{_f(y)}" r="2.5" {style}/>'
    return f'<polygon points="{_poly(view, verts, ox)}" {style}/>'


def _cross(view, z, ox, color):
    x, y = view.xy(z, ox)
    s = 4
    return (f'<path d="M{_f(x - s)},{_f(y - s)} L{_f(x + s)},{_f(y + s)} '
            f'M{_f(x - s)},{_f(y + s)} L{_f(x + s)},{_f(y - s)}" stroke="{color}" '
            f'stroke-width="1.5" fill="none"/>')


def render(algebra, element, points=None, selection=None, require_selection=False):
    """SVG (bytes) with one panel per chosen point and, if given, the selection path.

    Each panel fills the maximal-block numerical ranges (one hue per block),
    outlines psi, marks the trace pin with a cross and the selection value
    with a dot.  Output depends only on the inputs.
    """
    if element.algebra.shape() != algebra.shape():
        raise RenderError("element does not match the algebra")
    if require_selection and selection is None:
        raise RenderError("a selection path was requested but none is available")
    if points is None:
        points = default_points(algebra)
    points = list(points)
    for p in points:
        if not 0 <= p < algebra.n_points:
            raise RenderError(f"point {p} is outside the base")
    if not points:
        raise RenderError("no points to draw")
    sel = None if selection is None else np.asarray(selection, dtype=np.complex128)
    ys = set(y_set(algebra))

    data = []
    allz = []
    for p in points:
        ranges = block_ranges(element, p)
        region = psi(element, p)
        pin = f_trace(element, p) if p in ys else None
        data.append((p, ranges, region, pin))
        for w in ranges:
            allz.extend(w.vertices())
        if pin is not None and not isinstance(pin, Conflict):
            allz.append(pin)
    if sel is not None:
        allz.extend(sel)
    view = _View(allz)

    panels = len(points) + (1 if sel is not None else 0)
    width = panels * PANEL
    height = PANEL + 20
    t = algebra.base.coords
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>']
    for k, (p, ranges, region, pin) in enumerate(data):
        ox = k * PANEL
        label = f"t = {t[p]:.3f}" if algebra.base.is_path else f"point {p}"
        out.append(f'<g id="panel-{p}">')
        out.append(f'<rect x="{ox + 2}" y="2" width="{PANEL - 4}" height="{height - 4}" '
                   f'fill="none" stroke="#cccccc"/>')
        out.append(f'<text x="{ox + 8}" y="16" font-family="monospace" font-size="11">{label}</text>')
        for j, w in enumerate(ranges):
            color = PALETTE[j % len(PALETTE)]
            out.append(_shape(view, w, ox, f'fill="{color}" fill-opacity="0.3" stroke="{color}"'))
        if not region.is_empty:
            out.append(_shape(view, region, ox,
                              'fill="none" stroke="#000000" stroke-width="1.5" stroke-dasharray="4,2"'))
        if isinstance(pin, Conflict):
            for v in pin.values:
                out.append(_cross(view, complex(v), ox, "#d62728"))
        elif pin is not None:
            out.append(_cross(view, complex(pin), ox, "#000000"))
        if sel is not None:
            x, y = view.xy(sel[p], ox)
            out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="3" fill="#000000"/>')
        out.append("</g>")
    if sel is not None:
        ox = len(points) * PANEL
        out.append('<g id="selection">')
        out.append(f'<rect x="{ox + 2}" y="2" width="{PANEL - 4}" height="{height - 4}" '
                   f'fill="none" stroke="#cccccc"/>')
        out.append(f'<text x="{ox + 8}" y="16" font-family="monospace" font-size="11">selection</text>')
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in (view.xy(z, ox) for z in sel))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#000000" stroke-width="1.2"/>')
        for p in points:
            x, y = view.xy(sel[p], ox)
            out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="2.5" fill="#d62728"/>')
        out.append("</g>")
    out.append("</svg>")
    return ("\n".join(s for s in out if s) + "\n").encode("utf-8")
