"""Static SVG rendering of persistence diagrams and Euler curves.

Output is plain text built from fixed-precision numbers, so identical input
gives byte-identical files.
"""

import math

from .persistence import PersistenceDiagram

__all__ = ["render_svg"]

PANEL = 220
PAD = 34
STRIP = 16  # height of the essential-class strip above the plot area
GAP = 12


def _f(x):
    return f"{x:.2f}"


def _range(values):
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if hi - lo < 1e-12:
        return lo - 0.5, hi + 0.5
    return lo, hi


class _Canvas:
    def __init__(self):
        self.parts = []

    def add(self, s):
        self.parts.append(s)

    def text(self, x, y, s, size=10, anchor="middle"):
        self.add(f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}">{s}</text>')

    def line(self, x1, y1, x2, y2, stroke="#000", dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" stroke="{stroke}"{extra}/>')


def _diagram_panel(c, x0, y0, D, title):
    lo, hi = _range(D.points.ravel().tolist())
    size = PANEL - 2 * PAD
    left, top = x0 + PAD, y0 + PAD + STRIP
    bottom = top + size

    def sx(v):
        return left + (v - lo) / (hi - lo) * size

    def sy(v):
        return bottom - (v - lo) / (hi - lo) * size

    c.text(x0 + PANEL / 2, y0 + 14, title, size=11)
    c.add(f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(size)}" height="{_f(size)}" fill="none" stroke="#000"/>')
    c.line(left, top - STRIP + 2, left + size, top - STRIP + 2, stroke="#999")
    c.text(left - 4, top - STRIP / 2 + 3, "inf", size=8, anchor="end")
    c.line(sx(lo), sy(lo), sx(hi), sy(hi), stroke="#888", dash="4 3")
    c.text(left + size / 2, bottom + 24, "birth")
    c.add(f'<text x="{_f(left - 22)}" y="{_f(top + size / 2)}" font-size="10" text-anchor="middle" '
          f'transform="rotate(-90 {_f(left - 22)} {_f(top + size / 2)})">death</text>')
    c.text(left, bottom + 12, f"{lo:.3g}", size=8)
    c.text(left + size, bottom + 12, f"{hi:.3g}", size=8)
    for b, d in D.points:
        if math.isinf(d):
            c.add(f'<circle cx="{_f(sx(b))}" cy="{_f(top - STRIP + 2)}" r="3" fill="#c0392b"/>')
        else:
            c.add(f'<circle cx="{_f(sx(b))}" cy="{_f(sy(d))}" r="2.5" fill="#2c3e50"/>')


def _euler_panel(c, x0, y0, curve, title):
    rs = [r for r, _ in curve]
    chis = [v for _, v in curve]
    r_lo, r_hi = _range(rs)
    c_lo, c_hi = _range([float(v) for v in chis])
    size = PANEL - 2 * PAD
    left, top = x0 + PAD, y0 + PAD + STRIP
    bottom = top + size

    def sx(v):
        return left + (v - r_lo) / (r_hi - r_lo) * size

    def sy(v):
        return bottom - (v - c_lo) / (c_hi - c_lo) * size

    c.text(x0 + PANEL / 2, y0 + 14, title, size=11)
    c.add(f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(size)}" height="{_f(size)}" fill="none" stroke="#000"/>')
    c.text(left + size / 2, bottom + 24, "r")
    c.text(left - 4, top + 8, f"{c_hi:.3g}", size=8, anchor="end")
    c.text(left - 4, bottom, f"{c_lo:.3g}", size=8, anchor="end")
    if curve:
        pts = []
        for i, (r, v) in enumerate(curve):
            if i:
                pts.append(f"{_f(sx(r))},{_f(sy(chis[i - 1]))}")
            pts.append(f"{_f(sx(r))},{_f(sy(v))}")
        pts.append(f"{_f(left + size)},{_f(sy(chis[-1]))}")
        c.add(f'<polyline points="{" ".join(pts)}" fill="none" stroke="#2471a3"/>')


def render_svg(obj):
    """SVG text for a :class:`PersistenceDiagram` or a scan result.

    A scan result gets one row per flat: a diagram panel per degree, then
    the Euler curve when present.
    """
    rows = []
    if isinstance(obj, PersistenceDiagram):
        rows.append([("diagram", obj, f"degree {obj.degree}")])
    else:
        for i, diagrams in enumerate(obj.diagrams):
            row = [("diagram", D, f"flat {i}, degree {D.degree}") for D in diagrams]
            if obj.euler_curves is not None:
                row.append(("euler", obj.euler_curves[i], f"flat {i}, Euler curve"))
            rows.append(row)
    cols = max((len(r) for r in rows), default=1)
    width = cols * (PANEL + GAP) + GAP
    height = max(len(rows), 1) * (PANEL + GAP) + GAP
    c = _Canvas()
    c.add(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">')
    c.add(f'<rect width="{width}" height="{height}" fill="#fff"/>')
    for i, row in enumerate(rows):
        for j, (kind, payload, title) in enumerate(row):
            x0 = GAP + j * (PANEL + GAP)
            y0 = GAP + i * (PANEL + GAP)
            if kind == "diagram":
                _diagram_panel(c, x0, y0, payload, title)
            else:
                _euler_panel(c, x0, y0, payload, title)
    c.add("</svg>")
    return "\n".join(c.parts) + "\n"
