"""Static SVG 1.1 figures: point sets, and stripe bands with matched points.

Output depends only on the inputs (fixed number formatting, no timestamps),
so identical runs give identical bytes.
"""
from __future__ import annotations

import numpy as np

from .patternspace.patterns import PointSet
from .patternspace.region import to_float_vec

_HEAD = ('<?xml version="1.0" encoding="UTF-8"?>\n'
         '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
         'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
         '<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>\n')


def _f(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _View:
    def __init__(self, lo, hi, width: int, height: int, pad: int = 20):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.w, self.h, self.pad = width, height, pad
        span = np.maximum(self.hi - self.lo, 1e-12)
        self.sx = (width - 2 * pad) / span[0]
        self.sy = (height - 2 * pad) / span[1] if len(span) > 1 else 1.0

    def x(self, u: float) -> float:
        return self.pad + (u - self.lo[0]) * self.sx

    def y(self, v: float) -> float:
        return self.h - self.pad - (v - self.lo[1]) * self.sy


def points_svg(D: PointSet, lo=None, hi=None, width: int = 800) -> str:
    lo = np.asarray(D.region.lo if lo is None else lo, dtype=float)
    hi = np.asarray(D.region.hi if hi is None else hi, dtype=float)
    pts = D.coords[np.all((D.coords >= lo) & (D.coords <= hi), axis=1)]
    if D.dim == 1:
        view = _View(lo, hi, width, 80)
        out = [_HEAD.format(w=width, h=80),
               f'<line x1="{_f(view.x(lo[0]))}" y1="40" x2="{_f(view.x(hi[0]))}" y2="40" '
               f'stroke="#888" stroke-width="1"/>\n']
        out += [f'<circle cx="{_f(view.x(p[0]))}" cy="40" r="2.5" fill="black"/>\n' for p in pts]
    else:
        ratio = (hi[1] - lo[1]) / max(hi[0] - lo[0], 1e-12)
        height = int(round(40 + (width - 40) * ratio))
        view = _View(lo[:2], hi[:2], width, height)
        out = [_HEAD.format(w=width, h=height)]
        out += [f'<circle cx="{_f(view.x(p[0]))}" cy="{_f(view.y(p[1]))}" r="2" fill="black"/>\n'
                for p in pts]
    out.append("</svg>\n")
    return "".join(out)


def stripe_svg(D: PointSet, spec, x, matched: np.ndarray, lo=None, hi=None,
               width: int = 800, title: str | None = None) -> str:
    """Bands ``S(a, x, L1, L2)`` as shaded stripes, D in grey, matched points as dots."""
    xf = to_float_vec(x)
    a = np.asarray(spec.a, dtype=float)
    L1, L2 = float(spec.L1), float(spec.L2)
    if lo is None:
        ms_all = np.atleast_2d(matched).reshape(-1, D.dim)
        dist = np.sort(np.linalg.norm(ms_all - xf, axis=1)) if len(ms_all) else np.zeros(0)
        # frame the anchor and its nearest few returns
        near = float(dist[min(3, len(dist) - 1)]) if len(dist) > 1 else 0.0
        half = max(6 * L1, 1.1 * near)
        lo = np.maximum(xf - half, np.asarray(D.region.lo))
        hi = np.minimum(xf + half, np.asarray(D.region.hi))
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    inside = lambda P: P[np.all((P >= lo) & (P <= hi), axis=1)] if len(P) else P
    pts, ms = inside(D.coords), inside(np.atleast_2d(matched).reshape(-1, D.dim))
    if D.dim == 1:
        height = 120
        view = _View(lo, hi, width, height)
        out = [_HEAD.format(w=width, h=height)]
        k0 = int(np.floor((lo[0] - xf[0]) / L1)) - 1
        k1 = int(np.ceil((hi[0] - xf[0]) / L1)) + 1
        for k in range(k0, k1 + 1):
            c = xf[0] + k * L1
            left, right = max(c - L2, lo[0]), min(c + L2, hi[0])
            if right <= left:
                continue
            wpx = max((right - left) * view.sx, 1.0)
            out.append(f'<rect x="{_f(view.x(left))}" y="20" width="{_f(wpx)}" '
                       f'height="{height - 40}" fill="#9ecae1" fill-opacity="0.6"/>\n')
        out += [f'<circle cx="{_f(view.x(p[0]))}" cy="{height // 2}" r="2" fill="#777"/>\n'
                for p in pts]
        out += [f'<circle cx="{_f(view.x(p[0]))}" cy="{height // 2}" r="4" fill="#d62728"/>\n'
                for p in ms]
        out.append(f'<circle cx="{_f(view.x(xf[0]))}" cy="{height // 2}" r="5" fill="none" '
                   f'stroke="black" stroke-width="1.5"/>\n')
    else:
        ratio = (hi[1] - lo[1]) / max(hi[0] - lo[0], 1e-12)
        height = int(round(40 + (width - 40) * ratio))
        view = _View(lo[:2], hi[:2], width, height)
        out = [_HEAD.format(w=width, h=height)]
        corners = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        u = (corners - xf[:2]) @ a[:2]
        perp = np.array([-a[1], a[0]])
        t = (corners - xf[:2]) @ perp
        for k in range(int(np.floor(u.min() / L1)) - 1, int(np.ceil(u.max() / L1)) + 2):
            poly = []
            for s in (k * L1 - L2, k * L1 + L2):
                for tt in ((t.min(), t.max()) if s < k * L1 else (t.max(), t.min())):
                    p = xf[:2] + s * a[:2] + tt * perp
                    poly.append(f"{_f(view.x(p[0]))},{_f(view.y(p[1]))}")
            out.append(f'<polygon points="{" ".join(poly)}" fill="#9ecae1" '
                       f'fill-opacity="0.6"/>\n')
        out += [f'<circle cx="{_f(view.x(p[0]))}" cy="{_f(view.y(p[1]))}" r="1.5" fill="#777"/>\n'
                for p in pts]
        out += [f'<circle cx="{_f(view.x(p[0]))}" cy="{_f(view.y(p[1]))}" r="3.5" '
                f'fill="#d62728"/>\n' for p in ms]
    if title:
        out.append(f'<text x="{width // 2}" y="14" font-size="12" text-anchor="middle" '
                   f'font-family="sans-serif">{_escape(title)}</text>\n')
    out.append("</svg>\n")
    return "".join(out)


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
