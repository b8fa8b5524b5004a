"""Static SVG rendering of planar star sets."""

from xml.sax.saxutils import escape

import numpy as np

__all__ = ["render_svg", "write_svg", "corner_points"]

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
_SIZE = 480


def corner_points(S, min_turn_deg=20.0):
    """Boundary vertices where the polyline turns by more than ``min_turn_deg``."""
    V = S.vertices()
    keep = np.hypot(V[:, 0], V[:, 1]) > 0
    P = V[keep]
    if len(P) < 3:
        pts = list(P)
        if len(P) < len(V):
            pts.append(np.zeros(2))
        return np.array(pts).reshape(-1, 2)
    # polygon with the origin inserted where the set collapses onto it
    poly = []
    for k in range(len(V)):
        if keep[k]:
            poly.append(V[k])
        elif not poly or np.any(poly[-1] != 0):
            poly.append(np.zeros(2))
    if len(poly) > 1 and not np.any(poly[0]) and not np.any(poly[-1]):
        poly.pop()
    P = np.array(poly)
    prev = np.roll(P, 1, axis=0)
    nxt = np.roll(P, -1, axis=0)
    a = P - prev
    b = nxt - P
    na = np.hypot(*a.T)
    nb = np.hypot(*b.T)
    ok = (na > 0) & (nb > 0)
    cosang = np.where(ok, np.sum(a * b, axis=1) / np.where(ok, na * nb, 1.0), 1.0)
    turn = np.degrees(np.arccos(np.clip(cosang, -1, 1)))
    return P[turn > min_turn_deg]


def render_svg(sets, labels=None, axes=True, unit_circle=True, markers=True):
    """SVG markup overlaying the star sets with a legend.

    The view box covers the data bounds plus a 5% margin.
    """
    if not sets:
        raise ValueError("nothing to plot")
    labels = labels or [f"set {i + 1}" for i in range(len(sets))]
    polys = [S.vertices() for S in sets]
    pts = np.vstack(polys + [np.zeros((1, 2))])
    if unit_circle:
        pts = np.vstack([pts, [[1, 1], [-1, -1]]])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-12)
    margin = 0.05 * span
    lo = lo - margin
    hi = hi + margin
    w, h = hi - lo
    vb = f"{lo[0]:.6g} {-hi[1]:.6g} {w:.6g} {h:.6g}"
    stroke = span / 400
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vb}" '
        f'width="{_SIZE}" height="{_SIZE * h / w:.0f}">',
        f'<rect x="{lo[0]:.6g}" y="{-hi[1]:.6g}" width="{w:.6g}" height="{h:.6g}" fill="white"/>',
    ]
    if axes:
        out.append(f'<line x1="{lo[0]:.6g}" y1="0" x2="{hi[0]:.6g}" y2="0" '
                   f'stroke="#999" stroke-width="{stroke:.4g}"/>')
        out.append(f'<line x1="0" y1="{-hi[1]:.6g}" x2="0" y2="{-lo[1]:.6g}" '
                   f'stroke="#999" stroke-width="{stroke:.4g}"/>')
    if unit_circle:
        out.append(f'<circle cx="0" cy="0" r="1" fill="none" stroke="#bbb" '
                   f'stroke-dasharray="{4 * stroke:.4g}" stroke-width="{stroke:.4g}"/>')
    for i, (S, V, label) in enumerate(zip(sets, polys, labels)):
        color = _COLORS[i % len(_COLORS)]
        d = " ".join(f"{x:.6g},{-y:.6g}" for x, y in V)
        out.append(f'<polygon points="{d}" fill="{color}" fill-opacity="0.35" '
                   f'stroke="{color}" stroke-width="{stroke:.4g}"><title>{escape(label)}</title></polygon>')
        if markers:
            for x, y in corner_points(S):
                out.append(f'<circle cx="{x:.6g}" cy="{-y:.6g}" r="{3 * stroke:.4g}" fill="{color}"/>')
    if len(sets) > 1:
        fs = span / 25
        for i, label in enumerate(labels):
            color = _COLORS[i % len(_COLORS)]
            y = -hi[1] + margin + (i + 1) * 1.3 * fs
            x = lo[0] + margin
            out.append(f'<rect x="{x:.6g}" y="{y - 0.8 * fs:.6g}" width="{0.8 * fs:.6g}" '
                       f'height="{0.8 * fs:.6g}" fill="{color}" fill-opacity="0.6"/>')
            out.append(f'<text x="{x + 1.2 * fs:.6g}" y="{y:.6g}" font-size="{fs:.4g}" '
                       f'font-family="sans-serif">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(sets, path, **kwargs):
    with open(path, "w") as fh:
        fh.write(render_svg(sets, **kwargs))
    return path
