"""Exact polyline distances for the no-crossing and no-return checks."""

import numpy as np
from scipy.spatial import cKDTree


def segment_distances(p0, p1, q0, q1):
    """Vectorised minimum distance between 2D segments ``p0p1`` and ``q0q1`` (row-wise)."""
    d1, d2, r = p1 - p0, q1 - q0, p0 - q0
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, r)
    c = np.einsum("ij,ij->i", d1, r)
    b = np.einsum("ij,ij->i", d1, d2)
    den = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(den > 1e-30, np.clip((b * f - c * e) / den, 0, 1), 0.0)
        t = np.where(e > 0, (b * s + f) / e, 0.0)
        s = np.where(t < 0, np.where(a > 0, np.clip(-c / a, 0, 1), 0.0), s)
        s = np.where(t > 1, np.where(a > 0, np.clip((b - c) / a, 0, 1), 0.0), s)
    t = np.clip(t, 0, 1)
    diff = p0 + d1 * s[:, None] - (q0 + d2 * t[:, None])
    return np.hypot(diff[:, 0], diff[:, 1])


def _segments(pts):
    return pts[:-1], pts[1:]


def min_polyline_distance(a, b, keep_pair=None, probe=1e-3):
    """Minimum distance between polylines ``a`` and ``b`` (arrays of shape (n, 2)).

    Only segment pairs whose midpoints are within their half-lengths plus
    ``probe`` are evaluated exactly; any pair closer than ``probe`` is among them.
    ``keep_pair(i, j)`` (vectorised) can exclude pairs.  Returns ``inf`` when no
    pair lies within ``probe``.
    """
    a0, a1 = _segments(np.asarray(a, float))
    b0, b1 = _segments(np.asarray(b, float))
    if len(a0) == 0 or len(b0) == 0:
        return np.inf
    ma, mb = 0.5 * (a0 + a1), 0.5 * (b0 + b1)
    la = 0.5 * np.hypot(*(a1 - a0).T)
    lb = 0.5 * np.hypot(*(b1 - b0).T)
    tree = cKDTree(mb)
    best = np.inf
    for i, cand in enumerate(tree.query_ball_point(ma, la + lb.max() + probe)):
        if not cand:
            continue
        j = np.array(cand)
        if keep_pair is not None:
            j = j[keep_pair(i, j)]
            if len(j) == 0:
                continue
        d = segment_distances(np.repeat(a0[i:i + 1], len(j), 0), np.repeat(a1[i:i + 1], len(j), 0), b0[j], b1[j])
        best = min(best, float(d.min()))
    return best


def phase_pieces(orbit, center=None, exclude_radius=0.0):
    """Split an orbit into runs of constant epsilon, dropping samples near ``center``."""
    keep = np.ones(len(orbit.x), bool)
    keep[: orbit.n_prefix] = False
    if center is not None:
        keep &= np.hypot(orbit.x - center[0], orbit.y - center[1]) > exclude_radius
    pieces, start = [], None
    for i in range(len(keep) + 1):
        ok = i < len(keep) and keep[i] and (start is None or orbit.eps[i] == orbit.eps[start])
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if i - start > 1:
                pieces.append((int(orbit.eps[start]), np.column_stack([orbit.x[start:i], orbit.y[start:i]]),
                               orbit.s[start:i]))
            start = i if i < len(keep) and keep[i] else None
    return pieces


def min_cross_distance(o1, o2, center=None, exclude_radius=0.0):
    """Minimum same-epsilon distance between two orbits' sample polylines."""
    best = np.inf
    for e1, p1, _ in phase_pieces(o1, center, exclude_radius):
        for e2, p2, _ in phase_pieces(o2, center, exclude_radius):
            if e1 == e2:
                best = min(best, min_polyline_distance(p1, p2))
    return best


def min_return_distance(orbit, gap=1.0, center=None, exclude_radius=0.0):
    """Minimum distance between parts of one orbit more than ``gap`` apart in arc length."""
    pieces = phase_pieces(orbit, center, exclude_radius)
    best = np.inf
    for k, (e1, p1, s1) in enumerate(pieces):
        m1 = 0.5 * (s1[:-1] + s1[1:])
        for e2, p2, s2 in pieces[k:]:
            if e1 != e2:
                continue
            m2 = 0.5 * (s2[:-1] + s2[1:])
            best = min(best, min_polyline_distance(p1, p2, keep_pair=lambda i, j: np.abs(m2[j] - m1[i]) > gap))
    return best
