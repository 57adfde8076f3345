"""Slow, independent reference implementations used to check the library."""

import math

import numpy as np

from delone.generators import TAU
from delone.words import sturmian_word


def gap_scan(xs, a, b):
    """Exact 1-D covering radius over [a, b]: the farthest point is an endpoint or a gap midpoint."""
    xs = np.sort(np.asarray(xs, dtype=float))
    mids = (xs[1:] + xs[:-1]) / 2
    cands = np.concatenate([[a, b], mids[(mids >= a) & (mids <= b)]])
    return float(np.abs(cands[:, None] - xs[None, :]).min(axis=1).max())


def brute_force_class_count(points, window, T, tol):
    """Translation classes of T-patches by all-pairs offset matching and union-find."""
    pts = np.asarray(points, dtype=float)
    centers = [i for i in range(len(pts)) if window.depth(pts[i])[0] >= T]
    patches = []
    for i in centers:
        off = pts - pts[i]
        off = off[np.linalg.norm(off, axis=1) < T - tol]
        patches.append(off)

    def same(a, b):
        if len(a) != len(b):
            return False
        d = np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)
        return bool((d.min(axis=1) <= tol).all() and (d.min(axis=0) <= tol).all())

    parent = list(range(len(patches)))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for a in range(len(patches)):
        for b in range(a + 1, len(patches)):
            if find(a) != find(b) and same(patches[a], patches[b]):
                parent[find(b)] = find(a)
    return len({find(i) for i in range(len(patches))})


def fibonacci_symbolic_count(T, m_lo=-600, m_hi=600):
    """N(T) for the Fibonacci set from interval symbols alone.

    Interval m -> m+1 has length tau^2/sqrt5 when the Sturmian symbol is 1
    and tau/sqrt5 otherwise.  The T-patch at point m is fixed by the symbols
    of the intervals reached before the accumulated length hits T.
    """
    long, short = TAU**2 / math.sqrt(5), TAU / math.sqrt(5)
    sym = sturmian_word(TAU, m_hi - m_lo, start=m_lo).symbols
    lengths = np.where(sym == 1, long, short)
    reach = int(T / short) + 2
    keys = set()
    for i in range(reach, len(sym) - reach):
        right, acc = [], 0.0
        for j in range(i, len(sym)):
            acc += lengths[j]
            if acc >= T - 1e-9:
                break
            right.append(int(sym[j]))
        left, acc = [], 0.0
        for j in range(i - 1, -1, -1):
            acc += lengths[j]
            if acc >= T - 1e-9:
                break
            left.append(int(sym[j]))
        keys.add((tuple(left), tuple(right)))
    return len(keys)


def lattice2d_covering_radius(basis):
    """Circumradius of the non-obtuse triangle of a Lagrange-reduced planar basis."""
    b1, b2 = (np.array(v, dtype=float) for v in basis)
    while True:
        if b1 @ b1 > b2 @ b2:
            b1, b2 = b2, b1
        mu = round(float(b1 @ b2) / float(b1 @ b1))
        if mu == 0:
            break
        b2 = b2 - mu * b1
    if b1 @ b2 < 0:
        b2 = -b2
    a, b, c = np.linalg.norm(b1), np.linalg.norm(b2), np.linalg.norm(b1 - b2)
    area = abs(b1[0] * b2[1] - b1[1] * b2[0]) / 2
    return float(a * b * c / (4 * area))


def random_planar_set(rng, max_points=200):
    """A window of Z^2 with random deletions and quantized jitter, so classes repeat."""
    from delone.core import Box, PointSample

    half = int(rng.integers(3, 7))
    g = np.arange(-half, half + 1)
    pts = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2).astype(float)
    pts = pts[rng.random(len(pts)) > rng.uniform(0.0, 0.4)]
    pts = pts + rng.choice([0.0, 0.25], size=pts.shape, p=[0.8, 0.2])
    pts = pts[: max_points]
    window = Box([-half - 0.5] * 2, [half + 0.5] * 2)
    return PointSample(pts, window)
