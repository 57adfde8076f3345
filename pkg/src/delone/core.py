"""Point/region primitives, finite samples of infinite point sets, Delone constants.

A :class:`PointSample` is a finite list of points together with the window
it faithfully represents.  All radius-``T`` computations in this package use
only centers whose closed ball of radius ``T`` lies inside that window.
"""

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.spatial import cKDTree

from ._io import dumps, fmt

DEFAULT_TOL = 1e-9
MAX_GRID_DIM = 8


class Interval(NamedTuple):
    """Closed bracket ``[lo, hi]`` around a quantity that is not computed exactly."""

    lo: float
    hi: float

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def exact(self):
        return self.lo == self.hi


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or not lo:
            raise ValueError("box corners must have the same positive dimension")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box requires lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def bounds(self):
        return np.array(self.lo), np.array(self.hi)

    @property
    def inradius(self):
        return min(b - a for a, b in zip(self.lo, self.hi)) / 2

    @property
    def center(self):
        lo, hi = self.bounds()
        return (lo + hi) / 2

    def depth(self, points):
        """Distance from each point to the complement of the box (negative outside)."""
        p = np.atleast_2d(points)
        lo, hi = self.bounds()
        return np.minimum(p - lo, hi - p).min(axis=1)

    def contains(self, points, slack=0.0):
        return self.depth(points) >= -slack

    def shrink(self, d):
        lo, hi = self.bounds()
        return Box(lo + d, hi - d)

    def grow(self, d):
        return self.shrink(-d)

    def project(self, points):
        lo, hi = self.bounds()
        return np.clip(points, lo, hi)

    def cells_meet(self, centers, half):
        lo, hi = self.bounds()
        mid, rad = (lo + hi) / 2, (hi - lo) / 2
        return np.all(np.abs(centers - mid) <= half + rad, axis=1)

    def to_dict(self):
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        if not c:
            raise ValueError("ball center must have positive dimension")
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center)

    def bounds(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    @property
    def inradius(self):
        return self.radius

    def depth(self, points):
        p = np.atleast_2d(points)
        return self.radius - np.linalg.norm(p - np.array(self.center), axis=1)

    def contains(self, points, slack=0.0):
        return self.depth(points) >= -slack

    def shrink(self, d):
        return Ball(self.center, self.radius - d)

    def grow(self, d):
        return Ball(self.center, self.radius + d)

    def project(self, points):
        c = np.array(self.center)
        v = points - c
        norm = np.linalg.norm(v, axis=1)
        scale = np.minimum(1.0, self.radius / np.where(norm > 0, norm, 1.0))
        return c + v * scale[:, None]

    def cells_meet(self, centers, half):
        c = np.array(self.center)
        nearest = np.clip(c, centers - half, centers + half)
        return np.linalg.norm(nearest - c, axis=1) <= self.radius

    def to_dict(self):
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


Region = Union[Box, Ball]


def region_from_dict(d):
    kind = d.get("kind")
    if kind == "box":
        return Box(d["lo"], d["hi"])
    if kind == "ball":
        return Ball(d["center"], d["radius"])
    raise ValueError(f"unknown region kind {kind!r}")


# ---------------------------------------------------------------------------
# samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointSample:
    """Finite piece ``X ∩ window`` of a point set.

    Args:
        points: array of shape ``(m, n)``.
        window: the region the sample faithfully covers.
        source: free-form id of the generator that produced the sample.
        tol: coordinate equivalence tolerance.
        declared_r: packing radius promised by the source, checked on construction.
    """

    points: np.ndarray
    window: Region
    source: str = ""
    tol: float = DEFAULT_TOL
    declared_r: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, self.window.dim)
        if pts.ndim != 2 or (len(pts) and pts.shape[1] != self.window.dim):
            raise ValueError("points must be an (m, n) array matching the window dimension")
        if len(pts) == 0:
            pts = pts.reshape(0, self.window.dim)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if len(pts) and not np.all(self.window.contains(pts, slack=self.tol)):
            raise ValueError("all sample points must lie in the window")
        if self.declared_r is not None and len(pts) >= 2:
            if min_pairwise_distance(self) < 2 * self.declared_r - self.tol:
                raise ValueError("points closer than twice the declared packing radius")

    def __len__(self):
        return len(self.points)

    @property
    def dim(self):
        return self.window.dim

    @cached_property
    def tree(self):
        return cKDTree(self.points)

    def index_of(self, point):
        """Index of the sample point within ``tol`` of ``point``, or None."""
        if not len(self):
            return None
        d, i = self.tree.query(np.asarray(point, dtype=float))
        return int(i) if d <= self.tol else None

    def margin_valid(self, T):
        """Indices of points whose closed ball of radius ``T`` lies inside the window."""
        return np.flatnonzero(self.window.depth(self.points) >= T)

    def restrict(self, region):
        keep = region.contains(self.points)
        return PointSample(self.points[keep], region, self.source, self.tol, self.declared_r)

    def scaled(self, s):
        w = self.window
        if isinstance(w, Box):
            win = Box(np.array(w.lo) * s, np.array(w.hi) * s)
        else:
            win = Ball(np.array(w.center) * s, w.radius * s)
        r = None if self.declared_r is None else self.declared_r * s
        return PointSample(self.points * s, win, self.source, self.tol * s, r)

    # serialization -------------------------------------------------------

    def to_dict(self):
        return {
            "dim": self.dim,
            "tol": self.tol,
            "source": self.source,
            "window": self.window.to_dict(),
            "points": self.points.tolist(),
            **({"meta": self.meta} if self.meta else {}),
        }

    def to_json(self, indent=2):
        return dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d):
        window = region_from_dict(d["window"])
        pts = np.array(d["points"], dtype=float).reshape(-1, int(d["dim"]))
        return cls(pts, window, d.get("source", ""), float(d.get("tol", DEFAULT_TOL)), meta=d.get("meta", {}))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_csv(self):
        out = io.StringIO()
        out.write("# window: " + dumps(self.window.to_dict(), indent=0) + "\n")
        out.write(f"# tol: {fmt(self.tol)}\n")
        out.write(f"# source: {self.source}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(self.dim)])
        for p in self.points:
            w.writerow([fmt(v) for v in p])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text):
        meta, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
            elif line.strip():
                rows.append(line)
        body = list(csv.reader(rows))
        if "window" not in meta:
            raise ValueError("CSV sample needs a '# window:' header line")
        window = region_from_dict(json.loads(meta["window"]))
        pts = np.array([[float(v) for v in row] for row in body[1:]], dtype=float)
        return cls(
            pts.reshape(-1, window.dim),
            window,
            meta.get("source", ""),
            float(meta.get("tol", DEFAULT_TOL)),
        )


@dataclass(frozen=True)
class DeloneConstants:
    r: float
    R: float

    def __post_init__(self):
        if not 0 < self.r <= self.R:
            raise ValueError(f"Delone constants need 0 < r <= R, got r={self.r}, R={self.R}")

    @property
    def kappa(self):
        return self.R / self.r

    def to_dict(self):
        return {"r": self.r, "R": self.R, "kappa": self.kappa}


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


def min_pairwise_distance(sample):
    """Smallest distance between two distinct sample points."""
    if len(sample) < 2:
        raise ValueError("insufficient points: need at least 2")
    d, _ = sample.tree.query(sample.points, k=2)
    return float(d[:, 1].min())


def _covering_1d(xs, a, b):
    # sup over [a, b] of the distance to the nearest x: attained at a, b or a gap midpoint
    xs = np.sort(xs)
    mids = (xs[1:] + xs[:-1]) / 2
    cand = np.concatenate([[a, b], mids[(mids >= a) & (mids <= b)]])
    j = np.searchsorted(xs, cand)
    left = xs[np.clip(j - 1, 0, len(xs) - 1)]
    right = xs[np.clip(j, 0, len(xs) - 1)]
    d = np.minimum(np.abs(cand - left), np.abs(cand - right))
    return float(d.max())


def _covering_grid(tree, region, resolution):
    """Branch-and-bound over dyadic cells of the region's bounding box.

    A cell with center c and half-diagonal rho can hold no point farther than
    d(c) + rho from the sample, so cells whose bound is not above the best
    value found inside the region are dropped.  Cells at the last level have
    sides <= resolution, which bounds the bracket width by resolution * sqrt(n).
    """
    lo_b, hi_b = region.bounds()
    sides = hi_b - lo_b
    n = len(sides)
    levels = max(0, math.ceil(math.log2(float(sides.max()) / resolution)))
    corners = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    centers = ((lo_b + hi_b) / 2)[None, :]
    half = sides / 2
    best, hi = -math.inf, math.inf
    for level in range(levels + 1):
        centers = centers[region.cells_meet(centers, half)]
        if not len(centers):
            break
        d, _ = tree.query(centers)
        inside = region.contains(centers)
        if inside.any():
            best = max(best, float(d[inside].max()))
        if (~inside).any():
            dp, _ = tree.query(region.project(centers[~inside]))
            best = max(best, float(dp.max()))
        bound = d + float(np.linalg.norm(half))
        live = bound > best
        hi = min(hi, float(bound[live].max()) if live.any() else best)
        if level == levels or not live.any():
            break
        centers = centers[live]
        half = half / 2
        centers = (centers[:, None, :] + corners[None, :, :] * half).reshape(-1, n)
    return Interval(best, max(hi, best))


def covering_radius(sample, region=None, resolution=None):
    """Bracket the sup over ``region`` of the distance to the nearest sample point.

    In dimension 1 the value is exact.  Otherwise the bracket width is at most
    ``resolution * sqrt(n)``.  ``region`` defaults to the window shrunk by
    nothing; callers are responsible for shrinking it far enough that the
    exterior of the window cannot matter.
    """
    if len(sample) == 0:
        raise ValueError("empty sample")
    region = sample.window if region is None else region
    if region.dim != sample.dim:
        raise ValueError("region dimension differs from sample dimension")
    if sample.dim == 1:
        lo_b, hi_b = region.bounds()
        v = _covering_1d(sample.points[:, 0], float(lo_b[0]), float(hi_b[0]))
        return Interval(v, v)
    if resolution is None or not resolution > 0:
        raise ValueError("resolution must be positive")
    if sample.dim > MAX_GRID_DIM:
        raise ValueError(f"grid covering radius supports dimension <= {MAX_GRID_DIM}")
    return _covering_grid(sample.tree, region, float(resolution))


def delone_constants(sample, region=None, resolution=None):
    """Packing radius, covering radius (upper bracket end) and their ratio."""
    r = min_pairwise_distance(sample) / 2
    R = covering_radius(sample, region, resolution).hi
    return DeloneConstants(r, R)
