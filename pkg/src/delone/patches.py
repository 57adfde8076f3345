"""T-patches, translation classes, the patch-counting function and the repetitivity function."""

import csv
import hashlib
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Interval, PointSample, covering_radius, min_pairwise_distance
from ._io import dumps, fmt


@dataclass(frozen=True, eq=False)
class Patch:
    """Points of the set in the open ball ``B(center; radius)``, stored as offsets from the center."""

    center: np.ndarray
    radius: float
    offsets: np.ndarray

    def __len__(self):
        return len(self.offsets)


def _sorted_rows(q):
    return q[np.lexsort(q.T[::-1])]


@dataclass(frozen=True, eq=False)
class CanonicalPatch:
    """Translation-invariant form of a patch.

    Offsets are snapped to a grid of pitch ``tol`` (``key``) and to the same
    grid shifted by half a step (``alt_key``).  A coordinate sitting on a cell
    boundary of one grid is far from the boundaries of the other, and equality
    falls back to direct offset matching when both keys disagree.
    """

    radius: float
    tol: float
    offsets: np.ndarray
    key: bytes
    alt_key: bytes

    def __len__(self):
        return len(self.offsets)

    @property
    def digest(self):
        return hashlib.sha1(self.key).hexdigest()[:16]

    def sort_key(self):
        return (len(self.offsets), self.key)

    def matches(self, other):
        if self.radius != other.radius or len(self) != len(other):
            return False
        if self.key == other.key or self.alt_key == other.alt_key:
            return True
        return _same_offsets(self.offsets, other.offsets, max(self.tol, other.tol))

    def __eq__(self, other):
        if not isinstance(other, CanonicalPatch):
            return NotImplemented
        return self.matches(other)

    __hash__ = None


def _same_offsets(a, b, tol):
    if a.shape != b.shape:
        return False
    dim = a.shape[1]
    na, nb = np.sort(np.linalg.norm(a, axis=1)), np.sort(np.linalg.norm(b, axis=1))
    if np.abs(na - nb).max(initial=0.0) > 2 * tol * math.sqrt(dim):
        return False
    d = np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)
    return bool((d.min(axis=1) <= tol).all() and (d.min(axis=0) <= tol).all())


def _canonical(offsets, radius, tol):
    scaled = offsets / tol
    q = _sorted_rows(np.rint(scaled).astype(np.int64))
    qb = _sorted_rows(np.floor(scaled).astype(np.int64))
    shape = np.array(offsets.shape, dtype=np.int64).tobytes()
    return CanonicalPatch(radius, tol, _sorted_rows(offsets), shape + q.tobytes(), shape + qb.tobytes())


def extract_patch(sample, center, T):
    center = np.asarray(center, dtype=float).reshape(sample.dim)
    i = sample.index_of(center)
    if i is None:
        raise ValueError("center is not a point of the sample")
    c = sample.points[i]
    if sample.window.depth(c)[0] < T:
        raise ValueError("margin violation: ball exits the sample window")
    return _patch_at(sample, i, T)


def _patch_at(sample, i, T, neighbours=None):
    c = sample.points[i]
    if neighbours is None:
        neighbours = sample.tree.query_ball_point(c, r=T)
    off = sample.points[neighbours] - c
    off = off[_inside(off, T, sample.tol)]
    return Patch(c, T, off)


def _inside(offsets, T, tol):
    # open ball; distances within tol of T count as on the sphere
    return np.sqrt(np.einsum("ij,ij->i", offsets, offsets)) < T - tol


def canonicalize(patch, tol):
    if not tol > 0:
        raise ValueError("tol must be positive")
    return _canonical(patch.offsets, patch.radius, tol)


# ---------------------------------------------------------------------------
# census
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class PatchClass:
    patch: CanonicalPatch
    centers: np.ndarray  # indices into sample.points


@dataclass(eq=False)
class PatchClassRegistry:
    """Translation classes of the ``T``-patches centred at margin-valid points of a sample.

    ``exact`` is set when the window has inradius at least ``M + T`` for the
    upper end of the measured repetitivity ``M``: then every class of the
    infinite set has a center inside the window.
    """

    T: float
    tol: float
    sample: PointSample
    classes: list
    exact: bool = False
    repetitivity: Optional[Interval] = None
    notes: list = field(default_factory=list)

    @property
    def window(self):
        return self.sample.window

    @property
    def count(self):
        return len(self.classes)

    def __len__(self):
        return len(self.classes)

    @property
    def n_centers(self):
        return sum(len(c.centers) for c in self.classes)

    def class_of(self, index):
        for k, c in enumerate(self.classes):
            if index in c.centers:
                return k
        raise KeyError(f"point {index} is not a margin-valid center")

    def sigma(self, k):
        """Coordinates of the centers of class ``k``."""
        return self.sample.points[self.classes[k].centers]

    def to_dict(self, with_centers=True):
        classes = []
        for c in self.classes:
            entry = {
                "key": c.patch.digest,
                "size": len(c.centers),
                "patch_points": len(c.patch),
                "example_center": self.sample.points[c.centers[0]].tolist(),
            }
            if with_centers:
                entry["sigma_centers"] = self.sample.points[c.centers].tolist()
            classes.append(entry)
        return {
            "T": self.T,
            "tol": self.tol,
            "count": self.count,
            "exact": self.exact,
            "classes": classes,
        }

    def to_json(self, indent=2):
        return dumps(self.to_dict(), indent)


def _merge_classes(reps):
    """Union classes whose representatives match offset by offset; returns a label per class."""
    parent = list(range(len(reps)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_size = {}
    for k, rep in enumerate(reps):
        by_size.setdefault(len(rep), []).append(k)
    for group in by_size.values():
        for a_pos, a in enumerate(group):
            for b in group[a_pos + 1 :]:
                ra, rb = find(a), find(b)
                if ra != rb and _same_offsets(reps[a].offsets, reps[b].offsets, reps[a].tol):
                    parent[max(ra, rb)] = min(ra, rb)
    return [find(k) for k in range(len(reps))]


def patch_census(sample, T, tol=None, *, check_exact=True, resolution=None):
    """Classify every margin-valid center of ``sample`` by its ``T``-patch.

    The class count is a lower bound for N_X(T); with ``check_exact`` the
    repetitivity is bootstrapped from the census to decide whether the window
    is large enough for the count to be exact.
    """
    tol = sample.tol if tol is None else float(tol)
    if not T > 0:
        raise ValueError("T must be positive")
    idx = sample.margin_valid(T)
    if not len(idx):
        raise ValueError("window too small for T: no margin-valid centers")
    pts = sample.points
    neighbours = sample.tree.query_ball_point(pts[idx], r=T)
    reps, members, by_key, by_alt = [], [], {}, {}
    for i, nb in zip(idx, neighbours):
        off = pts[nb] - pts[i]
        off = off[_inside(off, T, tol)]
        cp = _canonical(off, T, tol)
        k = by_key.get(cp.key)
        if k is None:
            k = by_alt.get(cp.alt_key)
        if k is None:
            k = len(reps)
            reps.append(cp)
            members.append([])
        by_key.setdefault(cp.key, k)
        by_alt.setdefault(cp.alt_key, k)
        members[k].append(int(i))
    labels = _merge_classes(reps)
    merged = {}
    for k, lab in enumerate(labels):
        merged.setdefault(lab, []).extend(members[k])
    classes = [PatchClass(reps[lab], np.array(sorted(m), dtype=np.intp)) for lab, m in merged.items()]
    classes.sort(key=lambda c: c.patch.sort_key())
    registry = PatchClassRegistry(float(T), tol, sample, classes)
    if check_exact:
        M = _registry_repetitivity(registry, resolution)
        registry.repetitivity = M
        registry.exact = M is not None and sample.window.inradius >= M.hi + T
        if M is None:
            registry.notes.append("window too small to bound the repetitivity")
    return registry


def default_resolution(sample):
    """Grid pitch used for covering radii in dimension >= 2 when none is given."""
    if sample.dim == 1 or len(sample) < 2:
        return None
    return min_pairwise_distance(sample) / 20


def _class_covering(sample, centers, T, resolution):
    """Covering radius of one center class, measured where it is fully known.

    Class membership is known on the window shrunk by T.  A first pass over
    that region gives m0 >= the nearest-center distance of every point there;
    shrinking by m0 more leaves a region where no unseen center can be nearer
    than a seen one, so the second pass is the true value on that region.
    """
    known = sample.window.shrink(T)
    sub = PointSample(centers, known, tol=sample.tol)
    m0 = covering_radius(sub, known, resolution).hi
    if known.inradius <= m0:
        return None
    return covering_radius(sub, known.shrink(m0), resolution)


def _registry_repetitivity(registry, resolution=None):
    sample = registry.sample
    if sample.window.inradius <= registry.T:
        return None
    if resolution is None:
        resolution = default_resolution(sample)
    lo = hi = -math.inf
    for k in range(registry.count):
        iv = _class_covering(sample, registry.sigma(k), registry.T, resolution)
        if iv is None:
            return None
        lo, hi = max(lo, iv.lo), max(hi, iv.hi)
    return Interval(lo, hi)


@dataclass(frozen=True)
class RepetitivityResult:
    """Bracket on M_X(T).  ``exact`` False means lower-bound semantics only."""

    T: float
    lo: float
    hi: float
    exact: bool
    classes: int

    @property
    def interval(self):
        return Interval(self.lo, self.hi)


def repetitivity(sample, T, tol=None, resolution=None, registry=None):
    """M_X(T): the largest covering radius over the center sets of the T-patch classes."""
    if registry is None:
        registry = patch_census(sample, T, tol, check_exact=False)
    M = registry.repetitivity or _registry_repetitivity(registry, resolution)
    if M is None:
        return RepetitivityResult(float(T), math.nan, math.inf, False, registry.count)
    exact = sample.window.inradius >= M.hi + T
    return RepetitivityResult(float(T), M.lo, M.hi, exact, registry.count)


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    T: float
    lo: float
    hi: float
    exact: bool


@dataclass
class ComplexityCurve:
    kind: str  # "patch_count" or "repetitivity"
    samples: list

    def values(self):
        return [p.hi for p in self.samples]

    def to_csv(self):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["T", "value_lo", "value_hi", "exact_flag"])
        for p in self.samples:
            w.writerow([fmt(p.T), fmt(p.lo), fmt(p.hi), int(p.exact)])
        return out.getvalue()


def _enforce_monotone(points):
    out = list(points)
    for j in range(1, len(out)):
        prev, cur = out[j - 1], out[j]
        if cur.lo < prev.lo:
            if prev.exact and cur.exact:
                raise RuntimeError(f"complexity decreased between T={prev.T} and T={cur.T} on exact censuses")
            warnings.warn(f"non-monotone value at T={cur.T}; flagged as not exact", stacklevel=3)
            out[j] = CurvePoint(cur.T, cur.lo, cur.hi, False)
    return out


def _check_sorted(T_list):
    T_list = [float(t) for t in T_list]
    if any(b < a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be sorted ascending")
    return T_list


def patch_count_curve(sample, T_list, tol=None, resolution=None):
    pts = []
    for T in _check_sorted(T_list):
        reg = patch_census(sample, T, tol, resolution=resolution)
        pts.append(CurvePoint(T, reg.count, reg.count, reg.exact))
    return ComplexityCurve("patch_count", _enforce_monotone(pts))


def repetitivity_curve(sample, T_list, tol=None, resolution=None):
    pts = []
    for T in _check_sorted(T_list):
        res = repetitivity(sample, T, tol, resolution)
        pts.append(CurvePoint(T, res.lo, res.hi, res.exact))
    return ComplexityCurve("repetitivity", _enforce_monotone(pts))
