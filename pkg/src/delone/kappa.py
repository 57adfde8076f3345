"""Packing-covering ratios of lattices and the known bounds on the Delone constant κ(n).

Covering radii of lattices in dimension <= 4 are computed exactly as the
largest norm of a vertex of the Voronoi cell, the cell being cut out by the
Voronoi-relevant vectors.  Higher dimensions fall back to the grid bracket
of :func:`delone.core.covering_radius`.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Box, Interval, PointSample, covering_radius

EXACT_MAX_DIM = 4

# stored values for n = 24: lower bound sqrt(2n/(n+1)) = 4*sqrt(3)/5, Leech lattice upper bound sqrt(2)
KAPPA24_LOWER = 4 * math.sqrt(3) / 5
KAPPA24_LEECH = math.sqrt(2)


def lll_reduce(basis, delta=0.75):
    """LLL-reduce the rows of ``basis`` (floating point, intended for small n)."""
    B = np.array(basis, dtype=float)
    n = len(B)

    def gso(B):
        Bs = np.zeros_like(B)
        mu = np.zeros((n, n))
        for i in range(n):
            v = B[i].copy()
            for j in range(i):
                mu[i, j] = B[i] @ Bs[j] / (Bs[j] @ Bs[j])
                v -= mu[i, j] * Bs[j]
            Bs[i] = v
        return Bs, mu

    Bs, mu = gso(B)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                B[k] -= q * B[j]
                Bs, mu = gso(B)
        if Bs[k] @ Bs[k] >= (delta - mu[k, k - 1] ** 2) * (Bs[k - 1] @ Bs[k - 1]):
            k += 1
        else:
            B[[k, k - 1]] = B[[k - 1, k]]
            Bs, mu = gso(B)
            k = max(k - 1, 1)
    return B


def _check_basis(basis):
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    n = B.shape[0]
    if B.shape != (n, n):
        raise ValueError("basis must be square")
    scale = np.prod(np.linalg.norm(B, axis=1))
    if scale == 0 or abs(np.linalg.det(B)) <= 1e-12 * scale:
        raise ValueError("singular basis")
    return B


def lattice_vectors_within(basis, radius):
    """All lattice vectors (rows) of norm <= radius, with their integer coordinates."""
    B = lll_reduce(_check_basis(basis))
    inv = np.linalg.inv(B)
    # |k_i| = |v . inv[:, i]| <= radius * |inv[:, i]|
    K = np.floor(radius * np.linalg.norm(inv, axis=0) + 1e-9).astype(int)
    axes = [np.arange(-k, k + 1) for k in K]
    coeffs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(B))
    vecs = coeffs @ B
    keep = np.linalg.norm(vecs, axis=1) <= radius * (1 + 1e-12)
    return vecs[keep], coeffs[keep], B


def shortest_vector_length(basis):
    B = lll_reduce(_check_basis(basis))
    bound = float(np.linalg.norm(B, axis=1).min())
    vecs, _, _ = lattice_vectors_within(B, bound)
    norms = np.linalg.norm(vecs, axis=1)
    return float(norms[norms > 0].min())


def relevant_vectors(basis):
    """Voronoi-relevant vectors: ±v are the only shortest vectors of their class mod 2Λ."""
    B = lll_reduce(_check_basis(basis))
    reach = float(np.linalg.norm(B, axis=1).sum())  # >= 2 * covering radius
    vecs, coeffs, _ = lattice_vectors_within(B, reach)
    norms = np.einsum("ij,ij->i", vecs, vecs)
    parity = [tuple(c) for c in np.mod(coeffs, 2)]
    classes = {}
    for i, key in enumerate(parity):
        if any(key):
            classes.setdefault(key, []).append(i)
    out = []
    for members in classes.values():
        m = norms[members]
        best = m.min()
        shortest = [members[j] for j in np.flatnonzero(m <= best * (1 + 1e-9))]
        if len(shortest) == 2:
            out.extend(vecs[shortest])
    return np.array(out)


def voronoi_vertices(basis):
    """Vertices of the Voronoi cell of the origin."""
    V = relevant_vectors(basis)
    n = V.shape[1]
    rhs = np.einsum("ij,ij->i", V, V) / 2
    subsets = np.array(list(itertools.combinations(range(len(V)), n)))
    A = V[subsets]
    b = rhs[subsets]
    dets = np.linalg.det(A)
    ok = np.abs(dets) > 1e-9 * np.prod(np.linalg.norm(A, axis=2), axis=1)
    x = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
    scale = rhs.max()
    feasible = np.all(x @ V.T <= rhs + 1e-9 * scale, axis=1)
    return x[feasible]


def lattice_covering_radius(basis, resolution=None):
    """Covering radius of the lattice spanned by the rows of ``basis``.

    Exact (``lo == hi``) up to dimension 4; otherwise a grid bracket at the
    given resolution.
    """
    B = _check_basis(basis)
    n = len(B)
    if n == 1:
        v = abs(float(B[0, 0])) / 2
        return Interval(v, v)
    if n <= EXACT_MAX_DIM:
        v = float(np.linalg.norm(voronoi_vertices(B), axis=1).max())
        return Interval(v, v)
    from .generators import CrystalGenerator

    B = lll_reduce(B)
    if resolution is None:
        resolution = shortest_vector_length(B) / 20
    # sup over one fundamental parallelepiped, sampled with a margin of its diameter
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=n))) @ B
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    margin = float(np.linalg.norm(B, axis=1).sum())
    window = Box(lo - margin, hi + margin)
    pts = CrystalGenerator(B).points_in(window)
    return covering_radius(PointSample(pts, window), Box(lo, hi), resolution)


def kappa_lattice(basis, resolution=None):
    """Packing-covering ratio R/r of a lattice."""
    R = lattice_covering_radius(basis, resolution).hi
    return R / (shortest_vector_length(basis) / 2)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

_S3 = math.sqrt(3)


def named_lattice(name):
    """Basis of a catalog lattice: ``Zn``, ``hex``/``A2``, ``fcc``/``A3``, ``bcc``/``A3*``.

    The non-cubic lattices are scaled to minimum distance 1.
    """
    key = name.strip().lower()
    if key in ("hex", "a2", "hexagonal"):
        return np.array([[1.0, 0.0], [0.5, _S3 / 2]])
    if key in ("fcc", "a3", "d3"):
        return np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]) / math.sqrt(2)
    if key in ("bcc", "a3*", "a3star"):
        return np.array([[-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0]]) / _S3
    if key.startswith("z") and key[1:].isdigit():
        n = int(key[1:])
        if n < 1:
            raise ValueError("Zn needs n >= 1")
        return np.eye(n)
    raise ValueError(f"unknown lattice {name!r}")


CATALOG = ("Z1", "Z2", "Z3", "Z4", "hex", "fcc", "bcc")


# ---------------------------------------------------------------------------
# bounds on κ(n)
# ---------------------------------------------------------------------------


def kappa_lower_bound(n):
    """Ryshkov's lower bound sqrt(2n/(n+1)): circumradius over half edge of the regular simplex."""
    return math.sqrt(2 * n / (n + 1))


@dataclass(frozen=True)
class KappaReport:
    n: int
    delone_lower: float
    delone_upper: float
    lattice_upper: float
    exact: Optional[float] = None
    sources: list = field(default_factory=list)

    def bracket(self):
        """Best known enclosure of κ(n)."""
        if self.exact is not None:
            return self.exact, self.exact
        return self.delone_lower, min(self.delone_upper, self.lattice_upper)

    def to_dict(self):
        lo, hi = self.bracket()
        return {
            "n": self.n,
            "delone_lower": self.delone_lower,
            "delone_upper": self.delone_upper,
            "lattice_upper": self.lattice_upper,
            "exact": self.exact,
            "bracket": [lo, hi],
            "c_threshold": c_threshold(self.n),
            "sources": list(self.sources),
        }


def kappa_bounds(n):
    if n < 1:
        raise ValueError("dimension must be >= 1")
    lower = kappa_lower_bound(n)
    lattice_upper = math.sqrt((n + 2) / 3)
    sources = ["simplex lower bound sqrt(2n/(n+1))", "saturated packing upper bound 2", "Ryshkov lattice bound sqrt((n+2)/3)"]
    exact = None
    if n == 1:
        exact = 1.0
        sources.append("exact: Z")
    elif n == 2:
        exact = 2 / _S3
        sources.append("exact: hexagonal lattice meets the simplex bound")
    elif n == 3:
        sources.append("lattice optimum: body-centred cubic")
    elif n == 24:
        lower = KAPPA24_LOWER
        lattice_upper = KAPPA24_LEECH
        sources.append("stored: Leech lattice upper bound sqrt(2)")
    return KappaReport(n, lower, 2.0, lattice_upper, exact, sources)


def c_from_kappa(kappa):
    """Period-certificate coefficient κ/(κ+2); increasing in κ."""
    return kappa / (kappa + 2)


def c_threshold(n):
    """Sound coefficient for the single-period certificate in dimension n."""
    report = kappa_bounds(n)
    kappa = report.exact if report.exact is not None else report.delone_lower
    return c_from_kappa(kappa)
