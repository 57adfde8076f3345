"""Generators for the infinite Delone sets used as test subjects.

Every generator can list *all* of its points inside any bounded region.  The
same point is always computed by the same floating-point expression, so
enumerating nested regions gives consistent results.
"""

import math
import warnings
from fractions import Fraction
from functools import cached_property

import mpmath
import numpy as np

from .core import DEFAULT_TOL, Ball, Box, PointSample

TAU = (1 + math.sqrt(5)) / 2
MAX_DENOMINATOR = 10**6
RATIONAL_EPS = 1e-13


class DeclaredBoundWarning(UserWarning):
    """Computed Delone constants fall outside the bounds a generator declares."""


def rational_approximation(x, max_den=MAX_DENOMINATOR, eps=RATIONAL_EPS):
    """Return ``(p, q)`` with ``q <= max_den`` and ``|x - p/q| < eps*max(1, |x|)``, else None.

    Any such fraction is a continued-fraction convergent of ``x`` (Legendre),
    so scanning convergents is exhaustive.  The float is expanded exactly.
    """
    target = Fraction(float(x))
    f = target
    p0, q0, p1, q1 = 0, 1, 1, 0
    bound = Fraction(eps) * max(1, abs(target))
    while True:
        a = math.floor(f)
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        if q1 > max_den:
            return None
        if abs(target - Fraction(p1, q1)) < bound:
            return p1, q1
        rest = f - a
        if rest == 0:
            return p1, q1
        f = 1 / rest


def check_irrational(alpha):
    hit = rational_approximation(alpha)
    if hit is not None:
        p, q = hit
        raise ValueError(f"alpha={alpha!r} is rational to working precision (~{p}/{q})")


def frac(x):
    return x - np.floor(x)


def _lexsorted(points):
    if len(points) == 0:
        return points
    order = np.lexsort(points.T[::-1])
    return points[order]


def _as_region(region, dim):
    if isinstance(region, (Box, Ball)):
        return region
    lo, hi = region
    return Box(np.broadcast_to(lo, (dim,)), np.broadcast_to(hi, (dim,)))


class SetGenerator:
    """Lazy description of an infinite Delone set.

    ``declared_r`` is a lower bound for the packing radius and ``declared_R``
    an upper bound for the covering radius, when the construction provides them.
    """

    kind = "abstract"
    dim = 0

    @property
    def declared_r(self):
        return None

    @property
    def declared_R(self):
        return None

    def points_in(self, region):
        raise NotImplementedError

    def sample(self, window, tol=DEFAULT_TOL):
        window = _as_region(window, self.dim)
        pts = self.points_in(window)
        return PointSample(pts, window, source=self.kind, tol=tol, meta={"generator": self.to_dict()})

    def to_dict(self):
        raise NotImplementedError

    def probe_packing_radius(self):
        """Packing radius measured around the origin on a window wide enough to hold nearest neighbors."""
        reach = 4.0 * (self.declared_R or 2.0) + 1.0
        box = Box(-np.full(self.dim, 2 * reach), np.full(self.dim, 2 * reach))
        pts = self.points_in(box)
        s = PointSample(pts, box)
        d, _ = s.tree.query(pts[box.depth(pts) >= reach], k=2)
        return float(d[:, 1].min()) / 2


def check_declared(generator, constants, slack=1e-9):
    """Compare measured Delone constants with the generator's declared bounds.

    Emits a :class:`DeclaredBoundWarning` for each violation and returns the messages.
    """
    problems = []
    if generator.declared_r is not None and constants.r < generator.declared_r - slack:
        problems.append(f"packing radius {constants.r} below declared {generator.declared_r}")
    if generator.declared_R is not None and constants.R > generator.declared_R + slack:
        problems.append(f"covering radius {constants.R} above declared {generator.declared_R}")
    for msg in problems:
        warnings.warn(msg, DeclaredBoundWarning, stacklevel=2)
    return problems


# ---------------------------------------------------------------------------


class CrystalGenerator(SetGenerator):
    """Ideal crystal ``Λ + F``; rows of ``basis`` are the lattice basis vectors."""

    kind = "crystal"

    def __init__(self, basis, offsets=None, tol=DEFAULT_TOL):
        B = np.atleast_2d(np.asarray(basis, dtype=float))
        n = B.shape[0]
        if B.shape != (n, n):
            raise ValueError("basis must be a square matrix")
        scale = np.prod(np.linalg.norm(B, axis=1))
        if scale == 0 or abs(np.linalg.det(B)) <= 1e-12 * scale:
            raise ValueError("singular basis")
        F = np.zeros((1, n)) if offsets is None else np.asarray(offsets, dtype=float).reshape(-1, n)
        coeff = F @ np.linalg.inv(B)
        for i in range(len(F)):
            diff = coeff[i + 1 :] - coeff[i]
            if len(diff) and np.any(np.abs(diff - np.rint(diff)).max(axis=1) < tol):
                raise ValueError("duplicate offsets modulo the lattice")
        self.basis = B
        self.offsets = F
        self.dim = n
        self._inv = np.linalg.inv(B)

    def _coefficient_ranges(self, lo, hi, shift):
        # extreme lattice coordinates of (x - shift) over the box [lo, hi]
        a, b = lo - shift, hi - shift
        inv = self._inv
        kmin = np.minimum(a[:, None] * inv, b[:, None] * inv).sum(axis=0)
        kmax = np.maximum(a[:, None] * inv, b[:, None] * inv).sum(axis=0)
        return np.floor(kmin).astype(int) - 1, np.ceil(kmax).astype(int) + 1

    def points_in(self, region):
        region = _as_region(region, self.dim)
        lo, hi = region.bounds()
        chunks = []
        for f in self.offsets:
            kmin, kmax = self._coefficient_ranges(lo, hi, f)
            axes = [np.arange(a, b + 1) for a, b in zip(kmin, kmax)]
            K = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
            pts = K @ self.basis + f
            chunks.append(pts[region.contains(pts)])
        return _lexsorted(np.concatenate(chunks))

    @cached_property
    def _lattice_radii(self):
        from .kappa import lattice_covering_radius, shortest_vector_length

        if self.dim > 4:
            return None, None
        return shortest_vector_length(self.basis) / 2, lattice_covering_radius(self.basis).hi

    @property
    def declared_r(self):
        if len(self.offsets) == 1:
            return self._lattice_radii[0]
        return None

    @property
    def declared_R(self):
        # adding cosets can only shrink the covering radius
        return self._lattice_radii[1]

    def to_dict(self):
        return {"kind": self.kind, "basis": self.basis.tolist(), "offsets": self.offsets.tolist()}


def crystal_generator(basis, offsets=None):
    return CrystalGenerator(basis, offsets)


class BeattyGenerator(SetGenerator):
    """The set ``{m + delta*frac(m*alpha) : m in Z}``."""

    kind = "beatty"
    dim = 1

    def __init__(self, alpha, delta):
        alpha, delta = float(alpha), float(delta)
        if not abs(delta) < 0.5:
            raise ValueError("|delta| must be < 1/2: not uniformly discrete guarantee")
        check_irrational(alpha)
        self.alpha = alpha
        self.delta = delta

    def point(self, m):
        m = np.asarray(m, dtype=float)
        return m + self.delta * frac(m * self.alpha)

    def indices_in(self, region):
        """Indices ``m`` and positions of all points inside a 1-D region."""
        region = _as_region(region, 1)
        lo, hi = region.bounds()
        # |point(m) - m| <= |delta| bounds the index range
        pad = abs(self.delta) + 1
        ms = np.arange(math.floor(lo[0] - pad), math.ceil(hi[0] + pad) + 1)
        xs = self.point(ms)
        keep = region.contains(xs[:, None])
        return ms[keep], xs[keep]

    def points_in(self, region):
        _, xs = self.indices_in(region)
        return xs[:, None]

    @property
    def interval_lengths(self):
        """The two interval lengths ``1 + delta*frac(alpha)`` and ``1 - delta*(1 - frac(alpha))``."""
        fa = self.alpha - math.floor(self.alpha)
        return 1 + self.delta * fa, 1 - self.delta * (1 - fa)

    @property
    def declared_r(self):
        return (1 - abs(self.delta)) / 2

    @property
    def declared_R(self):
        return (1 + abs(self.delta)) / 2

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "delta": self.delta}


def beatty_generator(alpha, delta):
    return BeattyGenerator(alpha, delta)


def fibonacci_generator():
    """Scaled Fibonacci quasicrystal, the Beatty set with alpha = golden ratio, delta = -1/sqrt(5)."""
    return BeattyGenerator(TAU, -1 / math.sqrt(5))


class ProductGenerator(SetGenerator):
    """``Y x eta Z^(n-1)`` for a one-dimensional set ``Y``."""

    kind = "product"

    def __init__(self, factor, eta, dim):
        if factor.dim != 1:
            raise ValueError("product factor must be one-dimensional")
        if not eta > 0:
            raise ValueError("eta must be positive")
        if dim < 2:
            raise ValueError("product dimension must be >= 2")
        self.factor = factor
        self.eta = float(eta)
        self.dim = int(dim)

    def points_in(self, region):
        region = _as_region(region, self.dim)
        lo, hi = region.bounds()
        ys = self.factor.points_in(Box(lo[:1], hi[:1]))[:, 0]
        axes = [ys] + [
            self.eta * np.arange(math.ceil(a / self.eta) - 1, math.floor(b / self.eta) + 2)
            for a, b in zip(lo[1:], hi[1:])
        ]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        return _lexsorted(pts[region.contains(pts)])

    @property
    def declared_r(self):
        r = self.factor.declared_r
        return None if r is None else min(r, self.eta / 2)

    @property
    def declared_R(self):
        R = self.factor.declared_R
        return None if R is None else math.sqrt(R**2 + self.eta**2 * (self.dim - 1) / 4)

    def to_dict(self):
        return {"kind": self.kind, "factor": self.factor.to_dict(), "eta": self.eta, "dim": self.dim}


def product_generator(factor, eta, n):
    return ProductGenerator(factor, eta, n)


class CutProjectGenerator(SetGenerator):
    """``{λ + frac(phi·λ) * delta_vec : λ in Λ}``."""

    kind = "cut_project"

    def __init__(self, basis, phi, delta_vec):
        self.lattice = CrystalGenerator(basis)
        self.dim = self.lattice.dim
        self.phi = np.asarray(phi, dtype=float).reshape(self.dim)
        self.delta_vec = np.asarray(delta_vec, dtype=float).reshape(self.dim)
        values = [1.0] + [float(v) for v in self.lattice.basis @ self.phi]
        with mpmath.workdps(30):
            relation = mpmath.pslq([mpmath.mpf(v) for v in values], tol=1e-10, maxcoeff=1000, maxsteps=10**4)
        if relation is not None:
            raise ValueError(f"aperiodicity precondition violated: integer relation {relation}")
        if self.probe_packing_radius() <= 0:
            raise ValueError("delta_vec too large: points collide")

    @property
    def basis(self):
        return self.lattice.basis

    def points_in(self, region):
        region = _as_region(region, self.dim)
        shift = float(np.linalg.norm(self.delta_vec))
        lo, hi = region.bounds()
        lam = self.lattice.points_in(Box(lo - shift - 1e-12, hi + shift + 1e-12))
        pts = lam + frac(lam @ self.phi)[:, None] * self.delta_vec
        return _lexsorted(pts[region.contains(pts)])

    @property
    def declared_r(self):
        r = self.lattice.declared_r
        return None if r is None else r - float(np.linalg.norm(self.delta_vec))

    @property
    def declared_R(self):
        R = self.lattice.declared_R
        return None if R is None else R + float(np.linalg.norm(self.delta_vec))

    def to_dict(self):
        return {
            "kind": self.kind,
            "basis": self.basis.tolist(),
            "phi": self.phi.tolist(),
            "delta_vec": self.delta_vec.tolist(),
        }


def cut_project_generator(basis, phi, delta_vec):
    return CutProjectGenerator(basis, phi, delta_vec)


class PerturbedGenerator(SetGenerator):
    """``base`` with the single point ``target`` moved by ``displacement``."""

    kind = "perturbed"

    def __init__(self, base, target, displacement, tol=DEFAULT_TOL):
        self.base = base
        self.dim = base.dim
        target = np.asarray(target, dtype=float).reshape(self.dim)
        disp = np.asarray(displacement, dtype=float).reshape(self.dim)
        near = base.points_in(Box(target - 2 * tol, target + 2 * tol))
        hits = near[np.linalg.norm(near - target, axis=1) <= tol] if len(near) else near
        if len(hits) != 1:
            raise ValueError("target is not a point of the base set")
        self.target = hits[0]
        self.displacement = disp
        r = base.declared_r if base.declared_r is not None else base.probe_packing_radius()
        if not np.linalg.norm(disp) < r:
            raise ValueError("displacement must be shorter than the base packing radius")

    @property
    def moved(self):
        return self.target + self.displacement

    def points_in(self, region):
        region = _as_region(region, self.dim)
        step = float(np.linalg.norm(self.displacement))
        pts = self.base.points_in(region.grow(step + 1e-12))
        pts = pts[np.any(pts != self.target, axis=1)]
        pts = np.vstack([pts, self.moved[None, :]])
        return _lexsorted(pts[region.contains(pts)])

    @property
    def declared_r(self):
        r = self.base.declared_r
        return None if r is None else r - float(np.linalg.norm(self.displacement)) / 2

    @property
    def declared_R(self):
        R = self.base.declared_R
        return None if R is None else R + float(np.linalg.norm(self.displacement))

    def to_dict(self):
        return {
            "kind": self.kind,
            "base": self.base.to_dict(),
            "target": self.target.tolist(),
            "displacement": self.displacement.tolist(),
        }


def perturb_one_point(base, target, displacement):
    return PerturbedGenerator(base, target, displacement)


def generator_from_dict(d):
    """Rebuild a generator from its JSON description."""
    kind = d.get("kind")
    if kind == "crystal":
        return CrystalGenerator(d["basis"], d.get("offsets"))
    if kind == "lattice":
        from .kappa import named_lattice

        return CrystalGenerator(named_lattice(d["name"]))
    if kind == "beatty":
        return BeattyGenerator(d["alpha"], d["delta"])
    if kind == "fibonacci":
        return fibonacci_generator()
    if kind == "product":
        return ProductGenerator(generator_from_dict(d["factor"]), d["eta"], d["dim"])
    if kind == "cut_project":
        return CutProjectGenerator(d["basis"], d["phi"], d["delta_vec"])
    if kind == "perturbed":
        return PerturbedGenerator(generator_from_dict(d["base"]), d["target"], d["displacement"])
    raise ValueError(f"unknown generator kind {kind!r}")
