"""Crystallinity and periodicity certificates for finite samples of Delone sets.

Every verdict computed on a finite window carries ``caveat=True``: it states
what the window shows, and the infinite-set conclusion holds only if the
window is representative of the whole set.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._io import dumps
from .core import Interval
from .kappa import c_from_kappa, c_threshold, lll_reduce
from .patches import PatchClassRegistry, RepetitivityResult, patch_census

CERTIFIED_CRYSTAL = "certified_crystal"
CERTIFIED_PERIODS = "certified_periods"
INCONCLUSIVE = "inconclusive"

# theorem tags recorded in verdicts
PATCH_COUNT = "patch-count"
REPETITIVITY = "repetitivity"
PERIOD = "period"
STAGNATION = "stagnation"
PERIOD_VERIFICATION = "period-verification"


@dataclass(frozen=True)
class Verdict:
    """Outcome of one certificate: ``measured < threshold`` is what certifies."""

    kind: str
    theorem: str
    T: float
    measured: float
    threshold: float
    caveat: bool = True
    periods: tuple = ()
    note: str = ""

    def __post_init__(self):
        if self.kind not in (CERTIFIED_CRYSTAL, CERTIFIED_PERIODS, INCONCLUSIVE):
            raise ValueError(f"unknown verdict kind {self.kind!r}")
        if self.kind != INCONCLUSIVE and not self.measured < self.threshold:
            raise ValueError("certified verdict requires measured < threshold")

    @property
    def certified(self):
        return self.kind != INCONCLUSIVE

    def to_dict(self):
        d = {
            "kind": self.kind,
            "theorem": self.theorem,
            "T": self.T,
            "measured": self.measured,
            "threshold": self.threshold,
            "caveat": self.caveat,
        }
        if self.periods:
            d["periods"] = [list(map(float, p)) for p in self.periods]
        if self.note:
            d["note"] = self.note
        return d

    def to_json(self, indent=2):
        return dumps(self.to_dict(), indent)


def _verdict(certified, kind, theorem, T, measured, threshold, note="", periods=()):
    return Verdict(kind if certified else INCONCLUSIVE, theorem, float(T), float(measured),
                   float(threshold), True, tuple(periods), note)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def certify_by_count(registry: PatchClassRegistry, R):
    """Crystal certificate from a patch count below ``T/(2R)``.

    ``R`` must be an upper bound for the covering radius of the set.
    """
    T = registry.T
    threshold = T / (2 * float(R))
    if not registry.exact:
        return _verdict(False, CERTIFIED_CRYSTAL, PATCH_COUNT, T, registry.count, threshold,
                        "census not exact: window may miss patch classes")
    return _verdict(registry.count < threshold, CERTIFIED_CRYSTAL, PATCH_COUNT, T,
                    registry.count, threshold)


def _upper(M):
    if isinstance(M, RepetitivityResult):
        return M.hi, M.exact
    if isinstance(M, Interval):
        return M.hi, True
    if isinstance(M, (tuple, list)):
        return float(M[1]), True
    return float(M), True


def certify_by_repetitivity(M, T, exact=True):
    """Crystal certificate from a repetitivity below ``T/3``.

    ``M`` is a :class:`RepetitivityResult`, an ``(lo, hi)`` bracket or a number;
    its upper end is compared.
    """
    hi, ok = _upper(M)
    threshold = float(T) / 3
    if not (ok and exact) or not math.isfinite(hi):
        return _verdict(False, CERTIFIED_CRYSTAL, REPETITIVITY, T, hi, threshold,
                        "repetitivity not exact on this window")
    return _verdict(hi < threshold, CERTIFIED_CRYSTAL, REPETITIVITY, T, hi, threshold)


def certify_period(M, T, n, kappa_lower=None, exact=True):
    """Single-period certificate: repetitivity below ``c(n) T``.

    ``c = κ/(κ+2)`` is evaluated at a proven lower bound of κ(n), which only
    lowers the threshold.
    """
    hi, ok = _upper(M)
    c = c_threshold(n) if kappa_lower is None else c_from_kappa(float(kappa_lower))
    threshold = c * float(T)
    if not (ok and exact) or not math.isfinite(hi):
        return _verdict(False, CERTIFIED_PERIODS, PERIOD, T, hi, threshold,
                        "repetitivity not exact on this window")
    return _verdict(hi < threshold, CERTIFIED_PERIODS, PERIOD, T, hi, threshold)


# ---------------------------------------------------------------------------
# periods
# ---------------------------------------------------------------------------


def period_mismatch(sample, p):
    """Largest distance from ``x ± p`` to the sample, over ``x`` in the window shrunk by ``|p|``."""
    p = np.asarray(p, dtype=float).reshape(sample.dim)
    norm = float(np.linalg.norm(p))
    if norm == 0:
        raise ValueError("trivial period p = 0")
    if norm >= sample.window.inradius:
        raise ValueError("|p| must be smaller than the window inradius")
    pts = sample.points[sample.window.depth(sample.points) >= norm]
    if not len(pts):
        return 0.0
    worst = 0.0
    for q in (pts + p, pts - p):
        d, _ = sample.tree.query(q)
        worst = max(worst, float(d.max()))
    return worst


def verify_period(sample, p):
    """True when ``p`` maps the sample onto itself wherever both ends lie in the window."""
    return period_mismatch(sample, p) <= sample.tol


def _sign_normalize(v, tol):
    for x in v:
        if abs(x) > tol:
            return (v if x > 0 else -v) + 0.0
    return v + 0.0


def _order_key(v):
    return (round(float(np.linalg.norm(v)), 9), tuple(np.round(v, 9)))


def independent_subset(vectors, tol=1e-9):
    """Greedy linearly independent subset, in the given order."""
    chosen = []
    for v in vectors:
        trial = np.array(chosen + [v])
        s = np.linalg.svd(trial, compute_uv=False)
        if s[-1] > tol * max(1.0, s[0]):
            chosen.append(v)
        if len(chosen) == len(v):
            break
    return chosen


def _base_index(sample, idx, base):
    target = sample.window.bounds()
    target = (target[0] + target[1]) / 2 if base is None else np.asarray(base, dtype=float)
    d = np.linalg.norm(sample.points[idx] - target, axis=1)
    return int(idx[np.argmin(d)])


def extract_periods(registry, sample=None, T=None, base=None, independent=True):
    """Verified periods among short differences of one center class.

    The class is that of the margin-valid center nearest ``base`` (default:
    the window center).  Differences shorter than ``2T/3`` are candidates;
    only those passing :func:`verify_period` are kept.  With ``independent``
    a greedy linearly independent subset is returned, shortest first.
    """
    sample = registry.sample if sample is None else sample
    T = registry.T if T is None else float(T)
    idx = np.concatenate([c.centers for c in registry.classes])
    i0 = _base_index(sample, idx, base)
    sigma = registry.sigma(registry.class_of(i0))
    diffs = sigma - sample.points[i0]
    norms = np.linalg.norm(diffs, axis=1)
    diffs = diffs[(norms > sample.tol) & (norms < 2 * T / 3) & (norms < sample.window.inradius)]
    cands = {}
    for d in diffs:
        d = _sign_normalize(d, sample.tol)
        cands.setdefault(tuple(np.round(d / sample.tol).astype(np.int64)), d)
    ordered = sorted(cands.values(), key=_order_key)
    verified = [v for v in ordered if verify_period(sample, v)]
    return independent_subset(verified) if independent else verified


def period_verdict(sample, periods, T=math.nan):
    """Verdict recording the worst mismatch of a list of candidate periods."""
    if not periods:
        return _verdict(False, CERTIFIED_PERIODS, PERIOD_VERIFICATION, T, math.inf, sample.tol,
                        "no verified period")
    worst = max(period_mismatch(sample, p) for p in periods)
    # the threshold is the matching tolerance; a zero mismatch sits strictly below it
    return _verdict(worst < sample.tol, CERTIFIED_PERIODS, PERIOD_VERIFICATION, T, worst,
                    sample.tol, periods=[tuple(map(float, p)) for p in periods])


# ---------------------------------------------------------------------------
# stagnation and coset structure
# ---------------------------------------------------------------------------


def _exact_census(sample, T, tol, resolution):
    reg = patch_census(sample, T, tol, resolution=resolution)
    if not reg.exact:
        raise ValueError(f"census at T={T} is not exact on this window")
    return reg


def stagnation_test(sample, U, V, R, tol=None, resolution=None):
    """True when the exact patch counts at ``U`` and ``V > U + 2R`` agree."""
    if not V > U + 2 * R:
        raise ValueError("gap too small: need V > U + 2R")
    a = _exact_census(sample, U, tol, resolution)
    b = _exact_census(sample, V, tol, resolution)
    return a.count == b.count


def stagnation_verdict(sample, U, V, R, tol=None, resolution=None):
    a = _exact_census(sample, U, tol, resolution)
    if not V > U + 2 * R:
        raise ValueError("gap too small: need V > U + 2R")
    b = _exact_census(sample, V, tol, resolution)
    growth = b.count - a.count
    return _verdict(growth == 0, CERTIFIED_CRYSTAL, STAGNATION, V, growth, 1.0,
                    f"N({U})={a.count}, N({V})={b.count}")


@dataclass
class CosetDecomposition:
    """``X = union_j (lattice + offsets[j])``; lattice basis vectors are rows."""

    basis: np.ndarray
    offsets: np.ndarray
    residual: float
    notes: list = field(default_factory=list)

    @property
    def count(self):
        return len(self.offsets)

    def generator(self):
        from .generators import CrystalGenerator

        return CrystalGenerator(self.basis, self.offsets)

    def to_dict(self):
        return {"basis": self.basis.tolist(), "offsets": self.offsets.tolist(), "residual": self.residual}

    def to_json(self, indent=2):
        return dumps(self.to_dict(), indent)


def _integer_row_basis(rows, n):
    """Row basis of the integer lattice spanned by ``rows`` (Euclidean elimination)."""
    rows = [list(r) for r in rows]
    out = []
    for j in range(n):
        live = [r for r in rows if r[j] != 0]
        rows = [r for r in rows if r[j] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[j]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                q = r[j] // piv[j]
                r = [a - q * b for a, b in zip(r, piv)]
                (nxt if r[j] != 0 else rows).append(r)
            live = nxt
        out.append(live[0])
    return out


def _refine(B, v, max_den=1000):
    """Basis of the lattice generated by ``B`` and the rationally dependent vector ``v``."""
    n = len(B)
    coords = [Fraction(float(c)).limit_denominator(max_den) for c in v @ np.linalg.inv(B)]
    q = math.lcm(*(c.denominator for c in coords))
    gens = [[q if i == j else 0 for j in range(n)] for i in range(n)]
    gens.append([int(c * q) for c in coords])
    H = np.array(_integer_row_basis(gens, n), dtype=float) / q
    return H @ B


def _lattice_from_class(diffs, tol):
    n = diffs.shape[1]
    norms = np.linalg.norm(diffs, axis=1)
    vecs = [_sign_normalize(d, tol) for d in diffs[norms > tol]]
    vecs.sort(key=_order_key)
    basis = independent_subset(vecs)
    if len(basis) < n:
        raise ValueError("not stagnated / window artifact: base class does not span a lattice")
    B = np.array(basis)
    for _ in range(8):
        c = diffs @ np.linalg.inv(B)
        err = np.abs(c - np.rint(c)).max(axis=1)
        bad = np.flatnonzero(err > 1e-6)
        if not len(bad):
            break
        B = _refine(B, diffs[bad[0]])
    else:
        raise ValueError("not stagnated / window artifact: base class is not a lattice")
    B = lll_reduce(B)
    B = np.array(sorted((_sign_normalize(b, tol) for b in B), key=_order_key))
    return B


def coset_decomposition(sample, U, tol=None, resolution=None):
    """Recover ``lattice + offsets`` from the ``U``-patch classes of a stagnated sample.

    The class of the center nearest the window center gives the lattice
    (shortest independent differences, refined until every difference is
    integral, then LLL reduced).  Each class is then one coset; offsets are
    reduced into the fundamental cell and sorted.
    """
    tol = sample.tol if tol is None else float(tol)
    reg = _exact_census(sample, U, tol, resolution)
    idx = np.concatenate([c.centers for c in reg.classes])
    i0 = _base_index(sample, idx, None)
    base = sample.points[i0]
    B = _lattice_from_class(reg.sigma(reg.class_of(i0)) - base, tol)
    inv = np.linalg.inv(B)

    offsets, residual = [], 0.0
    for k in range(reg.count):
        Y = reg.sigma(k)
        c = Y[0] @ inv
        c = c - np.floor(c + 1e-9)
        c[np.abs(c) < 1e-9] = 0.0
        off = c @ B
        off[np.abs(off) < 1e-12] = 0.0
        cy = (Y - off) @ inv
        residual = max(residual, float(np.linalg.norm((cy - np.rint(cy)) @ B, axis=1).max()))
        offsets.append(off)
    offsets = np.array(sorted(offsets, key=lambda o: tuple(np.round(o, 9))))
    if residual > tol:
        raise ValueError(f"not stagnated / window artifact: residual {residual:.3g} exceeds tol")
    coeff = offsets @ inv
    for a in range(len(coeff)):
        diff = coeff[a + 1 :] - coeff[a]
        if len(diff) and np.any(np.abs(diff - np.rint(diff)).max(axis=1) < 1e-9):
            raise ValueError("not stagnated / window artifact: two classes share a coset")
    dec = CosetDecomposition(B, offsets, residual)
    _check_round_trip(sample, dec, U, tol)
    return dec


def _check_round_trip(sample, dec, U, tol):
    inner = sample.window.shrink(U)
    regen = dec.generator().points_in(inner)
    regen = regen[inner.depth(regen) >= tol]
    if len(regen):
        d, _ = sample.tree.query(regen)
        if d.max() > tol:
            raise ValueError("not stagnated / window artifact: recovered crystal has points missing from the sample")
