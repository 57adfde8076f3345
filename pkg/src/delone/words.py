"""Symbolic words on Z and Z^n: factor complexity, recurrence and full periodicity.

Two recurrence quantities are exposed.  :func:`recurrence` is the largest gap
between the starting positions of successive occurrences of a length-``m``
factor.  :func:`recurrence_function` is R_S(m), the shortest length of a
window that contains every length-``m`` factor; ``R_S(m) - m`` is one less
than the largest gap.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .generators import TAU, check_irrational


@dataclass(frozen=True, eq=False)
class Word:
    """Finite word over ``{0, ..., alphabet-1}``."""

    symbols: np.ndarray
    alphabet: Optional[int] = None

    def __post_init__(self):
        s = np.asarray(self.symbols)
        if s.ndim != 1 or len(s) == 0:
            raise ValueError("a word is a non-empty 1-D sequence")
        if not np.issubdtype(s.dtype, np.integer):
            if not np.all(s == np.rint(s)):
                raise ValueError("symbols must be integers")
        s = s.astype(np.int64)
        A = int(s.max()) + 1 if self.alphabet is None else int(self.alphabet)
        if A < 1 or s.min() < 0 or s.max() >= A:
            raise ValueError("symbols must lie in range(alphabet)")
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)
        object.__setattr__(self, "alphabet", A)

    def __len__(self):
        return len(self.symbols)

    @property
    def distinct(self):
        """Number of distinct symbols that occur."""
        return len(np.unique(self.symbols))

    def __str__(self):
        sep = "" if self.alphabet <= 10 else " "
        return sep.join(str(int(v)) for v in self.symbols)


@dataclass(frozen=True, eq=False)
class NdWord:
    """Symbols on a box of ``Z^n``, stored as an ``n``-dimensional array."""

    symbols: np.ndarray
    alphabet: Optional[int] = None

    def __post_init__(self):
        s = np.asarray(self.symbols).astype(np.int64)
        if s.ndim < 1 or s.size == 0:
            raise ValueError("box extents must be positive")
        A = int(s.max()) + 1 if self.alphabet is None else int(self.alphabet)
        if A < 1 or s.min() < 0 or s.max() >= A:
            raise ValueError("symbols must lie in range(alphabet)")
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)
        object.__setattr__(self, "alphabet", A)

    @property
    def dim(self):
        return self.symbols.ndim

    @property
    def extents(self):
        return tuple(self.symbols.shape)

    @property
    def distinct(self):
        return len(np.unique(self.symbols))


def _as_nd(word):
    return NdWord(word.symbols, word.alphabet) if isinstance(word, Word) else word


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------


def _floor_products(m, alpha):
    """``floor(m*alpha)`` for integer ``m``, exact for the binary value of ``alpha``."""
    x = m * alpha
    out = np.floor(x).astype(np.int64)
    risky = np.flatnonzero(np.abs(x - np.rint(x)) < 1e-6 * np.maximum(1.0, np.abs(x)))
    if len(risky):
        a = Fraction(alpha)
        for i in risky:
            out[i] = math.floor(int(m[i]) * a)
    return out


def sturmian_word(alpha, length, start=1):
    """Symbols ``floor((m+1)a) - floor(m a) - floor(a)`` for ``m = start, ..., start+length-1``.

    The default ``start=1`` gives 1,0,1,1,0,1,0,1,... for the golden ratio.
    """
    alpha = float(alpha)
    if length < 1:
        raise ValueError("length must be >= 1")
    check_irrational(alpha)
    m = np.arange(start, start + length + 1, dtype=np.int64)
    f = _floor_products(m, alpha)
    return Word(np.diff(f) - math.floor(alpha), 2)


def fibonacci_word(length, start=1):
    return sturmian_word(TAU, length, start)


def periodic_word(pattern, length):
    pattern = np.asarray(pattern, dtype=np.int64)
    return Word(np.resize(pattern, length))


# ---------------------------------------------------------------------------
# 1-D complexity
# ---------------------------------------------------------------------------


def factor_ranks(word, m):
    """Dense label of the length-``m`` factor starting at each position (exact)."""
    s = word.symbols
    n = len(s)
    if not 1 <= m <= n:
        raise ValueError("factor length must satisfy 1 <= m <= len(word)")
    # prefix doubling: labels for length a+b from labels for a and b
    _, power = np.unique(s, return_inverse=True)
    p, out, done = 1, None, 0
    while True:
        if m & p:
            out = power[: n - p + 1] if out is None else _pair(out, power, done, n - done - p + 1)
            done += p
        if 2 * p > m:
            return out
        power = _pair(power, power, p, n - 2 * p + 1)
        p *= 2


def _pair(a, b, shift, length):
    key = a[:length].astype(np.int64) * (int(b.max()) + 1) + b[shift : shift + length]
    return np.unique(key, return_inverse=True)[1]


def _rank_levels(s, m_max):
    """Yield the factor labels for lengths 1..m_max by one-symbol extension."""
    _, ranks = np.unique(s, return_inverse=True)
    yield ranks
    A = int(s.max()) + 1
    for m in range(2, m_max + 1):
        key = ranks[:-1].astype(np.int64) * A + s[m - 1 :]
        _, ranks = np.unique(key, return_inverse=True)
        yield ranks


def word_complexity(word, m):
    """N_S(m): number of distinct length-``m`` factors."""
    return int(factor_ranks(word, m).max()) + 1


def complexity_profile(word, m_max):
    """``[N_S(1), ..., N_S(m_max)]``."""
    if not 1 <= m_max <= len(word):
        raise ValueError("m_max must satisfy 1 <= m_max <= len(word)")
    return [int(r.max()) + 1 for r in _rank_levels(word.symbols, m_max)]


class Recurrence(NamedTuple):
    """``value`` is a lower bound only when ``complete`` is False."""

    m: int
    value: int
    complete: bool


def _max_gap(ranks):
    order = np.argsort(ranks, kind="stable")
    r = ranks[order]
    same = r[1:] == r[:-1]
    gaps = np.diff(order)[same]
    counts = np.bincount(ranks)
    complete = bool((counts >= 2).all())
    return (int(gaps.max()) if len(gaps) else 0), complete


def recurrence(word, m):
    """Largest gap between starts of successive occurrences of the same length-``m`` factor.

    ``complete`` is False when some factor occurs only once in the word.
    """
    gap, complete = _max_gap(factor_ranks(word, m))
    return Recurrence(m, gap, complete)


def recurrence_function(word, m):
    """R_S(m): shortest window length containing every length-``m`` factor (interior gaps)."""
    gap, complete = _max_gap(factor_ranks(word, m))
    return Recurrence(m, gap + m - 1, complete)


def recurrence_profile(word, m_max):
    """Largest gaps for ``m = 1..m_max`` in one pass."""
    out = []
    for m, ranks in enumerate(_rank_levels(word.symbols, m_max), start=1):
        gap, complete = _max_gap(ranks)
        out.append(Recurrence(m, gap, complete))
    return out


def smallest_period(word):
    """Smallest ``p`` with ``s[i] = s[i+p]`` throughout the finite word (prefix function)."""
    s = word.symbols
    pi = [0] * len(s)
    k = 0
    for i in range(1, len(s)):
        while k and s[i] != s[k]:
            k = pi[k - 1]
        if s[i] == s[k]:
            k += 1
        pi[i] = k
    return len(s) - pi[-1]


def convergent_denominators(alpha, limit):
    """Continued-fraction denominators ``q_0 = 1, q_1, ...`` up to the first exceeding ``limit``."""
    f = Fraction(float(alpha))
    q0, q1 = 0, 1
    out = [1]
    f = f - math.floor(f)
    while f and out[-1] <= limit:
        f = 1 / f
        a = math.floor(f)
        q0, q1 = q1, a * q1 + q0
        if q1 != out[-1]:
            out.append(q1)
        f = f - a
    return out


def sturmian_recurrence(alpha, m):
    """``q_k + q_(k-1)`` for ``q_(k-1) <= m < q_k``: the largest gap of a Sturmian word."""
    q = convergent_denominators(alpha, m)
    k = next(i for i in range(1, len(q)) if q[i - 1] <= m < q[i])
    return q[k] + q[k - 1]


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    m: int
    N: int
    bound: int  # m + A - 1
    gap: int
    M: int  # R_S(m) - m = gap - 1
    complete: bool

    @property
    def ratio(self):
        return self.M / self.m

    @property
    def n_ok(self):
        return self.N >= self.bound

    @property
    def m_ok(self):
        return self.M >= self.bound

    @property
    def mn_ok(self):
        return self.M >= self.N


@dataclass
class MorseHedlundReport:
    rows: list
    alphabet: int
    period: Optional[int] = None
    limsup_target: float = TAU + 1

    @property
    def max_ratio(self):
        return max(r.ratio for r in self.rows)

    def to_csv(self):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["m", "N", "m+A-1", "gap", "M", "complete", "N_ge_bound", "M_ge_bound", "M_ge_N", "ratio", "ratio_le_tau_plus_1"])
        for r in self.rows:
            w.writerow([r.m, r.N, r.bound, r.gap, r.M, int(r.complete), int(r.n_ok), int(r.m_ok),
                        int(r.mn_ok), format(r.ratio, ".17g"), int(r.ratio <= self.limsup_target)])
        return out.getvalue()


def morse_hedlund_report(word, m_max):
    """Table of N_S(m), the bound m+A-1, recurrence gaps and M_S(m)/m for m = 1..m_max.

    ``A`` is the number of distinct symbols that occur in the word.
    """
    A = word.distinct
    rows = []
    for m, ranks in enumerate(_rank_levels(word.symbols, m_max), start=1):
        gap, complete = _max_gap(ranks)
        rows.append(ReportRow(m, int(ranks.max()) + 1, m + A - 1, gap, gap - 1, complete))
    period = smallest_period(word)
    return MorseHedlundReport(rows, A, period if period <= len(word) // 2 else None)


# ---------------------------------------------------------------------------
# n-D complexity and periodicity
# ---------------------------------------------------------------------------


def cubic_patterns(word, m):
    w = _as_nd(word)
    if not 1 <= m <= min(w.extents):
        raise ValueError("cube side must satisfy 1 <= m <= min(extents)")
    views = sliding_window_view(w.symbols, (m,) * w.dim)
    return views.reshape(-1, m**w.dim)


def cubic_complexity(word, m):
    """Number of distinct ``m x ... x m`` sub-cube patterns fully inside the box."""
    pats = np.ascontiguousarray(cubic_patterns(word, m))
    return len(np.unique(pats, axis=0))


def is_period(word, v):
    """True when ``S(x+v) = S(x)`` for every ``x`` with both ends in the box."""
    s = _as_nd(word).symbols
    v = tuple(int(c) for c in v)
    if not any(v):
        raise ValueError("trivial period 0")
    if any(abs(c) >= e for c, e in zip(v, s.shape)):
        return False
    a = tuple(slice(max(0, -c), e - max(0, c)) for c, e in zip(v, s.shape))
    b = tuple(slice(x.start + c, x.stop + c) for x, c in zip(a, v))
    return bool(np.array_equal(s[a], s[b]))


def find_periods(word, reach=None):
    """Periods of the box word with sup-norm at most ``reach`` (default: a quarter of the smallest extent).

    Vectors are sign-normalized and sorted by Euclidean length, then lexicographically.
    """
    w = _as_nd(word)
    reach = max(1, min(w.extents) // 4) if reach is None else int(reach)
    cands = []
    for v in itertools.product(range(-reach, reach + 1), repeat=w.dim):
        nz = [c for c in v if c]
        if nz and nz[0] > 0:
            cands.append(v)
    cands.sort(key=lambda v: (sum(c * c for c in v), v))
    return [v for v in cands if is_period(w, v)]


def _independent(vectors, n):
    chosen = []
    for v in vectors:
        if np.linalg.matrix_rank(np.array(chosen + [v], dtype=float)) > len(chosen):
            chosen.append(v)
        if len(chosen) == n:
            break
    return chosen


@dataclass
class PeriodicityResult:
    """``kind`` is ``fully_periodic``, ``aperiodic_witness`` or ``inconclusive``."""

    kind: str
    m: Optional[int]
    complexities: list
    basis: list = field(default_factory=list)
    periods: list = field(default_factory=list)

    def to_dict(self):
        return {"kind": self.kind, "m": self.m, "complexities": self.complexities,
                "basis": [list(v) for v in self.basis], "periods": [list(v) for v in self.periods]}


def full_periodicity_test(word, m_max=None, reach=None):
    """Decide full periodicity of a box word from its cubic complexity.

    A stagnation ``N(m+1) = N(m)`` triggers a search for ``n`` independent
    periods verified on the box.  Without stagnation the result is an
    aperiodicity witness at the first ``m`` from which ``N`` grows strictly
    up to ``m_max``; verified short periods are reported either way.
    """
    w = _as_nd(word)
    m_max = max(2, min(w.extents) // 4) if m_max is None else int(m_max)
    m_max = min(m_max, min(w.extents))
    N = [cubic_complexity(w, m) for m in range(1, m_max + 1)]
    periods = find_periods(w, reach)
    basis = _independent(periods, w.dim)
    stalls = [m for m in range(1, m_max) if N[m] == N[m - 1]]
    if stalls:
        if len(basis) == w.dim:
            return PeriodicityResult("fully_periodic", stalls[0], N, basis, periods)
        return PeriodicityResult("inconclusive", stalls[0], N, basis, periods)
    if m_max < 2:
        return PeriodicityResult("inconclusive", None, N, basis, periods)
    return PeriodicityResult("aperiodic_witness", 1, N, basis, periods)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------


def _parse_symbols(line):
    if any(ch in line for ch in " \t,"):
        return [int(t) for t in line.replace(",", " ").split()]
    return [int(ch) for ch in line]


def parse_word(text):
    """Parse a 1-D word (one line) or an n-D word (header ``dim ext1 ... extn alphabet``)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty word file")
    if len(lines) == 1:
        return Word(_parse_symbols(lines[0]))
    head = [int(t) for t in lines[0].split()]
    n = head[0]
    if len(head) != n + 2:
        raise ValueError("header must read: dim ext1 ... extn alphabet")
    ext, A = head[1:-1], head[-1]
    body = [v for ln in lines[1:] for v in _parse_symbols(ln)]
    if len(body) != math.prod(ext):
        raise ValueError("symbol count does not match the box extents")
    arr = np.array(body, dtype=np.int64).reshape(ext)
    return NdWord(arr, A) if n > 1 else Word(arr, A)


def format_word(word):
    if isinstance(word, Word):
        return str(word) + "\n"
    s = word.symbols
    head = " ".join(str(v) for v in (word.dim, *word.extents, word.alphabet))
    rows = s.reshape(-1, s.shape[-1])
    sep = "" if word.alphabet <= 10 else " "
    return head + "\n" + "\n".join(sep.join(str(int(v)) for v in r) for r in rows) + "\n"


def read_word(path):
    with open(path) as fh:
        return parse_word(fh.read())


def write_word(word, path):
    with open(path, "w") as fh:
        fh.write(format_word(word))
