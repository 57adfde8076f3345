"""Acceptance suite: one PASS/FAIL line per criterion, each with its time budget.

Run under pytest, or directly with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from delone.core import Box, PointSample, covering_radius
from delone.crystallinity import (
    CERTIFIED_CRYSTAL,
    INCONCLUSIVE,
    certify_by_count,
    certify_by_repetitivity,
    coset_decomposition,
    extract_periods,
    stagnation_test,
    verify_period,
)
from delone.generators import TAU, crystal_generator, fibonacci_generator, perturb_one_point, product_generator
from delone.kappa import c_threshold, kappa_bounds, kappa_lattice, named_lattice
from delone.patches import patch_census, repetitivity
from delone.words import (
    convergent_denominators,
    fibonacci_word,
    morse_hedlund_report,
    periodic_word,
    recurrence,
    sturmian_word,
    word_complexity,
)
from oracles import brute_force_class_count, gap_scan, random_planar_set

DELTA = 1 / math.sqrt(5)  # |delta| for the Fibonacci set
R_FIB = TAU**2 / (2 * math.sqrt(5))
FIB_T = (5.0, 10.0, 20.0, 40.0)


@pytest.fixture
def report(capsys):
    def _report(k, ok, detail, elapsed, budget):
        within = elapsed < budget
        status = "PASS" if ok and within else "FAIL"
        line = f"{status} criterion {k}: {detail} ({elapsed:.2f}s, budget {budget:g}s)"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
        assert within, line

    return _report


@pytest.fixture(scope="module")
def fib():
    return fibonacci_generator().sample((-500, 500))


def _q_bracket(m):
    q = convergent_denominators(TAU, m)
    k = next(i for i in range(1, len(q)) if q[i - 1] <= m < q[i])
    return q[k], q[k - 1]


def test_criterion_01_sturmian_complexity(report):
    t = time.perf_counter()
    w = sturmian_word(TAU, 10**4)
    bad = [m for m in range(1, 51) if word_complexity(w, m) != m + 1]
    report(1, not bad, f"N(m) = m+1 for 1..50, mismatches {bad}", time.perf_counter() - t, 1)


def test_criterion_02_fibonacci_recurrence(report):
    t = time.perf_counter()
    w = fibonacci_word(10**5)
    bad = []
    for m in range(1, 101):
        qk, qk1 = _q_bracket(m)
        r = recurrence(w, m)
        if not r.complete or r.value != qk + qk1:
            bad.append(m)
    report(2, not bad, f"recurrence(m) = q_k + q_(k-1) for m <= 100, mismatches {bad}",
           time.perf_counter() - t, 10)


def test_criterion_03_morse_hedlund(report):
    t = time.perf_counter()
    rep = morse_hedlund_report(sturmian_word(TAU, 10**4), 50)
    lower_ok = all(row.N >= row.m + rep.alphabet - 1 for row in rep.rows)
    per = periodic_word([0, 1, 1, 0, 1, 0, 0], 5000)
    per_rep = morse_hedlund_report(per, 200)
    upper_ok = per_rep.period == 7 and all(row.N <= 7 for row in per_rep.rows)
    report(3, lower_ok and upper_ok,
           f"Sturmian N >= m+A-1 for m <= 50: {lower_ok}; period-7 N <= 7 for m <= 200: {upper_ok}",
           time.perf_counter() - t, 10)


def test_criterion_04_limsup_constant(report):
    t = time.perf_counter()
    F15 = 610
    w = fibonacci_word(50000)
    rep = morse_hedlund_report(w, F15)
    complete = all(row.complete for row in rep.rows)
    top = rep.max_ratio
    ok = complete and TAU + 1 - 0.02 <= top <= TAU + 1
    report(4, ok, f"max M(m)/m over m <= {F15} = {top:.6f} in [{TAU + 1 - 0.02:.4f}, {TAU + 1:.4f}]",
           time.perf_counter() - t, 10)


def test_criterion_05_patch_count_bound(report, fib):
    t = time.perf_counter()
    details, ok = [], True
    for T in FIB_T:
        reg = patch_census(fib, T)
        hi = 2 * math.floor(T + DELTA) + 1
        good = reg.exact and T / (2 * R_FIB) <= reg.count <= hi
        ok &= good
        details.append(f"T={T:g}: {T / (2 * R_FIB):.2f} <= {reg.count} <= {hi}")
    report(5, ok, "; ".join(details), time.perf_counter() - t, 30)


def test_criterion_06_repetitivity_bound(report, fib):
    t = time.perf_counter()
    details, ok = [], True
    for T in FIB_T:
        M = repetitivity(fib, T)
        b1 = (TAU + 1) * T + 0.5 + (TAU + 1.5) * DELTA
        b2 = TAU**2 * T + TAU**2 / (2 * math.sqrt(5))
        good = M.exact and M.lo == M.hi and M.hi <= b1 and M.hi <= b2
        ok &= good
        details.append(f"T={T:g}: M={M.hi:.4f} <= {min(b1, b2):.4f}")
    report(6, ok, "; ".join(details), time.perf_counter() - t, 30)


def test_criterion_07_crystal_certificates(report, fib):
    t = time.perf_counter()
    z2 = crystal_generator(np.eye(2)).sample(([-20, -20], [20, 20]))
    R = math.sqrt(2) / 2
    v1 = certify_by_count(patch_census(z2, 1.5), R)
    v2 = certify_by_repetitivity(repetitivity(z2, 4.0), 4.0)
    z_ok = v1.kind == CERTIFIED_CRYSTAL and v2.kind == CERTIFIED_CRYSTAL
    fib_ok = True
    for T in (1.0,) + FIB_T:
        reg = patch_census(fib, T)
        fib_ok &= certify_by_count(reg, R_FIB).kind == INCONCLUSIVE
        fib_ok &= certify_by_repetitivity(reg.repetitivity, T, exact=reg.exact).kind == INCONCLUSIVE
    report(7, z_ok and fib_ok, f"Z^2 count/repetitivity: {v1.kind}/{v2.kind}; Fibonacci never fires: {fib_ok}",
           time.perf_counter() - t, 10)


def test_criterion_08_period_extraction(report):
    t = time.perf_counter()
    x = product_generator(fibonacci_generator(), 0.2, 2).sample(([-50, -50], [50, 50]))
    periods = extract_periods(patch_census(x, 1.0, check_exact=False))
    hit = [p for p in periods if np.abs(np.asarray(p) - (0, 0.2)).max() < 1e-9 and verify_period(x, p)]
    g = perturb_one_point(crystal_generator(np.eye(2)), (0, 0), (0.1, 0))
    y = g.sample(([-15, -15], [15, 15]))
    found = extract_periods(patch_census(y, 1.5, check_exact=False), independent=False)
    verified = [p for p in found if verify_period(y, p)]
    ok = bool(hit) and not verified
    report(8, ok, f"product periods {[tuple(np.round(p, 12)) for p in periods]}; perturbed verified {verified}",
           time.perf_counter() - t, 30)


def test_criterion_09_coset_decomposition(report):
    t = time.perf_counter()
    C = crystal_generator(np.eye(2), [[0, 0], [0.5, 0.25], [0.25, 0.6]])
    s = C.sample(([-12, -12], [12, 12]))
    R = C.declared_R
    U = 1.0
    stag = stagnation_test(s, U, U + 2 * R + 0.01, R)
    dec = coset_decomposition(s, U)
    ok = stag and dec.count == 3 and dec.residual < 1e-9 and abs(abs(np.linalg.det(dec.basis)) - 1) < 1e-9
    report(9, ok, f"stagnation {stag}; {dec.count} cosets, residual {dec.residual:.1e}",
           time.perf_counter() - t, 10)


def test_criterion_10_kappa_values(report):
    t = time.perf_counter()
    k_hex = kappa_lattice(named_lattice("hex"))
    k_bcc = kappa_lattice(named_lattice("A3*"))
    b24 = kappa_bounds(24).bracket()
    c2 = c_threshold(2)
    ok = (abs(k_hex - 2 / math.sqrt(3)) < 1e-9 and abs(k_bcc - math.sqrt(5 / 3)) < 1e-6
          and b24 == (4 * math.sqrt(3) / 5, math.sqrt(2)) and abs(c2 - (math.sqrt(3) - 1) / 2) < 1e-12)
    report(10, ok, f"hex {k_hex:.12f}, A3* {k_bcc:.9f}, kappa(24) in [{b24[0]:.6f}, {b24[1]:.6f}], c(2) {c2:.12f}",
           time.perf_counter() - t, 5)


def test_criterion_11_oracle_equivalence(report):
    t = time.perf_counter()
    rng = np.random.default_rng(20240611)
    mismatches = []
    for trial in range(20):
        s = random_planar_set(rng, 200)
        T = float(rng.uniform(0.6, min(2.0, s.window.inradius - 0.1)))
        got = patch_census(s, T, check_exact=False).count
        want = brute_force_class_count(s.points, s.window, T, s.tol)
        if got != want:
            mismatches.append((trial, got, want))
    for trial in range(20):
        xs = np.sort(rng.uniform(-50, 50, int(rng.integers(2, 201))))
        a, b = float(xs.min()), float(xs.max())
        iv = covering_radius(PointSample(xs[:, None], Box([a], [b])))
        if not (iv.exact and iv.hi == gap_scan(xs, a, b)):
            mismatches.append(("1d", trial, iv.hi))
    report(11, not mismatches, f"20 planar censuses and 20 1-D covering radii vs oracles, mismatches {mismatches}",
           time.perf_counter() - t, 60)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
