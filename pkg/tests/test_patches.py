import math

import numpy as np
import pytest

from delone.core import Box, PointSample, covering_radius
from delone.generators import TAU, crystal_generator, fibonacci_generator, product_generator
from delone.kappa import named_lattice
from delone.patches import (
    CurvePoint,
    _enforce_monotone,
    canonicalize,
    extract_patch,
    patch_census,
    patch_count_curve,
    repetitivity,
    repetitivity_curve,
)
from oracles import brute_force_class_count, fibonacci_symbolic_count

DELTA = 1 / math.sqrt(5)
R_FIB = TAU**2 / (2 * math.sqrt(5))
r_FIB = TAU / (2 * math.sqrt(5))


@pytest.fixture(scope="module")
def fib():
    return fibonacci_generator().sample((-500, 500))


@pytest.fixture(scope="module")
def z2():
    return crystal_generator(np.eye(2)).sample(([-10, -10], [10, 10]))


def test_extract_patch_open_ball(z2):
    assert len(extract_patch(z2, (0, 0), 1.0)) == 1
    p = extract_patch(z2, (0, 0), 1.01)
    assert len(p) == 5
    assert sorted(map(tuple, p.offsets)) == [(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]
    with pytest.raises(ValueError, match="not a point"):
        extract_patch(z2, (0.5, 0), 1.0)
    with pytest.raises(ValueError, match="margin"):
        extract_patch(z2, (9, 9), 2.0)


def test_canonical_patch_translation_invariance(z2):
    a = canonicalize(extract_patch(z2, (0, 0), 2.5), 1e-9)
    b = canonicalize(extract_patch(z2, (3, -4), 2.5), 1e-9)
    assert a == b and a.digest == b.digest
    shifted = PointSample(z2.points + [0.123, -7.77], Box([-9.877, -17.77], [10.123, 2.23]))
    c = canonicalize(extract_patch(shifted, (0.123, -7.77), 2.5), 1e-9)
    assert c == a


def test_fibonacci_patches_with_different_words_differ(fib):
    pts = fib.points[:, 0]
    i = np.argmin(np.abs(pts))
    gaps = np.diff(pts)
    j = next(k for k in range(i + 1, i + 20) if gaps[k] != pytest.approx(gaps[i]))
    a = canonicalize(extract_patch(fib, pts[i:i + 1], 1.0), 1e-9)
    b = canonicalize(extract_patch(fib, pts[j:j + 1], 1.0), 1e-9)
    assert a != b


@pytest.mark.parametrize("name", ["Z2", "hex", "fcc"])
def test_lattice_has_one_class(name):
    B = named_lattice(name)
    n = len(B)
    s = crystal_generator(B).sample(([-5.0] * n, [5.0] * n))
    for T in (0.5, 1.0, 1.7, 2.5):
        reg = patch_census(s, T, check_exact=False)
        assert reg.count == 1


@pytest.mark.parametrize("T", [0.5, 1.0, 2.0, 3.3, 5.0, 10.0, 20.0, 40.0])
def test_fibonacci_counts_match_symbolic_oracle(fib, T):
    reg = patch_census(fib, T)
    assert reg.exact
    assert reg.count == fibonacci_symbolic_count(T)
    assert reg.count <= 2 * math.floor(T + DELTA) + 1
    assert reg.count >= T / (2 * R_FIB)
    assert reg.n_centers == len(fib.margin_valid(T))


def test_small_T_gives_one_class_and_M_equals_R(fib):
    T = 2 * r_FIB
    reg = patch_census(fib, T)
    assert reg.count == 1
    M = repetitivity(fib, T)
    assert M.exact and M.hi == pytest.approx(R_FIB, abs=1e-12)


def test_census_matches_brute_force_on_crystal():
    s = crystal_generator(np.eye(2), [[0, 0], [0.5, 0.25], [0.25, 0.6]]).sample(([-4, -4], [4, 4]))
    for T in (0.6, 1.0, 1.5):
        reg = patch_census(s, T, check_exact=False)
        assert reg.count == brute_force_class_count(s.points, s.window, T, s.tol)


def test_census_translation_invariance(fib):
    v = 3.21
    shifted = PointSample(fib.points + v, Box([-500 + v], [500 + v]))
    a = patch_census(fib, 10.0, check_exact=False)
    b = patch_census(shifted, 10.0, check_exact=False)
    assert a.count == b.count
    assert sorted(len(c.centers) for c in a.classes) == sorted(len(c.centers) for c in b.classes)


def test_census_errors(z2):
    with pytest.raises(ValueError, match="too small"):
        patch_census(z2, 11.0)
    with pytest.raises(ValueError):
        patch_census(z2, 0.0)


def test_registry_json(z2):
    reg = patch_census(z2, 1.5)
    d = reg.to_dict(with_centers=False)
    assert d["count"] == 1 and d["exact"] is True and d["classes"][0]["patch_points"] == 9


def test_lattice_repetitivity_equals_R():
    s = crystal_generator(named_lattice("hex")).sample(([-8, -8], [8, 8]))
    M = repetitivity(s, 1.5, resolution=1e-3)
    assert M.exact
    assert M.lo - 1e-12 <= 1 / math.sqrt(3) <= M.hi + 1e-12


def test_M_at_least_covering_radius(fib):
    cov = covering_radius(fib, Box([-400], [400]))
    for T in (1.0, 5.0):
        assert repetitivity(fib, T).hi >= cov.lo - 1e-12


@pytest.mark.parametrize("T", [1.0, 5.0, 10.0, 20.0, 40.0])
def test_fibonacci_repetitivity_bounds(fib, T):
    M = repetitivity(fib, T)
    assert M.exact and M.lo == M.hi
    assert M.hi <= (TAU + 1) * T + 0.5 + (TAU + 1.5) * DELTA
    assert M.hi <= TAU**2 * T + TAU**2 / (2 * math.sqrt(5))
    assert M.hi >= T / 3


def test_product_counts_and_repetitivity():
    eta, T, res = 0.2, 1.0, 1e-3
    y = fibonacci_generator().sample((-30, 30))
    x = product_generator(fibonacci_generator(), eta, 2).sample(([-30, -6], [30, 6]))
    assert patch_census(x, T, check_exact=False).count == patch_census(y, T).count
    My = repetitivity(y, T)
    Mx = repetitivity(x, T, resolution=res)
    assert Mx.exact
    assert Mx.lo**2 <= My.hi**2 + eta**2 / 4 + 1e-12
    assert Mx.hi <= math.sqrt(My.hi**2 + eta**2 / 4) + res * math.sqrt(2)


def test_curves(fib):
    Ts = [1, 2, 5, 10, 20]
    N = patch_count_curve(fib, Ts)
    vals = [p.lo for p in N.samples]
    assert vals == sorted(vals) and all(p.exact for p in N.samples)
    for p in N.samples:
        assert p.lo <= (1 + DELTA) * p.T / R_FIB + 1 + 2 * DELTA
    M = repetitivity_curve(fib, Ts)
    hi = [p.hi for p in M.samples]
    assert hi == sorted(hi)
    csv = N.to_csv().splitlines()
    assert csv[0] == "T,value_lo,value_hi,exact_flag" and csv[1] == "1,3,3,1"


def test_crystal_curve_bounded_by_coset_count():
    s = crystal_generator(np.eye(2), [[0, 0], [0.5, 0.25], [0.25, 0.6]]).sample(([-10, -10], [10, 10]))
    curve = patch_count_curve(s, [0.3, 1.0, 2.0, 3.0])
    assert max(p.hi for p in curve.samples) <= 3


def test_monotone_enforcement():
    with pytest.raises(RuntimeError):
        _enforce_monotone([CurvePoint(1, 3, 3, True), CurvePoint(2, 2, 2, True)])
    with pytest.warns(UserWarning):
        out = _enforce_monotone([CurvePoint(1, 3, 3, False), CurvePoint(2, 2, 2, True)])
    assert out[1].exact is False
    with pytest.raises(ValueError):
        patch_count_curve(PointSample(np.array([[0.0], [1.0]]), Box([-1], [2])), [2, 1])
