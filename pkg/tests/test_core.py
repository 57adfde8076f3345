import math

import numpy as np
import pytest

from delone.core import (
    Ball,
    Box,
    DeloneConstants,
    Interval,
    PointSample,
    covering_radius,
    delone_constants,
    min_pairwise_distance,
)
from delone.generators import TAU, beatty_generator, crystal_generator
from delone.kappa import named_lattice
from oracles import gap_scan


def test_box_and_ball_basics():
    box = Box([-1, -2], [1, 2])
    assert box.dim == 2 and box.inradius == 1
    assert np.allclose(box.depth(np.array([[0, 0], [0.5, 1.5], [2, 0]])), [1, 0.5, -1])
    assert box.shrink(0.5).to_dict() == {"kind": "box", "lo": [-0.5, -1.5], "hi": [0.5, 1.5]}
    ball = Ball([0, 0], 2)
    assert ball.inradius == 2
    assert np.allclose(ball.project(np.array([[4.0, 0.0]])), [[2, 0]])
    with pytest.raises(ValueError):
        Box([0, 0], [0, 1])
    with pytest.raises(ValueError):
        Ball([0, 0], 0)


def test_sample_validation():
    with pytest.raises(ValueError, match="window"):
        PointSample(np.array([[2.0]]), Box([0], [1]))
    with pytest.raises(ValueError, match="packing radius"):
        PointSample(np.array([[0.0], [0.5]]), Box([0], [1]), declared_r=0.5)
    s = PointSample(np.array([[0.0], [1.0]]), Box([0], [1]), declared_r=0.5)
    assert s.index_of([1.0 + 1e-12]) == 1 and s.index_of([0.5]) is None


def test_sample_json_and_csv_round_trip():
    s = crystal_generator(named_lattice("hex")).sample(([-3, -3], [3, 3]))
    for back in (PointSample.from_json(s.to_json()), PointSample.from_csv(s.to_csv())):
        assert np.array_equal(back.points, s.points)
        assert back.window == s.window and back.tol == s.tol


def test_min_pairwise_distance_examples():
    z2 = crystal_generator(np.eye(2)).sample(([-3, -3], [3, 3]))
    assert min_pairwise_distance(z2) == pytest.approx(1.0)
    hexs = crystal_generator(named_lattice("hex")).sample(([-3, -3], [3, 3]))
    assert min_pairwise_distance(hexs) == pytest.approx(1.0)
    y = beatty_generator(TAU, 0.1).sample((0, 100))
    gaps = np.diff(y.points[:, 0])
    assert min_pairwise_distance(y) == pytest.approx(gaps.min(), abs=1e-15)
    with pytest.raises(ValueError, match="insufficient"):
        min_pairwise_distance(PointSample(np.array([[0.0]]), Box([-1], [1])))


def test_covering_radius_1d_matches_gap_scan():
    y = beatty_generator(TAU, 0.1).sample((0, 100))
    iv = covering_radius(y, Box([10], [90]))
    assert iv.exact
    assert iv.hi == pytest.approx(gap_scan(y.points[:, 0], 10, 90), abs=1e-15)
    inner = y.points[:, 0][(y.points[:, 0] > 9) & (y.points[:, 0] < 91)]
    assert iv.hi == pytest.approx(np.diff(inner).max() / 2, abs=1e-12)


def test_covering_radius_z2_and_hex_brackets():
    z2 = crystal_generator(np.eye(2)).sample(([-4, -4], [4, 4]))
    iv = covering_radius(z2, Box([-1, -1], [1, 1]), 1e-4)
    assert iv.lo <= math.sqrt(2) / 2 <= iv.hi
    assert iv.width <= 1e-4 * math.sqrt(2)
    hexs = crystal_generator(named_lattice("hex")).sample(([-4, -4], [4, 4]))
    iv = covering_radius(hexs, Box([-1, -1], [1, 1]), 1e-4)
    assert iv.lo <= 1 / math.sqrt(3) <= iv.hi


def test_covering_refinement_never_widens():
    hexs = crystal_generator(named_lattice("hex")).sample(([-4, -4], [4, 4]))
    region = Box([-1, -1], [1, 1])
    coarse = covering_radius(hexs, region, 0.02)
    fine = covering_radius(hexs, region, 0.01)
    assert fine.hi <= coarse.hi + 1e-15 and fine.lo >= coarse.lo - 1e-15


def test_covering_radius_requires_resolution_in_2d():
    z2 = crystal_generator(np.eye(2)).sample(([-2, -2], [2, 2]))
    with pytest.raises(ValueError):
        covering_radius(z2, Box([-1, -1], [1, 1]))


def test_delone_constants_lattices():
    z3 = crystal_generator(np.eye(3)).sample(([-3] * 3, [3] * 3))
    c = delone_constants(z3, Box([-1] * 3, [1] * 3), 0.01)
    assert c.r == pytest.approx(0.5)
    assert c.R == pytest.approx(math.sqrt(3) / 2, abs=0.01 * math.sqrt(3))
    assert c.kappa == pytest.approx(math.sqrt(3), abs=0.04)


def test_delone_constants_invariant():
    with pytest.raises(ValueError):
        DeloneConstants(1.0, 0.5)
    c = DeloneConstants(0.5, 0.5)  # equally spaced 1-D set
    assert c.kappa == 1.0
    assert Interval(1.0, 1.0).exact and Interval(1.0, 2.0).width == 1.0
