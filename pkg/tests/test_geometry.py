import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bogovskii.config import CombConfig
from bogovskii.errors import BasePointOutside
from bogovskii.geometry import (
    Ball,
    Box,
    Difference,
    DomainPair,
    Union,
    brute_force_distance,
    epsilon_interior,
    normalize,
    shape_from_json,
    validate_cover,
)
from bogovskii.verify import comb_heights, comb_shape, comb_x0

UNIT_BALL = Ball((0.0, 0.0), 1.0)
UNIT_SQUARE = Box((0.0, 0.0), (1.0, 1.0))
COMB = comb_shape(CombConfig())

coord = st.floats(-1.5, 1.5, allow_nan=False)
point = st.tuples(coord, coord)


def test_contains_ball_center_and_boundary():
    assert UNIT_BALL.contains(np.array([[0.0, 0.0]]))[0]
    assert not UNIT_BALL.contains(np.array([[1.0, 0.0]]))[0]


def test_comb_slit_point_is_outside():
    h1 = comb_heights(CombConfig())(1)
    assert not COMB.contains(np.array([[0.5, h1]]))[0]
    assert COMB.contains(np.array([[0.5, h1 + 1e-6]]))[0]


def test_distance_examples():
    assert UNIT_BALL.dist_to_complement(np.array([[0.0, 0.0]]))[0] == pytest.approx(1.0)
    assert UNIT_SQUARE.dist_to_complement(np.array([[0.5, 0.25]]))[0] == pytest.approx(0.25)


def test_comb_distance_matches_brute_force():
    x = np.array([comb_x0(CombConfig()), [0.3, 0.06], [0.95, 0.02]])
    exact = COMB.dist_to_complement(x)
    brute = brute_force_distance(COMB, x, spacing=1e-4)
    np.testing.assert_allclose(exact, brute, rtol=1e-3)
    # top channel: the nearest obstacle is the slit below or the top wall
    h1 = comb_heights(CombConfig())(1)
    assert exact[0] == pytest.approx((1 - h1) / 2)


@given(point, point)
def test_distance_is_one_lipschitz(a, b):
    for shape in (UNIT_BALL, UNIT_SQUARE, COMB):
        da, db = shape.dist_to_complement(np.array([a, b]))
        assert abs(da - db) <= np.linalg.norm(np.subtract(a, b)) + 1e-12


@given(point)
def test_contains_iff_positive_distance(x):
    for shape in (UNIT_BALL, UNIT_SQUARE, COMB):
        X = np.array([x])
        assert bool(shape.contains(X)[0]) == bool(shape.dist_to_complement(X)[0] > 0)


@settings(max_examples=50)
@given(point)
def test_difference_distance_never_exceeds_brute_force(x):
    shape = Difference((UNIT_SQUARE, Ball((0.5, 0.5), 0.2)))
    X = np.array([x])
    brute = brute_force_distance(shape, X, spacing=2e-3)[0]
    assert shape.dist_to_complement(X)[0] <= brute + 1e-12


def test_shape_json_round_trip():
    for shape in (UNIT_BALL, UNIT_SQUARE, COMB, Union((UNIT_BALL, Ball((2.0, 0.0), 0.5)))):
        assert shape_from_json(shape.to_json()) == shape


def test_normalize_ball():
    pair = normalize(DomainPair(UNIT_BALL, UNIT_BALL, (0.0, 0.0)))
    assert pair.scale == pytest.approx(15.0)
    assert pair.d_hat(np.array([[0.0, 0.0]]))[0] == pytest.approx(15.0)


def test_normalize_square():
    pair = normalize(DomainPair(UNIT_SQUARE, UNIT_SQUARE, (0.5, 0.5)))
    assert pair.scale == pytest.approx(30.0)
    assert pair.d_hat(np.array([[0.5, 0.5]]))[0] == pytest.approx(15.0)


def test_normalize_compliant_pair_unchanged():
    big = Ball((0.0, 0.0), 20.0)
    pair = DomainPair(big, big, (0.0, 0.0))
    assert normalize(pair) is pair
    once = normalize(DomainPair(UNIT_BALL, UNIT_BALL, (0.0, 0.0)))
    assert normalize(once) is once


def test_normalize_unit_ball_inside():
    # thin cover margin: the unit-ball condition drives the factor
    pair = normalize(DomainPair(Ball((0.0, 0.0), 0.05), Ball((0.0, 0.0), 1.0), (0.0, 0.0)))
    assert pair.d_omega(np.array([[0.0, 0.0]]))[0] >= 1.0
    assert pair.d_hat(np.array([[0.0, 0.0]]))[0] >= 15.0


def test_normalize_rejects_outside_base_point():
    with pytest.raises(BasePointOutside):
        normalize(DomainPair(UNIT_BALL, UNIT_BALL, (1.0, 0.0)))


def test_original_coordinates_round_trip():
    pair = normalize(DomainPair(UNIT_SQUARE, UNIT_SQUARE, (0.5, 0.5)))
    x = np.array([[0.1, 0.9], [0.7, 0.2]])
    np.testing.assert_allclose(pair.to_original(pair.from_original(x)), x)


def test_epsilon_interior():
    big = Ball((0.0, 0.0), 15.0)
    pair = DomainPair(big, big, (0.0, 0.0))
    inside = epsilon_interior(pair, 5.0)
    assert inside(np.array([[0.0, 0.0]]))[0]
    assert not inside(np.array([[11.0, 0.0]]))[0]
    x = np.random.default_rng(1).uniform(-16, 16, size=(500, 2))
    np.testing.assert_array_equal(epsilon_interior(pair, 0.0)(x), big.contains(x))


def test_validate_cover_identical_sets():
    rep = validate_cover(DomainPair(UNIT_BALL, UNIT_BALL, (0.0, 0.0)))
    assert rep.estimate == 0.0
    assert rep.valid


def test_validate_cover_larger_ball_is_invalid():
    rep = validate_cover(DomainPair(UNIT_BALL, Ball((0.0, 0.0), 1.1), (0.0, 0.0)), samples=40_000)
    assert rep.estimate == pytest.approx(1 - 1 / 1.1**2, abs=4 * rep.stderr)
    assert not rep.valid


def test_validate_cover_comb_in_square():
    rep = validate_cover(DomainPair(COMB, UNIT_SQUARE, comb_x0(CombConfig())))
    assert rep.valid


def test_validate_cover_deterministic():
    pair = DomainPair(UNIT_BALL, Ball((0.0, 0.0), 1.1), (0.0, 0.0))
    assert validate_cover(pair, seed=3) == validate_cover(pair, seed=3)
