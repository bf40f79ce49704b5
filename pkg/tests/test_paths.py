import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bogovskii.config import CombConfig
from bogovskii.errors import DegeneratePath, OutsideDecomposition
from bogovskii.geometry import DomainPair, normalize, sample_interior
from bogovskii.paths import build_path_system, geodesic_distance, min_d_hat_along, path, radius_profile
from bogovskii.verify import comb_channels, comb_shape, comb_x0, path_diagnostics
from bogovskii.whitney import decompose
from conftest import unit_ball_path_system


def _interior(system, count, seed=0):
    rng = np.random.default_rng(seed)
    skin = 10 * np.sqrt(2) * system.complex.min_side
    return sample_interior(system.pair.cover, count, rng, min_dist=skin)


angle = st.floats(0, 2 * np.pi)
radius = st.floats(0.01, 0.9)  # the skin is one min_side (1/32 of the radius) deep


@settings(max_examples=100, deadline=None)
@given(angle, radius)
def test_path_endpoints(th, r):
    unit_ball_system = unit_ball_path_system()
    y = 15 * r * np.array([np.cos(th), np.sin(th)])
    poly = path(unit_ball_system, y)
    np.testing.assert_array_equal(poly(0.0), y)
    np.testing.assert_allclose(poly(1.0), unit_ball_system.x0, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(angle, radius)
def test_straight_case_rule(th, r):
    s = unit_ball_path_system()
    y = 15 * r * np.array([np.cos(th), np.sin(th)])
    poly = path(s, y)
    near = np.linalg.norm(y - s.x0) <= s.pair.d_hat(y[None])[0] / 2
    assert poly.straight == near
    prof = radius_profile(s, y)
    assert (prof.case == 2) == near
    if near:
        assert prof.tau == 1.0
        t = np.linspace(0, 1, 11)
        np.testing.assert_array_equal(prof.rho(t), t)


def test_base_point_path_is_degenerate(unit_ball_system):
    poly = path(unit_ball_system, unit_ball_system.x0)
    assert poly.degenerate and poly.length == 0.0
    assert geodesic_distance(unit_ball_system, unit_ball_system.x0)[0] == 0.0
    with pytest.raises(DegeneratePath):
        radius_profile(unit_ball_system, unit_ball_system.x0)


def test_outside_raises(unit_ball_system):
    with pytest.raises(OutsideDecomposition):
        path(unit_ball_system, np.array([15.5, 0.0]))
    with pytest.raises(OutsideDecomposition):
        geodesic_distance(unit_ball_system, np.array([[0.0, 16.0]]))


def test_path_length_against_euclidean_on_ball(unit_ball_system):
    s = unit_ball_system
    ys = _interior(s, 1000)
    lengths = np.array([path(s, y).length for y in ys])
    c_path = np.max(lengths / np.linalg.norm(ys - s.x0, axis=1))
    assert c_path <= 3.0


def test_geodesic_distance_bounds(unit_ball_system):
    s = unit_ball_system
    ys = _interior(s, 500, seed=1)
    d = geodesic_distance(s, ys)
    e = np.linalg.norm(ys - s.x0, axis=1)
    assert np.all(d >= e * (1 - 1e-12))
    assert np.all(d <= 3 * e)
    np.testing.assert_allclose(d, [path(s, y).length for y in ys], rtol=1e-12)


def test_tree_root_and_first_hop(unit_ball_system):
    s = unit_ball_system
    cx = s.complex
    assert s.dist[cx.root] == 0.0 and s.parent[cx.root] == -1
    children = np.flatnonzero(s.parent == cx.root)
    assert len(children)
    hop = np.linalg.norm(cx.centers[children] - cx.centers[cx.root], axis=1)
    np.testing.assert_allclose(s.dist[children], hop)


def test_paths_stay_inside(unit_ball_system):
    s = unit_ball_system
    for y in _interior(s, 200, seed=2):
        assert min_d_hat_along(s.pair, path(s, y)) > 0


def test_radius_continuous_at_tau(unit_ball_system):
    s = unit_ball_system
    checked = 0
    for y in _interior(s, 300, seed=3):
        prof = radius_profile(s, y)
        if prof.case != 1:
            continue
        g = prof.polyline(prof.tau)
        left = prof.alpha * np.linalg.norm(g - y)
        right = s.pair.d_hat(g[None])[0] / prof.d_hat_x0
        assert abs(left - right) <= 1e-12 * max(right, 1.0)
        assert prof.alpha <= 0.2
        checked += 1
    assert checked > 50


def test_radius_derivative_matches_finite_difference(unit_ball_system):
    s = unit_ball_system
    y = _interior(s, 200, seed=4)
    y = next(v for v in y if radius_profile(s, v).case == 1)
    prof = radius_profile(s, y)
    t = np.linspace(0.013, 0.987, 37)
    h = 1e-7
    fd = (prof.rho(t + h) - prof.rho(t - h)) / (2 * h)
    # skip nodes whose stencil straddles tau or a vertex
    bad = np.abs(t - prof.tau) < 2 * h
    for c in prof.polyline.cumlen / prof.polyline.length:
        bad |= np.abs(t - c) < 2 * h
    np.testing.assert_allclose(fd[~bad], prof.rho_dot(t)[~bad], rtol=1e-5, atol=1e-8)


def test_radius_bound_and_diagnostics(unit_ball_system):
    rep = path_diagnostics(unit_ball_system, samples=100, t_nodes=1000)
    assert rep.rho_violations == 0
    assert rep.alpha_max <= 0.2
    assert rep.c_path <= 3.0
    assert np.isfinite(rep.ahlfors)
    assert rep.delta[1.0] > 0


def test_path_system_deterministic(unit_ball_system):
    s = unit_ball_system
    again = build_path_system(decompose(s.pair, s.complex.min_side), s.pair)
    np.testing.assert_array_equal(again.parent, s.parent)
    np.testing.assert_array_equal(again.dist, s.dist)


def test_comb_distance_grows_with_depth():
    cfg = CombConfig(teeth=3, min_side=0.01)
    omega = comb_shape(cfg)
    pair = normalize(DomainPair(omega, omega, comb_x0(cfg)))
    s = build_path_system(decompose(pair, cfg.min_side), pair)
    mids = [(0.5, (top + bot) / 2) for top, bot in comb_channels(cfg)[1 : cfg.teeth + 1]]
    d = geodesic_distance(s, pair.from_original(np.array(mids))) / pair.scale
    # every channel adds at least one crossing between the open ends of its slits
    assert np.all(np.diff(d) >= 1 - 2 * cfg.eps)
