import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bogovskii.errors import AtomCoincidence, DominationViolated, ZeroSumViolated
from bogovskii.geometry import Ball, sample_interior
from bogovskii.measure import (
    AdmissiblePair,
    DiscreteMeasure,
    PathIndex,
    check_dOmega_integrability,
    grid_measure,
    omega_weight,
    riesz_potential,
    validate_pair,
    weight_parts,
)
from bogovskii.paths import geodesic_distance, path
from conftest import unit_ball_path_system


def _atoms(system, count, seed):
    rng = np.random.default_rng(seed)
    skin = 10 * np.sqrt(2) * system.complex.min_side
    return sample_interior(system.pair.cover, count, rng, min_dist=skin)


def test_riesz_single_atom():
    mu0 = DiscreteMeasure([[0.0, 0.0]], [1.0], True)
    assert riesz_potential(mu0, [[0.5, 0.0]])[0] == pytest.approx(2.0)


def test_riesz_two_atoms():
    mu0 = DiscreteMeasure([[1.0, 0.0], [-1.0, 0.0]], [1.0, 1.0], True)
    assert riesz_potential(mu0, [[0.0, 0.0]])[0] == pytest.approx(2.0)


def test_riesz_disk_converges_to_continuum():
    # integral of |y|^-1 over the unit disk is 2 pi; cell-centred grids keep 0 off the atoms
    errs = []
    for cells in (50, 100, 200):
        mu0 = grid_measure(Ball((0.0, 0.0), 1.0), (-1, -1), (1, 1), cells)
        errs.append(abs(riesz_potential(mu0, [[0.0, 0.0]])[0] - 2 * np.pi))
    assert errs[1] < 0.05  # the 10^4-atom discretization (about 7850 atoms inside)
    assert errs[2] < errs[1] < errs[0]


def test_riesz_rejects_atom_location():
    mu0 = DiscreteMeasure([[0.0, 0.0]], [1.0], True)
    with pytest.raises(AtomCoincidence):
        riesz_potential(mu0, [[0.0, 0.0]])


def test_riesz_chunking_is_exact():
    rng = np.random.default_rng(0)
    mu0 = DiscreteMeasure(rng.uniform(-1, 1, (300, 2)), rng.uniform(0.1, 1, 300), True)
    x = rng.uniform(-1, 1, (500, 2))
    np.testing.assert_allclose(riesz_potential(mu0, x, block=1000), riesz_potential(mu0, x), rtol=1e-14)


def test_omega_at_base_point_is_total_mass(unit_ball_system):
    s = unit_ball_system
    pts = _atoms(s, 40, 0)
    mu0 = DiscreteMeasure(pts, np.linspace(0.5, 1.5, 40), True)
    assert omega_weight(s, mu0, s.x0[None])[0] == pytest.approx(mu0.mass)


def test_omega_zero_away_from_paths(unit_ball_system):
    s = unit_ball_system
    y = np.array([[0.0, 12.0]])
    mu0 = DiscreteMeasure(y, [1.0], True)
    x = np.array([[0.0, -12.0]])
    assert path(s, y[0]).distance_to(x)[0] > s.pair.d_hat(x)[0] / 2
    assert omega_weight(s, mu0, x)[0] == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_omega_sparse_matches_dense(seed):
    s = unit_ball_path_system()
    rng = np.random.default_rng(seed)
    mu0 = DiscreteMeasure(_atoms(s, 60, seed), rng.uniform(0.1, 1.0, 60), True)
    x = _atoms(s, 200, seed + 1)
    index = PathIndex(s, mu0)
    r = s.pair.d_hat(x) / 2
    dense = index.hits(x, r) @ mu0.weights
    np.testing.assert_allclose(index.mass(x, r), dense, rtol=1e-13, atol=1e-13)


def test_omega_dense_oracle_is_polyline_distance(unit_ball_system):
    s = unit_ball_system
    ys = _atoms(s, 30, 5)
    x = _atoms(s, 50, 6)
    hits = PathIndex(s, DiscreteMeasure(ys, np.ones(30), True)).hits(x, s.pair.d_hat(x) / 2)
    direct = np.stack([path(s, y).distance_to(x) <= s.pair.d_hat(x) / 2 for y in ys], axis=1)
    np.testing.assert_array_equal(hits, direct)


def test_omega_linear_in_measure(unit_ball_system):
    s = unit_ball_system
    pts = _atoms(s, 50, 3)
    a = DiscreteMeasure(pts, np.full(50, 0.3), True)
    b = DiscreteMeasure(pts, np.linspace(0.1, 2.0, 50), True)
    both = DiscreteMeasure(pts, a.weights + 2 * b.weights, True)
    x = _atoms(s, 100, 4)
    np.testing.assert_allclose(omega_weight(s, both, x), omega_weight(s, a, x) + 2 * omega_weight(s, b, x))


def test_weight_parts_compose(unit_ball_system):
    s = unit_ball_system
    mu0 = DiscreteMeasure(_atoms(s, 20, 7), np.ones(20), True)
    parts = weight_parts(s, mu0, s.x0[None])
    d = s.d_hat_x0
    assert parts.w0[0] == pytest.approx(riesz_potential(mu0, s.x0[None])[0] + mu0.mass / d)
    far = np.array([[0.0, -13.0]])
    lone = DiscreteMeasure([[0.0, 12.0]], [1.0], True)
    p = weight_parts(s, lone, far)
    assert p.omega[0] == 0.0 and p.w0[0] == pytest.approx(p.riesz[0])


def test_dOmega_integrability_single_atom(unit_ball_system):
    s = unit_ball_system
    a = np.array([[4.0, -6.0]])
    val = check_dOmega_integrability(s, DiscreteMeasure(a, [1.0], True))
    assert val == pytest.approx(geodesic_distance(s, a)[0])
    seq = check_dOmega_integrability(s, None, families=[DiscreteMeasure(a, [1.0], True)] * 2)
    assert seq == [val, val]


def test_validate_pair_dipole():
    p, q = [0.2, 0.1], [-0.3, 0.0]
    mu0 = DiscreteMeasure([p, q], [1.0, 1.0], True)
    rep = validate_pair(AdmissiblePair(mu0, DiscreteMeasure([p, q], [1.0, -1.0]), 1.0))
    assert rep.zero_sum_residual == 0.0
    np.testing.assert_allclose(rep.slack, 0.0)


def test_validate_pair_unbalanced():
    mu0 = DiscreteMeasure([[0.2, 0.1]], [1.0], True)
    with pytest.raises(ZeroSumViolated):
        validate_pair(AdmissiblePair(mu0, DiscreteMeasure([[0.2, 0.1]], [1.0]), 1.0))


def test_validate_pair_domination():
    mu0 = DiscreteMeasure([[0.2, 0.1], [0.0, 0.0]], [1.0, 1.0], True)
    mu = DiscreteMeasure([[0.2, 0.1], [0.0, 0.0]], [2.0, -2.0])
    with pytest.raises(DominationViolated):
        validate_pair(AdmissiblePair(mu0, mu, 1.0))
    validate_pair(AdmissiblePair(mu0, mu, 2.0))
    with pytest.raises(DominationViolated):
        validate_pair(AdmissiblePair(mu0, DiscreteMeasure([[0.5, 0.5], [0.0, 0.0]], [1.0, -1.0]), 5.0))


def test_validate_pair_balanced_construction():
    # mu0 restricted to B(a, r0) minus a rescaled copy of the rest
    mu0 = grid_measure(Ball((0.0, 0.0), 1.0), (-1, -1), (1, 1), 20)
    a, r0 = np.array([0.3, 0.2]), 0.3
    inside = np.linalg.norm(mu0.points - a, axis=1) < r0
    m0 = mu0.weights[inside].sum()
    coef = m0 / (mu0.mass - m0)
    mu = DiscreteMeasure(mu0.points, np.where(inside, mu0.weights, -coef * mu0.weights))
    rep = validate_pair(AdmissiblePair(mu0, mu, 1.0))
    assert rep.zero_sum_residual < 1e-12
    assert np.all(rep.slack >= 0)


def test_measure_json_round_trip():
    m = DiscreteMeasure([[0.1, 0.2], [0.3, -0.4]], [0.5, 1.5], True)
    back = DiscreteMeasure.from_json(m.to_json(), positive=True)
    np.testing.assert_array_equal(back.points, m.points)
    np.testing.assert_array_equal(back.weights, m.weights)


def test_positive_measure_rejects_nonpositive_weights():
    with pytest.raises(ValueError):
        DiscreteMeasure([[0.0, 0.0]], [0.0], True)
