import numpy as np
import pytest
from scipy.linalg import expm

from finitersp.core import SIGMA_X, SIGMA_Z, PAULIS, axis_angle_decompose, haar_unitary
from finitersp.errors import InvalidInputError
from finitersp.measurement import verify_rsp_condition
from finitersp.qubit import (
    admissible_circle,
    brute_force_ensemble,
    classify_pair,
    fit_probability,
    plane_equations,
    points_to_states,
)

from .oracles import trace_condition_planes

A_SKEW = (np.sqrt(0.8), np.sqrt(0.2))
H = 1 / np.sqrt(2)
I2 = np.eye(2)


def test_admissible_circle_examples():
    c = admissible_circle(*A_SKEW)
    assert c.kind == "fixed-z-circle"
    assert c.z_value == pytest.approx(0.6, abs=1e-12)
    assert c.radius == pytest.approx(0.8, abs=1e-12)
    assert admissible_circle(H, H).kind == "great-circle-family"
    c = admissible_circle(np.sqrt(0.99), np.sqrt(0.01))
    assert c.z_value == pytest.approx(0.98, abs=1e-12)
    assert c.radius == pytest.approx(0.1989974874213242, abs=1e-12)
    with pytest.raises(InvalidInputError):
        admissible_circle(0.5, 0.5)


def test_plane_equations_match_trace_condition(rng):
    for _ in range(20):
        w = haar_unitary(2, rng)
        a0 = rng.uniform(0.1, 0.99)
        a1 = np.sqrt(1 - a0**2)
        _, aa = axis_angle_decompose(w)
        stacked = np.vstack([plane_equations(aa, a0, a1), trace_condition_planes(w, a0, a1)])
        sv = np.linalg.svd(stacked, compute_uv=False)
        assert sv[2] <= 1e-12 * sv[0]


def test_classify_fixed_z_circle():
    c = classify_pair(I2, 1j * SIGMA_Z, *A_SKEW)
    assert c.kind == "circle" and c.circle.kind == "fixed-z-circle"
    assert c.circle.z_value == pytest.approx(0.6, abs=1e-12)
    assert c.circle.radius == pytest.approx(0.8, abs=1e-12)
    assert c.max_residual <= 1e-7


def test_canonical_circle_works_with_equal_probabilities():
    c = admissible_circle(*A_SKEW)
    for state in points_to_states(c.sample(12), I2):
        assert verify_rsp_condition([I2, 1j * SIGMA_Z], [0.5, 0.5], state, A_SKEW).holds


def test_classify_great_circle():
    c = classify_pair(I2, 1j * SIGMA_X, H, H)
    assert c.kind == "circle" and c.circle.kind == "great-circle-family"
    np.testing.assert_allclose(c.circle.plane_normal, [1, 0, 0], atol=1e-8)


def test_classify_isolated():
    c = classify_pair(I2, expm(-1j * np.pi / 4 * SIGMA_Z), *A_SKEW)
    assert c.kind == "isolated" and len(c.isolated_points) <= 2


@pytest.mark.parametrize("alpha", [A_SKEW, (H, H)])
def test_proportional_to_identity_has_no_solutions(alpha):
    c = classify_pair(I2, I2, *alpha)
    assert c.kind == "isolated" and c.isolated_points == ()
    c = classify_pair(I2, np.exp(0.4j) * I2, *alpha)
    assert c.isolated_points == ()


def test_unitary_covariance(rng):
    for _ in range(10):
        u0, u1, w = (haar_unitary(2, rng) for _ in range(3))
        a = classify_pair(u0, u1, *A_SKEW)
        b = classify_pair(w @ u0, w @ u1, *A_SKEW)
        assert a.kind == b.kind
        assert a.axis_angle.theta0 == pytest.approx(b.axis_angle.theta0, abs=1e-9)
        np.testing.assert_allclose(a.axis_angle.axis, b.axis_angle.axis, atol=1e-9)
        assert len(a.isolated_points) == len(b.isolated_points)


def test_brute_force_fixed_z():
    pts = brute_force_ensemble(I2, 1j * SIGMA_Z, *A_SKEW, 200)
    assert pts
    assert max(abs(p.z - 0.6) for p in pts) <= 1e-3


def test_brute_force_rank_mismatch_is_empty():
    assert brute_force_ensemble(I2, I2, *A_SKEW, 64) == []


def test_brute_force_great_circle():
    pts = brute_force_ensemble(I2, 1j * SIGMA_X, H, H, 200)
    assert pts
    assert max(abs(p.x) for p in pts) <= 1e-3


def test_brute_force_rejects_coarse_grid():
    with pytest.raises(InvalidInputError):
        brute_force_ensemble(I2, I2, *A_SKEW, 8)


def _random_alpha(rng):
    a0 = rng.uniform(0.15, 0.98)
    return a0, np.sqrt(1 - a0**2)


def test_oracle_agreement(rng):
    grid = 48
    pitch = np.pi / grid
    for k in range(50):
        u0 = haar_unitary(2, rng)
        if k % 5 == 0:
            # force a circle: u1^dag u0 = -i n.sigma
            n = rng.standard_normal(3)
            n /= np.linalg.norm(n)
            alpha = (H, H) if k % 10 == 0 else _random_alpha(rng)
            if alpha != (H, H):
                n = np.array([0.0, 0.0, 1.0])
            u1 = u0 @ (1j * sum(c * s for c, s in zip(n, PAULIS)))
        else:
            u1 = haar_unitary(2, rng)
            alpha = _random_alpha(rng)
        predicted = classify_pair(u0, u1, *alpha)
        found = brute_force_ensemble(u0, u1, *alpha, grid)
        if predicted.kind == "circle":
            assert found
            assert max(predicted.circle.distance(p.as_array()) for p in found) <= 2 * pitch
            for state in points_to_states(predicted.circle.sample(24), u0):
                assert fit_probability(u0, u1, state, *alpha)[1] <= 1e-7
        else:
            pred = [p.as_array() for p in predicted.isolated_points]
            got = [p.as_array() for p in found]
            for g in got:
                assert min(np.linalg.norm(g - p) for p in pred) <= 2 * pitch
            for p in pred:
                assert min(np.linalg.norm(g - p) for g in got) <= 2 * pitch
