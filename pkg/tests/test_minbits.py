import numpy as np
import pytest

from finitersp.core import PureState, SchmidtState, fidelity, haar_unitary, random_schmidt_coefficients
from finitersp.errors import DegenerateSchmidtError, DimensionError, InvalidInputError
from finitersp.measurement import povm_from_condition, validate_measurement
from finitersp.minbits import PhaseEnsemble, run_d4_demo, run_theorem1, theorem1_operators

from .oracles import theorem1_by_density

s2 = 1 / np.sqrt(2)


def test_operators_d2():
    proj, us = theorem1_operators(2)
    plus, minus = np.array([s2, s2]), np.array([s2, -s2])
    np.testing.assert_allclose(proj.operators[0], np.outer(plus, plus), atol=1e-15)
    np.testing.assert_allclose(proj.operators[1], np.outer(minus, minus), atol=1e-15)
    np.testing.assert_allclose(us[1], np.diag([1, -1]), atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 7])
def test_operators_general(d):
    proj, us = theorem1_operators(d)
    assert validate_measurement(proj).valid
    np.testing.assert_allclose(us[0], np.eye(d))
    for a, P in enumerate(proj.operators):
        np.testing.assert_allclose(np.diag(P).real, 1 / d, atol=1e-15)
        for b, Q in enumerate(proj.operators):
            np.testing.assert_allclose(P @ Q, P if a == b else 0, atol=1e-14)


def test_operators_reject_small_d():
    with pytest.raises(DimensionError):
        theorem1_operators(1)


def test_equatorial_protocol():
    leaves = run_theorem1(SchmidtState([s2, s2]), [0, np.pi / 2])
    want = PureState([s2, 1j * s2])
    assert len(leaves) == 2
    for leaf in leaves:
        assert fidelity(leaf.final_state, want) >= 1 - 1e-12
        assert leaf.probability == pytest.approx(0.5, abs=1e-12)
        assert leaf.total_cbits_exact == 1


def test_real_target_skew_resource():
    a = [np.sqrt(0.8), np.sqrt(0.2)]
    for leaf in run_theorem1(SchmidtState(a), [0, 0]):
        assert fidelity(leaf.final_state, PureState(a)) >= 1 - 1e-12


def test_d4_uniform(rng):
    leaves = run_theorem1(SchmidtState([0.5] * 4), rng.uniform(0, 2 * np.pi, 4))
    assert len(leaves) == 4
    assert all(leaf.probability == pytest.approx(0.25) for leaf in leaves)
    assert all(leaf.total_cbits_exact == 2 and leaf.total_cbits_ceiling == 2 for leaf in leaves)
    assert min(leaf.fidelity for leaf in leaves) >= 1 - 1e-10


def test_matches_density_oracle(rng):
    for d in (2, 3, 5):
        alpha = random_schmidt_coefficients(d, rng)
        phases = rng.uniform(0, 2 * np.pi, d)
        target = PureState(alpha * np.exp(1j * phases))
        ref = theorem1_by_density(alpha, phases)
        for leaf, (p, rho) in zip(run_theorem1(SchmidtState(alpha), phases), ref):
            assert leaf.probability == pytest.approx(p, abs=1e-12)
            assert np.max(np.abs(leaf.final_state.density() - rho)) <= 1e-10
            assert np.max(np.abs(rho - target.density())) <= 1e-10


def test_correction_independent_of_target(rng):
    alpha = random_schmidt_coefficients(3, rng)
    shared = SchmidtState(alpha)
    reference = [leaf.stages[0].bob_correction for leaf in run_theorem1(shared, [0, 0, 0])]
    for _ in range(100):
        leaves = run_theorem1(shared, rng.uniform(0, 2 * np.pi, 3))
        for leaf, ref in zip(leaves, reference):
            assert np.max(np.abs(leaf.stages[0].bob_correction - ref)) == 0


def test_mixture_is_resource_marginal(rng):
    alpha = random_schmidt_coefficients(4, rng)
    leaves = run_theorem1(SchmidtState(alpha), rng.uniform(0, 2 * np.pi, 4))
    mix = sum(leaf.probability * leaf.stages[0].bob_state_before.density() for leaf in leaves)
    assert np.max(np.abs(mix - np.diag(alpha**2))) <= 1e-10


def test_rotation_covariance(rng):
    alpha = random_schmidt_coefficients(3, rng)
    phases = rng.uniform(0, 2 * np.pi, 3)
    v = haar_unitary(3, rng)
    plain = run_theorem1(SchmidtState(alpha), phases)
    rotated = run_theorem1(SchmidtState(alpha), phases, rotation=v)
    for a, b in zip(plain, rotated):
        assert fidelity(PureState(v @ a.final_state.amplitudes), b.final_state) >= 1 - 1e-10
        assert b.fidelity >= 1 - 1e-10


def test_non_computational_schmidt_basis(rng):
    shared = SchmidtState(random_schmidt_coefficients(3, rng), haar_unitary(3, rng), haar_unitary(3, rng))
    phases = rng.uniform(0, 2 * np.pi, 3)
    for leaf in run_theorem1(shared, phases):
        assert leaf.fidelity >= 1 - 1e-10


def test_povm_cross_check_matches_projectors(rng):
    proj, us = theorem1_operators(3)
    alpha = random_schmidt_coefficients(3, rng)
    phi = PureState(alpha)
    M = povm_from_condition(alpha, us, [1 / 3] * 3, phi)
    for got, want in zip(M.effects(), proj.operators):
        assert np.max(np.abs(got - want)) <= 1e-10


def test_sample_mode_is_one_deterministic_branch():
    shared = SchmidtState([s2, s2])
    a = run_theorem1(shared, [0, 1.0], mode="sample", seed=5)
    b = run_theorem1(shared, [0, 1.0], mode="sample", seed=5)
    assert len(a) == 1 and a[0].stages[0].outcome == b[0].stages[0].outcome
    assert a[0].fidelity >= 1 - 1e-10


def test_bad_inputs():
    with pytest.raises(DimensionError):
        run_theorem1(SchmidtState([s2, s2]), [0, 0, 0])
    with pytest.raises(DegenerateSchmidtError):
        run_theorem1(SchmidtState([1.0, 0.0]), [0, 0])


def test_phase_ensemble_member():
    ens = PhaseEnsemble([np.sqrt(0.8), np.sqrt(0.2)])
    np.testing.assert_allclose(ens.member([0, np.pi]).amplitudes, [np.sqrt(0.8), -np.sqrt(0.2)], atol=1e-15)
    with pytest.raises(InvalidInputError):
        PhaseEnsemble([1.0, 1.0])


def test_d4_demo_example():
    a, b = np.sqrt(0.4), np.sqrt(0.1)
    leaves = run_d4_demo(a, b, np.pi / 4, 1.234)
    want = PureState([np.sqrt(0.8), np.sqrt(0.2) * np.exp(1j * np.pi / 4)])
    assert len(leaves) == 8
    for leaf in leaves:
        assert fidelity(leaf.final_state, want) >= 1 - 1e-10
        assert leaf.total_cbits_exact == 2
    assert sum(leaf.probability for leaf in leaves) == pytest.approx(1.0)


def test_d4_demo_maximal_and_psi_independent():
    leaves = run_d4_demo(0.5, 0.5, 0.3, 0.0)
    for leaf in leaves:
        assert fidelity(leaf.final_state, PureState([s2, s2 * np.exp(0.3j)])) >= 1 - 1e-10
    finals = [run_d4_demo(0.5, 0.5, 0.3, psi)[0].final_state for psi in (0.0, 1.0, 2.5)]
    assert all(fidelity(finals[0], f) >= 1 - 1e-12 for f in finals)


def test_d4_demo_rejects_bad_normalization():
    with pytest.raises(InvalidInputError):
        run_d4_demo(0.5, 0.6, 0, 0)
