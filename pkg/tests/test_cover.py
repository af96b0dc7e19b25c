import math

import numpy as np
import pytest

from finitersp.core import PureState, SchmidtState, fidelity, haar_state
from finitersp.cover import (
    CoverCodebook,
    align_to_center,
    build_cover,
    householder_completion,
    locate,
    max_radius,
    membership_in_S,
    run_universal_rsp,
    sample_ball,
    verify_cover,
)
from finitersp.errors import (
    CoverageMissError,
    CoverBuildError,
    DimensionError,
    InvalidInputError,
    RadiusBoundError,
)

s2 = 1 / np.sqrt(2)
SHARED = SchmidtState(np.sqrt([0.7, 0.3]))


@pytest.fixture(scope="module")
def cover_d2():
    return build_cover(2, 0.5, seed=7)


def test_max_radius():
    assert max_radius(SchmidtState([s2, s2])) == pytest.approx(0.70711, abs=1e-5)
    assert max_radius(SchmidtState(np.sqrt([0.8, 0.2]))) == pytest.approx(np.sqrt(0.2))
    assert max_radius(SchmidtState(np.sqrt([0.5, 0.3, 0.2]))) == pytest.approx(np.sqrt(0.2))


def test_membership_examples(rng):
    shared = SchmidtState(np.sqrt([0.5, 0.3, 0.2]))
    assert membership_in_S(PureState.basis(3, 0), shared)
    phases = rng.uniform(0, 2 * np.pi, 3)
    assert membership_in_S(PureState(shared.coefficients * np.exp(1j * phases)), shared)
    assert not membership_in_S(PureState([s2, s2]), SchmidtState(np.sqrt([0.8, 0.2])))
    with pytest.raises(DimensionError):
        membership_in_S(PureState([1, 0]), shared)


def test_householder_completion(rng):
    for d in (2, 3, 5):
        for _ in range(20):
            x = haar_state(d, rng).amplitudes
            v = householder_completion(x)
            np.testing.assert_allclose(v[:, 0], x, atol=1e-12)
            np.testing.assert_allclose(v.conj().T @ v, np.eye(d), atol=1e-12)
    np.testing.assert_allclose(householder_completion([1, 0, 0]), np.eye(3))


@pytest.mark.parametrize("d,r,seed", [(2, 0.6, 7), (3, 0.5, 11)])
def test_build_and_verify(d, r, seed):
    cb = build_cover(d, r, seed=seed)
    np.testing.assert_allclose(cb.centers[0], np.eye(d)[0])
    np.testing.assert_allclose(cb.unitaries[:, :, 0], cb.centers, atol=1e-10)
    report = verify_cover(cb, 100_000, seed=3)
    assert report.misses == 0
    assert report.worst_min_distance < r


def test_centers_are_packed():
    cb = build_cover(3, 0.5, seed=11)
    overlap = np.abs(cb.centers.conj() @ cb.centers.T)
    dist = np.sqrt(np.clip(2 - 2 * overlap, 0, None))
    np.fill_diagonal(dist, np.inf)
    assert dist.min() > 0.9 * 0.5


def test_large_radius_single_center():
    cb = build_cover(2, 1.9, seed=0)
    assert cb.size == 1
    assert verify_cover(cb, 10_000).misses == 0


def test_small_radius_single_center_misses():
    cb = CoverCodebook(2, 0.1, [[1, 0]], [np.eye(2)])
    assert verify_cover(cb, 1000, seed=1).misses > 0


def test_zero_samples():
    cb = CoverCodebook(2, 0.1, [[1, 0]], [np.eye(2)])
    report = verify_cover(cb, 0)
    assert (report.num_samples, report.misses) == (0, 0)


def test_verify_deterministic_per_workers(cover_d2):
    a = verify_cover(cover_d2, 20_000, seed=4, workers=3)
    b = verify_cover(cover_d2, 20_000, seed=4, workers=3)
    assert a == b
    assert a.num_samples == 20_000


def test_full_sphere_mode():
    cb = build_cover(2, 0.6, seed=7, phase_quotient=False)
    assert cb.size > build_cover(2, 0.6, seed=7).size
    assert verify_cover(cb, 20_000, seed=2).misses == 0
    target = haar_state(2, np.random.default_rng(5))
    i = locate(target, cb)
    assert np.linalg.norm(target.amplitudes - cb.centers[i]) < 0.6


def test_build_errors():
    with pytest.raises(CoverBuildError) as exc:
        build_cover(3, 0.2, candidate_budget=10_000, seed=0, max_candidates=8192)
    assert exc.value.partial.size > 1
    with pytest.raises(DimensionError):
        build_cover(1, 0.5)
    with pytest.raises(InvalidInputError):
        build_cover(2, 0.0)


def test_codebook_validation():
    with pytest.raises(InvalidInputError):
        CoverCodebook(2, 0.5, [[0, 1]], [np.eye(2)])
    with pytest.raises(DimensionError):
        CoverCodebook(2, 0.5, [[1, 0, 0]], [np.eye(3)])


def test_locate_examples(cover_d2):
    assert locate(PureState([1, 0]), cover_d2) == 0
    for i in (3, cover_d2.size - 1):
        assert locate(PureState(cover_d2.centers[i]), cover_d2) <= i
    # a global phase does not change the answer
    assert locate(PureState(1j * cover_d2.centers[3]), cover_d2) <= 3
    with pytest.raises(CoverageMissError):
        locate(PureState([s2, s2]), CoverCodebook(2, 0.1, [[1, 0]], [np.eye(2)]))
    with pytest.raises(DimensionError):
        locate(PureState([1, 0, 0]), cover_d2)


def test_locate_many(cover_d2, rng):
    for _ in range(2000):
        t = haar_state(2, rng)
        i = locate(t, cover_d2)
        aligned = align_to_center(t, cover_d2.centers[i])
        assert np.linalg.norm(aligned.amplitudes - cover_d2.centers[i]) < cover_d2.r


def test_unitary_translation_preserves_distance(cover_d2, rng):
    ys = sample_ball(np.array([1, 0], dtype=complex), 0.5, 200, rng)
    for v, x in zip(cover_d2.unitaries, cover_d2.centers):
        moved = ys @ v.T
        np.testing.assert_allclose(np.linalg.norm(moved - x, axis=1),
                                   np.linalg.norm(ys - [1, 0], axis=1), atol=1e-10)


def test_subset_claim_sampled(rng):
    ys = sample_ball(np.array([1, 0, 0], dtype=complex), 0.4, 5000, rng)
    shared = SchmidtState(np.sqrt([0.5, 0.3, 0.2]))
    assert np.all(np.linalg.norm(ys - [1, 0, 0], axis=1) < 0.4)
    assert all(membership_in_S(PureState(y), shared) for y in ys)


def test_universal_example(cover_d2, rng):
    for _ in range(50):
        target = haar_state(2, rng)
        leaves, cost = run_universal_rsp(SHARED, target, cover_d2)
        assert all(fidelity(leaf.final_state, target) >= 1 - 1e-9 for leaf in leaves)
        assert sum(leaf.probability for leaf in leaves) == pytest.approx(1.0)
        assert cost.total_ceiling == math.ceil(math.log2(cover_d2.size)) + 2
        assert [s.name for s in cost.stage_bits] == ["codebook_index", "transform", "phase_preparation"]


def test_universal_resource_as_target(cover_d2):
    target = PureState(SHARED.coefficients)
    leaves, _ = run_universal_rsp(SHARED, target, cover_d2)
    assert all(leaf.fidelity == pytest.approx(1.0, abs=1e-12) for leaf in leaves)


def test_universal_radius_bound(cover_d2):
    with pytest.raises(RadiusBoundError):
        run_universal_rsp(SchmidtState(np.sqrt([0.8, 0.2])), PureState([1, 0]), cover_d2)


def test_universal_deterministic(cover_d2):
    target = haar_state(2, np.random.default_rng(9))
    a, ca = run_universal_rsp(SHARED, target, cover_d2, mode="sample", seed=3)
    b, cb = run_universal_rsp(SHARED, target, cover_d2, mode="sample", seed=3)
    assert len(a) == 1
    assert [s.outcome for s in a[0].stages] == [s.outcome for s in b[0].stages]
    assert ca == cb
    assert build_cover(2, 0.5, seed=7).size == cover_d2.size


def test_sample_ball_within_radius(rng):
    ys = sample_ball(np.array([0, 1, 0], dtype=complex), 0.3, 1000, rng)
    assert ys.shape == (1000, 3)
    np.testing.assert_allclose(np.linalg.norm(ys, axis=1), 1.0)
    assert np.all(np.linalg.norm(ys - [0, 1, 0], axis=1) < 0.3)
