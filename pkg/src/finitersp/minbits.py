"""Remote preparation of phase ensembles with log2(d) classical bits.

Alice injects the target phases into her half of the shared state, measures
in the Fourier basis and announces the outcome m; Bob undoes the Fourier phase
with a diagonal unitary that does not depend on the target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EXACT_TOL, PureState, SchmidtState, check_unitary
from .errors import DimensionError, InvalidInputError
from .measurement import GeneralizedMeasurement, branch_evaluate, sample_outcome
from .transcript import ProtocolTranscript, StageRecord

MODES = ("enumerate", "sample")


@dataclass(frozen=True, eq=False)
class PhaseEnsemble:
    """States rotation @ sum_j beta_j e^{i phi_j} |j> for all phases phi."""

    base_amplitudes: np.ndarray
    rotation: np.ndarray = None

    def __post_init__(self):
        beta = np.asarray(self.base_amplitudes, dtype=float).reshape(-1)
        if np.any(beta < 0) or abs(float(np.sum(beta**2)) - 1.0) > EXACT_TOL:
            raise InvalidInputError("base amplitudes must be nonnegative with unit 2-norm")
        rot = np.eye(beta.size, dtype=complex) if self.rotation is None else check_unitary(self.rotation)
        if rot.shape[0] != beta.size:
            raise DimensionError("rotation dimension does not match the ensemble")
        object.__setattr__(self, "base_amplitudes", beta)
        object.__setattr__(self, "rotation", rot)

    @property
    def dim(self) -> int:
        return self.base_amplitudes.size

    def member(self, phases) -> PureState:
        phases = np.asarray(phases, dtype=float)
        if phases.size != self.dim:
            raise DimensionError("need one phase per basis state")
        return PureState(self.rotation @ (self.base_amplitudes * np.exp(1j * phases)))


def fourier_vector(d: int, m: int) -> np.ndarray:
    j = np.arange(d)
    return np.exp(2j * np.pi * m * j / d) / np.sqrt(d)


def theorem1_operators(d: int) -> tuple[GeneralizedMeasurement, list[np.ndarray]]:
    """Fourier-basis projectors P_m and Bob's diagonal corrections u_m."""
    if d < 2:
        raise DimensionError(f"dimension must be >= 2, got {d}")
    projectors = []
    corrections = []
    for m in range(d):
        chi = fourier_vector(d, m)
        projectors.append(np.outer(chi, chi.conj()))
        corrections.append(np.diag(np.sqrt(d) * chi))
    return GeneralizedMeasurement(tuple(projectors)), corrections


def _theorem1_leaves(coeffs, phases, rotation, joint, basis_B, mode, seed, prefix=None,
                     stage_name="theorem1"):
    """Run the protocol on ``joint`` = sum_i c_i |i>|b_i> (zeros in c allowed)."""
    d = coeffs.size
    phases = np.asarray(phases, dtype=float).reshape(-1)
    if phases.size != d:
        raise DimensionError(f"need {d} phases, got {phases.size}")
    rotation = np.eye(d, dtype=complex) if rotation is None else check_unitary(rotation)
    if rotation.shape != (d, d):
        raise DimensionError("rotation dimension does not match the shared state")
    if mode not in MODES:
        raise InvalidInputError(f"mode must be one of {MODES}")

    target = PureState(rotation @ (coeffs * np.exp(1j * phases)))
    phase_op = np.kron(np.diag(np.exp(1j * phases)), np.eye(d))
    injected = PureState(phase_op @ joint.amplitudes)
    projectors, corrections = theorem1_operators(d)

    if mode == "enumerate":
        branches = branch_evaluate(injected, projectors, "A", (d, d))
    else:
        branches = [sample_outcome(injected, projectors, "A", (d, d), seed)]

    leaves = []
    for br in branches:
        m = br.outcome
        chi = fourier_vector(d, m)
        bob = chi.conj() @ br.post_state.amplitudes.reshape(d, d)
        bob = PureState(bob)
        correction = rotation @ corrections[m] @ basis_B.conj().T
        final = PureState(correction @ bob.amplitudes)
        stage = StageRecord(stage_name, m, d, br.probability, f"fourier_projector[{m}]",
                            correction, bob)
        if prefix is None:
            leaves.append(ProtocolTranscript((stage,), final, target))
        else:
            leaves.append(prefix.extend((stage,), final, target))
    return leaves


def run_theorem1(shared: SchmidtState, phases, rotation=None, mode: str = "enumerate",
                 seed=0) -> list[ProtocolTranscript]:
    """Prepare rotation @ sum_j alpha_j e^{i phi_j}|j> at Bob's side.

    Returns every branch in ``enumerate`` mode, or the single sampled branch in
    ``sample`` mode.  Bob's Schmidt basis is undone as part of his correction.
    """
    if not isinstance(shared, SchmidtState):
        shared = SchmidtState(shared)
    joint = np.einsum("i,ai,bi->ab", shared.coefficients,
                      shared.basis_A, shared.basis_B)
    # Alice rotates her Schmidt basis to the computational one first
    joint = shared.basis_A.conj().T @ joint
    return _theorem1_leaves(shared.coefficients, phases, rotation,
                            PureState(joint.reshape(-1)), shared.basis_B, mode, seed)


D4_COMPRESSION = (
    np.array([[1, 0, 0, 0], [0, 1, 0, 0]], dtype=complex),
    np.array([[0, 0, 1, 0], [0, 0, 0, 1]], dtype=complex),
)


def run_d4_demo(a: float, b: float, phi: float, psi: float, mode: str = "enumerate",
                seed=0) -> list[ProtocolTranscript]:
    """Prepare the qubit sqrt(2)(a|0> + b e^{i phi}|1>) from the (a, b, a, b) resource.

    Alice sends 2 bits to prepare a|0> + b e^{i phi}|1> + e^{i psi}(a|2> + b e^{i phi}|3>);
    Bob then measures {|0><0|+|1><1|, |0><2|+|1><3|}, which needs no communication
    because both outcomes leave the same qubit state.
    """
    if a <= 0 or b <= 0 or abs(2 * a * a + 2 * b * b - 1.0) > EXACT_TOL:
        raise InvalidInputError("need a, b > 0 with 2a^2 + 2b^2 = 1")
    shared = SchmidtState([a, b, a, b])
    phases = [0.0, phi, psi, phi + psi]
    compress = GeneralizedMeasurement(D4_COMPRESSION)
    target = PureState(np.sqrt(2) * np.array([a, b * np.exp(1j * phi)]))

    leaves = []
    for k, leaf in enumerate(run_theorem1(shared, phases, mode=mode, seed=seed)):
        if mode == "enumerate":
            branches = branch_evaluate(leaf.final_state, compress)
        else:
            branches = [sample_outcome(leaf.final_state, compress, rng_seed=(seed, k))]
        for br in branches:
            stage = StageRecord("bob_compression", br.outcome, 1, br.probability,
                                "none", D4_COMPRESSION[br.outcome], leaf.final_state)
            leaves.append(leaf.extend((stage,), br.post_state, target))
    return leaves
