"""Generalized measurements on (subsystems of) pure states and the RSP ensemble condition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import EXACT_TOL, PureState, check_probability_vector
from .errors import (
    ConditionViolatedError,
    DegenerateSchmidtError,
    DimensionError,
    InvalidInputError,
    InvalidMeasurementError,
)

NULL_BRANCH_PROB = 1e-14
POSITIVITY_FLOOR = -1e-12
CONDITION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GeneralizedMeasurement:
    """Measurement operators M_k with sum_k M_k^dag M_k = I.

    Operators may be rectangular (out_dim x dim) when the measurement also
    maps the system into a smaller space.
    """

    operators: tuple

    def __post_init__(self):
        ops = tuple(np.array(m, dtype=complex) for m in self.operators)
        if not ops:
            raise InvalidMeasurementError("a measurement needs at least one operator")
        dim = ops[0].shape[1] if ops[0].ndim == 2 else -1
        for m in ops:
            if m.ndim != 2 or m.shape[1] != dim or m.shape[0] != ops[0].shape[0]:
                raise DimensionError("all measurement operators must share one shape")
            m.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def effects(self) -> list[np.ndarray]:
        """POVM elements M_k^dag M_k."""
        return [m.conj().T @ m for m in self.operators]


@dataclass(frozen=True)
class ValidationReport:
    completeness_residual: float
    positivity_floors: tuple[float, ...]
    valid: bool


@dataclass(frozen=True, eq=False)
class MeasurementBranch:
    outcome: int
    probability: float
    post_state: Optional[PureState]

    @property
    def is_null(self) -> bool:
        return self.post_state is None


class ConditionCheck(NamedTuple):
    holds: bool
    residual: float


def validate_measurement(M: GeneralizedMeasurement, tol: float = EXACT_TOL) -> ValidationReport:
    effects = M.effects()
    residual = float(np.max(np.abs(sum(effects) - np.eye(M.dim))))
    floors = tuple(float(np.linalg.eigvalsh(0.5 * (e + e.conj().T))[0]) for e in effects)
    return ValidationReport(residual, floors, residual <= tol)


def _full_operators(M, subsystem, dims, state_dim):
    if subsystem == "whole":
        if M.dim != state_dim:
            raise DimensionError(f"measurement acts on dim {M.dim}, state has dim {state_dim}")
        return M.operators, None
    if dims is None:
        raise DimensionError("subsystem measurements need dims=(dim_A, dim_B)")
    dA, dB = dims
    if dA * dB != state_dim:
        raise DimensionError(f"dims {dims} do not factor state dimension {state_dim}")
    if subsystem == "A":
        if M.dim != dA:
            raise DimensionError("measurement dimension does not match subsystem A")
        return [np.kron(m, np.eye(dB)) for m in M.operators], (M.out_dim, dB)
    if subsystem == "B":
        if M.dim != dB:
            raise DimensionError("measurement dimension does not match subsystem B")
        return [np.kron(np.eye(dA), m) for m in M.operators], (dA, M.out_dim)
    raise InvalidInputError(f"unknown subsystem {subsystem!r}")


def branch_evaluate(state: PureState, M: GeneralizedMeasurement, subsystem: str = "whole",
                    dims=None, tol: float = EXACT_TOL) -> list[MeasurementBranch]:
    """Every outcome of M with its probability and renormalized post-measurement state.

    Branches below probability 1e-14 are kept with ``post_state=None`` so that
    outcome indices always line up with correction indices.
    """
    report = validate_measurement(M, tol)
    if not report.valid:
        raise InvalidMeasurementError(
            f"measurement is incomplete (residual {report.completeness_residual:.3e})")
    ops, _ = _full_operators(M, subsystem, dims, state.dim)
    branches = []
    for k, op in enumerate(ops):
        out = op @ state.amplitudes
        p = float(np.vdot(out, out).real)
        post = PureState(out / np.sqrt(p)) if p >= NULL_BRANCH_PROB else None
        branches.append(MeasurementBranch(k, p, post))
    return branches


def sample_outcome(state: PureState, M: GeneralizedMeasurement, subsystem: str = "whole",
                   dims=None, rng_seed=0) -> MeasurementBranch:
    """Draw one branch of :func:`branch_evaluate`; deterministic for a given seed."""
    branches = branch_evaluate(state, M, subsystem, dims)
    probs = np.array([b.probability for b in branches])
    rng = np.random.default_rng(rng_seed)
    k = int(rng.choice(len(branches), p=probs / probs.sum()))
    return branches[k]


def ensemble_mixture(corrections: Sequence[np.ndarray], probs, target: PureState) -> np.ndarray:
    """sum_m p_m u_m^dag |Phi><Phi| u_m"""
    rho = target.density()
    return sum(p * u.conj().T @ rho @ u for p, u in zip(probs, corrections))


def _check_condition_inputs(corrections, probs, target, shared_coeffs):
    alpha = np.asarray(shared_coeffs, dtype=float).reshape(-1)
    corrections = [np.asarray(u, dtype=complex) for u in corrections]
    probs = np.asarray(probs, dtype=float).reshape(-1)
    d = target.dim
    if alpha.size != d or any(u.shape != (d, d) for u in corrections):
        raise DimensionError("corrections, target and shared coefficients must share one dimension")
    if probs.size != len(corrections):
        raise DimensionError("need exactly one probability per correction")
    return corrections, probs, alpha


def verify_rsp_condition(corrections, probs, target: PureState, shared_coeffs,
                         tol: float = CONDITION_TOL) -> ConditionCheck:
    """Check sum_m p_m u_m^dag |Phi><Phi| u_m = diag(alpha^2) in max-abs norm."""
    corrections, probs, alpha = _check_condition_inputs(corrections, probs, target, shared_coeffs)
    lhs = ensemble_mixture(corrections, probs, target)
    residual = float(np.max(np.abs(lhs - np.diag(alpha**2))))
    return ConditionCheck(residual <= tol, residual)


def _psd_sqrt(e: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (e + e.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def povm_from_condition(shared_coeffs, corrections, probs, target: PureState,
                        tol: float = CONDITION_TOL) -> GeneralizedMeasurement:
    """Alice's measurement realizing the ensemble condition.

    Effects are p_m D rho_m^T D with D = diag(1/alpha) and rho_m = u_m^dag|Phi><Phi|u_m,
    written in the Schmidt basis of the shared state.  The returned operators are
    the positive square roots of those effects.
    """
    corrections, probs, alpha = _check_condition_inputs(corrections, probs, target, shared_coeffs)
    if np.any(alpha <= 1e-12):
        raise DegenerateSchmidtError("shared coefficients must be strictly positive")
    check_probability_vector(probs)
    check = verify_rsp_condition(corrections, probs, target, alpha, tol)
    if not check.holds:
        raise ConditionViolatedError(f"ensemble condition fails (residual {check.residual:.3e})")
    D = np.diag(1.0 / alpha)
    rho = target.density()
    effects = [p * D @ (u.conj().T @ rho @ u).T @ D for p, u in zip(probs, corrections)]
    return GeneralizedMeasurement(tuple(_psd_sqrt(e) for e in effects))
