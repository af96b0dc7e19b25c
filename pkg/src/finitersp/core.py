"""Pure states, Schmidt form, Bloch geometry and majorization.

Everything here works in double precision with explicit tolerances.  States and
Schmidt decompositions are immutable; unitaries and probability vectors are plain
numpy arrays checked by :func:`check_unitary` / :func:`check_probability_vector`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from .errors import (
    DegenerateSchmidtError,
    DimensionError,
    InvalidDensityError,
    InvalidInputError,
)

EXACT_TOL = 1e-10
SOLVER_TOL = 1e-6

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _frozen(a, dtype=complex):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector in the computational basis."""

    amplitudes: np.ndarray
    tol: float = field(default=EXACT_TOL, repr=False)

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        if amps.size < 2:
            raise DimensionError(f"state dimension must be >= 2, got {amps.size}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > self.tol:
            raise InvalidInputError(f"state not normalized: |psi|^2 = {norm2!r}")

    @classmethod
    def normalized(cls, amplitudes) -> PureState:
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise InvalidInputError("cannot normalize the zero vector")
        return cls(v / n)

    @classmethod
    def basis(cls, d: int, index: int = 0) -> PureState:
        v = np.zeros(d, dtype=complex)
        v[index] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def phase_aligned(self) -> PureState:
        """Copy with the first nonzero amplitude made real and nonnegative."""
        amps = self.amplitudes
        k = int(np.argmax(np.abs(amps) > 1e-12))
        return PureState(amps * np.exp(-1j * np.angle(amps[k])))


@dataclass(frozen=True, eq=False)
class SchmidtState:
    """Bipartite pure state sum_i alpha_i (basis_A|i>) (x) (basis_B|i>), alpha_i > 0."""

    coefficients: np.ndarray
    basis_A: np.ndarray = None
    basis_B: np.ndarray = None

    def __post_init__(self):
        alpha = _frozen(self.coefficients, dtype=float).reshape(-1)
        d = alpha.size
        if d < 2:
            raise DimensionError("Schmidt state needs dimension >= 2")
        if np.any(alpha <= 1e-12):
            raise DegenerateSchmidtError(f"Schmidt coefficients must be strictly positive: {alpha}")
        if abs(float(np.sum(alpha**2)) - 1.0) > EXACT_TOL:
            raise InvalidInputError("squared Schmidt coefficients must sum to 1")
        object.__setattr__(self, "coefficients", alpha)
        for name in ("basis_A", "basis_B"):
            b = getattr(self, name)
            b = np.eye(d, dtype=complex) if b is None else check_unitary(b)
            if b.shape != (d, d):
                raise DimensionError(f"{name} must be {d}x{d}")
            object.__setattr__(self, name, _frozen(b))

    @classmethod
    def from_probabilities(cls, probs) -> SchmidtState:
        return cls(np.sqrt(np.asarray(probs, dtype=float)))

    @property
    def dim(self) -> int:
        return self.coefficients.size

    @property
    def spectrum(self) -> np.ndarray:
        return self.coefficients**2

    def joint(self) -> PureState:
        psi = np.einsum("i,ai,bi->ab", self.coefficients, self.basis_A, self.basis_B)
        return PureState(psi.reshape(-1))


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.x**2 + self.y**2 + self.z**2 > 1 + EXACT_TOL:
            raise InvalidInputError("Bloch vector lies outside the unit ball")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def is_pure(self, tol: float = SOLVER_TOL) -> bool:
        return abs(self.x**2 + self.y**2 + self.z**2 - 1.0) <= tol

    def density(self) -> np.ndarray:
        return bloch_to_density(self)


@dataclass(frozen=True)
class AxisAngle:
    theta0: float
    axis: tuple[float, float, float]

    def __post_init__(self):
        if abs(sum(a * a for a in self.axis) - 1.0) > EXACT_TOL:
            raise InvalidInputError("rotation axis must have unit norm")

    def matrix(self) -> np.ndarray:
        """cos(theta0/2) I - i sin(theta0/2) axis.sigma"""
        n_sigma = sum(a * s for a, s in zip(self.axis, PAULIS))
        return np.cos(self.theta0 / 2) * I2 - 1j * np.sin(self.theta0 / 2) * n_sigma


def check_unitary(u, tol: float = EXACT_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"unitary must be square, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > tol:
        raise InvalidInputError(f"matrix is not unitary (residual {err:.3e})")
    return u


def check_probability_vector(p, tol: float = EXACT_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if np.any(p < -tol):
        raise InvalidInputError("probabilities must be nonnegative")
    if abs(float(p.sum()) - 1.0) > tol:
        raise InvalidInputError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def _as_state(s) -> PureState:
    return s if isinstance(s, PureState) else PureState(s)


def fidelity(a, b) -> float:
    """|<a|b>|^2 for two pure states of equal dimension."""
    a, b = _as_state(a), _as_state(b)
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(f, 1.0))


def schmidt_decompose(joint, dim_A: int, dim_B: int) -> SchmidtState:
    """Schmidt form of a bipartite pure state, coefficients sorted descending.

    Only full-rank (d x d with d nonzero coefficients) states are accepted since
    the result is meant to be used as a protocol resource.
    """
    joint = _as_state(joint)
    if joint.dim != dim_A * dim_B:
        raise DimensionError(f"{joint.dim} != {dim_A} * {dim_B}")
    if dim_A != dim_B:
        raise DimensionError("protocol resources must have equal local dimensions")
    mat = joint.amplitudes.reshape(dim_A, dim_B)
    u, s, vh = np.linalg.svd(mat)
    if np.any(s <= 1e-12):
        raise DegenerateSchmidtError(f"Schmidt coefficients {s} include a zero")
    # psi = sum_i s_i u[:, i] (x) vh[i, :]
    return SchmidtState(s / np.linalg.norm(s), u, vh.T)


def bloch_from_qubit(rho, tol: float = EXACT_TOL) -> BlochVector:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionError("expected a 2x2 density matrix")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidDensityError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise InvalidDensityError("density matrix does not have unit trace")
    x, y, z = (float(np.trace(rho @ s).real) for s in PAULIS)
    r2 = x * x + y * y + z * z
    if r2 > 1.0:
        # rounding only; anything larger was rejected by BlochVector anyway
        scale = 1.0 / np.sqrt(r2) if r2 <= 1 + tol else 1.0
        x, y, z = x * scale, y * scale, z * scale
    return BlochVector(x, y, z)


def bloch_to_density(b: BlochVector) -> np.ndarray:
    return 0.5 * (I2 + b.x * SIGMA_X + b.y * SIGMA_Y + b.z * SIGMA_Z)


def bloch_to_state(r) -> PureState:
    """Pure qubit state with Bloch vector r (|r| = 1), phase-aligned."""
    x, y, z = np.asarray(r, dtype=float) / np.linalg.norm(r)
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    return PureState([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def axis_angle_decompose(u, tol: float = EXACT_TOL) -> tuple[complex, AxisAngle]:
    """Split a 2x2 unitary into phase * (cos(t/2) I - i sin(t/2) n.sigma).

    The angle is returned on the branch t in [0, pi].  At t = pi the axis is
    chosen with its first significant component positive; a scalar matrix gives
    t = 0 with axis (0, 0, 1).
    """
    u = check_unitary(u, tol)
    if u.shape != (2, 2):
        raise DimensionError("axis-angle form needs a 2x2 unitary")
    phase = np.sqrt(np.linalg.det(u))
    v = u / phase
    c = float(np.trace(v).real / 2)
    sn = np.array([float((0.5j * np.trace(v @ s)).real) for s in PAULIS])
    if c < 0:
        phase, c, sn = -phase, -c, -sn
    s = float(np.linalg.norm(sn))
    if s <= tol:
        return complex(phase), AxisAngle(0.0, (0.0, 0.0, 1.0))
    axis = sn / s
    if c <= tol:
        lead = axis[np.argmax(np.abs(axis) > 1e-9)]
        if lead < 0:
            phase, axis = -phase, -axis
    theta = 2.0 * np.arctan2(s, c)
    return complex(phase), AxisAngle(float(theta), tuple(float(a) for a in axis))


def majorization_compare(p, q, slack: float = 1e-12) -> bool:
    """True iff p is majorized by q (every top-k partial sum of p <= that of q)."""
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if p.size != q.size:
        raise DimensionError(f"length mismatch: {p.size} vs {q.size}")
    cp = np.cumsum(np.sort(p)[::-1])
    cq = np.cumsum(np.sort(q)[::-1])
    return bool(np.all(cp <= cq + slack))


def haar_state(d: int, rng: np.random.Generator) -> PureState:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(v / np.linalg.norm(v))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng)


def random_schmidt_coefficients(d: int, rng: np.random.Generator, floor: float = 1e-3) -> np.ndarray:
    """Strictly positive, normalized coefficients from a flat Dirichlet spectrum."""
    p = rng.dirichlet(np.ones(d))
    p = np.maximum(p, floor)
    return np.sqrt(p / p.sum())


def partial_product_factor(joint: np.ndarray, dim_A: int, dim_B: int, tol: float = 1e-8) -> np.ndarray:
    """Return the B factor of a product vector a (x) b, normalized, phase arbitrary."""
    mat = np.asarray(joint, dtype=complex).reshape(dim_A, dim_B)
    _, s, vh = np.linalg.svd(mat)
    if s.size > 1 and s[1] > tol * max(s[0], 1e-300):
        raise InvalidInputError("state is entangled; subsystem B is not pure")
    return vh[0]
