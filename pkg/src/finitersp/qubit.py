"""Which qubit ensembles can be prepared with one classical bit.

For a resource alpha0|00> + alpha1|11> and corrections (u0, u1), a target |Phi>
works iff the Bloch vector r of u0^dag|Phi> satisfies two linear equations
(fixed by the axis-angle form of u1^dag u0) and |r| = 1.  Generically the
planes differ and at most two states qualify; they coincide only for
u1^dag u0 = -i n.sigma, which gives the circle z = alpha0^2 - alpha1^2 (or
any great circle when alpha0 = alpha1).

Bloch vectors returned here are in the u0 frame, i.e. they describe
u0^dag|Phi><Phi|u0.  Use :func:`points_to_states` to get the targets |Phi>.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.ndimage import minimum_filter
from scipy.optimize import least_squares

from .core import (
    EXACT_TOL,
    AxisAngle,
    BlochVector,
    PureState,
    axis_angle_decompose,
    bloch_to_state,
    check_unitary,
)
from .errors import InvalidInputError
from .measurement import verify_rsp_condition

DEGENERATE_ALPHA_TOL = 1e-9
NEAR_DEGENERATE_ALPHA_TOL = 1e-6
PLANE_RANK_TOL = 1e-8
MEMBER_TOL = 1e-7


@dataclass(frozen=True)
class CircleSpec:
    kind: str  # "fixed-z-circle" | "great-circle-family"
    radius: float
    z_value: Optional[float] = None
    plane_normal: Optional[tuple[float, float, float]] = None

    def __post_init__(self):
        if self.kind == "fixed-z-circle":
            if self.z_value is None or abs(self.radius - np.sqrt(1 - self.z_value**2)) > EXACT_TOL:
                raise InvalidInputError("fixed-z circle radius must equal sqrt(1 - z^2)")
        elif self.kind == "great-circle-family":
            if self.plane_normal is not None and abs(np.linalg.norm(self.plane_normal) - 1) > EXACT_TOL:
                raise InvalidInputError("plane normal must be a unit vector")
        else:
            raise InvalidInputError(f"unknown circle kind {self.kind!r}")

    def sample(self, n: int) -> np.ndarray:
        """n evenly spaced Bloch vectors on the circle."""
        t = 2 * np.pi * np.arange(n) / n
        if self.kind == "fixed-z-circle":
            return np.stack([self.radius * np.cos(t), self.radius * np.sin(t),
                             np.full(n, self.z_value)], axis=1)
        normal = np.array(self.plane_normal if self.plane_normal is not None else (0.0, 0.0, 1.0))
        e1 = np.cross(normal, [1.0, 0.0, 0.0])
        if np.linalg.norm(e1) < 0.5:
            e1 = np.cross(normal, [0.0, 1.0, 0.0])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(normal, e1)
        return np.outer(np.cos(t), e1) + np.outer(np.sin(t), e2)

    def distance(self, r) -> float:
        """Euclidean distance from a point on the sphere to the circle."""
        r = np.asarray(r, dtype=float)
        if self.kind == "fixed-z-circle":
            rho = np.hypot(r[0], r[1])
            return float(np.hypot(rho - self.radius, r[2] - self.z_value))
        n = np.asarray(self.plane_normal)
        h = float(r @ n)
        rho = np.linalg.norm(r - h * n)
        return float(np.hypot(rho - self.radius, h))


@dataclass(frozen=True)
class EnsembleClassification:
    kind: str  # "circle" | "isolated"
    axis_angle: AxisAngle
    circle: Optional[CircleSpec] = None
    isolated_points: tuple[BlochVector, ...] = field(default_factory=tuple)
    max_residual: float = 0.0
    near_degenerate: bool = False

    def __post_init__(self):
        if (self.kind == "circle") != (self.circle is not None):
            raise InvalidInputError("circle must be given exactly when kind == 'circle'")
        if len(self.isolated_points) > 2:
            raise InvalidInputError("at most two isolated solutions exist")


def _check_alphas(alpha0: float, alpha1: float):
    if alpha0 <= 0 or alpha1 <= 0 or abs(alpha0**2 + alpha1**2 - 1.0) > EXACT_TOL:
        raise InvalidInputError("need alpha0, alpha1 > 0 with alpha0^2 + alpha1^2 = 1")


def admissible_circle(alpha0: float, alpha1: float) -> CircleSpec:
    """The one-bit-preparable circle of the canonical protocol for this resource."""
    _check_alphas(alpha0, alpha1)
    gap = abs(alpha0 - alpha1)
    if gap <= DEGENERATE_ALPHA_TOL:
        return CircleSpec("great-circle-family", 1.0)
    if gap <= NEAR_DEGENERATE_ALPHA_TOL:
        warnings.warn("alpha0 and alpha1 are nearly equal; using the fixed-z branch", stacklevel=2)
    z = alpha0**2 - alpha1**2
    return CircleSpec("fixed-z-circle", float(np.sqrt(1 - z * z)), z_value=float(z))


def plane_equations(axis_angle: AxisAngle, alpha0: float, alpha1: float) -> np.ndarray:
    """Rows (a, b, c, k) of the two plane equations a x + b y + c z + k = 0."""
    cos_h, sin_h = np.cos(axis_angle.theta0 / 2), np.sin(axis_angle.theta0 / 2)
    x0, y0, z0 = axis_angle.axis
    delta = alpha1**2 - alpha0**2
    return np.array([
        [-delta * sin_h * y0, delta * sin_h * x0, delta * cos_h, cos_h],
        [sin_h * x0, sin_h * y0, sin_h * z0, sin_h * delta * z0],
    ])


def fit_probability(u0, u1, target: PureState, alpha0: float, alpha1: float) -> tuple[float, float]:
    """Least-squares p0 in [0, 1] for the one-bit ensemble condition, and its max-abs residual."""
    rho = target.density()
    a0 = u0.conj().T @ rho @ u0
    a1 = u1.conj().T @ rho @ u1
    rhs = np.diag([alpha0**2, alpha1**2])
    slope, offset = a0 - a1, a1 - rhs
    denom = float(np.vdot(slope, slope).real)
    p0 = 0.0 if denom == 0 else -float(np.vdot(slope, offset).real) / denom
    p0 = float(np.clip(p0, 0.0, 1.0))
    check = verify_rsp_condition([u0, u1], [p0, 1 - p0], target, [alpha0, alpha1], MEMBER_TOL)
    return p0, check.residual


def points_to_states(points, u0) -> list[PureState]:
    """Targets |Phi> = u0 |phi'> for Bloch points given in the u0 frame."""
    u0 = np.asarray(u0, dtype=complex)
    out = []
    for r in points:
        r = r.as_array() if isinstance(r, BlochVector) else np.asarray(r)
        out.append(PureState(u0 @ bloch_to_state(r).amplitudes))
    return out


def _intersect(rows) -> tuple[str, object]:
    """Intersect the non-trivial planes in ``rows`` with the unit sphere."""
    kept = []
    for row in rows:
        n, k = row[:3], row[3]
        if np.linalg.norm(n) <= 1e-12:
            if abs(k) > 1e-12:
                return "points", []
            continue
        kept.append(row / np.linalg.norm(n))
    kept = np.array(kept)
    sv = np.linalg.svd(kept, compute_uv=False)
    if len(kept) == 1 or sv[1] <= PLANE_RANK_TOL * sv[0]:
        n, k = kept[0][:3], kept[0][3]
        h = -k
        if abs(h) < 1 - 1e-12:
            return "plane", (n, h)
        if abs(h) <= 1 + 1e-12:
            return "points", [h * n / abs(h)]
        return "points", []
    normals, consts = kept[:, :3], -kept[:, 3]
    direction = np.cross(normals[0], normals[1])
    if np.linalg.norm(direction) <= PLANE_RANK_TOL:
        return "points", []  # parallel, distinct planes
    direction /= np.linalg.norm(direction)
    base = np.linalg.lstsq(normals, consts, rcond=None)[0]
    # |base + t dir|^2 = 1, base orthogonal to dir (minimum-norm solution)
    disc = 1.0 - base @ base
    if disc < -1e-12:
        return "points", []
    if disc <= 1e-12:
        return "points", [base]
    t = np.sqrt(disc)
    return "points", [base + t * direction, base - t * direction]


def classify_pair(u0, u1, alpha0: float, alpha1: float) -> EnsembleClassification:
    """All states preparable with corrections (u0, u1), in the u0 frame."""
    _check_alphas(alpha0, alpha1)
    u0, u1 = check_unitary(u0), check_unitary(u1)
    if u0.shape != (2, 2) or u1.shape != (2, 2):
        raise InvalidInputError("classify_pair works on qubit unitaries")
    _, aa = axis_angle_decompose(u1.conj().T @ u0)
    gap = abs(alpha0 - alpha1)
    near = bool(DEGENERATE_ALPHA_TOL < gap <= NEAR_DEGENERATE_ALPHA_TOL)
    shape, data = _intersect(plane_equations(aa, alpha0, alpha1))
    if shape == "plane":
        n, h = data
        radius = float(np.sqrt(1 - h * h))
        if gap <= DEGENERATE_ALPHA_TOL:
            circle = CircleSpec("great-circle-family", radius, plane_normal=tuple(float(v) for v in n))
        else:
            circle = CircleSpec("fixed-z-circle", radius, z_value=float(h * np.sign(n[2])))
        states = points_to_states(circle.sample(16), u0)
        worst = max(fit_probability(u0, u1, s, alpha0, alpha1)[1] for s in states)
        return EnsembleClassification("circle", aa, circle=circle, max_residual=worst,
                                      near_degenerate=near)

    points, worst = [], 0.0
    for r in data:
        r = r / np.linalg.norm(r)
        state = points_to_states([r], u0)[0]
        _, res = fit_probability(u0, u1, state, alpha0, alpha1)
        if res <= MEMBER_TOL:
            points.append(BlochVector(*(float(v) for v in r)))
            worst = max(worst, res)
    return EnsembleClassification("isolated", aa, isolated_points=tuple(points),
                                  max_residual=worst, near_degenerate=near)


def _residual_vector(params, u0, u1, rhs):
    theta, phi, p0 = params
    psi = u0 @ np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    rho = np.outer(psi, psi.conj())
    r = p0 * (u0.conj().T @ rho @ u0) + (1 - p0) * (u1.conj().T @ rho @ u1) - rhs
    return np.concatenate([r.real.ravel(), r.imag.ravel()])


def _grid_residuals(u0, u1, alpha0, alpha1, theta, phi):
    """Max-abs condition residual with the best p0 at every grid point."""
    kets = np.stack([np.cos(theta / 2) + 0 * phi, np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)
    kets = kets @ u0.T
    a0 = np.einsum("ij,...j->...i", u0.conj().T, kets)
    a1 = np.einsum("ij,...j->...i", u1.conj().T, kets)
    A0 = a0[..., :, None] * a0[..., None, :].conj()
    A1 = a1[..., :, None] * a1[..., None, :].conj()
    rhs = np.diag([alpha0**2, alpha1**2])
    slope, offset = A0 - A1, A1 - rhs
    num = np.einsum("...ij,...ij->...", slope.conj(), offset).real
    den = np.einsum("...ij,...ij->...", slope.conj(), slope).real
    p0 = np.clip(np.where(den > 0, -num / np.where(den > 0, den, 1), 0.0), 0.0, 1.0)
    res = p0[..., None, None] * slope + offset
    return np.max(np.abs(res), axis=(-2, -1))


def brute_force_ensemble(u0, u1, alpha0: float, alpha1: float,
                         grid_resolution: int = 200) -> list[BlochVector]:
    """Grid-search oracle for the preparable set, independent of the plane analysis.

    Scans a (theta, phi) grid in the u0 frame, keeps grid points that are local
    minima of the condition residual, polishes each with a nonlinear least-squares
    fit over (theta, phi, p0) and returns the polished points whose residual is
    at most 1e-7.  Points are deduplicated and sorted by (z, azimuth).
    """
    if grid_resolution < 16:
        raise InvalidInputError("grid_resolution must be at least 16")
    u0 = np.asarray(u0, dtype=complex)
    u1 = np.asarray(u1, dtype=complex)
    n = grid_resolution
    pitch = np.pi / n
    theta = (np.arange(n) + 0.5) * pitch
    phi = np.arange(2 * n) * pitch
    T, P = np.meshgrid(theta, phi, indexing="ij")
    res = _grid_residuals(u0, u1, alpha0, alpha1, T, P)

    # theta is not periodic, phi is
    neighbourhood_min = minimum_filter(res, size=3, mode=("nearest", "wrap"))
    # the residual can be steep near a solution, so every local minimum is polished
    candidates = np.argwhere(res <= neighbourhood_min)

    rhs = np.diag([alpha0**2, alpha1**2]).astype(complex)
    found = []
    for i, j in candidates:
        p_start = 0.5
        fit = least_squares(_residual_vector, x0=[theta[i], phi[j], p_start],
                            args=(u0, u1, rhs),
                            bounds=([-np.inf, -np.inf, 0.0], [np.inf, np.inf, 1.0]),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
        if np.max(np.abs(fit.fun)) > MEMBER_TOL:
            continue
        t, f, _ = fit.x
        found.append((np.sin(t) * np.cos(f), np.sin(t) * np.sin(f), np.cos(t)))

    if not found:
        return []
    pts = np.unique(np.round(np.array(found), 7), axis=0)
    order = np.lexsort((np.arctan2(pts[:, 1], pts[:, 0]), pts[:, 2]))
    out = []
    for x, y, z in pts[order]:
        r = np.array([x, y, z])
        r /= np.linalg.norm(r)
        out.append(BlochVector(*(float(v) for v in r)))
    return out
