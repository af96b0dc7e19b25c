"""Finite unitary codebooks covering all pure states, and universal finite-bit RSP.

A codebook is a set of centers x_i with unitaries v_i|0> = x_i such that every
state lies within distance r of some center.  If r < min_j alpha_j, the ball of
radius r around |0> consists of states whose squared moduli majorize alpha^2,
so v_i^dag|target> can be prepared by the conversion + phase protocol and Bob
finishes with v_i.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import EXACT_TOL, PureState, SchmidtState, majorization_compare
from .errors import (
    CoverageMissError,
    CoverBuildError,
    DimensionError,
    InvalidInputError,
    RadiusBoundError,
)
from .transcript import CostReport, ProtocolTranscript, StageCost, StageRecord, bits_for
from .transform import run_lemma_protocol, stage1_bit_budget

DEFAULT_PACKING = 0.9
DEFAULT_BUDGET = 10_000
_BLOCK = 8192


@dataclass(frozen=True, eq=False)
class CoverCodebook:
    d: int
    r: float
    centers: np.ndarray  # (n, d)
    unitaries: np.ndarray  # (n, d, d)
    seed: int = 0
    packing_factor: float = DEFAULT_PACKING
    phase_quotient: bool = True

    def __post_init__(self):
        centers = np.array(self.centers, dtype=complex)
        unitaries = np.array(self.unitaries, dtype=complex)
        if centers.ndim != 2 or centers.shape[1] != self.d:
            raise DimensionError("centers must be an (n, d) array")
        if unitaries.shape != (centers.shape[0], self.d, self.d):
            raise DimensionError("need one d x d unitary per center")
        if not 0 < self.r:
            raise InvalidInputError("cover radius must be positive")
        if np.max(np.abs(unitaries[:, :, 0] - centers), initial=0.0) > EXACT_TOL:
            raise InvalidInputError("each unitary must map |0> to its center")
        centers.setflags(write=False)
        unitaries.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "unitaries", unitaries)

    @property
    def size(self) -> int:
        return self.centers.shape[0]

    @property
    def base_point(self) -> PureState:
        return PureState.basis(self.d, 0)


@dataclass(frozen=True)
class CoverReport:
    num_samples: int
    misses: int
    worst_min_distance: float


def _distances(states: np.ndarray, centers: np.ndarray, phase_quotient: bool) -> np.ndarray:
    """Pairwise distances, rows = states, columns = centers."""
    if phase_quotient:
        overlap = np.abs(states.conj() @ centers.T)
        return np.sqrt(np.clip(2.0 - 2.0 * overlap, 0.0, None))
    diff = states[:, None, :] - centers[None, :, :]
    return np.linalg.norm(diff, axis=-1)


def _haar_block(n: int, d: int, rng: np.random.Generator, phase_quotient: bool) -> np.ndarray:
    v = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if phase_quotient:
        v *= np.exp(-1j * np.angle(v[:, :1]))
    return v


def householder_completion(x) -> np.ndarray:
    """Unitary v with v|0> = x (a phased Householder reflection)."""
    x = np.asarray(x, dtype=complex)
    d = x.size
    phase = np.exp(1j * np.angle(x[0])) if abs(x[0]) > 0 else 1.0
    e0 = np.zeros(d, dtype=complex)
    e0[0] = 1.0
    w = phase * e0 - x
    nw = np.vdot(w, w).real
    if nw < 1e-30:
        return phase * np.eye(d, dtype=complex)
    return phase * (np.eye(d) - 2.0 * np.outer(w, w.conj()) / nw)


def max_radius(shared: SchmidtState) -> float:
    """Exclusive upper bound on usable cover radii for this resource."""
    return float(np.min(shared.coefficients))


def membership_in_S(state: PureState, shared: SchmidtState) -> bool:
    """Whether the state's squared moduli majorize the resource spectrum."""
    if state.dim != shared.dim:
        raise DimensionError(f"dimension mismatch: {state.dim} vs {shared.dim}")
    return majorization_compare(shared.spectrum, np.abs(state.amplitudes) ** 2)


def build_cover(d: int, r: float, candidate_budget: int = DEFAULT_BUDGET, seed: int = 0,
                packing_factor: float = DEFAULT_PACKING, phase_quotient: bool = True,
                max_candidates: int = 10_000_000) -> CoverCodebook:
    """Greedy epsilon-net over Haar-random candidates.

    |0> is always center 0.  A candidate becomes a new center when it is farther
    than packing_factor * r from every existing center; construction stops after
    ``candidate_budget`` consecutive candidates that were already that close.
    """
    if d < 2:
        raise DimensionError("dimension must be >= 2")
    if not 0 < r:
        raise InvalidInputError("radius must be positive")
    if candidate_budget < 1:
        raise InvalidInputError("candidate_budget must be >= 1")
    rng = np.random.default_rng(seed)
    threshold = packing_factor * r
    centers = [np.eye(d, dtype=complex)[0]]
    center_arr = np.array(centers)
    streak = drawn = 0

    def codebook():
        arr = np.array(centers)
        return CoverCodebook(d, r, arr, np.array([householder_completion(c) for c in arr]),
                             seed, packing_factor, phase_quotient)

    while streak < candidate_budget:
        if drawn >= max_candidates:
            raise CoverBuildError(f"no stable cover after {drawn} candidates", codebook())
        block = _haar_block(_BLOCK, d, rng, phase_quotient)
        near_old = _distances(block, center_arr, phase_quotient).min(axis=1)
        fresh = []
        for cand, dist in zip(block, near_old):
            drawn += 1
            if fresh and dist > threshold:
                dist = min(dist, _distances(cand[None], np.array(fresh), phase_quotient).min())
            if dist > threshold:
                fresh.append(cand)
                streak = 0
            else:
                streak += 1
                if streak >= candidate_budget:
                    break
        if fresh:
            centers.extend(fresh)
            center_arr = np.array(centers)
    return codebook()


def _min_distances(states, codebook):
    out = np.empty(states.shape[0])
    for start in range(0, states.shape[0], _BLOCK):
        blk = states[start:start + _BLOCK]
        out[start:start + _BLOCK] = _distances(blk, codebook.centers, codebook.phase_quotient).min(axis=1)
    return out


def locate(target: PureState, codebook: CoverCodebook) -> int:
    """Smallest index of a center within distance r of the target."""
    if target.dim != codebook.d:
        raise DimensionError(f"dimension mismatch: {target.dim} vs {codebook.d}")
    dist = _distances(target.amplitudes[None], codebook.centers, codebook.phase_quotient)[0]
    hits = np.nonzero(dist < codebook.r)[0]
    if hits.size == 0:
        raise CoverageMissError(f"no center within r = {codebook.r} (closest {dist.min():.6f})")
    return int(hits[0])


def align_to_center(target: PureState, center) -> PureState:
    """Global-phase copy of the target closest to ``center``."""
    overlap = np.vdot(target.amplitudes, center)
    if abs(overlap) < 1e-300:
        return target
    return PureState(target.amplitudes * overlap / abs(overlap))


def verify_cover(codebook: CoverCodebook, num_samples: int, seed: int = 0,
                 workers: int = 1) -> CoverReport:
    """Monte Carlo coverage check with Haar-random samples.

    The sample stream is split into ``workers`` shards seeded from one
    SeedSequence, so the result is fixed for a given (seed, workers).
    """
    if num_samples < 0:
        raise InvalidInputError("num_samples must be nonnegative")
    if num_samples == 0:
        return CoverReport(0, 0, 0.0)
    workers = max(1, int(workers))
    seqs = np.random.SeedSequence(seed).spawn(workers)
    sizes = [num_samples // workers + (k < num_samples % workers) for k in range(workers)]

    def shard(k):
        rng = np.random.default_rng(seqs[k])
        states = _haar_block(sizes[k], codebook.d, rng, codebook.phase_quotient)
        return _min_distances(states, codebook)

    if workers == 1:
        parts = [shard(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(shard, range(workers)))
    dmin = np.concatenate(parts)
    return CoverReport(num_samples, int(np.sum(dmin >= codebook.r)), float(dmin.max()))


def cost_report(shared: SchmidtState, codebook: CoverCodebook) -> CostReport:
    idx_exact, idx_ceil = bits_for(codebook.size)
    s1_exact, s1_ceil = stage1_bit_budget(shared.coefficients)
    s2_exact, s2_ceil = bits_for(shared.dim)
    return CostReport((
        StageCost("codebook_index", idx_exact, idx_ceil),
        StageCost("transform", s1_exact, s1_ceil),
        StageCost("phase_preparation", s2_exact, s2_ceil),
    ))


def run_universal_rsp(shared: SchmidtState, target: PureState, codebook: CoverCodebook,
                      mode: str = "enumerate", seed=0) -> tuple[list[ProtocolTranscript], CostReport]:
    """Prepare an arbitrary pure state with a finite, fixed-length message."""
    if not isinstance(shared, SchmidtState):
        shared = SchmidtState(shared)
    if target.dim != shared.dim or codebook.d != shared.dim:
        raise DimensionError("target, codebook and resource must share one dimension")
    bound = max_radius(shared)
    if codebook.r >= bound:
        raise RadiusBoundError(f"cover radius {codebook.r} must be below min alpha = {bound}")

    i = locate(target, codebook)
    v = codebook.unitaries[i]
    aligned = align_to_center(target, codebook.centers[i]) if codebook.phase_quotient else target
    local = PureState(v.conj().T @ aligned.amplitudes)
    if not membership_in_S(local, shared):
        # r < min alpha guarantees membership; reaching this means a numerical fault
        raise RadiusBoundError("pulled-back target is not reachable from the resource")

    beta = np.abs(local.amplitudes)
    beta = beta / np.linalg.norm(beta)
    phases = np.angle(local.amplitudes)
    leaves = []
    for leaf in run_lemma_protocol(shared, beta, phases, mode=mode, seed=seed):
        stage = StageRecord("codebook_index", i, codebook.size, 1.0, f"locate[{i}]", v,
                            leaf.final_state)
        leaves.append(leaf.extend((stage,), PureState(v @ leaf.final_state.amplitudes), target))
    return leaves, cost_report(shared, codebook)


def sample_ball(center, r: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n unit vectors with ||x - center|| < r, spread over the whole ball (rejection)."""
    center = np.asarray(center, dtype=complex)
    d = center.size
    out = []
    while sum(len(o) for o in out) < n:
        g = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        t = rng.uniform(0.0, 1.2 * r, size=(n, 1))
        x = center + t * g
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        keep = np.linalg.norm(x - center, axis=1) < r
        out.append(x[keep])
    return np.concatenate(out)[:n]
