"""Deterministic LOCC conversion sum_i alpha_i|ii> -> sum_i beta_i|ii> and its RSP pipeline.

When alpha^2 is majorized by beta^2 there is a doubly stochastic D with
alpha^2 = D beta^2.  Writing D = sum_pi q_pi P_pi, Alice measures with
A_pi = sqrt(q_pi) diag(beta_{pi(i)} / alpha_i) and, after she announces pi,
both parties permute their basis so the state becomes sum_j beta_j|jj>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .core import EXACT_TOL, PureState, SchmidtState, majorization_compare
from .errors import (
    DecompositionError,
    DegenerateSchmidtError,
    DimensionError,
    InvalidInputError,
    NotMajorizedError,
)
from .measurement import GeneralizedMeasurement, branch_evaluate, sample_outcome
from .minbits import MODES, _theorem1_leaves
from .transcript import ProtocolTranscript, StageRecord

SUPPORT_TOL = 1e-12
BIRKHOFF_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DoublyStochasticMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("doubly stochastic matrix must be square")
        if np.any(m < -1e-14):
            raise InvalidInputError("doubly stochastic matrix has negative entries")
        if (np.max(np.abs(m.sum(axis=0) - 1)) > EXACT_TOL
                or np.max(np.abs(m.sum(axis=1) - 1)) > EXACT_TOL):
            raise InvalidInputError("row and column sums must all be 1")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class BirkhoffDecomposition:
    """D = sum_k weight_k P_{sigma_k} with P_sigma[i, sigma(i)] = 1."""

    terms: tuple[tuple[float, tuple[int, ...]], ...]

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.terms])

    def matrix(self) -> np.ndarray:
        d = len(self.terms[0][1])
        out = np.zeros((d, d))
        for w, sigma in self.terms:
            out[np.arange(d), sigma] += w
        return out


@dataclass(frozen=True, eq=False)
class TransformProtocol:
    alice_operators: GeneralizedMeasurement
    bob_corrections: tuple[np.ndarray, ...]
    branch_probs: np.ndarray
    permutations: tuple[tuple[int, ...], ...]
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def num_branches(self) -> int:
        return len(self.permutations)


def permutation_matrix(sigma) -> np.ndarray:
    """P with P[i, sigma(i)] = 1."""
    d = len(sigma)
    p = np.zeros((d, d))
    p[np.arange(d), list(sigma)] = 1.0
    return p


def doubly_stochastic_from_majorization(p, q) -> DoublyStochasticMatrix:
    """D with p = D q, built from at most d - 1 T-transforms of the sorted vectors.

    Each step picks the largest j with p_j < q_j and the smallest k > j with
    p_k > q_k (on descending-sorted copies) and moves weight from q_j to q_k
    until one of the two coordinates matches p.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if p.size != q.size:
        raise DimensionError(f"length mismatch: {p.size} vs {q.size}")
    if not majorization_compare(p, q):
        raise NotMajorizedError(f"{p} is not majorized by {q}")
    d = p.size
    # stable descending sort; ties keep the lower index first
    sp = np.argsort(-p, kind="stable")
    sq = np.argsort(-q, kind="stable")
    x, y = p[sp], q[sq].copy()

    D = np.eye(d)
    tol = 1e-13
    for _ in range(d):
        diff = y - x
        ahead = np.nonzero(diff > tol)[0]
        if ahead.size == 0:
            break
        j = ahead[-1]
        behind = np.nonzero(diff[j + 1:] < -tol)[0]
        if behind.size == 0:
            break
        k = j + 1 + behind[0]
        delta = min(y[j] - x[j], x[k] - y[k])
        t = 1.0 - delta / (y[j] - y[k])
        T = np.eye(d)
        T[[j, k], [j, k]] = t
        T[j, k] = T[k, j] = 1.0 - t
        y = T @ y
        D = T @ D

    # p[sp] = D_sorted q[sq]  ->  p = Pp^T D_sorted Pq q
    full = np.zeros((d, d))
    full[np.ix_(sp, sq)] = D
    if np.max(np.abs(full @ q - p)) > 1e-9:
        raise DecompositionError("T-transform chain did not reach the majorized vector")
    return DoublyStochasticMatrix(full)


def _has_perfect_matching(support: np.ndarray) -> bool:
    d = support.shape[0]
    match_col = [-1] * d

    def augment(row, seen):
        for col in np.nonzero(support[row])[0]:
            if not seen[col]:
                seen[col] = True
                if match_col[col] < 0 or augment(match_col[col], seen):
                    match_col[col] = row
                    return True
        return False

    return all(augment(r, [False] * d) for r in range(d))


def lexicographic_perfect_matching(support: np.ndarray):
    """Lexicographically first sigma with support[i, sigma(i)] for all i, or None."""
    support = np.array(support, dtype=bool)
    d = support.shape[0]
    if not _has_perfect_matching(support):
        return None
    sigma = []
    for row in range(d):
        for col in np.nonzero(support[row])[0]:
            trial = support.copy()
            trial[row, :] = False
            trial[:, col] = False
            trial[row, col] = True
            if _has_perfect_matching(trial):
                sigma.append(int(col))
                support = trial
                break
    return tuple(sigma)


def _caratheodory_reduce(terms, limit):
    """Drop terms until at most ``limit`` affinely independent permutations remain."""
    weights = np.array([w for w, _ in terms])
    perms = [s for _, s in terms]
    while len(perms) > limit:
        vecs = np.array([permutation_matrix(s).ravel() for s in perms])
        # null vector c of [vecs^T; 1]: sum c_k P_k = 0, sum c_k = 0
        A = np.vstack([vecs.T, np.ones(len(perms))])
        _, _, vh = np.linalg.svd(A)
        c = vh[-1]
        if not np.any(c > 1e-12):
            c = -c
        pos = c > 1e-12
        ratio = weights[pos] / c[pos]
        step = ratio.min()
        weights = weights - step * c
        drop = np.nonzero(pos)[0][np.argmin(ratio)]
        keep = [i for i in range(len(perms)) if i != drop and weights[i] > 1e-15]
        perms = [perms[i] for i in keep]
        weights = weights[keep]
    return [(float(w), s) for w, s in zip(weights, perms)]


def birkhoff_decompose(D) -> BirkhoffDecomposition:
    """Greedy Birkhoff-von Neumann decomposition.

    Repeatedly peels off the lexicographically first perfect matching on the
    support (entries > 1e-12) with the smallest matched entry as weight.  If the
    greedy run produces more than (d-1)^2 + 1 terms, a Caratheodory reduction
    brings it back under the bound.
    """
    if not isinstance(D, DoublyStochasticMatrix):
        D = DoublyStochasticMatrix(D)
    d = D.dim
    rest = D.entries.copy()
    terms = []
    for _ in range(d * d + 1):
        if np.max(rest) <= BIRKHOFF_RESIDUAL_TOL:
            break
        sigma = lexicographic_perfect_matching(rest > SUPPORT_TOL)
        if sigma is None:
            raise DecompositionError(
                f"no perfect matching on the remaining support (residual {np.max(rest):.3e})")
        w = float(rest[np.arange(d), sigma].min())
        rest[np.arange(d), sigma] -= w
        terms.append((w, sigma))
    if not terms or np.max(np.abs(rest)) > BIRKHOFF_RESIDUAL_TOL:
        raise DecompositionError("Birkhoff decomposition did not converge")
    # fold the leftover round-off into the weights so they sum to exactly 1
    total = sum(w for w, _ in terms)
    terms = [(w / total, s) for w, s in terms]
    limit = (d - 1) ** 2 + 1
    if len(terms) > limit:
        terms = _caratheodory_reduce(terms, limit)
    return BirkhoffDecomposition(tuple(terms))


def cyclic_decomposition(d: int) -> BirkhoffDecomposition:
    """The flat matrix J/d as the uniform mixture of the d cyclic shifts."""
    return BirkhoffDecomposition(tuple(
        (1.0 / d, tuple((i + s) % d for i in range(d))) for s in range(d)))


def _check_pair(alpha, beta):
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if alpha.size != beta.size:
        raise DimensionError("alpha and beta must have the same length")
    if np.any(alpha <= 1e-12):
        raise DegenerateSchmidtError("initial Schmidt coefficients must be strictly positive")
    if np.any(beta < 0):
        raise InvalidInputError("target Schmidt coefficients must be nonnegative")
    for v in (alpha, beta):
        if abs(float(np.sum(v**2)) - 1.0) > EXACT_TOL:
            raise InvalidInputError("Schmidt coefficients must have unit 2-norm")
    if not majorization_compare(alpha**2, beta**2):
        raise NotMajorizedError(f"alpha^2 = {alpha**2} is not majorized by beta^2 = {beta**2}")
    return alpha, beta


def transform_decomposition(alpha, beta) -> BirkhoffDecomposition:
    """Permutation mixture used for the conversion alpha -> beta.

    Equal spectra need no measurement; a maximally entangled start uses the d
    cyclic shifts; anything else goes through T-transforms and Birkhoff.
    """
    alpha, beta = _check_pair(alpha, beta)
    d = alpha.size
    if np.max(np.abs(alpha**2 - beta**2)) <= 1e-13:
        return BirkhoffDecomposition(((1.0, tuple(range(d))),))
    if np.max(np.abs(alpha**2 - 1.0 / d)) <= 1e-13:
        return cyclic_decomposition(d)
    dec = birkhoff_decompose(doubly_stochastic_from_majorization(alpha**2, beta**2))
    return _polish_weights(dec, alpha**2, beta**2)


def _polish_weights(dec: BirkhoffDecomposition, p, q) -> BirkhoffDecomposition:
    """Minimal-norm weight correction so that sum_k w_k q[sigma_k] = p to round-off.

    The greedy peel stops at a 1e-9 remainder, which Alice's operators would
    otherwise carry into their completeness relation amplified by 1/alpha^2.
    """
    B = np.array([q[list(s)] for _, s in dec.terms]).T
    w = dec.weights
    w_new = w + np.linalg.lstsq(B, p - B @ w, rcond=None)[0]
    if np.any(w_new <= 0):
        return dec
    return BirkhoffDecomposition(tuple((float(x), s) for x, (_, s) in zip(w_new, dec.terms)))


def build_transform_protocol(alpha, beta) -> TransformProtocol:
    alpha, beta = _check_pair(alpha, beta)
    decomposition = transform_decomposition(alpha, beta)
    ops, corrections, probs, perms = [], [], [], []
    for w, sigma in decomposition.terms:
        ops.append(np.sqrt(w) * np.diag(beta[list(sigma)] / alpha))
        # |i> -> |sigma(i)>, applied by both parties
        corrections.append(permutation_matrix(sigma).T)
        probs.append(w)
        perms.append(sigma)
    return TransformProtocol(GeneralizedMeasurement(tuple(ops)), tuple(corrections),
                             np.array(probs), tuple(perms), alpha, beta)


def stage1_bit_budget(alpha) -> tuple[float, int]:
    """Worst-case message size of the conversion stage for this resource."""
    alpha = np.asarray(alpha, dtype=float)
    d = alpha.size
    count = d if np.max(np.abs(alpha**2 - 1.0 / d)) <= 1e-13 else math.factorial(d)
    exact = math.log2(count)
    return exact, int(math.ceil(exact - 1e-12))


def _maximally_correlated(coeffs) -> np.ndarray:
    d = coeffs.size
    psi = np.zeros((d, d), dtype=complex)
    psi[np.arange(d), np.arange(d)] = coeffs
    return psi.reshape(-1)


def run_lemma_protocol(shared, beta, phases, mode: str = "enumerate", seed=0,
                       rotation=None) -> list[ProtocolTranscript]:
    """Convert the resource to sum beta_j|jj>, then prepare sum_j beta_j e^{i phi_j}|j>.

    Both messages are fixed-alphabet and sent together; every leaf of the
    branch tree is returned in ``enumerate`` mode.
    """
    if mode not in MODES:
        raise InvalidInputError(f"mode must be one of {MODES}")
    alpha = shared.coefficients if isinstance(shared, SchmidtState) else np.asarray(shared, dtype=float)
    protocol = build_transform_protocol(alpha, beta)
    d = alpha.size
    joint = PureState(_maximally_correlated(protocol.alpha))
    n = protocol.num_branches

    if mode == "enumerate":
        branches = branch_evaluate(joint, protocol.alice_operators, "A", (d, d))
    else:
        branches = [sample_outcome(joint, protocol.alice_operators, "A", (d, d), seed)]

    leaves = []
    for br in branches:
        if br.is_null:
            continue
        k = br.outcome
        perm = protocol.bob_corrections[k]
        converted = PureState(np.kron(perm, perm) @ br.post_state.amplitudes)
        stage = StageRecord("transform", k, n, br.probability, f"A_{protocol.permutations[k]}",
                            perm)
        prefix = ProtocolTranscript((stage,), converted, converted)
        leaves.extend(_theorem1_leaves(protocol.beta, phases, rotation, converted,
                                       np.eye(d), mode, (seed, k), prefix=prefix))
    return leaves
