"""Records of protocol runs and their classical communication cost."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import PureState, fidelity


def bits_for(outcomes: int) -> tuple[float, int]:
    """Exact and whole-bit cost of announcing one of ``outcomes`` messages."""
    if outcomes < 1:
        raise ValueError("need at least one possible message")
    exact = math.log2(outcomes)
    return exact, int(math.ceil(exact - 1e-12))


@dataclass(frozen=True, eq=False)
class StageRecord:
    stage_name: str
    outcome: int
    num_messages: int
    probability: float
    alice_operation: str
    bob_correction: np.ndarray
    bob_state_before: Optional[PureState] = None

    @property
    def classical_bits(self) -> float:
        return bits_for(self.num_messages)[0]

    @property
    def classical_bits_ceiling(self) -> int:
        return bits_for(self.num_messages)[1]


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    """One leaf of a protocol's branch tree."""

    stages: tuple[StageRecord, ...]
    final_state: PureState
    target: PureState

    @property
    def fidelity(self) -> float:
        return fidelity(self.final_state, self.target)

    @property
    def probability(self) -> float:
        return float(np.prod([s.probability for s in self.stages]))

    @property
    def total_cbits_exact(self) -> float:
        return float(sum(s.classical_bits for s in self.stages))

    @property
    def total_cbits_ceiling(self) -> int:
        return sum(s.classical_bits_ceiling for s in self.stages)

    def extend(self, stages, final_state, target=None) -> ProtocolTranscript:
        return ProtocolTranscript(self.stages + tuple(stages), final_state,
                                  self.target if target is None else target)


@dataclass(frozen=True)
class StageCost:
    name: str
    exact_bits: float
    ceiling_bits: int


@dataclass(frozen=True)
class CostReport:
    """Fixed message budget of a protocol, independent of the branch taken."""

    stage_bits: tuple[StageCost, ...] = field(default_factory=tuple)

    @property
    def total_exact(self) -> float:
        return float(sum(s.exact_bits for s in self.stage_bits))

    @property
    def total_ceiling(self) -> int:
        return sum(s.ceiling_bits for s in self.stage_bits)
