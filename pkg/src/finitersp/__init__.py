"""Faithful remote state preparation with finite classical communication."""

from .core import (
    AxisAngle,
    BlochVector,
    PureState,
    SchmidtState,
    axis_angle_decompose,
    bloch_from_qubit,
    fidelity,
    haar_state,
    haar_unitary,
    majorization_compare,
    schmidt_decompose,
)
from .cover import (
    CoverCodebook,
    build_cover,
    locate,
    max_radius,
    membership_in_S,
    run_universal_rsp,
    verify_cover,
)
from .measurement import (
    GeneralizedMeasurement,
    branch_evaluate,
    povm_from_condition,
    sample_outcome,
    validate_measurement,
    verify_rsp_condition,
)
from .minbits import PhaseEnsemble, run_d4_demo, run_theorem1, theorem1_operators
from .qubit import admissible_circle, brute_force_ensemble, classify_pair
from .transcript import CostReport, ProtocolTranscript
from .transform import (
    birkhoff_decompose,
    build_transform_protocol,
    doubly_stochastic_from_majorization,
    run_lemma_protocol,
)

__version__ = "0.1.0"
