"""JSON encoding shared by the CLI and codebook files.

Complex numbers are [re, im] pairs, states {"dim": d, "amplitudes": [...]},
matrices row-major lists of rows.  Floats are written with 17 significant
digits so output is byte-stable and round-trips exactly.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .core import PureState
from .errors import InvalidInputError


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    re, im = v
    return complex(re, im)


def vector_to_json(v) -> list:
    return [complex_to_json(z) for z in np.asarray(v).reshape(-1)]


def vector_from_json(v) -> np.ndarray:
    return np.array([complex_from_json(z) for z in v], dtype=complex)


def matrix_to_json(m) -> list:
    return [vector_to_json(row) for row in np.asarray(m)]


def matrix_from_json(m) -> np.ndarray:
    return np.array([vector_from_json(row) for row in m], dtype=complex)


def state_to_json(s: PureState) -> dict:
    return {"dim": s.dim, "amplitudes": vector_to_json(s.amplitudes)}


def state_from_json(obj) -> PureState:
    amps = vector_from_json(obj["amplitudes"])
    if "dim" in obj and obj["dim"] != amps.size:
        raise InvalidInputError(f"state dim {obj['dim']} does not match {amps.size} amplitudes")
    return PureState(amps)


def measurement_to_json(M) -> dict:
    return {"dim": M.dim, "operators": [matrix_to_json(m) for m in M.operators]}


def transcript_to_json(t) -> dict:
    return {
        "stages": [
            {
                "stage_name": s.stage_name,
                "outcome": s.outcome,
                "num_messages": s.num_messages,
                "probability": s.probability,
                "classical_bits": s.classical_bits,
                "classical_bits_ceiling": s.classical_bits_ceiling,
                "alice_operation": s.alice_operation,
                "bob_correction": matrix_to_json(s.bob_correction),
            }
            for s in t.stages
        ],
        "final_state": state_to_json(t.final_state),
        "target": state_to_json(t.target),
        "fidelity": t.fidelity,
        "probability": t.probability,
        "total_cbits_exact": t.total_cbits_exact,
        "total_cbits_ceiling": t.total_cbits_ceiling,
    }


def cost_to_json(c) -> dict:
    return {
        "stages": [{"name": s.name, "exact_bits": s.exact_bits, "ceiling_bits": s.ceiling_bits}
                   for s in c.stage_bits],
        "total_exact": c.total_exact,
        "total_ceiling": c.total_ceiling,
    }


def classification_to_json(c) -> dict:
    out = {
        "kind": c.kind,
        "theta0": c.axis_angle.theta0,
        "axis": list(c.axis_angle.axis),
        "z": None,
        "plane_normal": None,
        "radius": None,
        "points": [[p.x, p.y, p.z] for p in c.isolated_points],
        "max_residual": c.max_residual,
        "near_degenerate": bool(c.near_degenerate),
    }
    if c.circle is not None:
        out["circle_kind"] = c.circle.kind
        out["z"] = c.circle.z_value
        out["plane_normal"] = None if c.circle.plane_normal is None else list(c.circle.plane_normal)
        out["radius"] = c.circle.radius
    return out


def codebook_to_json(cb) -> dict:
    return {
        "d": cb.d,
        "r": cb.r,
        "centers": [state_to_json(PureState(c)) for c in cb.centers],
        "unitaries": [matrix_to_json(u) for u in cb.unitaries],
        "seed": cb.seed,
        "packing_factor": cb.packing_factor,
        "phase_quotient": cb.phase_quotient,
    }


def codebook_from_json(obj):
    from .cover import CoverCodebook

    centers = np.array([vector_from_json(c["amplitudes"]) for c in obj["centers"]])
    unitaries = np.array([matrix_from_json(u) for u in obj["unitaries"]])
    return CoverCodebook(int(obj["d"]), float(obj["r"]), centers, unitaries,
                         int(obj.get("seed", 0)), float(obj.get("packing_factor", 0.9)),
                         bool(obj.get("phase_quotient", True)))


def _encode(obj, out: list):
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite float {x}")
        if x == 0.0:
            x = 0.0  # drop the sign of negative zero
        out.append(format(x, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _encode(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for k, val in enumerate(obj):
            if k:
                out.append(", ")
            _encode(val, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)
