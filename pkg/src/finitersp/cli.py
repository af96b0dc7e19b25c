"""Command-line entry point: ``finitersp <subcommand> --input payload.json``.

Exit codes: 0 success, 1 verification failure, 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys

import jsonschema

from . import serialize as ser
from .core import SchmidtState
from .cover import build_cover, run_universal_rsp, verify_cover
from .errors import ConditionViolatedError, CoverageMissError, CoverBuildError, InvalidInputError, RSPError
from .measurement import verify_rsp_condition
from .minbits import run_d4_demo, run_theorem1
from .qubit import classify_pair
from .transform import build_transform_protocol, run_lemma_protocol

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT = 0, 1, 2

_NUM = {"type": "number"}
_COMPLEX = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}]}
_VECTOR = {"type": "array", "items": _COMPLEX, "minItems": 2}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 2}
_STATE = {"type": "object", "required": ["amplitudes"],
          "properties": {"dim": {"type": "integer"}, "amplitudes": _VECTOR}}
_REALS = {"type": "array", "items": _NUM, "minItems": 2}
_CODEBOOK = {"type": "object", "required": ["d", "r", "centers", "unitaries"],
             "properties": {"d": {"type": "integer", "minimum": 2},
                            "r": {"type": "number", "exclusiveMinimum": 0},
                            "centers": {"type": "array", "items": _STATE},
                            "unitaries": {"type": "array", "items": _MATRIX}}}


def _obj(required, **props):
    return {"type": "object", "required": list(required), "properties": props}


SCHEMAS = {
    "theorem1": _obj(["alpha", "phases"], alpha=_REALS, phases=_REALS, rotation=_MATRIX),
    "lemma": _obj(["alpha", "beta", "phases"], alpha=_REALS, beta=_REALS, phases=_REALS),
    "universal": _obj(["alpha", "target"], alpha=_REALS, target=_STATE, codebook=_CODEBOOK,
                      codebook_file={"type": "string"},
                      r={"type": "number", "exclusiveMinimum": 0},
                      budget={"type": "integer", "minimum": 1}),
    "characterize": _obj(["u0", "u1", "alpha"], u0=_MATRIX, u1=_MATRIX,
                         alpha={**_REALS, "maxItems": 2}),
    "cover-build": _obj(["d", "r"], d={"type": "integer", "minimum": 2},
                        r={"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
                        budget={"type": "integer", "minimum": 1},
                        packing_factor={"type": "number", "exclusiveMinimum": 0},
                        phase_quotient={"type": "boolean"},
                        verify_samples={"type": "integer", "minimum": 0}),
    "cover-verify": _obj(["samples"], codebook=_CODEBOOK, codebook_file={"type": "string"},
                         samples={"type": "integer", "minimum": 0}),
    "verify-condition": _obj(["corrections", "probs", "target", "alpha"],
                             corrections={"type": "array", "items": _MATRIX, "minItems": 1},
                             probs={"type": "array", "items": _NUM, "minItems": 1},
                             target=_STATE, alpha=_REALS),
    "demo-d4": _obj(["a", "b", "phi", "psi"], a=_NUM, b=_NUM, phi=_NUM, psi=_NUM),
}

DEFAULT_TOL = {"universal": 1e-9, "verify-condition": 1e-9}


class VerificationFailure(Exception):
    def __init__(self, result):
        super().__init__("verification failed")
        self.result = result


def _leaves_summary(leaves, tol):
    fids = [leaf.fidelity for leaf in leaves]
    return {
        "leaves": [ser.transcript_to_json(leaf) for leaf in leaves],
        "num_leaves": len(leaves),
        "min_fidelity": min(fids),
        "total_cbits_exact": leaves[0].total_cbits_exact,
        "total_cbits_ceiling": leaves[0].total_cbits_ceiling,
        "ok": min(fids) >= 1 - tol,
    }


def _load_codebook(payload):
    if "codebook" in payload:
        return ser.codebook_from_json(payload["codebook"])
    if "codebook_file" in payload:
        with open(payload["codebook_file"]) as fh:
            return ser.codebook_from_json(json.load(fh))
    raise InvalidInputError("payload needs 'codebook' or 'codebook_file'")


def _cmd_theorem1(p, args, tol):
    rotation = ser.matrix_from_json(p["rotation"]) if "rotation" in p else None
    leaves = run_theorem1(SchmidtState(p["alpha"]), p["phases"], rotation,
                          mode=args.mode, seed=args.seed)
    return _leaves_summary(leaves, tol)


def _cmd_lemma(p, args, tol):
    protocol = build_transform_protocol(p["alpha"], p["beta"])
    leaves = run_lemma_protocol(SchmidtState(p["alpha"]), p["beta"], p["phases"],
                                mode=args.mode, seed=args.seed)
    out = _leaves_summary(leaves, tol)
    out["birkhoff_terms"] = [{"weight": w, "permutation": list(s)}
                             for w, s in zip(protocol.branch_probs, protocol.permutations)]
    out["alice_operators"] = ser.measurement_to_json(protocol.alice_operators)
    return out


def _cmd_universal(p, args, tol):
    shared = SchmidtState(p["alpha"])
    if "codebook" in p or "codebook_file" in p:
        codebook = _load_codebook(p)
    else:
        if "r" not in p:
            raise InvalidInputError("payload needs a codebook or a radius 'r'")
        codebook = build_cover(shared.dim, p["r"], p.get("budget", 10_000), seed=args.seed)
    target = ser.state_from_json(p["target"])
    try:
        leaves, cost = run_universal_rsp(shared, target, codebook, mode=args.mode, seed=args.seed)
    except CoverageMissError as exc:
        raise VerificationFailure({"ok": False, "error": str(exc)}) from exc
    out = _leaves_summary(leaves, tol)
    out["codebook_size"] = codebook.size
    out["codebook_index"] = leaves[0].stages[-1].outcome
    out["cost"] = ser.cost_to_json(cost)
    return out


def _cmd_characterize(p, args, tol):
    a0, a1 = p["alpha"]
    result = classify_pair(ser.matrix_from_json(p["u0"]), ser.matrix_from_json(p["u1"]), a0, a1)
    return ser.classification_to_json(result)


def _cmd_cover_build(p, args, tol):
    codebook = build_cover(p["d"], p["r"], p.get("budget", 10_000), seed=args.seed,
                           packing_factor=p.get("packing_factor", 0.9),
                           phase_quotient=p.get("phase_quotient", True))
    out = ser.codebook_to_json(codebook)
    n = p.get("verify_samples", 0)
    if n:
        report = verify_cover(codebook, n, seed=args.seed, workers=args.workers)
        out["verification"] = vars(report)
        if report.misses:
            raise VerificationFailure(out)
    return out


def _cmd_cover_verify(p, args, tol):
    report = verify_cover(_load_codebook(p), p["samples"], seed=args.seed, workers=args.workers)
    out = dict(vars(report), ok=report.misses == 0)
    if report.misses:
        raise VerificationFailure(out)
    return out


def _cmd_verify_condition(p, args, tol):
    check = verify_rsp_condition([ser.matrix_from_json(u) for u in p["corrections"]], p["probs"],
                                 ser.state_from_json(p["target"]), p["alpha"], tol)
    out = {"holds": check.holds, "residual": check.residual}
    if not check.holds:
        raise VerificationFailure(out)
    return out


def _cmd_demo_d4(p, args, tol):
    leaves = run_d4_demo(p["a"], p["b"], p["phi"], p["psi"], mode=args.mode, seed=args.seed)
    return _leaves_summary(leaves, tol)


COMMANDS = {
    "theorem1": _cmd_theorem1,
    "lemma": _cmd_lemma,
    "universal": _cmd_universal,
    "characterize": _cmd_characterize,
    "cover-build": _cmd_cover_build,
    "cover-verify": _cmd_cover_verify,
    "verify-condition": _cmd_verify_condition,
    "demo-d4": _cmd_demo_d4,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finitersp",
                                     description="Remote state preparation protocols and verifiers.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--input", "-i", default="-",
                         help="payload file, '-' for stdin, or an inline JSON object")
        cmd.add_argument("--output", "-o", default=None, help="write JSON here instead of stdout")
        cmd.add_argument("--seed", type=int, default=0)
        cmd.add_argument("--tolerance", type=float, default=None,
                         help="fidelity / residual tolerance override")
        cmd.add_argument("--workers", type=int, default=1)
        cmd.add_argument("--mode", choices=("enumerate", "sample"), default="enumerate")
    return parser


def _read_payload(source: str):
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith("{"):
        text = source
    else:
        with open(source) as fh:
            text = fh.read()
    return json.loads(text)


def _emit(result, path):
    text = ser.dumps(result) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_command(argv=None) -> int:
    args = build_parser().parse_args(argv)
    tol = args.tolerance if args.tolerance is not None else DEFAULT_TOL.get(args.command, 1e-10)
    try:
        payload = _read_payload(args.input)
        jsonschema.validate(payload, SCHEMAS[args.command])
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        print(f"finitersp: malformed input: {getattr(exc, 'message', exc)}", file=sys.stderr)
        return EXIT_BAD_INPUT

    try:
        result = COMMANDS[args.command](payload, args, tol)
    except VerificationFailure as exc:
        _emit(exc.result, args.output)
        print("finitersp: verification failed", file=sys.stderr)
        return EXIT_FAIL
    except (ConditionViolatedError, CoverBuildError, CoverageMissError) as exc:
        print(f"finitersp: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (RSPError, ValueError, KeyError, OSError) as exc:
        print(f"finitersp: invalid input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    _emit(result, args.output)
    if isinstance(result, dict) and result.get("ok") is False:
        print("finitersp: fidelity below tolerance", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
