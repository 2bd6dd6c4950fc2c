"""Command-line entry point.

Every command prints one report: the command line, a digest of the input,
the tool version, the tolerance profile in effect, and the results.  The
structured format is deterministic JSON; the text format is for reading.

Exit codes: 0 success, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import warnings
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__, attack, bounds, cointoss, tolerances
from .errors import EPRBError, InputError, NumericalFailure, ParseError, ValidationError
from .fidelity import compare, fidelity_povm, fidelity_purification, povm_sum
from .hilbert import DensityMatrix, mutual_information, partial_trace
from .protocol import builtins as builtin_protocols
from .protocol.io import dumps, load_protocol, serialize, to_document
from .protocol.model import (
    CommitmentProtocol,
    joint_distribution,
    party_labels,
    run_honest,
    verify_opening,
)
from .sampling import random_povm, rng_from

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

DEFAULT_THETAS = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2)


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- conversions


def plain(obj: Any) -> Any:
    """Recursively turn numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def complex_rows(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_params(items: Optional[Sequence[str]]) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects key=value, got {item!r}")
        out[key] = _parse_value(value)
    return out


def _read_bytes(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def parse_matrix(text: str, field: str) -> np.ndarray:
    """A matrix given as rows of reals or of ``[re, im]`` pairs."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{field}: not valid JSON ({exc})") from None
    if isinstance(raw, dict):
        raw = raw.get("matrix")
    if not isinstance(raw, list) or not raw or not all(isinstance(row, list) for row in raw):
        raise ValidationError(field, "expected a non-empty array of rows")
    width = len(raw[0])
    rows = []
    for i, row in enumerate(raw):
        if len(row) != width:
            raise ValidationError(f"{field}[{i}]", f"row has {len(row)} entries, expected {width}")
        vals = []
        for j, entry in enumerate(row):
            if isinstance(entry, list) and len(entry) == 2:
                re, im = entry
            else:
                re, im = entry, 0.0
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
                raise ValidationError(f"{field}[{i}][{j}]", "expected a number or [re, im]")
            if not (math.isfinite(re) and math.isfinite(im)):
                raise ValidationError(f"{field}[{i}][{j}]", "non-finite entry")
            vals.append(complex(re, im))
        rows.append(vals)
    return np.array(rows, dtype=np.complex128)


def _matrix_arg(value: str, field: str) -> tuple[np.ndarray, bytes]:
    data = value.encode() if value.lstrip().startswith(("[", "{")) else _read_bytes(value)
    return parse_matrix(data.decode("utf-8", errors="replace"), field), data


# ------------------------------------------------------------------ protocols


def load_input(args) -> tuple[Any, str, str]:
    """Protocol plus a source description and the sha256 of its document."""
    if args.protocol and args.builtin:
        raise UsageError("give either --protocol or --builtin, not both")
    if args.protocol:
        data = _read_bytes(args.protocol)
        p = load_protocol(data)
        return p, f"file:{os.path.basename(args.protocol)}", hashlib.sha256(data).hexdigest()
    if args.builtin:
        p = builtin_protocols.builtin(args.builtin, parse_params(args.param))
        return p, f"builtin:{args.builtin}", hashlib.sha256(serialize(p).encode()).hexdigest()
    raise UsageError("no protocol given; use --protocol FILE or --builtin NAME")


def _need_kind(p, kind: str, command: str):
    if p.kind != kind:
        raise UsageError(f"{command} needs a {kind} protocol, got {p.kind}")


# ------------------------------------------------------------------- commands


def cmd_fidelity(args) -> tuple[dict, dict]:
    if args.rho0 or args.rho1:
        if not (args.rho0 and args.rho1):
            raise UsageError("--rho0 and --rho1 must be given together")
        m0, d0 = _matrix_arg(args.rho0, "rho0")
        m1, d1 = _matrix_arg(args.rho1, "rho1")
        rho0 = DensityMatrix.from_matrix(m0)
        rho1 = DensityMatrix.from_matrix(m1)
        source = {"source": "matrices", "sha256": hashlib.sha256(d0 + b"\0" + d1).hexdigest()}
    else:
        p, src, digest = load_input(args)
        _need_kind(p, "commitment", "fidelity")
        hiding = attack.hiding_report(p)
        rho0, rho1 = hiding.rho0, hiding.rho1
        source = {"source": src, "sha256": digest, "states": "receiver view after commit phase"}

    comp = compare(rho0, rho1)
    results: dict[str, Any] = {
        "dimension": rho0.dim,
        "fidelity_closed_form": comp.closed,
        "fidelity_purification": comp.purification,
        "fidelity_povm": comp.povm,
        "max_discrepancy": comp.max_discrepancy,
        "trace_distance": comp.trace_distance,
        "guess_probability": 0.5 + 0.5 * comp.trace_distance,
    }
    if args.witnesses:
        pair = fidelity_purification(rho0, rho1)
        _, povm = fidelity_povm(rho0, rho1)
        results["witnesses"] = {
            "purification_layout": [[label, dim] for label, dim in pair.psi0.layout.entries],
            "purification0": [[float(z.real), float(z.imag)] for z in pair.psi0.amplitudes],
            "purification1": [[float(z.real), float(z.imag)] for z in pair.psi1.amplitudes],
            "povm": [complex_rows(e) for e in povm],
        }
    if args.audit:
        rng = rng_from(args.seed)
        d = rho0.dim
        gaps = [povm_sum(rho0, rho1, random_povm(d, d, rng)) - comp.povm for _ in range(args.audit)]
        results["povm_audit"] = {"samples": args.audit, "min_gap": min(gaps)}
    return source, results


def cmd_attack(args) -> tuple[dict, dict]:
    if args.sweep:
        thetas = DEFAULT_THETAS if args.thetas is None else tuple(float(t) for t in args.thetas.split(","))
        rows = attack.theta_sweep(thetas)
        for row in rows:
            row["cos_theta"] = math.cos(row["theta"])
        digest = hashlib.sha256()
        for theta in thetas:
            digest.update(serialize(builtin_protocols.theta_commit({"theta": theta})).encode())
        return {"source": "builtin:theta-commit", "sha256": digest.hexdigest(), "sweep": list(thetas)}, {"sweep": rows}
    p, src, digest = load_input(args)
    _need_kind(p, "commitment", "attack")
    report = attack.simulate_attack(p)
    results = report.as_dict(include_unitary=args.witnesses)
    if args.audit:
        results["optimality_audit"] = attack.audit_random_unitaries(p, args.audit, rng_from(args.seed))
    return {"source": src, "sha256": digest}, results


def cmd_cointoss(args) -> tuple[dict, dict]:
    p, src, digest = load_input(args)
    _need_kind(p, "cointoss", "cointoss")
    return {"source": src, "sha256": digest}, {
        "rounds": p.n_rounds,
        "ideal_check": cointoss.check_ideal(p).as_dict(),
        "induction": cointoss.backward_induction(p).as_dict(include_states=args.witnesses),
    }


def cmd_bounds(args) -> tuple[dict, dict]:
    epsilons = args.epsilon or [1.0, 0.5, 0.25, 0.1, 0.01]
    results: dict[str, Any] = {
        "min_rounds": [{"epsilon": e, "rounds": n} for e, n in bounds.min_rounds_table(epsilons)],
        "note": "information imbalance is measured in bits; coin-toss bias bounds are not derived here",
    }
    source: dict[str, Any] = {"source": "epsilon", "sha256": None}
    if args.schedule:
        data = _read_bytes(args.schedule)
        try:
            raw = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"schedule: not valid JSON ({exc})") from None
        if not isinstance(raw, list) or not all(isinstance(x, list) and len(x) == 2 for x in raw):
            raise ValidationError("schedule", "expected an array of [actor, bits] pairs")
        trace = bounds.ledger_simulate([tuple(x) for x in raw], epsilons[0])
        results["ledger"] = trace.as_dict()
        source = {"source": f"file:{os.path.basename(args.schedule)}", "sha256": hashlib.sha256(data).hexdigest()}
    return source, results


def _snapshot_rows(states, p) -> list[dict]:
    alice = party_labels(p.layout, "A")
    rows = []
    for k, s in enumerate(states):
        rows.append({"step": k, "norm": s.norm(), "mutual_information_A_rest": max(mutual_information(s, alice), 0.0)})
    return rows


def cmd_run(args) -> tuple[dict, dict]:
    p, src, digest = load_input(args)
    results: dict[str, Any] = {"kind": p.kind, "name": p.name, "dimension": p.layout.total_dim}
    if isinstance(p, CommitmentProtocol):
        for b in (0, 1):
            trace = run_honest(p, b, snapshots=args.snapshots)
            entry: dict[str, Any] = {"acceptance": verify_opening(p, trace.after_open, b)}
            bob = partial_trace(trace.after_commit, p.bob_labels)
            entry["receiver_purity_after_commit"] = bob.purity()
            if args.snapshots:
                entry["snapshots"] = _snapshot_rows(trace.snapshots, p)
            results[f"bit{b}"] = entry
        results["hiding"] = attack.hiding_report(p).as_dict()
    else:
        shots: Optional[list] = [] if args.snapshots else None
        final = p.run(snapshots=shots)
        results["joint_distribution"] = joint_distribution(p, final)
        if args.snapshots:
            results["snapshots"] = _snapshot_rows([p.initial_state(), *shots], p)
    return {"source": src, "sha256": digest}, results


def cmd_export(args) -> tuple[dict, dict]:
    p, src, digest = load_input(args)
    return {"source": src, "sha256": digest}, {"document": to_document(p)}


COMMANDS = {
    "fidelity": cmd_fidelity,
    "attack": cmd_attack,
    "cointoss": cmd_cointoss,
    "bounds": cmd_bounds,
    "run": cmd_run,
    "export": cmd_export,
}


# --------------------------------------------------------------------- output


def _text(obj: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _is_flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar_text(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _is_flat(v):
                lines.append(f"{pad}-")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar_text(v)}")
    else:
        lines.append(pad + _scalar_text(obj))
    return lines


def _is_flat(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _scalar_text(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, list):
        return "[" + ", ".join(_scalar_text(x) for x in v) + "]"
    if isinstance(v, str):
        return v
    return json.dumps(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "text":
        return "\n".join(_text(report)) + "\n"
    return dumps(report)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the report here instead of standard output")
    common.add_argument("--format", choices=("structured", "text"), default="structured")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized audits")
    common.add_argument("--tolerance-profile", choices=sorted(tolerances.PROFILES), default="default")

    source = _Parser(add_help=False)
    source.add_argument("--builtin", choices=sorted(builtin_protocols.BUILTINS))
    source.add_argument("--param", action="append", metavar="KEY=VALUE", help="builtin parameter (repeatable)")
    source.add_argument("--protocol", metavar="FILE", help="protocol document")

    parser = _Parser(prog="eprb", description="Two-party quantum protocol analyses.")
    parser.add_argument("--version", action="version", version=f"eprb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fidelity", parents=[common, source], help="fidelity by three routes")
    p.add_argument("--rho0", help="density matrix (JSON literal or file)")
    p.add_argument("--rho1", help="density matrix (JSON literal or file)")
    p.add_argument("--witnesses", action="store_true", help="include purifications and the optimal POVM")
    p.add_argument("--audit", type=int, default=0, metavar="N", help="compare against N random POVMs")

    p = sub.add_parser("attack", parents=[common, source], help="cheating attack on a commitment")
    p.add_argument("--sweep", action="store_true", help="theta-commit tradeoff table")
    p.add_argument("--thetas", help="comma-separated theta grid for --sweep")
    p.add_argument("--witnesses", action="store_true", help="include the cheat unitary")
    p.add_argument("--audit", type=int, default=0, metavar="N", help="compare against N random unitaries")

    p = sub.add_parser("cointoss", parents=[common, source], help="ideal-condition check and backward induction")
    p.add_argument("--witnesses", action="store_true", help="include conditioned density matrices")

    p = sub.add_parser("bounds", parents=[common], help="round-count bound and information ledger")
    p.add_argument("--epsilon", type=float, action="append", help="imbalance tolerance in bits (repeatable)")
    p.add_argument("--schedule", metavar="FILE", help="JSON list of [actor, bits] gains")

    p = sub.add_parser("run", parents=[common, source], help="honest execution")
    p.add_argument("--snapshots", action="store_true", help="per-round trace")

    sub.add_parser("export", parents=[common, source], help="write the protocol document")
    return parser


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Sequence[str]) -> tuple[int, str]:
    """Execute one command; returns the exit code and the rendered report."""
    argv = list(argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "bounds":
            for e in args.epsilon or ():
                bounds.min_rounds(e)
        with tolerances.tolerance_profile(args.tolerance_profile) as tol, warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            source, results = COMMANDS[args.command](args)
        report = {
            "command": argv,
            "tool": {"name": "eprb", "version": __version__},
            "input": source,
            "tolerances": tol.as_dict(),
            "seed": args.seed,
            "warnings": sorted({str(w.message) for w in caught}),
            "results": results,
        }
        text = render(plain(report), args.format)
    except NumericalFailure as exc:
        return EXIT_NUMERICAL, f"eprb: numerical failure: {exc}\n"
    except (InputError, ValueError, EPRBError) as exc:
        return EXIT_INPUT, f"eprb: error: {type(exc).__name__}: {exc}\n"
    if args.out:
        _emit(text, args.out)
        return EXIT_OK, ""
    return EXIT_OK, text


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        code, text = run(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if code == EXIT_OK:
        sys.stdout.write(text)
    else:
        sys.stderr.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
