"""Protocol documents: a JSON encoding of commitment and coin-toss protocols.

Complex numbers are ``[re, im]`` pairs, matrices are row-major lists of rows,
and every float is written with 17 significant digits so that
``serialize(load_protocol(serialize(p))) == serialize(p)`` holds bit for bit.
"""

from __future__ import annotations

import json
import math
from typing import Any, Union

import numpy as np

from ..errors import EPRBError, ParseError, ValidationError
from ..hilbert import StateVector, SubsystemLayout
from .model import CoinTossProtocol, CommitmentProtocol, Round, bob_side_labels, party_labels

FORMAT_VERSION = 1

Protocol = Union[CommitmentProtocol, CoinTossProtocol]


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return f"{x:.16e}"


def _complex_list(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(a).reshape(-1)]


def _matrix_rows(m: np.ndarray) -> list:
    return [_complex_list(row) for row in np.asarray(m)]


def _rounds_doc(rounds) -> list:
    return [{"actor": r.actor, "matrix": _matrix_rows(r.matrix)} for r in rounds]


def to_document(p: Protocol) -> dict:
    doc: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "kind": p.kind,
        "name": p.name,
        "params": dict(p.params),
        "subsystems": [{"label": label, "dim": dim} for label, dim in p.layout.entries],
    }
    if isinstance(p, CommitmentProtocol):
        doc["states"] = {
            "alice0": _complex_list(p.alice0.amplitudes),
            "alice1": _complex_list(p.alice1.amplitudes),
            "bob_init": _complex_list(p.bob_init.amplitudes),
        }
        doc["commit_rounds"] = _rounds_doc(p.commit_rounds)
        doc["open_rounds"] = _rounds_doc(p.open_rounds)
        if p.verification is not None:
            doc["verification"] = {
                str(bit): {"labels": list(labels), "matrix": _matrix_rows(m)}
                for bit, (labels, m) in sorted(p.verification.items())
            }
    else:
        doc["states"] = {
            "init_a": _complex_list(p.init_a.amplitudes),
            "init_bc": _complex_list(p.init_bc.amplitudes),
        }
        doc["rounds"] = _rounds_doc(p.rounds)
        doc["outcome_measurements"] = {
            "A": [_matrix_rows(m) for m in p.outcome_a],
            "B": [_matrix_rows(m) for m in p.outcome_b],
        }
        doc["prescribed"] = list(p.prescribed)
        doc["channel_holder"] = p.channel_holder
    return doc


def _is_scalar(x) -> bool:
    return x is None or isinstance(x, (bool, int, float, str))


def _emit(obj, level: int) -> str:
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        flat = all(_is_scalar(x) or (isinstance(x, list) and all(_is_scalar(y) for y in x)) for x in obj)
        if flat:
            return "[" + ", ".join(_emit(x, level + 1) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(x, level + 1) for x in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text with fixed-precision floats."""
    return _emit(obj, 0) + "\n"


def serialize(p: Protocol) -> str:
    return dumps(to_document(p))


def _need(doc: dict, key: str, path: str = ""):
    if not isinstance(doc, dict) or key not in doc:
        raise ValidationError(f"{path}{key}", "missing field")
    return doc[key]


def _complex_vector(raw, path: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise ValidationError(path, "expected an array of [re, im] pairs")
    out = np.empty(len(raw), dtype=np.complex128)
    for k, pair in enumerate(raw):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
        ):
            raise ValidationError(f"{path}[{k}]", "expected [re, im] with numeric entries")
        if not (math.isfinite(pair[0]) and math.isfinite(pair[1])):
            raise ValidationError(f"{path}[{k}]", "non-finite entry")
        out[k] = complex(pair[0], pair[1])
    return out


def _complex_matrix(raw, path: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise ValidationError(path, "expected a non-empty array of rows")
    rows = [_complex_vector(row, f"{path}[{i}]") for i, row in enumerate(raw)]
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValidationError(f"{path}[{i}]", f"row has {len(row)} entries, expected {width}")
    return np.array(rows)


def _state(raw, layout: SubsystemLayout, path: str) -> StateVector:
    amps = _complex_vector(raw, path)
    if len(amps) != layout.total_dim:
        raise ValidationError(path, f"{len(amps)} amplitudes, expected {layout.total_dim}")
    try:
        return StateVector(layout, amps)
    except EPRBError as exc:
        raise ValidationError(path, str(exc)) from None


def _rounds(raw, path: str) -> list[Round]:
    if not isinstance(raw, list):
        raise ValidationError(path, "expected an array of rounds")
    out = []
    for k, item in enumerate(raw):
        actor = _need(item, "actor", f"{path}[{k}].")
        matrix = _complex_matrix(_need(item, "matrix", f"{path}[{k}]."), f"{path}[{k}].matrix")
        out.append(Round(actor, matrix))
    return out


def _layout(raw) -> SubsystemLayout:
    if not isinstance(raw, list) or not raw:
        raise ValidationError("subsystems", "expected a non-empty array")
    entries = []
    for k, item in enumerate(raw):
        label = _need(item, "label", f"subsystems[{k}].")
        dim = _need(item, "dim", f"subsystems[{k}].")
        if not isinstance(label, str):
            raise ValidationError(f"subsystems[{k}].label", "expected a string")
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise ValidationError(f"subsystems[{k}].dim", "expected a positive integer")
        entries.append((label, dim))
    try:
        return SubsystemLayout.of(entries)
    except EPRBError as exc:
        raise ValidationError("subsystems", str(exc)) from None


def from_document(doc: Any) -> Protocol:
    """Build and validate a protocol from a parsed document.

    Raises:
        ValidationError: naming the offending field path.
    """
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "expected an object")
    version = _need(doc, "format_version")
    if version != FORMAT_VERSION:
        raise ValidationError("format_version", f"unsupported version {version!r}; expected {FORMAT_VERSION}")
    kind = _need(doc, "kind")
    layout = _layout(_need(doc, "subsystems"))
    states = _need(doc, "states")
    name = doc.get("name", "custom")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ValidationError("params", "expected an object")

    if kind == "commitment":
        alice = layout.subset(party_labels(layout, "A"))
        bob = layout.subset(bob_side_labels(layout))
        verification = None
        if "verification" in doc:
            verification = {}
            for bit in (0, 1):
                entry = _need(doc["verification"], str(bit), "verification.")
                labels = tuple(_need(entry, "labels", f"verification.{bit}."))
                verification[bit] = (labels, _complex_matrix(_need(entry, "matrix", f"verification.{bit}."), f"verification.{bit}.matrix"))
        return CommitmentProtocol(
            layout=layout,
            alice0=_state(_need(states, "alice0", "states."), alice, "states.alice0"),
            alice1=_state(_need(states, "alice1", "states."), alice, "states.alice1"),
            bob_init=_state(_need(states, "bob_init", "states."), bob, "states.bob_init"),
            commit_rounds=_rounds(_need(doc, "commit_rounds"), "commit_rounds"),
            open_rounds=_rounds(doc.get("open_rounds", []), "open_rounds"),
            verification=verification,
            name=name,
            params=params,
        )
    if kind == "cointoss":
        alice = layout.subset(party_labels(layout, "A"))
        bob = layout.subset(bob_side_labels(layout))
        meas = _need(doc, "outcome_measurements")
        outcomes = {}
        for party in ("A", "B"):
            raw = _need(meas, party, "outcome_measurements.")
            if not isinstance(raw, list):
                raise ValidationError(f"outcome_measurements.{party}", "expected an array of 3 matrices")
            outcomes[party] = [_complex_matrix(m, f"outcome_measurements.{party}[{k}]") for k, m in enumerate(raw)]
        prescribed = doc.get("prescribed", [0.5, 0.5])
        if not isinstance(prescribed, list) or len(prescribed) != 2:
            raise ValidationError("prescribed", "expected [p0, p1]")
        return CoinTossProtocol(
            layout=layout,
            init_a=_state(_need(states, "init_a", "states."), alice, "states.init_a"),
            init_bc=_state(_need(states, "init_bc", "states."), bob, "states.init_bc"),
            rounds=_rounds(_need(doc, "rounds"), "rounds"),
            outcome_a=outcomes["A"],
            outcome_b=outcomes["B"],
            prescribed=tuple(prescribed),
            channel_holder=doc.get("channel_holder"),
            name=name,
            params=params,
        )
    raise ValidationError("kind", f"expected 'commitment' or 'cointoss', got {kind!r}")


def load_protocol(text: str | bytes) -> Protocol:
    """Parse and validate a protocol document.

    Raises:
        ParseError: if the text is not valid JSON.
        ValidationError: if the document violates the schema or any protocol
            invariant (unitarity, orthogonality, alternation, normalization).
    """
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"not a valid protocol document: {exc}") from None
    return from_document(doc)
