"""Channel file serialization.

The on-disk format is JSON with complex entries written as [re, im] pairs:

    {
      "format_version": "1",
      "kind": "kraus" | "schur" | "mixture" | "state",
      "dim_in": ..., "dim_out": ...,          # kraus
      "dim": ...,                             # schur / mixture / state
      "payload": ...,                         # see below
      "metadata": {"name": ..., "source": ...}    # optional
    }

Payloads: kraus -> list of matrices (list of rows of [re, im]); schur and
state -> one matrix; mixture -> {"weights": [...], "phases": [vector, ...]}.

Serialization is canonical (sorted keys, floats at 17 significant digits),
so serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

import json
from typing import Union

import numpy as np

from .channels import KrausChannel
from .errors import ParseError
from .matcore import DensityOperator
from .schur import DiagonalUnitaryMixture, SchurMatrix, is_schur_channel

FORMAT_VERSION = "1"


def _entry(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def _matrix_payload(m: np.ndarray) -> list:
    return [[_entry(z) for z in row] for row in np.atleast_2d(m)]


def _parse_entry(e, where: str) -> complex:
    if (not isinstance(e, (list, tuple))) or len(e) != 2:
        raise ParseError(f"{where}: complex entries must be [re, im] pairs")
    try:
        return complex(float(e[0]), float(e[1]))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: non-numeric entry {e!r}") from exc


def _parse_matrix(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ParseError(f"{where}: matrix payload must be a non-empty list of rows")
    data = [[_parse_entry(e, where) for e in row] for row in rows]
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise ParseError(f"{where}: ragged matrix rows")
    return np.array(data, dtype=np.complex128)


def to_document(obj: Union[KrausChannel, SchurMatrix, DiagonalUnitaryMixture, DensityOperator],
                metadata: dict | None = None) -> dict:
    """Build the JSON document for a channel-like object."""
    doc: dict = {"format_version": FORMAT_VERSION}
    if metadata:
        doc["metadata"] = metadata
    if isinstance(obj, KrausChannel):
        doc["kind"] = "kraus"
        doc["dim_in"] = obj.dim_in
        doc["dim_out"] = obj.dim_out
        doc["payload"] = [_matrix_payload(a) for a in obj.kraus]
    elif isinstance(obj, SchurMatrix):
        doc["kind"] = "schur"
        doc["dim"] = obj.dim
        doc["payload"] = _matrix_payload(obj.matrix)
    elif isinstance(obj, DiagonalUnitaryMixture):
        doc["kind"] = "mixture"
        doc["dim"] = obj.dim
        doc["payload"] = {
            "weights": [float(w) for w in obj.weights],
            "phases": [[_entry(z) for z in u] for u in obj.phases],
        }
    elif isinstance(obj, DensityOperator):
        doc["kind"] = "state"
        doc["dim"] = obj.dim
        doc["payload"] = _matrix_payload(obj.matrix)
    else:
        raise ParseError(f"cannot serialize object of type {type(obj).__name__}")
    return doc


def _canonical(obj):
    if isinstance(obj, float):
        # shortest 17-significant-digit form keeps round trips byte-identical
        return float(format(obj, ".17g"))
    if isinstance(obj, dict):
        return {k: _canonical(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_canonical(v) for v in obj]
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_canonical(doc), sort_keys=True, indent=1) + "\n"


def save(obj, path, metadata: dict | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(to_document(obj, metadata)))


def from_document(doc: dict):
    """Parse a document into (object, metadata); inverse of to_document."""
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {doc.get('format_version')!r}")
    kind = doc.get("kind")
    meta = doc.get("metadata", {})
    payload = doc.get("payload")
    try:
        if kind == "kraus":
            if not isinstance(payload, list) or not payload:
                raise ParseError("kraus payload must be a non-empty list of matrices")
            ops = [_parse_matrix(m, "kraus operator") for m in payload]
            ch = KrausChannel(tuple(ops))
            if ch.dim_in != int(doc.get("dim_in", ch.dim_in)) or \
               ch.dim_out != int(doc.get("dim_out", ch.dim_out)):
                raise ParseError("declared dims disagree with the payload")
            return ch, meta
        if kind == "schur":
            m = _parse_matrix(payload, "schur matrix")
            if m.shape[0] != m.shape[1] or m.shape[0] != int(doc.get("dim", m.shape[0])):
                raise ParseError("declared dim disagrees with the payload")
            s = SchurMatrix(m)
            if meta.get("channel", True) and not is_schur_channel(s):
                raise ParseError(
                    "schur payload is not a Schur channel (PSD with unit diagonal)"
                )
            return s, meta
        if kind == "mixture":
            if not isinstance(payload, dict):
                raise ParseError("mixture payload must be an object")
            weights = [float(w) for w in payload.get("weights", [])]
            phases = [
                np.array([_parse_entry(e, "phase vector") for e in u])
                for u in payload.get("phases", [])
            ]
            mix = DiagonalUnitaryMixture(tuple(weights), tuple(phases))
            if mix.dim != int(doc.get("dim", mix.dim)):
                raise ParseError("declared dim disagrees with the payload")
            return mix, meta
        if kind == "state":
            m = _parse_matrix(payload, "density operator")
            if m.shape[0] != int(doc.get("dim", m.shape[0])):
                raise ParseError("declared dim disagrees with the payload")
            return DensityOperator(m), meta
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(f"invalid {kind} payload: {exc}") from exc
    raise ParseError(f"unknown kind {kind!r}")


def load(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read channel file {path}: {exc}") from exc
    return from_document(doc)
