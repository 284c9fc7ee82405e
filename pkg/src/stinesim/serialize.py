"""JSON serialisation for matrices and channels.

Matrix format, used repo-wide::

    {"rows": R, "cols": C, "shape": [d1, ..., dk], "data": [[re, im], ...]}

``data`` is row-major and ``shape`` (the tensor-factor dimensions) is
optional. Round trips are bit-exact: floats are emitted with ``repr``,
which Python's json module already guarantees.
"""

from __future__ import annotations

import json
from typing import Any, Sequence

import numpy as np

from .channels import ChoiMatrix, KrausChannel, StinespringIsometry


def matrix_to_json(m: np.ndarray, shape: Sequence[int] | None = None) -> dict[str, Any]:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    doc: dict[str, Any] = {"rows": int(m.shape[0]), "cols": int(m.shape[1])}
    if shape is not None:
        doc["shape"] = [int(d) for d in shape]
    doc["data"] = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    return doc


def matrix_from_json(doc: dict[str, Any]) -> np.ndarray:
    rows, cols = int(doc["rows"]), int(doc["cols"])
    data = doc["data"]
    if len(data) != rows * cols:
        raise ValueError(f"data length {len(data)} != rows*cols {rows * cols}")
    flat = np.array([complex(re, im) for re, im in data])
    return flat.reshape(rows, cols)


def channel_to_json(ch: KrausChannel) -> dict[str, Any]:
    return {
        "d_in": ch.d_in,
        "d_out": ch.d_out,
        "kraus": [matrix_to_json(k) for k in ch.kraus],
    }


def channel_from_json(doc: dict[str, Any]) -> KrausChannel:
    kraus = tuple(matrix_from_json(k) for k in doc["kraus"])
    return KrausChannel(int(doc["d_in"]), int(doc["d_out"]), kraus)


def choi_to_json(j: ChoiMatrix) -> dict[str, Any]:
    doc = matrix_to_json(j.matrix, shape=(j.d_in, j.d_out))
    doc.update({"d_in": j.d_in, "d_out": j.d_out})
    return doc


def choi_from_json(doc: dict[str, Any]) -> ChoiMatrix:
    return ChoiMatrix(int(doc["d_in"]), int(doc["d_out"]), matrix_from_json(doc))


def isometry_to_json(v: StinespringIsometry) -> dict[str, Any]:
    doc = matrix_to_json(v.matrix)
    doc.update({"d_in": v.d_in, "d_out": v.d_out, "d_env": v.d_env})
    return doc


def isometry_from_json(doc: dict[str, Any]) -> StinespringIsometry:
    return StinespringIsometry(
        int(doc["d_in"]), int(doc["d_out"]), int(doc["d_env"]), matrix_from_json(doc)
    )


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc)


def loads(text: str) -> dict[str, Any]:
    return json.loads(text)
