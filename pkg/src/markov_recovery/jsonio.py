"""JSON and CSV emission with exact float round-trips.

Floats are written with 17 significant digits (lossless for binary64), field
order is fixed by construction order, and files are written atomically
(temp file + rename) so a crashed run never leaves a torn report. Complex
matrices serialize as row-major [re, im] pairs.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Sequence

import numpy as np

from . import qstate
from .errors import DimensionMismatchError, MarkovRecoveryError


def format_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise MarkovRecoveryError(f"cannot serialize non-finite float {x!r}")
    return f"{x:.17g}"


def dumps(obj, indent: int = 0) -> str:
    """Serialize dict/list/str/bool/int/float trees deterministically."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{json.dumps(str(k))}: {dumps(v, indent + 2)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        flat = all(isinstance(x, (int, float, np.integer, np.floating, bool)) or x is None for x in seq)
        if flat:
            return "[" + ", ".join(dumps(x) for x in seq) + "]"
        items = [f"{inner}{dumps(v, indent + 2)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise MarkovRecoveryError(f"cannot serialize object of type {type(obj).__name__}")


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    atomic_write_text(path, dumps(obj) + "\n")


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def matrix_to_pairs(m: np.ndarray) -> list[list[float]]:
    flat = np.asarray(m, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def pairs_to_array(pairs: Sequence[Sequence[float]], size: int) -> np.ndarray:
    if len(pairs) != size:
        raise DimensionMismatchError(f"expected {size} entries, got {len(pairs)}")
    out = np.empty(size, dtype=np.complex128)
    for i, pair in enumerate(pairs):
        if len(pair) != 2:
            raise DimensionMismatchError(f"entry {i} is not a [re, im] pair")
        out[i] = complex(float(pair[0]), float(pair[1]))
    return out


def density_matrix_to_dict(rho: qstate.DensityMatrix) -> dict:
    return {
        "dims": list(rho.layout.dims),
        "labels": list(rho.layout.labels),
        "matrix": matrix_to_pairs(rho.matrix),
    }


def density_matrix_from_dict(data: dict) -> qstate.DensityMatrix:
    layout = qstate.SystemLayout(dims=tuple(data["dims"]), labels=tuple(data["labels"]))
    d = layout.total_dim
    mat = pairs_to_array(data["matrix"], d * d).reshape(d, d)
    return qstate.DensityMatrix(layout, mat)


def pure_state_to_dict(state: qstate.PureState) -> dict:
    return {
        "dims": list(state.layout.dims),
        "labels": list(state.layout.labels),
        "amplitudes": matrix_to_pairs(state.amplitudes),
    }


def pure_state_from_dict(data: dict) -> qstate.PureState:
    layout = qstate.SystemLayout(dims=tuple(data["dims"]), labels=tuple(data["labels"]))
    amps = pairs_to_array(data["amplitudes"], layout.total_dim).reshape(layout.dims)
    return qstate.PureState(layout, amps)


def state_from_dict(data: dict) -> qstate.PureState | qstate.DensityMatrix:
    if "amplitudes" in data:
        return pure_state_from_dict(data)
    if "matrix" in data:
        return density_matrix_from_dict(data)
    raise MarkovRecoveryError("state file has neither 'amplitudes' nor 'matrix'")


def square_matrix_to_dict(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {"rows": m.shape[0], "cols": m.shape[1], "entries": matrix_to_pairs(m)}


def square_matrix_from_dict(data: dict) -> np.ndarray:
    rows, cols = int(data["rows"]), int(data["cols"])
    return pairs_to_array(data["entries"], rows * cols).reshape(rows, cols)


def markov_spec_to_dict(spec: qstate.PureMarkovSpec) -> dict:
    return {
        "kappa": [float(x) for x in spec.kappa],
        "mu": [float(x) for x in spec.mu],
        "r_basis": square_matrix_to_dict(spec.r_basis),
        "q_basis": square_matrix_to_dict(spec.q_basis),
        "e_basis": square_matrix_to_dict(spec.e_basis),
    }


def markov_spec_from_dict(data: dict) -> qstate.PureMarkovSpec:
    return qstate.PureMarkovSpec(
        kappa=np.asarray(data["kappa"], dtype=float),
        mu=np.asarray(data["mu"], dtype=float),
        r_basis=square_matrix_from_dict(data["r_basis"]),
        q_basis=square_matrix_from_dict(data["q_basis"]),
        e_basis=square_matrix_from_dict(data["e_basis"]),
    )


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, bool):
                cells.append("true" if cell else "false")
            elif isinstance(cell, (float, np.floating)):
                cells.append(format_float(float(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")
