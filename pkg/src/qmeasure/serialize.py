"""JSON encoding for states, operators, observables, and processes.

Complex numbers are written as [re, im] pairs so files stay diffable and
language neutral. Matrices carry explicit row/column counts and a dense
row-major entry list; decoding is strict and raises ValidationError on any
shape or type mismatch rather than guessing.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .measurement import MeasurementProcess
from .observables import Povm, Pvm


def _require(cond: bool, message: str):
    if not cond:
        raise ValidationError(message)


def _pair(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _from_pair(entry, where: str) -> complex:
    _require(
        isinstance(entry, (list, tuple)) and len(entry) == 2,
        f"{where}: expected a [re, im] pair, got {entry!r}",
    )
    re, im = entry
    _require(
        isinstance(re, (int, float)) and not isinstance(re, bool)
        and isinstance(im, (int, float)) and not isinstance(im, bool),
        f"{where}: entries of a [re, im] pair must be numbers, got {entry!r}",
    )
    return complex(re, im)


def matrix_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    _require(a.ndim == 2, f"expected a matrix, got ndim {a.ndim}")
    rows, cols = a.shape
    return {
        "rows": int(rows),
        "cols": int(cols),
        "entries": [_pair(z) for z in a.ravel(order="C")],
    }


def matrix_from_json(data, where: str = "matrix") -> np.ndarray:
    _require(isinstance(data, dict), f"{where}: expected an object, got {type(data).__name__}")
    for key in ("rows", "cols", "entries"):
        _require(key in data, f"{where}: missing field {key!r}")
    rows, cols = data["rows"], data["cols"]
    _require(
        isinstance(rows, int) and not isinstance(rows, bool) and rows >= 1,
        f"{where}: rows must be a positive integer, got {rows!r}",
    )
    _require(
        isinstance(cols, int) and not isinstance(cols, bool) and cols >= 1,
        f"{where}: cols must be a positive integer, got {cols!r}",
    )
    entries = data["entries"]
    _require(isinstance(entries, list), f"{where}: entries must be a list")
    _require(
        len(entries) == rows * cols,
        f"{where}: expected {rows * cols} entries for a {rows}x{cols} matrix, "
        f"got {len(entries)}",
    )
    flat = [_from_pair(e, f"{where}.entries[{i}]") for i, e in enumerate(entries)]
    out = np.array(flat, dtype=complex).reshape(rows, cols)
    _require(bool(np.all(np.isfinite(out.real)) and np.all(np.isfinite(out.imag))),
             f"{where}: entries must be finite")
    return out


def state_to_json(psi: np.ndarray) -> list:
    psi = np.asarray(psi, dtype=complex)
    _require(psi.ndim == 1, f"expected a state vector, got ndim {psi.ndim}")
    return [_pair(z) for z in psi]


def state_from_json(data, where: str = "state") -> np.ndarray:
    _require(isinstance(data, list) and len(data) >= 1,
             f"{where}: expected a non-empty list of [re, im] pairs")
    flat = [_from_pair(e, f"{where}[{i}]") for i, e in enumerate(data)]
    out = np.array(flat, dtype=complex)
    _require(bool(np.all(np.isfinite(out.real)) and np.all(np.isfinite(out.imag))),
             f"{where}: amplitudes must be finite")
    return out


def pvm_to_json(pvm: Pvm) -> dict:
    return {
        "dim": int(pvm.dim),
        "outcomes": [float(x) for x in pvm.outcomes],
        "projectors": [matrix_to_json(p) for p in pvm.projectors],
    }


def pvm_from_json(data, where: str = "pvm") -> Pvm:
    outcomes, ops = _labeled_ops_from_json(data, "projectors", where)
    return Pvm(outcomes=outcomes, projectors=ops, dim=data["dim"])


def povm_to_json(povm: Povm) -> dict:
    return {
        "dim": int(povm.dim),
        "outcomes": [float(x) for x in povm.outcomes],
        "effects": [matrix_to_json(e) for e in povm.effects],
    }


def povm_from_json(data, where: str = "povm") -> Povm:
    outcomes, ops = _labeled_ops_from_json(data, "effects", where)
    return Povm(outcomes=outcomes, effects=ops, dim=data["dim"])


def _labeled_ops_from_json(data, op_field: str, where: str):
    _require(isinstance(data, dict), f"{where}: expected an object")
    for key in ("dim", "outcomes", op_field):
        _require(key in data, f"{where}: missing field {key!r}")
    dim = data["dim"]
    _require(isinstance(dim, int) and not isinstance(dim, bool) and dim >= 1,
             f"{where}: dim must be a positive integer, got {dim!r}")
    outcomes = data["outcomes"]
    _require(isinstance(outcomes, list) and len(outcomes) >= 1,
             f"{where}: outcomes must be a non-empty list")
    for i, x in enumerate(outcomes):
        _require(isinstance(x, (int, float)) and not isinstance(x, bool),
                 f"{where}.outcomes[{i}]: outcome labels must be real numbers, got {x!r}")
    ops = data[op_field]
    _require(isinstance(ops, list) and len(ops) == len(outcomes),
             f"{where}: {op_field} must be a list matching outcomes in length")
    mats = [matrix_from_json(m, f"{where}.{op_field}[{i}]") for i, m in enumerate(ops)]
    return [float(x) for x in outcomes], mats


def process_to_json(process: MeasurementProcess) -> dict:
    return {
        "system_dim": int(process.system_dim),
        "apparatus_dim": int(process.apparatus_dim),
        "apparatus_state": state_to_json(process.apparatus_state),
        "interaction": matrix_to_json(process.interaction),
        "meter": pvm_to_json(process.meter),
    }


def process_from_json(data, where: str = "process", max_dim=None) -> MeasurementProcess:
    _require(isinstance(data, dict), f"{where}: expected an object")
    for key in ("system_dim", "apparatus_dim", "apparatus_state", "interaction", "meter"):
        _require(key in data, f"{where}: missing field {key!r}")
    for key in ("system_dim", "apparatus_dim"):
        value = data[key]
        _require(isinstance(value, int) and not isinstance(value, bool) and value >= 1,
                 f"{where}.{key}: must be a positive integer, got {value!r}")
    kwargs = {}
    if max_dim is not None:
        kwargs["max_dim"] = int(max_dim)
    return MeasurementProcess(
        system_dim=data["system_dim"],
        apparatus_dim=data["apparatus_dim"],
        apparatus_state=state_from_json(data["apparatus_state"], f"{where}.apparatus_state"),
        interaction=matrix_from_json(data["interaction"], f"{where}.interaction"),
        meter=pvm_from_json(data["meter"], f"{where}.meter"),
        **kwargs,
    )
