"""JSON files for matrices, tuples and certificates.

A matrix file is ``{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}``
(row-major).  A tuple file is ``{"dim": d, "operators": [matrix, ...],
"labels": [...]}``.  Floats are written with ``repr`` precision, which
round-trips every finite double exactly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import DimMismatch, NotFinite, ParseError
from .tuples import OperatorTuple, validate


def matrix_to_obj(M) -> dict:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    data = [[[float(z.real), float(z.imag)] for z in row] for row in M]
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]), "data": data}


def obj_to_matrix(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict) or not {"rows", "cols", "data"} <= obj.keys():
        raise ParseError(f"{where}: expected an object with rows, cols and data")
    rows, cols = obj["rows"], obj["cols"]
    if not isinstance(rows, int) or not isinstance(cols, int) or rows < 0 or cols < 0:
        raise ParseError(f"{where}: rows and cols must be nonnegative integers")
    data = obj["data"]
    if not isinstance(data, list) or len(data) != rows:
        raise DimMismatch(f"{where}: data has {len(data) if isinstance(data, list) else '?'} rows, header says {rows}")
    M = np.zeros((rows, cols), dtype=np.complex128)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise DimMismatch(f"{where}: row {i} does not have {cols} entries")
        for j, entry in enumerate(row):
            try:
                re, im = entry
                M[i, j] = complex(float(re), float(im))
            except (TypeError, ValueError):
                raise ParseError(f"{where}: entry ({i}, {j}) is not an [re, im] pair") from None
    if not np.all(np.isfinite(M)):
        raise NotFinite(f"{where}: non-finite entries")
    return M


def tuple_to_obj(T, labels=None) -> dict:
    ops = list(T)
    out = {"dim": int(ops[0].shape[0]) if ops else 0, "operators": [matrix_to_obj(A) for A in ops]}
    if labels is not None:
        out["labels"] = list(labels)
    return out


def obj_to_tuple(obj, where: str = "tuple", tol_commute: float = 1e-10, tol_contract: float = 1e-10) -> OperatorTuple:
    if not isinstance(obj, dict) or "operators" not in obj:
        raise ParseError(f"{where}: expected an object with an operators list")
    ops = [obj_to_matrix(o, f"{where}.operators[{i}]") for i, o in enumerate(obj["operators"])]
    dim = obj.get("dim")
    for i, A in enumerate(ops):
        if A.shape != (dim, dim):
            raise DimMismatch(f"{where}.operators[{i}] has shape {A.shape}, dim is {dim}")
    return validate(ops, tol_commute=tol_commute, tol_contract=tol_contract)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False, indent=1) + "\n"


def load_json(path) -> tuple[object, bytes]:
    """Parsed JSON and the raw bytes (for content hashing)."""
    raw = Path(path).read_bytes()
    try:
        return json.loads(raw.decode("utf-8")), raw
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 ({exc.reason})") from None


def content_hash(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def jsonable(value):
    """Recursively turn numpy scalars and containers into plain JSON values.

    Arrays are dropped from reports (they go to separate matrix files);
    infinities become strings so the output stays strict JSON.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items() if not isinstance(v, np.ndarray)}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value if not isinstance(v, np.ndarray)]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if np.isfinite(v):
            return v
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if value is None or isinstance(value, str):
        return value
    return str(value)
