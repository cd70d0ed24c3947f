"""Deterministic JSON I/O for matrices, processes, and results.

Wire formats:
  matrix   {"dim": n, "rows": [[...], ...]}            (+ "dims": [dA, dB] for
           bipartite/multipartite operators; readers accept integer literals)
  process  {"in_dims": [...], "out_dims": [...], "matrix": [[...], ...]}
           over the documented grading-coordinate ordering.

Floats are emitted with 17 significant digits, which round-trips IEEE
doubles exactly; emission is a pure function of the value, so identical
inputs produce byte-identical output.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import DimensionMismatch


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".17g")


def dumps(obj) -> str:
    """Serialize to JSON with deterministic float formatting."""
    parts: list[str] = []
    _emit(obj, parts)
    return "".join(parts)


def _emit(obj, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), parts)
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                parts.append(",")
            parts.append(json.dumps(str(k)))
            parts.append(":")
            _emit(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, v in enumerate(obj):
            if i:
                parts.append(",")
            _emit(v, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize object of type {type(obj)!r}")


def jsonable(obj):
    """Recursively convert numpy containers to plain Python structures."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def matrix_to_json(m: np.ndarray, dims=None) -> dict:
    m = np.asarray(m, dtype=float)
    out = {"dim": int(m.shape[0]), "rows": m.tolist()}
    if dims is not None:
        out["dims"] = [int(d) for d in dims]
    return out


def matrix_from_json(obj) -> tuple[np.ndarray, tuple[int, ...] | None]:
    """Parse the matrix wire format; integer entries are accepted."""
    if not isinstance(obj, dict):
        raise ValueError("matrix JSON must be an object")
    if "rows" not in obj:
        raise ValueError('matrix JSON must contain "rows"')
    rows = obj["rows"]
    m = np.asarray(rows, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix rows have shape {m.shape}; expected square")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    declared = obj.get("dim")
    if declared is not None and int(declared) != m.shape[0]:
        raise DimensionMismatch(
            f'declared "dim" {declared} does not match rows of size {m.shape[0]}'
        )
    dims = obj.get("dims")
    if dims is not None:
        dims = tuple(int(d) for d in dims)
        if math.prod(dims) != m.shape[0]:
            raise DimensionMismatch(
                f'declared "dims" {list(dims)} have product {math.prod(dims)}, '
                f"but the matrix has dimension {m.shape[0]}"
            )
    return m, dims


def process_to_json(proc) -> dict:
    return {
        "in_dims": [int(d) for d in proc.in_dims],
        "out_dims": [int(d) for d in proc.out_dims],
        "matrix": np.asarray(proc.matrix).tolist(),
    }


def process_from_json(obj):
    from .processes import LinearProcess

    if not isinstance(obj, dict):
        raise ValueError("process JSON must be an object")
    for key in ("in_dims", "out_dims", "matrix"):
        if key not in obj:
            raise ValueError(f'process JSON must contain "{key}"')
    matrix = np.asarray(obj["matrix"], dtype=float)
    if matrix.ndim != 2 or not np.all(np.isfinite(matrix)):
        raise ValueError("process matrix must be a finite 2-D array")
    return LinearProcess(
        in_dims=tuple(int(d) for d in obj["in_dims"]),
        out_dims=tuple(int(d) for d in obj["out_dims"]),
        matrix=matrix,
    )


def cone_result_to_json(result) -> dict:
    return {
        "verdict": result.verdict,
        "iterations": int(result.iterations),
        "residual": float(result.residual),
        "certificate": jsonable(result.certificate),
    }
