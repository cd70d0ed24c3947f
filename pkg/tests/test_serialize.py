"""Wire formats: determinism, round trips, and input validation."""

import json

import numpy as np
import pytest

from ltshadow.errors import DimensionMismatch
from ltshadow.linalg import rng_from_seed
from ltshadow.processes import swap_process
from ltshadow.serialize import (
    dumps,
    matrix_from_json,
    matrix_to_json,
    process_from_json,
    process_to_json,
)


def test_float_round_trip_17_digits():
    rng = rng_from_seed(80)
    values = list(rng.standard_normal(50)) + [0.0, 1.0, -0.25, 1e-300, 1 / 3]
    for v in values:
        text = dumps(float(v))
        assert float(json.loads(text)) == float(v)


def test_dumps_is_valid_json_and_deterministic():
    obj = {"a": [1, 2.5, True, None], "b": {"c": np.float64(0.1)}, "m": np.eye(2)}
    one = dumps(obj)
    two = dumps(obj)
    assert one == two
    parsed = json.loads(one)
    assert parsed["a"] == [1, 2.5, True, None]
    assert parsed["m"] == [[1, 0], [0, 1]]


def test_dumps_rejects_non_finite():
    with pytest.raises(ValueError):
        dumps(float("nan"))


def test_matrix_round_trip():
    rng = rng_from_seed(81)
    m = rng.standard_normal((6, 6))
    obj = json.loads(dumps(matrix_to_json(m, dims=(2, 3))))
    back, dims = matrix_from_json(obj)
    np.testing.assert_array_equal(back, m)
    assert dims == (2, 3)


def test_matrix_from_json_accepts_integer_literals():
    back, dims = matrix_from_json({"dim": 2, "rows": [[1, 0], [0, 1]]})
    np.testing.assert_array_equal(back, np.eye(2))
    assert dims is None


def test_matrix_from_json_validation():
    with pytest.raises(ValueError):
        matrix_from_json({"dim": 2})
    with pytest.raises(DimensionMismatch):
        matrix_from_json({"rows": [[1, 0, 0], [0, 1, 0]]})
    with pytest.raises(DimensionMismatch):
        matrix_from_json({"dim": 3, "rows": [[1, 0], [0, 1]]})
    with pytest.raises(DimensionMismatch):
        matrix_from_json({"dims": [2, 2], "rows": [[1, 0], [0, 1]]})
    with pytest.raises(ValueError):
        matrix_from_json({"rows": [[1, float("inf")], [0, 1]]})


def test_process_round_trip():
    proc = swap_process((2, 2))
    obj = json.loads(dumps(process_to_json(proc)))
    back = process_from_json(obj)
    assert back.in_dims == (2, 2) and back.out_dims == (2, 2)
    np.testing.assert_array_equal(back.matrix, proc.matrix)
