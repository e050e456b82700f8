from __future__ import annotations

import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from toeplitz_tuples import serialize
from toeplitz_tuples.cli import main
from toeplitz_tuples.errors import DimMismatch, NotFinite, ParseError


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=finite),
       arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=finite))
def test_matrix_round_trip_is_bit_exact(re, im):
    if re.shape != im.shape:
        im = np.zeros_like(re)
    M = re + 1j * im
    text = serialize.dumps(serialize.matrix_to_obj(M))
    back = serialize.obj_to_matrix(json.loads(text))
    assert back.tobytes() == M.astype(np.complex128).tobytes()


def test_obj_to_matrix_errors():
    with pytest.raises(ParseError):
        serialize.obj_to_matrix([1, 2])
    with pytest.raises(DimMismatch):
        serialize.obj_to_matrix({"rows": 2, "cols": 1, "data": [[[0, 0]]]})
    with pytest.raises(ParseError):
        serialize.obj_to_matrix({"rows": 1, "cols": 1, "data": [[["a", 0]]]})
    with pytest.raises(NotFinite):
        serialize.obj_to_matrix({"rows": 1, "cols": 1, "data": [[[1e400, 0]]]})


def test_load_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"rows": 1,\n "cols": }')
    with pytest.raises(ParseError, match="line 2"):
        serialize.load_json(p)


def test_tuple_round_trip(F2):
    obj = serialize.tuple_to_obj(F2, ["T_1", "T_2"])
    T = serialize.obj_to_tuple(json.loads(serialize.dumps(obj)))
    assert all(np.array_equal(a, b) for a, b in zip(T, F2))


def _run(argv):
    buf = io.StringIO()
    code = main(argv, stdout=buf)
    return code, buf.getvalue()


def _fixture(tmp_path, name, *extra):
    out = tmp_path / name
    code, _ = _run(["fixtures", name, "--out-dir", str(out), *extra])
    assert code == 0
    return out


def test_cli_check_and_factorize(tmp_path):
    fx = _fixture(tmp_path, "coordinate-projections", "--a", "1", "4")
    code, out = _run(["check", str(fx / "tuple.json"), str(fx / "X.json"), "--output", "json"])
    assert code == 0
    body = json.loads(out)
    assert body["summary"]["class"] == "toeplitz"
    assert body["certificate"]["residuals"]["toeplitz_residual"] <= 1e-12
    code, out = _run(["factorize", str(fx / "tuple.json"), str(fx / "X.json"), "--output", "json"])
    assert code == 0
    cert = json.loads(out)["certificate"]
    assert cert["pass"] and cert["residuals"]["gram"] <= 1e-12


def test_cli_bcl_writes_certificate(tmp_path):
    fx = _fixture(tmp_path, "scaled-diagonal-pair")
    out = tmp_path / "bcl"
    code, _ = _run(["bcl", str(fx / "tuple.json"), str(fx / "N.json"), "--out-dir", str(out)])
    assert code == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["pass"] and cert["depth"] <= 40
    assert set(cert) == {"theorem", "inputs", "residuals", "tolerances", "iterations", "depth", "pass"}
    assert (out / "Pi.json").exists() and (out / "pencil_2_B.json").exists()


def test_cli_text_output(tmp_path):
    fx = _fixture(tmp_path, "scaled-diagonal-pair")
    code, out = _run(["check", str(fx / "tuple.json"), str(fx / "N.json")])
    assert code == 0 and "class: pure_lower_positive" in out


def test_cli_other_commands(tmp_path):
    fx = _fixture(tmp_path, "coordinate-projections")
    t, x = str(fx / "tuple.json"), str(fx / "X.json")
    for argv in (["solve", t], ["qt", t], ["extend", t], ["correspond", t, t], ["cesaro", t, t, x]):
        code, out = _run(argv + ["--output", "json"])
        assert code == 0, (argv, out)
        assert json.loads(out)["certificate"]["pass"]


def test_cli_decompose(tmp_path):
    fx = _fixture(tmp_path, "scaled-diagonal-pair")
    out = tmp_path / "dec"
    code, _ = _run(["decompose", str(fx / "tuple.json"), str(fx / "N.json"), "--out-dir", str(out)])
    assert code == 0
    U = serialize.obj_to_matrix(json.loads((out / "U.json").read_text()))
    assert np.abs(U).max() <= 1e-12


def test_cli_input_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out = _run(["check", str(bad), "--output", "json"])
    assert code == 2 and json.loads(out)["error"] == "ParseError"
    code, _ = _run(["fixtures", "nonexistent"])
    assert code == 2
    code, _ = _run(["check", str(tmp_path / "missing.json")])
    assert code == 2
    nc = tmp_path / "nc.json"
    serialize.write_json(nc, serialize.tuple_to_obj([np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])]))
    code, out = _run(["check", str(nc), "--output", "json"])
    assert code == 2 and "commute" in json.loads(out)["message"].lower()


def test_cli_numerical_error(tmp_path):
    fx = _fixture(tmp_path, "coordinate-projections")
    # the projections pair has a unitary part, so I is not pure lower
    eye = tmp_path / "I.json"
    serialize.write_json(eye, serialize.matrix_to_obj(np.eye(5)))
    code, out = _run(["bcl", str(fx / "tuple.json"), str(eye), "--output", "json"])
    assert code == 3 and json.loads(out)["exit_code"] == 3


def test_cli_bad_depth(tmp_path):
    fx = _fixture(tmp_path, "scaled-diagonal-pair")
    code, _ = _run(["bcl", str(fx / "tuple.json"), str(fx / "N.json"), "--depth", "zero"])
    assert code == 2


def test_cli_certificate_hashes_inputs(tmp_path):
    fx = _fixture(tmp_path, "scaled-diagonal-pair")
    code, out = _run(["check", str(fx / "tuple.json"), "--output", "json"])
    digest = json.loads(out)["certificate"]["inputs"]["tuple"]
    import hashlib

    assert digest == hashlib.sha256((fx / "tuple.json").read_bytes()).hexdigest()
