import json

import numpy as np
import pytest

from sodegen import errors
from sodegen.formats import (
    parse_floats, parse_loop, read_frame_loop, read_matrices, write_frame_loop,
)
from sodegen.models import jt_frame_loop


@pytest.mark.parametrize("fmt", ["json", "text"])
def test_round_trip(tmp_path, fmt):
    loop = jt_frame_loop(30)
    path = tmp_path / f"loop.{fmt}"
    write_frame_loop(loop, path, fmt)
    back = read_frame_loop(path)
    np.testing.assert_array_equal(back.samples, loop.samples)
    if fmt == "json":
        np.testing.assert_array_equal(back.params, loop.params)


def test_text_comments_and_blank_lines(tmp_path):
    p = tmp_path / "m.txt"
    p.write_text("# header\n1 0\n0 1\n\n\n# second\n0 1\n1 0\n")
    M, params, points = read_matrices(p)
    assert M.shape == (2, 2, 2) and params is None and points is None


@pytest.mark.parametrize("doc", [
    [1, 2],
    {"n": 2, "count": 2},
    {"n": 2, "count": 2, "matrices": [[1, 0, 0, 1]]},
    {"n": 2, "count": 2, "matrices": [[1, 0, 0, 1], [1, 0, 0]]},
    {"n": 2, "count": 2, "matrices": [[1, 0, 0, 1], [1, 0, 0, "x"]]},
    {"n": 2, "count": 2, "matrices": [[1, 0, 0, 1]] * 2, "extra": 1},
    {"n": 2, "count": 2, "matrices": [[1, 0, 0, 1]] * 2, "layout": "column-major"},
    {"n": 2, "count": 2, "matrices": [[1, 0, 0, 1]] * 2, "params": [0.0]},
    {"n": 0, "count": 2, "matrices": []},
])
def test_bad_json(tmp_path, doc):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(errors.ParseError):
        read_matrices(p)


def test_nonfinite_and_unreadable(tmp_path):
    p = tmp_path / "nan.json"
    p.write_text('{"n": 1, "count": 2, "matrices": [[1], [NaN]]}')
    with pytest.raises(errors.ParseError):
        read_matrices(p)
    with pytest.raises(errors.ParseError):
        read_matrices(tmp_path / "missing.json")
    q = tmp_path / "broken.json"
    q.write_text("{not json")
    with pytest.raises(errors.ParseError):
        read_matrices(q)


def test_bad_text(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1 0\n0 1\n\n1 0 0\n0 1 0\n0 0 1\n")
    with pytest.raises(errors.ParseError):
        read_matrices(p)
    p.write_text("1 0\n0 1\n")
    with pytest.raises(errors.ParseError):
        read_matrices(p)
    p.write_text("1 x\n0 1\n\n1 0\n0 1\n")
    with pytest.raises(errors.ParseError):
        read_matrices(p)


def test_bad_params_become_parse_error(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"n": 1, "count": 2, "matrices": [[1], [1]], "params": [0.0, 0.5]}))
    with pytest.raises(errors.ParseError):
        read_frame_loop(p)


def test_parse_floats():
    assert parse_floats("1,2.5,-3") == [1.0, 2.5, -3.0]
    with pytest.raises(errors.ParseError):
        parse_floats("1,a")
    with pytest.raises(errors.ParseError):
        parse_floats("1,2", 3)


def test_parse_loop():
    c = parse_loop("circle:1,2,3", 10)
    np.testing.assert_allclose(c.point(0.0), [4, 2])
    assert c.samples == 10
    e = parse_loop("ellipse:0,0,2,1,0.5")
    np.testing.assert_allclose(e.point(0.0), [2 * np.cos(0.5), 2 * np.sin(0.5)])
    poly = parse_loop("polygon:0,0;1,0;1,1")
    assert poly.vertices.shape == (4, 2)
    for bad in ("square:1", "circle:1,2", "polygon:0,0;0,0;1,1", "ellipse:a,b,c,d"):
        with pytest.raises(errors.ParseError):
            parse_loop(bad)
