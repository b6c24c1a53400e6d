"""Frame-loop / matrix-stream files and parameter-geometry shorthands.

JSON layout::

    {"n": 3, "count": 201, "layout": "row-major",
     "params": [0.0, ..., 1.0],            # optional, default uniform
     "matrices": [[m00, m01, ...], ...]}   # count flat arrays of n*n numbers

The streaming text variant holds one matrix per block of n rows, blocks
separated by blank lines; lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError

HEADER_KEYS = {"n", "count", "layout", "params", "matrices", "points"}


def _from_json(doc) -> tuple:
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")
    extra = set(doc) - HEADER_KEYS
    if extra:
        raise ParseError(f"unknown keys {sorted(extra)}")
    for key in ("n", "count", "matrices"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    if doc.get("layout", "row-major") != "row-major":
        raise ParseError("only row-major layout is supported")
    n, count = doc["n"], doc["count"]
    if not isinstance(n, int) or not isinstance(count, int) or n < 1 or count < 2:
        raise ParseError("n must be a positive integer and count at least 2")
    mats = doc["matrices"]
    if not isinstance(mats, list) or len(mats) != count:
        raise ParseError(f"expected {count} matrices, found {len(mats) if isinstance(mats, list) else 'none'}")
    try:
        M = np.array(mats, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"matrices must be numeric arrays: {exc}") from exc
    if M.shape != (count, n * n):
        raise ParseError(f"each matrix must have n*n = {n * n} entries")
    if not np.all(np.isfinite(M)):
        raise ParseError("non-finite matrix entry")
    params = doc.get("params")
    if params is not None:
        params = np.array(params, dtype=float)
        if params.shape != (count,):
            raise ParseError("params must hold one value per matrix")
    points = doc.get("points")
    if points is not None:
        points = np.array(points, dtype=float)
        if len(points) != count:
            raise ParseError("points must hold one entry per matrix")
    return M.reshape(count, n, n), params, points


def _from_text(text: str) -> tuple:
    blocks, cur = [], []
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("#"):
            continue
        if not s:
            if cur:
                blocks.append(cur)
                cur = []
            continue
        try:
            cur.append([float(x) for x in s.split()])
        except ValueError as exc:
            raise ParseError(f"bad number in line {line!r}") from exc
    if cur:
        blocks.append(cur)
    if len(blocks) < 2:
        raise ParseError("need at least two matrix blocks")
    n = len(blocks[0])
    for i, b in enumerate(blocks):
        if len(b) != n or any(len(r) != n for r in b):
            raise ParseError(f"block {i} is not {n}x{n}")
    return np.array(blocks, dtype=float), None, None


def read_matrices(path) -> tuple:
    """(matrices, params or None, points or None) from a JSON or text file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        return _from_json(doc)
    return _from_text(text)


def read_frame_loop(path, sampler=None):
    from .homotopy import FrameLoop

    M, params, _ = read_matrices(path)
    if params is None:
        params = np.linspace(0.0, 1.0, len(M))
    try:
        return FrameLoop(M, params, sampler)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def frame_loop_document(loop) -> dict:
    S = np.asarray(loop.samples)
    return {
        "n": int(S.shape[1]),
        "count": int(S.shape[0]),
        "layout": "row-major",
        "params": np.asarray(loop.params).tolist(),
        "matrices": S.reshape(len(S), -1).tolist(),
    }


def write_frame_loop(loop, path, fmt: str = "json") -> None:
    if fmt == "json":
        Path(path).write_text(json.dumps(frame_loop_document(loop)))
        return
    lines = []
    for F in loop.samples:
        lines += [" ".join(repr(float(x)) for x in row) for row in F]
        lines.append("")
    Path(path).write_text("\n".join(lines))


def parse_floats(s: str, count=None, what: str = "value") -> list:
    try:
        vals = [float(x) for x in s.split(",") if x.strip()]
    except ValueError as exc:
        raise ParseError(f"bad {what} {s!r}") from exc
    if count is not None and len(vals) not in (count if isinstance(count, tuple) else (count,)):
        raise ParseError(f"{what} {s!r} needs {count} numbers")
    return vals


def parse_loop(spec: str, samples: int = 200):
    """``circle:cx,cy,r``, ``ellipse:cx,cy,a,b[,angle]`` or ``polygon:x,y;x,y;...``."""
    from .transport import ParameterLoop

    kind, _, rest = spec.partition(":")
    try:
        if kind == "circle":
            cx, cy, r = parse_floats(rest, 3, "circle")
            return ParameterLoop.circle((cx, cy), r, samples)
        if kind == "ellipse":
            v = parse_floats(rest, (4, 5), "ellipse")
            return ParameterLoop.ellipse(v[:2], v[2], v[3], v[4] if len(v) > 4 else 0.0, samples)
        if kind == "polygon":
            verts = [parse_floats(p, None, "vertex") for p in rest.split(";") if p.strip()]
            return ParameterLoop.polygon(verts, samples)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    raise ParseError(f"unknown loop geometry {spec!r}; use circle:, ellipse: or polygon:")
