"""Command-line front end.

Every subcommand prints one JSON document to standard output: a report when
a verdict (or oracle answer) was produced, otherwise ``{"error": {...}}``
naming the failing stage.  Exit status 0 means a verdict was produced; the
other codes are listed in ``EXIT_CODES``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, errors
from .config import DEFAULT, Tolerances
from .formats import parse_floats, parse_loop, read_frame_loop, read_matrices
from .report import CERTIFIED, INCONCLUSIVE, TestReport, plain

log = logging.getLogger("sodegen")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_INVALID_INPUT = 4

EXIT_CODES = {
    "PARSE_ERROR": 3,
    "NOT_ORTHOGONAL": 10,
    "NEGATIVE_DETERMINANT": 11,
    "NUMERICAL_FAILURE": 12,
    "ANGLE_NEAR_PI": 13,
    "BRANCH_AMBIGUOUS": 14,
    "REFINEMENT_UNAVAILABLE": 20,
    "MAX_DEPTH_EXCEEDED": 21,
    "DEGENERATE_SAMPLES": 22,
    "NOT_QUANTIZED": 23,
    "WRONG_DIMENSION": 24,
    "DIMENSION_MISMATCH": 25,
    "NOT_CLOSED": 26,
    "STEP_TOO_LARGE": 27,
    "NOT_SCALAR": 30,
    "DEGENERATE_ON_LOOP": 40,
    "OVERLAP_TOO_WEAK": 41,
    "NOT_SIGNED_PERMUTATION": 42,
    "PERMUTED": 43,
    "NOT_SYMMETRIC": 44,
    "CONDITION_VIOLATED": 50,
    "RANK_DEFICIENT": 51,
    "OVERLAP_VANISHES": 60,
    "SWEEP_DISCONTINUOUS": 61,
    "DEGENERATE_ON_SURFACE": 62,
}


# ---------------------------------------------------------------------------
# argument parsing


def _tolerance_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    grp = parent.add_argument_group("tolerances")
    for name in Tolerances.names():
        default = getattr(DEFAULT, name)
        grp.add_argument(f"--tol-{name.replace('_', '-')}" if not name.startswith("tol_")
                         else f"--{name.replace('_', '-')}",
                         dest=f"tol__{name}", type=type(default), default=argparse.SUPPRESS,
                         metavar="X",
                         help=f"default {default}")
    # SUPPRESS keeps a subcommand's copy of these flags from clobbering the top-level one
    parent.add_argument("--show-config", action="store_true", default=argparse.SUPPRESS,
                        help="print the effective tolerances and exit")
    parent.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="debug logging to stderr")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _tolerance_parent()
    p = argparse.ArgumentParser(
        prog="sodegen", parents=[parent],
        description="Certify eigenvalue degeneracies from eigenframe loops and Berry-phase sweeps.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command")

    c = sub.add_parser("classify-loop", parents=[parent],
                       help="homotopy class (or winding number) of a frame-loop file")
    c.add_argument("input", help="frame-loop file (JSON or whitespace blocks)")
    c.add_argument("--diag", help="write per-sample diagnostics CSV here")

    s = sub.add_parser("scan-hamiltonian", parents=[parent],
                       help="transport eigenframes of a Hamiltonian family around a loop")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="built-in model name")
    src.add_argument("--matrices", help="matrix-stream file sampled along the loop")
    s.add_argument("--params", default="{}", help="model parameters as a JSON object")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--loop", default="circle:0,0,1",
                   help="circle:cx,cy,r | ellipse:cx,cy,a,b[,angle] | polygon:x,y;x,y;...")
    s.add_argument("--samples", type=int, default=200, help="sample intervals along the loop")
    s.add_argument("--subspace", help="coords:p or a JSON file {\"basis\": n x p}")
    s.add_argument("--bands", help="comma-separated eigenvalue indices (default: lowest p)")
    s.add_argument("--interior", help="JSON file with interior surface points to spot-check")
    s.add_argument("--diag", help="write per-sample diagnostics CSV here")

    st = sub.add_parser("stone-test", parents=[parent],
                        help="Berry-phase sweep over a sphere for a Hermitian family")
    st.add_argument("--config", dest="sweep_config", help="JSON sweep description")
    st.add_argument("--model", default="spin_half_monopole")
    st.add_argument("--params", default="{}")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--sphere", default="0,0,0,1", help="cx,cy,cz,r")
    st.add_argument("--n-sweep", type=int, default=50)
    st.add_argument("--n-loop", type=int, default=100)
    st.add_argument("--band", type=int, default=0)
    st.add_argument("--reverse", action="store_true", help="reverse the surface orientation")

    o = sub.add_parser("oracle", parents=[parent],
                       help="Spin(n) / quaternion lift sign of a frame-loop file")
    o.add_argument("input")
    return p


def tolerances_from_args(args) -> Tolerances:
    changes = {k[len("tol__"):]: v for k, v in vars(args).items() if k.startswith("tol__")}
    return DEFAULT.replace(**changes)


def _json_object(text: str, what: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise errors.ParseError(f"{what} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise errors.ParseError(f"{what} must be a JSON object")
    return obj


# ---------------------------------------------------------------------------
# subcommands


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def _lift_rows(lifted, m):
    from .skewlin import skew_canonical_form

    out = {}
    for t, P in zip(lifted.params, lifted.points):
        ang = np.abs(skew_canonical_form(P).angles)
        out[float(t)] = list(ang) + [""] * (m - len(ang))
    return out


def cmd_classify_loop(args, tol: Tolerances) -> dict:
    from .homotopy import (
        classify, detour, interior_returns, lift_loop, normalize_base_point, winding_number,
    )

    loop = read_frame_loop(args.input).validate(tol)
    based = normalize_base_point(loop)
    run = {"command": "classify-loop", "input": str(args.input)}
    if loop.n == 2:
        w = winding_number(based, tol)
        inv = {"winding": w}
        verdict, reason = (CERTIFIED, "nonzero_winding") if w else (INCONCLUSIVE, "none")
        rep = TestReport(verdict, reason, inv, {"samples": len(loop)})
        if args.diag:
            th = np.unwrap(np.arctan2(based.samples[:, 1, 0], based.samples[:, 0, 0]))
            _write_csv(args.diag, ["t", "angle"], zip(based.params, th))
    else:
        returns = interior_returns(based, tol)
        if len(returns):
            based = detour(based, returns, tol.detour_strength)
        lifted = lift_loop(based, tol)
        v = classify(lifted, tol)
        inv = {"k_list": list(v.k_list), "h": v.h, "parity": v.parity}
        diag = {"max_int_residual": v.max_int_residual, "lift_refinements": lifted.refinements,
                "lift_detours": len(returns), "samples": len(loop), "endpoint_angles": np.abs(v.endpoint_form.angles)}
        verdict, reason = (CERTIFIED, "nontrivial_loop") if v.nontrivial else (INCONCLUSIVE, "none")
        rep = TestReport(verdict, reason, inv, diag)
        if args.diag:
            m = loop.n // 2
            rows = _lift_rows(lifted, m)
            _write_csv(args.diag, ["t"] + [f"lift_angle_{i}" for i in range(m)],
                       ([t] + a for t, a in rows.items()))
    rep.config = {"tolerances": tol.as_dict(), "run": run}
    return rep.to_dict()


def _model_sampler(args):
    from .models import ModelSpec

    params = _json_object(args.params, "--params")
    try:
        spec = ModelSpec(args.model, params, args.seed)
    except ValueError as exc:
        raise errors.ParseError(str(exc)) from exc
    return spec, {"model": spec.name, "params": spec.full_params(), "seed": spec.seed}


def _reference(arg: str, n: int):
    from .subspace import ReferenceSubspace

    if arg.startswith("coords:"):
        try:
            p = int(arg.split(":", 1)[1])
        except ValueError as exc:
            raise errors.ParseError(f"bad subspace {arg!r}") from exc
        return ReferenceSubspace.coordinates(n, p)
    try:
        doc = _json_object(Path(arg).read_text(), "subspace file")
    except OSError as exc:
        raise errors.ParseError(f"cannot read {arg}: {exc}") from exc
    if set(doc) != {"basis"}:
        raise errors.ParseError("subspace file must hold exactly the key 'basis'")
    B = np.array(doc["basis"], dtype=float)
    if B.ndim != 2 or B.shape[0] != n:
        raise errors.ParseError(f"basis must be an {n} x p matrix")
    return ReferenceSubspace(B)


def cmd_scan(args, tol: Tolerances) -> dict:
    from .subspace import subspace_degeneracy_test
    from .transport import HamiltonianSampler, SampledLoop, run_degeneracy_test

    run = {"command": "scan-hamiltonian"}
    if args.model:
        spec, echo = _model_sampler(args)
        if spec.name == "spin_half_monopole":
            raise errors.ParseError("spin_half_monopole is complex; use stone-test")
        h = spec.sampler()
        loop = parse_loop(args.loop, args.samples)
        run.update(echo)
        run.update({"loop": args.loop, "samples": args.samples})
    else:
        M, params, _ = read_matrices(args.matrices)
        ts = np.linspace(0.0, 1.0, len(M)) if params is None else params
        h = HamiltonianSampler.from_table(ts, M, "stream")
        loop = SampledLoop(ts)
        run.update({"matrices": str(args.matrices)})

    if args.subspace:
        ref = _reference(args.subspace, h.n)
        bands = (tuple(int(b) for b in parse_floats(args.bands, None, "bands"))
                 if args.bands else None)
        interior = None
        if args.interior:
            try:
                interior = json.loads(Path(args.interior).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise errors.ParseError(f"bad interior file: {exc}") from exc
        rep = subspace_degeneracy_test(h, loop, ref, bands, tol, interior)
        run.update({"subspace": args.subspace, "bands": args.bands})
    else:
        rep = run_degeneracy_test(h, loop, tol)

    if args.diag:
        tr = rep.details["transport"]
        lifted = rep.details.get("lifted")
        m = (len(tr.bands)) // 2
        lift = _lift_rows(lifted, m) if lifted is not None else {}
        header = (["t"] + [f"eig_{b}" for b in tr.bands] + ["min_gap"]
                  + [f"lift_angle_{i}" for i in range(m if lift else 0)])
        rows = []
        for t, w in zip(tr.params, tr.eigenvalues):
            row = [float(t)] + list(w) + [float(np.diff(w).min()) if len(w) > 1 else ""]
            if lift:
                row += lift.get(float(t), [""] * m)
            rows.append(row)
        _write_csv(args.diag, header, rows)
    rep.config = {"tolerances": tol.as_dict(), "run": run}
    return rep.to_dict()


SWEEP_KEYS = {"center", "radius", "n_sweep", "n_loop", "band", "reverse", "model", "params", "seed"}


def cmd_stone(args, tol: Tolerances) -> dict:
    from .models import ModelSpec
    from .stone import SurfaceSweep, stone_test

    cfg = {"model": args.model, "params": _json_object(args.params, "--params"), "seed": args.seed,
           "band": args.band, "n_sweep": args.n_sweep, "n_loop": args.n_loop,
           "reverse": args.reverse}
    v = parse_floats(args.sphere, 4, "sphere")
    cfg["center"], cfg["radius"] = v[:3], v[3]
    if args.sweep_config:
        try:
            doc = _json_object(Path(args.sweep_config).read_text(), "sweep config")
        except OSError as exc:
            raise errors.ParseError(f"cannot read {args.sweep_config}: {exc}") from exc
        extra = set(doc) - SWEEP_KEYS
        if extra:
            raise errors.ParseError(f"unknown sweep config keys {sorted(extra)}")
        cfg.update(doc)
    try:
        spec = ModelSpec(cfg["model"], cfg["params"], int(cfg["seed"]))
        sweep = SurfaceSweep.sphere(cfg["center"], float(cfg["radius"]), int(cfg["n_sweep"]),
                                    int(cfg["n_loop"]), bool(cfg["reverse"]))
    except (ValueError, TypeError) as exc:
        raise errors.ParseError(str(exc)) from exc
    res = stone_test(spec.hermitian(), sweep, int(cfg["band"]), tol)
    rep = res.report(tol)
    rep.config = {"tolerances": tol.as_dict(), "run": dict(cfg, command="stone-test")}
    return rep.to_dict()


def cmd_oracle(args, tol: Tolerances) -> dict:
    from .homotopy import normalize_base_point
    from .oracles import BACKEND, quaternion_lift, spin_lift_sign

    loop = normalize_base_point(read_frame_loop(args.input).validate(tol))
    out = {"n": loop.n, "backend": BACKEND, "samples": len(loop), "version": __version__}
    if loop.n >= 3:
        sign = spin_lift_sign(loop)
        out["spin_sign"] = sign
        out["class"] = "nontrivial" if sign < 0 else "trivial"
        if loop.n == 3:
            out["quaternion_sign"] = quaternion_lift(loop)
    else:
        from .homotopy import winding_number

        out["winding"] = winding_number(loop, tol)
    return out


COMMANDS = {
    "classify-loop": cmd_classify_loop,
    "scan-hamiltonian": cmd_scan,
    "stone-test": cmd_stone,
    "oracle": cmd_oracle,
}


def _emit(doc: dict, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(plain(doc), sort_keys=True, indent=2) + "\n")


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    tol = tolerances_from_args(args)
    if getattr(args, "show_config", False):
        _emit({"tolerances": tol.as_dict(), "version": __version__})
        return EXIT_OK
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        doc = COMMANDS[args.command](args, tol)
    except errors.SodegenError as exc:
        _emit({"error": exc.to_dict()})
        log.error("%s (%s): %s", exc.code, exc.stage, exc.message)
        return EXIT_CODES.get(exc.code, EXIT_INTERNAL)
    except ValueError as exc:
        _emit({"error": {"code": "INVALID_INPUT", "stage": "input", "message": str(exc)}})
        log.error("invalid input: %s", exc)
        return EXIT_INVALID_INPUT
    _emit(doc)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
