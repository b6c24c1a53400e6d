"""Lifting loops in SO(n) to so(n) and reading off their homotopy class.

A loop based at the identity is lifted sample by sample, each logarithm taken
on the branch nearest the previous one.  The lifted endpoint ``K`` satisfies
``exp(K) = I``, so its canonical angles are ``2 pi k_i``; the loop is
nontrivial exactly when ``sum(k_i)`` is odd (n >= 3).  For n = 2 the class is
the integer winding number instead.

A loop that comes back to its base point at an interior time cannot be lifted
through that point: the lift sits on a singular fiber of ``exp`` and the
logarithms of nearby samples jump.  Such loops are first pushed off the base
point by a small bump ``exp(beta(t) Y)``, which is a based homotopy and so
leaves the class unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    BranchAmbiguous,
    DegenerateSamples,
    DimensionMismatch,
    MaxDepthExceeded,
    NotClosed,
    NotQuantized,
    RefinementUnavailable,
    StepTooLarge,
    WrongDimension,
)
from .skewlin import (
    CanonicalSkewForm, TWO_PI, block_diagonal, nearest_log, skew_canonical_form, skew_exp,
    validate_so,
)

Sampler = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class FrameLoop:
    """Closed sequence of SO(n) samples ``F(t_0), ..., F(t_N)`` on ``0 = t_0 < ... < t_N = 1``.

    ``sampler`` (optional) evaluates the loop at arbitrary ``t`` and makes the
    loop refinable.
    """

    samples: np.ndarray
    params: np.ndarray
    sampler: Optional[Sampler] = None
    n: int = field(init=False)

    def __post_init__(self):
        S = np.asarray(self.samples, dtype=float)
        t = np.asarray(self.params, dtype=float)
        if S.ndim != 3 or S.shape[1] != S.shape[2]:
            raise DimensionMismatch(f"samples must have shape (N+1, n, n), got {S.shape}")
        if len(t) != len(S) or len(S) < 2:
            raise DimensionMismatch("need at least two samples and one parameter per sample")
        if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
            raise ValueError("params must increase strictly from 0 to 1")
        S.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "samples", S)
        object.__setattr__(self, "params", t)
        object.__setattr__(self, "n", S.shape[1])

    @classmethod
    def from_function(cls, f: Sampler, num: int, refinable: bool = True) -> "FrameLoop":
        t = np.linspace(0.0, 1.0, num)
        return cls(np.array([f(x) for x in t]), t, f if refinable else None)

    def __len__(self):
        return len(self.samples)

    def validate(self, config: Tolerances = DEFAULT) -> "FrameLoop":
        for F in self.samples:
            validate_so(F, config)
        gap = self.closure_error()
        if gap > config.tol_closure:
            raise NotClosed(f"|F(1) - F(0)|_max = {gap:.3e} exceeds tol_closure", gap=gap)
        return self

    def closure_error(self) -> float:
        return float(np.abs(self.samples[-1] - self.samples[0]).max())

    def max_step(self) -> float:
        return float(np.abs(np.diff(self.samples, axis=0)).max())

    def refine(self, factor: int = 2) -> "FrameLoop":
        """Resample on a grid ``factor`` times finer (requires a sampler)."""
        if self.sampler is None:
            raise RefinementUnavailable("loop has no sampler")
        t = np.unique(np.concatenate(
            [np.linspace(a, b, factor + 1) for a, b in zip(self.params[:-1], self.params[1:])]))
        known = dict(zip(self.params.tolist(), self.samples))
        S = np.array([known[x] if x in known else self.sampler(x) for x in t.tolist()])
        return FrameLoop(S, t, self.sampler)


@dataclass(frozen=True)
class LiftedCurve:
    """Discrete l-curve: ``exp(points[k]) = frames[k]`` and ``points[0] = 0``."""

    params: np.ndarray
    frames: np.ndarray
    points: np.ndarray
    refinements: int = 0
    detours: tuple = ()  # interior base-point returns that were pushed off

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    def max_jump(self) -> float:
        return float(np.abs(np.diff(self.points, axis=0)).max()) if len(self.points) > 1 else 0.0


@dataclass(frozen=True)
class HomotopyVerdict:
    k_list: tuple
    h: int
    parity: str
    endpoint_form: CanonicalSkewForm
    max_int_residual: float

    @property
    def nontrivial(self) -> bool:
        return self.parity == "nontrivial"


def normalize_base_point(loop: FrameLoop) -> FrameLoop:
    """Left-multiply every sample by ``F(t_0)^T`` so the loop starts at I."""
    F0t = np.array(loop.samples[0]).T
    S = np.einsum("ij,kjl->kil", F0t, loop.samples)
    S[0] = np.eye(loop.n)
    sampler = None
    if loop.sampler is not None:
        f = loop.sampler

        def sampler(t, _f=f, _b=F0t):
            return _b @ _f(t)

    return FrameLoop(S, loop.params, sampler)


class _Refine(Exception):
    def __init__(self, reason: str, err: Optional[Exception] = None):
        self.reason = reason
        self.err = err


def _lift_step(Fa, Ba, Fb, config: Tolerances):
    step = float(np.abs(Fb - Fa).max())
    if step > config.delta_step:
        raise _Refine("step")
    try:
        B = nearest_log(Fb, Ba, config, check=False)
    except BranchAmbiguous as exc:
        raise _Refine("ambiguous", exc)
    if float(np.abs(B - Ba).max()) > config.delta_lift:
        raise _Refine("jump")
    return B


def lift_loop(loop: FrameLoop, config: Tolerances = DEFAULT) -> LiftedCurve:
    """Continue the logarithm along the loop by nearest-branch matching.

    Intervals whose step is too large, whose branch choice is ambiguous, or
    whose lifted jump exceeds ``delta_lift`` are bisected with the loop's
    sampler, down to ``config.max_depth`` levels.
    """
    n = loop.n
    if np.abs(loop.samples[0] - np.eye(n)).max() > config.tol_closure:
        raise ValueError("loop must start at I; call normalize_base_point first")
    if loop.closure_error() > config.tol_closure:
        raise NotClosed("loop does not close", gap=loop.closure_error())

    frames = [np.eye(n)]
    params = [0.0]
    points = [np.zeros((n, n))]
    refinements = 0
    targets = list(zip(loop.params[1:].tolist(), loop.samples[1:]))
    # the endpoint is snapped onto the base point: both are I up to tol_closure
    targets[-1] = (1.0, np.eye(n))
    for tb, Fb in targets:
        stack = [(tb, np.asarray(Fb), 0)]
        while stack:
            t1, F1, depth = stack[-1]
            try:
                B = _lift_step(frames[-1], points[-1], F1, config)
            except _Refine as why:
                if loop.sampler is None:
                    if why.reason == "step":
                        raise DegenerateSamples(
                            "consecutive samples too far apart and no sampler to refine",
                            t=params[-1], step=float(np.abs(F1 - frames[-1]).max()))
                    raise RefinementUnavailable(
                        f"lift needs refinement ({why.reason}) but the loop has no sampler",
                        t=params[-1])
                if depth >= config.max_depth:
                    if why.reason == "step":
                        raise DegenerateSamples("samples discontinuous even after refinement",
                                                t=params[-1])
                    raise MaxDepthExceeded(f"refinement depth exhausted ({why.reason})",
                                           t=params[-1])
                tm = 0.5 * (params[-1] + t1)
                stack.append((tm, np.asarray(loop.sampler(tm), dtype=float), depth + 1))
                refinements += 1
                continue
            stack.pop()
            frames.append(F1)
            params.append(t1)
            points.append(B)
    return LiftedCurve(np.array(params), np.array(frames), np.array(points), refinements)


def classify(lifted: LiftedCurve, config: Tolerances = DEFAULT) -> HomotopyVerdict:
    """Integers ``k_i`` from the lifted endpoint and the parity of their sum."""
    if lifted.n < 3:
        raise WrongDimension("SO(2) loops are classified by winding_number")
    form = skew_canonical_form(lifted.endpoint, config)
    ratio = np.abs(form.angles) / TWO_PI
    k = np.rint(ratio)
    resid = float(np.abs(ratio - k).max()) if len(k) else 0.0
    if resid > config.k_round_tol:
        raise NotQuantized("lifted endpoint angles are not multiples of 2 pi",
                           residual=resid, angles=form.angles)
    k_list = tuple(int(x) for x in k)
    h = sum(k_list)
    return HomotopyVerdict(k_list, h, "nontrivial" if h % 2 else "trivial", form, resid)


def winding_number(loop: FrameLoop, config: Tolerances = DEFAULT) -> int:
    """Net number of turns of an SO(2) loop."""
    if loop.n != 2:
        raise WrongDimension("winding_number needs n = 2")
    if loop.closure_error() > config.tol_closure:
        raise NotClosed("loop does not close", gap=loop.closure_error())
    theta = np.arctan2(loop.samples[:, 1, 0], loop.samples[:, 0, 0])
    d = np.diff(theta)
    d = (d + np.pi) % TWO_PI - np.pi
    if len(d) and np.abs(d).max() >= np.pi / 2:
        k = int(np.argmax(np.abs(d)))
        raise StepTooLarge("angle step of at least pi/2 between samples",
                           t=float(loop.params[k]), step=float(d[k]))
    total = float(d.sum()) / TWO_PI
    w = int(np.rint(total))
    if abs(total - w) >= 0.05:
        raise NotQuantized("unwrapped angle is not a multiple of 2 pi", turns=total)
    return w


def interior_returns(loop: FrameLoop, config: Tolerances = DEFAULT) -> np.ndarray:
    """Interior parameters at which a loop based at I passes within ``tol_return`` of I."""
    dev = np.abs(loop.samples[1:-1] - np.eye(loop.n)).max(axis=(1, 2))
    return loop.params[1:-1][dev <= config.tol_return]


def _detour_generator(n: int) -> np.ndarray:
    # fixed generic direction: distinct angles in randomly oriented planes
    g = np.random.Generator(np.random.Philox(7))
    Q, R = np.linalg.qr(g.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    angles = 1.0 - 0.6 * np.arange(n // 2) / max(n // 2, 1)
    return Q @ block_diagonal(angles, n) @ Q.T


def detour(loop: FrameLoop, times, strength: float = 0.3) -> FrameLoop:
    """Right-multiply by ``exp(beta(t) Y)`` with cos^2 bumps of height ``strength`` at ``times``.

    beta vanishes at t = 0 and t = 1, so the result is homotopic to ``loop``
    with the base point fixed.
    """
    times = np.sort(np.asarray(times, dtype=float))
    edges = np.concatenate([[0.0], times, [1.0]])
    width = 0.5 * float(np.diff(edges).min())
    Y = _detour_generator(loop.n)

    def push(t, F):
        u = np.abs(t - times) / width
        b = strength * float(np.sum(np.cos(0.5 * np.pi * u[u < 1.0]) ** 2))
        return F if b == 0.0 else F @ skew_exp(b * Y)

    S = np.array([push(t, F) for t, F in zip(loop.params.tolist(), loop.samples)])
    sampler = None
    if loop.sampler is not None:
        f = loop.sampler

        def sampler(t):
            return push(t, f(t))

    return FrameLoop(S, loop.params, sampler)


def classify_loop(loop: FrameLoop, config: Tolerances = DEFAULT):
    """Normalize, lift and classify; returns (verdict, lifted) or (winding, None) for n = 2."""
    based = normalize_base_point(loop)
    if loop.n == 2:
        return winding_number(based, config), None
    returns = interior_returns(based, config)
    if len(returns):
        based = detour(based, returns, config.detour_strength)
    lifted = lift_loop(based, config)
    if len(returns):
        lifted = replace(lifted, detours=tuple(returns.tolist()))
    return classify(lifted, config), lifted


def _check_pair(a: FrameLoop, b: FrameLoop):
    if a.n != b.n:
        raise DimensionMismatch(f"cannot combine loops in SO({a.n}) and SO({b.n})")


def concatenate(a: FrameLoop, b: FrameLoop) -> FrameLoop:
    """Traverse ``a`` on [0, 1/2] and then ``b`` on [1/2, 1]."""
    _check_pair(a, b)
    S = np.concatenate([a.samples, b.samples[1:]])
    t = np.concatenate([0.5 * a.params, 0.5 + 0.5 * b.params[1:]])
    sampler = None
    if a.sampler is not None and b.sampler is not None:
        fa, fb = a.sampler, b.sampler

        def sampler(x):
            return fa(2.0 * x) if x <= 0.5 else fb(2.0 * x - 1.0)

    return FrameLoop(S, t, sampler)


def reverse(a: FrameLoop) -> FrameLoop:
    sampler = None
    if a.sampler is not None:
        f = a.sampler

        def sampler(x):
            return f(1.0 - x)

    return FrameLoop(a.samples[::-1].copy(), (1.0 - a.params[::-1]).copy(), sampler)
