"""Eigenframe loops of real symmetric Hamiltonian families.

Along a closed parameter loop the eigenvectors are followed by optimal
overlap assignment, signs are chosen so matched overlaps are positive, and
the first frame is oriented to det +1.  The resulting frames either close
(a loop in SO(n) whose class may certify a degeneracy), reverse some signs
(Longuet-Higgins: a degeneracy is certified at once), or come back permuted
(transport error).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import DEFAULT, Tolerances
from .errors import (
    DegenerateOnLoop,
    MaxDepthExceeded,
    NotSignedPermutation,
    NotSymmetric,
    OverlapTooWeak,
    PermutedClosure,
    RefinementUnavailable,
)
from .homotopy import FrameLoop, classify_loop
from .report import INCONCLUSIVE, CERTIFIED, TestReport


@dataclass(frozen=True)
class HamiltonianSampler:
    """Real symmetric family ``Q -> H(Q)`` of fixed size n."""

    n: int
    func: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    tol_sym: float = DEFAULT.tol_sym

    def __call__(self, q) -> np.ndarray:
        H = np.asarray(self.func(np.asarray(q, dtype=float)))
        if np.iscomplexobj(H):
            if np.abs(H.imag).max() > 0:
                raise NotSymmetric("complex Hamiltonian given to the real transport", point=q)
            H = H.real
        H = H.astype(float)
        if H.shape != (self.n, self.n):
            raise NotSymmetric(f"expected a {self.n}x{self.n} matrix, got {H.shape}", point=q)
        asym = float(np.abs(H - H.T).max())
        if asym > self.tol_sym * max(1.0, float(np.abs(H).max())):
            raise NotSymmetric("Hamiltonian is not symmetric", asymmetry=asym, point=q)
        return 0.5 * (H + H.T)

    @classmethod
    def from_table(cls, points, matrices, name: str = "table") -> "HamiltonianSampler":
        """Sampler backed by precomputed matrices; only the listed points can be evaluated."""
        P = np.asarray(points, dtype=float)
        M = np.asarray(matrices)
        if P.ndim == 1:
            P = P[:, None]
        table = {tuple(p): m for p, m in zip(P.tolist(), M)}

        def func(q):
            key = tuple(np.atleast_1d(q).tolist())
            if key not in table:
                raise RefinementUnavailable("point not in the sample table", point=list(key))
            return table[key]

        return cls(M.shape[1], func, name)


@dataclass(frozen=True)
class ParameterLoop:
    """Closed loop in parameter space, sampled uniformly in its parameter t in [0, 1].

    ``curve`` is an exact parametrization when available (circles, ellipses);
    otherwise the closed polyline through ``vertices`` is traversed at
    constant speed.  ``warp`` reparametrizes t monotonically.
    """

    vertices: np.ndarray
    samples: int = 200
    refinable: bool = True
    curve: Optional[Callable[[float], np.ndarray]] = None
    warp: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if len(V) < 3 or np.abs(V[0] - V[-1]).max() > 0:
            raise ValueError("vertices must describe a closed polyline (first = last)")
        if np.any(np.linalg.norm(np.diff(V, axis=0), axis=1) == 0):
            raise ValueError("consecutive vertices must be distinct")
        if self.samples < 2:
            raise ValueError("need at least two sample intervals")
        object.__setattr__(self, "vertices", V)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @classmethod
    def polygon(cls, vertices, samples: int = 200, refinable: bool = True) -> "ParameterLoop":
        V = np.asarray(vertices, dtype=float)
        if np.abs(V[0] - V[-1]).max() > 0:
            V = np.vstack([V, V[:1]])
        return cls(V, samples, refinable)

    @classmethod
    def ellipse(cls, center, a: float, b: float, angle: float = 0.0,
                samples: int = 200) -> "ParameterLoop":
        c = np.asarray(center, dtype=float)
        ca, sa = np.cos(angle), np.sin(angle)

        def curve(t):
            x, y = a * np.cos(2 * np.pi * t), b * np.sin(2 * np.pi * t)
            return c + np.array([ca * x - sa * y, sa * x + ca * y])

        verts = np.array([curve(t) for t in np.linspace(0, 1, 9)])
        verts[-1] = verts[0]
        return cls(verts, samples, True, curve)

    @classmethod
    def circle(cls, center, radius: float, samples: int = 200) -> "ParameterLoop":
        return cls.ellipse(center, radius, radius, 0.0, samples)

    def point(self, t: float) -> np.ndarray:
        if self.warp is not None:
            t = float(self.warp(t))
        if t <= 0.0 or t >= 1.0:
            # both ends map to the very same point so that closure is exact
            t = 0.0
        if self.curve is not None:
            return np.asarray(self.curve(t), dtype=float)
        seg = np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
        i = min(int(np.searchsorted(s, t, side="right")) - 1, len(seg) - 1)
        w = (t - s[i]) / (s[i + 1] - s[i])
        return (1 - w) * self.vertices[i] + w * self.vertices[i + 1]

    def params(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.samples + 1)

    def reparametrized(self, warp: Callable[[float], float]) -> "ParameterLoop":
        old = self.warp
        w = warp if old is None else (lambda t: old(warp(t)))
        return ParameterLoop(self.vertices, self.samples, self.refinable, self.curve, w)

    def refined(self, factor: int = 2) -> "ParameterLoop":
        return ParameterLoop(self.vertices, self.samples * factor, self.refinable,
                             self.curve, self.warp)


@dataclass(frozen=True)
class SampledLoop:
    """Loop known only at fixed parameter values (a matrix stream); never refinable.

    Pair it with ``HamiltonianSampler.from_table(ts, matrices)``: the
    parameter value itself serves as the lookup key.
    """

    ts: np.ndarray
    refinable: bool = False

    def __post_init__(self):
        t = np.asarray(self.ts, dtype=float)
        if len(t) < 3 or t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
            raise ValueError("stream parameters must increase strictly from 0 to 1")
        object.__setattr__(self, "ts", t)

    @property
    def samples(self) -> int:
        return len(self.ts) - 1

    def params(self) -> np.ndarray:
        return self.ts

    def point(self, t: float) -> np.ndarray:
        return np.array([t])


class ClosureKind(enum.Enum):
    CLOSED_LOOP = "closed_loop"
    SIGN_REVERSAL = "sign_reversal"
    PERMUTED = "permuted"


@dataclass(frozen=True)
class TransportResult:
    """Continuously transported eigenframes around a parameter loop.

    ``frames[k]`` holds the tracked eigenvectors as columns; ``bands`` lists
    which eigenvalue indices were selected.
    """

    params: np.ndarray
    points: np.ndarray
    frames: np.ndarray
    eigenvalues: np.ndarray
    min_gap: float
    overlap_quality: float
    refinements: int
    bands: tuple
    sampler: Optional[Callable[[float], np.ndarray]] = field(default=None, repr=False)

    @property
    def closure(self) -> np.ndarray:
        return self.frames[0].T @ self.frames[-1]

    def frame_loop(self) -> FrameLoop:
        """Frames as a loop in SO(n); only meaningful for full, closed transports."""
        S = np.array(self.frames)
        S[-1] = S[0]
        return FrameLoop(S, self.params, self.sampler)


def _relevant_gaps(w: np.ndarray, bands: Sequence[int]) -> np.ndarray:
    lo, hi = min(bands), max(bands)
    lo, hi = max(lo - 1, 0), min(hi + 1, len(w) - 1)
    return np.diff(w[lo:hi + 1])


def _match(prev: np.ndarray, V: np.ndarray, bands: Sequence[int]):
    """Columns of V following ``prev`` (selected columns), sign-fixed; and worst overlap."""
    O = prev.T @ V
    rows, cols = linear_sum_assignment(-np.abs(O))
    order = cols[np.argsort(rows)]
    if sorted(order.tolist()) != sorted(bands):
        return None, order, 0.0
    signs = np.sign(O[np.arange(len(order)), order])
    signs[signs == 0] = 1.0
    quality = float(np.abs(O[np.arange(len(order)), order]).min())
    return V[:, order] * signs, order, quality


def transport_frames(h: HamiltonianSampler, loop: ParameterLoop, config: Tolerances = DEFAULT,
                     bands: Optional[Sequence[int]] = None) -> TransportResult:
    """Follow the selected eigenvectors (default: all) continuously around ``loop``."""
    n = h.n
    bands = tuple(range(n)) if bands is None else tuple(int(b) for b in bands)
    if not bands or min(bands) < 0 or max(bands) >= n or len(set(bands)) != len(bands):
        raise ValueError(f"invalid band selection {bands} for n = {n}")
    bands = tuple(sorted(bands))
    band_idx = list(bands)

    cache = {}

    def eig(t):
        if t not in cache:
            q = loop.point(t)
            w, V = np.linalg.eigh(h(q))
            cache[t] = (q, w, V)
        return cache[t]

    q0, w0, V0 = eig(0.0)
    F0 = V0[:, band_idx].copy()
    if len(bands) == n and np.linalg.det(F0) < 0:
        F0[:, -1] *= -1.0

    ts, qs, frames, evals = [0.0], [q0], [F0], [w0[band_idx]]
    gaps = [_relevant_gaps(w0, bands)]
    quality = 1.0
    refinements = 0

    def step(prev, t1):
        _, w, V = eig(t1)
        F, order, qual = _match(prev, V, band_idx)
        return F, w, order, qual

    grid = loop.params().tolist()
    for t_next in grid[1:]:
        stack = [(t_next, 0)]
        while stack:
            t1, depth = stack[-1]
            F, w, order, qual = step(frames[-1], t1)
            if F is None or qual < config.overlap_min:
                if not loop.refinable:
                    raise RefinementUnavailable(
                        "eigenvector overlap too weak and the loop cannot be refined",
                        t=ts[-1], overlap=qual)
                if depth >= config.max_depth:
                    raise OverlapTooWeak("eigenvector matching failed after refinement",
                                         t=ts[-1], overlap=qual)
                stack.append((0.5 * (ts[-1] + t1), depth + 1))
                refinements += 1
                continue
            stack.pop()
            quality = min(quality, qual)
            ts.append(t1)
            qs.append(eig(t1)[0])
            frames.append(F)
            evals.append(w[order])
            gaps.append(_relevant_gaps(w, bands))

    all_w = np.array([eig(t)[1] for t in ts])
    spread = max(float(all_w.max() - all_w.min()), np.finfo(float).tiny)
    gap_arr = np.array([g.min() if len(g) else np.inf for g in gaps])
    min_gap = float(gap_arr.min())
    if min_gap < config.tol_gap * spread:
        k = int(np.argmin(gap_arr))
        raise DegenerateOnLoop("eigenvalues (nearly) degenerate on the loop",
                               t=ts[k], point=qs[k], gap=min_gap)

    T = np.array(ts)
    Fr = np.array(frames)

    def sampler(t, _T=T, _F=Fr):
        # transport from the nearest known frame on the left
        k = max(int(np.searchsorted(_T, t, side="right")) - 1, 0)
        prev, t0 = _F[k], _T[k]
        for s in np.linspace(t0, t, 5)[1:]:
            _, w, V = np.linalg.eigh(h(loop.point(float(s))))
            prev, _, qual = _match(prev, V, band_idx)
            if prev is None or qual < config.overlap_min:
                raise MaxDepthExceeded("cannot transport eigenframe to refinement point", t=t)
        return prev

    return TransportResult(T, np.array(qs), Fr, np.array(evals), min_gap, quality,
                           refinements, bands, sampler if loop.refinable else None)


def closure_classify(t: TransportResult, config: Tolerances = DEFAULT) -> ClosureKind:
    """Sort the closure matrix ``F(t_0)^T F(t_N)`` into identity, sign reversal or permutation."""
    C = t.closure if isinstance(t, TransportResult) else np.asarray(t, dtype=float)
    R = np.rint(C)
    if np.abs(C - R).max() > config.tol_perm or not np.all(np.isin(R, (-1.0, 0.0, 1.0))):
        raise NotSignedPermutation("closure is not a signed permutation",
                                   residual=float(np.abs(C - R).max()))
    if not (np.all(np.abs(R).sum(axis=0) == 1) and np.all(np.abs(R).sum(axis=1) == 1)):
        raise NotSignedPermutation("closure is not a signed permutation")
    if np.any(np.diag(R) == 0):
        raise PermutedClosure("eigenvectors came back permuted; transport inconsistent",
                              closure=R)
    if np.all(np.diag(R) == 1.0):
        return ClosureKind.CLOSED_LOOP
    return ClosureKind.SIGN_REVERSAL


def _verdict_from_frames(loop: FrameLoop, config: Tolerances):
    """(verdict, reason, invariants, diagnostics, lifted curve) for a closed frame loop."""
    result, lifted = classify_loop(loop, config)
    if loop.n == 2:
        w = int(result)
        inv = {"winding": w}
        if w:
            return CERTIFIED, "nonzero_winding", inv, {}, None
        return INCONCLUSIVE, "none", inv, {}, None
    inv = {"k_list": list(result.k_list), "h": result.h, "parity": result.parity}
    diag = {"max_int_residual": result.max_int_residual,
            "lift_refinements": lifted.refinements, "lift_detours": len(lifted.detours)}
    if result.nontrivial:
        return CERTIFIED, "nontrivial_loop", inv, diag, lifted
    return INCONCLUSIVE, "none", inv, diag, lifted


def run_degeneracy_test(h: HamiltonianSampler, loop: ParameterLoop,
                        config: Tolerances = DEFAULT) -> TestReport:
    """Transport, closure analysis, then (for closed frames) the homotopy class.

    One-sided: INCONCLUSIVE never certifies the absence of degeneracies.
    """
    if h.n < 2:
        raise ValueError("need n >= 2")
    tr = transport_frames(h, loop, config)
    kind = closure_classify(tr, config)
    diag = {
        "min_gap": tr.min_gap,
        "overlap_quality": tr.overlap_quality,
        "samples": len(tr.params),
        "transport_refinements": tr.refinements,
    }
    inv = {"closure_kind": kind.value, "closure_signs": np.diag(np.rint(tr.closure)).astype(int).tolist()}
    if kind is ClosureKind.SIGN_REVERSAL:
        return TestReport(CERTIFIED, "sign_reversal", inv, diag, config=config.as_dict(),
                          details={"transport": tr})
    verdict, reason, more_inv, more_diag, lifted = _verdict_from_frames(tr.frame_loop(), config)
    inv.update(more_inv)
    diag.update(more_diag)
    return TestReport(verdict, reason, inv, diag, config=config.as_dict(),
                      details={"transport": tr, "lifted": lifted})
