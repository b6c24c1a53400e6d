"""Degeneracy test on projections of p eigenvectors onto a fixed p-dimensional subspace.

When every projected eigenvector keeps squared norm above ``1 - 1/p``, the
projections stay linearly independent, so Gram-Schmidt turns them into a
loop in SO(p) whose class carries the same certificate as the full frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import ConditionViolated, RankDeficient
from .homotopy import FrameLoop
from .report import CERTIFIED, TestReport
from .transport import (
    ClosureKind,
    HamiltonianSampler,
    ParameterLoop,
    _verdict_from_frames,
    closure_classify,
    transport_frames,
)


@dataclass(frozen=True)
class ReferenceSubspace:
    """Fixed orthonormal basis ``|1>, ..., |p>`` (columns) of a p-dimensional subspace."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2 or B.shape[1] >= B.shape[0] or B.shape[1] < 1:
            raise ValueError("basis must be n x p with 1 <= p < n")
        err = np.abs(B.T @ B - np.eye(B.shape[1])).max()
        if err > 1e-10:
            raise ValueError(f"reference basis not orthonormal (residual {err:.2e})")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def p(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    @classmethod
    def coordinates(cls, n: int, p: int) -> "ReferenceSubspace":
        """Span of the first p coordinate axes."""
        return cls(np.eye(n)[:, :p])


@dataclass(frozen=True)
class ProjectionDiagnostics:
    overlaps: np.ndarray  # (samples, p) squared norms of the projections
    min_overlap: float
    worst: tuple  # (sample index, eigenvector index)
    bound: float  # 1 - 1/p
    margin: float  # min_overlap - bound
    condition_met: bool
    min_singular: float
    frames_gs: Optional[np.ndarray]


# how often the independence guard ran with the overlap condition met, and how often it fired
RANK_GUARD = {"checked": 0, "fired": 0}


def overlap_bound(p: int) -> float:
    return 1.0 - 1.0 / p


def project_and_check(frames, ref: ReferenceSubspace, config: Tolerances = DEFAULT,
                      params=None, strict: bool = True,
                      orthonormalize: bool = True) -> ProjectionDiagnostics:
    """Project selected eigenvectors (``frames[k]`` is n x p) onto ``ref``.

    The condition requires every squared projection norm to exceed
    ``1 - 1/p + config.margin``.  Independence is verified separately through
    the smallest singular value of the p x p coefficient matrix; if it fails
    while the condition holds, a numerical bug is reported as RANK_DEFICIENT.
    ``orthonormalize`` builds the Gram-Schmidt frames, which assumes the
    samples form a continuous sequence.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.ndim == 2:
        frames = frames[None]
    p = ref.p
    if frames.shape[1:] != (ref.n, p):
        raise ValueError(f"frames must be (samples, {ref.n}, {p}), got {frames.shape}")
    coeffs = np.einsum("ji,kjl->kil", ref.basis, frames)
    overlaps = np.einsum("kil,kil->kl", coeffs, coeffs)
    k, i = np.unravel_index(int(np.argmin(overlaps)), overlaps.shape)
    m = float(overlaps[k, i])
    bound = overlap_bound(p)
    met = m > bound + config.margin
    smin = float(np.linalg.svd(coeffs, compute_uv=False)[:, -1].min())
    where = {"sample": int(k), "eigenvector": int(i), "overlap": m, "bound": bound,
             "margin": m - bound}
    if params is not None:
        where["t"] = float(np.asarray(params)[k])
    if met:
        RANK_GUARD["checked"] += 1
    if met and smin <= config.sigma_min:
        RANK_GUARD["fired"] += 1
        raise RankDeficient("projections dependent although the overlap condition holds",
                            sigma_min=smin, **where)
    if not met and strict:
        raise ConditionViolated("projected overlap at or below 1 - 1/p (+margin)", **where)
    gs = gram_schmidt_frames(coeffs, config) if met and orthonormalize else None
    return ProjectionDiagnostics(overlaps, m, (int(k), int(i)), bound, m - bound, met, smin, gs)


def _gram_schmidt(phi: np.ndarray, tol: float) -> np.ndarray:
    """Classical Gram-Schmidt on the columns of a p x p matrix, in index order."""
    p = phi.shape[1]
    Q = np.zeros_like(phi, dtype=float)
    for j in range(p):
        v = phi[:, j] - Q[:, :j] @ (Q[:, :j].T @ phi[:, j])
        nv = np.linalg.norm(v)
        if nv <= tol:
            raise RankDeficient("Gram-Schmidt met a dependent column", column=j, norm=float(nv))
        Q[:, j] = v / nv
    return Q


def gram_schmidt_frame(phi, config: Tolerances = DEFAULT) -> np.ndarray:
    """Orthonormalize one p x p coefficient matrix; det +1 by flipping the last column."""
    Q = _gram_schmidt(np.asarray(phi, dtype=float), config.sigma_min)
    if np.linalg.det(Q) < 0:
        Q[:, -1] *= -1.0
    return Q


def gram_schmidt_frames(phis, config: Tolerances = DEFAULT) -> np.ndarray:
    """Orthonormalize a continuous sequence; orientation fixed once on the first sample."""
    out = np.array([_gram_schmidt(np.asarray(f, dtype=float), config.sigma_min) for f in phis])
    if np.linalg.det(out[0]) < 0:
        out[:, :, -1] *= -1.0
    dets = np.linalg.det(out)
    if np.any(dets < 0):
        raise RankDeficient("orientation of the Gram-Schmidt frames changed along the loop",
                            sample=int(np.argmax(dets < 0)))
    return out


def subspace_degeneracy_test(h: HamiltonianSampler, loop: ParameterLoop, ref: ReferenceSubspace,
                             bands: Optional[Sequence[int]] = None,
                             config: Tolerances = DEFAULT,
                             interior_points=None) -> TestReport:
    """Projected-frame version of ``run_degeneracy_test``.

    The overlap condition is verified on the loop and at any supplied
    interior points only; the report says so in ``surface_condition_checked``.
    A violated condition raises CONDITION_VIOLATED and no verdict is produced.
    """
    p = ref.p
    if p < 2:
        raise ValueError("the projected test needs p >= 2")
    bands = tuple(range(p)) if bands is None else tuple(bands)
    if len(bands) != p:
        raise ValueError("need exactly p selected bands")
    tr = transport_frames(h, loop, config, bands)
    diag = project_and_check(tr.frames, ref, config, tr.params)
    interior_min = None
    checked = "loop_only"
    if interior_points is not None and len(interior_points):
        vecs = []
        for q in np.atleast_2d(np.asarray(interior_points, dtype=float)):
            _, V = np.linalg.eigh(h(q))
            vecs.append(V[:, list(bands)])
        interior_min = project_and_check(np.array(vecs), ref, config,
                                         orthonormalize=False).min_overlap
        checked = "loop_and_interior_samples"

    kind = closure_classify(tr.closure, config)
    report_diag = {
        "min_gap": tr.min_gap,
        "overlap_quality": tr.overlap_quality,
        "min_overlap": diag.min_overlap,
        "overlap_bound": diag.bound,
        "overlap_margin": diag.margin,
        "min_singular_value": diag.min_singular,
        "samples": len(tr.params),
        "transport_refinements": tr.refinements,
    }
    if interior_min is not None:
        report_diag["interior_min_overlap"] = interior_min
    inv = {"closure_kind": kind.value, "p": p}
    if kind is ClosureKind.SIGN_REVERSAL:
        return TestReport(CERTIFIED, "sign_reversal", inv, report_diag, checked, config.as_dict(),
                          details={"transport": tr, "projection": diag})

    frames = diag.frames_gs.copy()
    frames[-1] = frames[0]
    coeff_sampler = None
    if tr.sampler is not None:
        B = ref.basis
        flip = np.linalg.det(_gram_schmidt(B.T @ tr.frames[0], config.sigma_min)) < 0

        def coeff_sampler(t):
            Q = _gram_schmidt(B.T @ tr.sampler(t), config.sigma_min)
            if flip:
                Q[:, -1] *= -1.0
            return Q

    verdict, reason, more_inv, more_diag, lifted = _verdict_from_frames(
        FrameLoop(frames, tr.params, coeff_sampler), config)
    inv.update(more_inv)
    report_diag.update(more_diag)
    return TestReport(verdict, reason, inv, report_diag, checked, config.as_dict(),
                      details={"transport": tr, "projection": diag, "lifted": lifted})
