"""Geometric-phase sweep test for complex Hermitian families.

A closed surface is swept by loops that start and end as points.  The
cyclic Berry phase of one band is tracked loop by loop, unwrapped
continuously from 0; if it ends at ``2 pi k`` with ``k != 0`` the band must
become degenerate somewhere inside the surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DegenerateOnSurface, OverlapVanishes, SweepDiscontinuous
from .report import CERTIFIED, INCONCLUSIVE, TestReport

MIN_OVERLAP = 0.1


def berry_phase(states) -> float:
    """Discrete Pancharatnam phase ``-arg prod <psi_j|psi_{j+1}>`` of a closed chain.

    ``states`` is an (m, n) array of unit vectors; the chain closes from the
    last state back to the first.  The result lies in (-pi, pi] and does not
    depend on the phase of any individual state.
    """
    S = np.asarray(states, dtype=complex)
    if S.ndim != 2 or len(S) == 0:
        raise ValueError("states must be an (m, n) array")
    nxt = np.roll(S, -1, axis=0)
    ov = np.einsum("ji,ji->j", S.conj(), nxt)
    mags = np.abs(ov)
    if mags.min() <= MIN_OVERLAP:
        j = int(np.argmin(mags))
        raise OverlapVanishes("consecutive states nearly orthogonal", index=j,
                              overlap=float(mags[j]))
    # normalize each factor so long chains cannot underflow
    gamma = -float(np.angle(np.prod(ov / mags)))
    return np.pi if gamma <= -np.pi else gamma


@dataclass(frozen=True)
class SurfaceSweep:
    """Ordered loops ``L_1 ... L_N`` sweeping a closed surface; ends are points.

    Each loop is an (m_i, d) array of points traversed in order and closed
    implicitly.  ``refine`` (optional) returns the same surface on a finer
    mesh.
    """

    loops: tuple
    refine: Optional[Callable[[], "SurfaceSweep"]] = field(default=None, repr=False, compare=False)
    description: dict = field(default_factory=dict, compare=False)

    def validate(self, config: Tolerances = DEFAULT):
        if len(self.loops) < 3:
            raise ValueError("a sweep needs at least three loops")
        for end in (self.loops[0], self.loops[-1]):
            pts = np.atleast_2d(end)
            diam = float(np.ptp(pts, axis=0).max()) if len(pts) > 1 else 0.0
            if diam > config.tol_point:
                raise ValueError(f"first and last loops must be points (diameter {diam:.2e})")
        return self

    @classmethod
    def sphere(cls, center=(0.0, 0.0, 0.0), radius: float = 1.0, n_sweep: int = 50,
               n_loop: int = 100, reverse: bool = False) -> "SurfaceSweep":
        """Latitude circles from the north to the south pole.

        Each circle runs with increasing azimuth (counterclockwise seen from
        +z); ``reverse`` runs them the other way, reversing the orientation.
        """
        c = np.asarray(center, dtype=float)
        theta = np.linspace(0.0, np.pi, n_sweep)
        phi = 2 * np.pi * np.arange(n_loop) / n_loop
        if reverse:
            phi = -phi
        loops = []
        for i, th in enumerate(theta):
            if i == 0 or i == n_sweep - 1:
                loops.append(c + radius * np.array([[0.0, 0.0, np.cos(th)]]))
                continue
            ring = np.stack([np.sin(th) * np.cos(phi), np.sin(th) * np.sin(phi),
                             np.full_like(phi, np.cos(th))], axis=1)
            loops.append(c + radius * ring)

        def refine():
            return cls.sphere(center, radius, 2 * n_sweep - 1, 2 * n_loop, reverse)

        desc = {"kind": "sphere", "center": c.tolist(), "radius": radius,
                "n_sweep": n_sweep, "n_loop": n_loop, "reverse": reverse}
        return cls(tuple(loops), refine, desc)


@dataclass(frozen=True)
class SweepResult:
    gammas: np.ndarray
    k: int
    residual: float
    band: int
    min_gap: float
    max_phase_step: float

    @property
    def certified(self) -> bool:
        return self.k != 0

    def report(self, config: Tolerances = DEFAULT) -> TestReport:
        inv = {"stone_k": self.k, "band": self.band}
        diag = {"residual": self.residual, "min_gap": self.min_gap,
                "max_phase_step": self.max_phase_step, "loops": len(self.gammas)}
        if self.certified:
            return TestReport(CERTIFIED, "nonzero_stone_k", inv, diag, config=config.as_dict())
        return TestReport(INCONCLUSIVE, "none", inv, diag, config=config.as_dict())


def _band_states(h, points: np.ndarray, band: int, config: Tolerances):
    H = np.array([h(q) for q in points], dtype=complex)
    w, V = np.linalg.eigh(H)
    gaps = np.diff(w, axis=1)
    lo, hi = max(band - 1, 0), min(band, w.shape[1] - 2)
    rel = gaps[:, lo:hi + 1] if w.shape[1] > 1 else np.full((len(w), 1), np.inf)
    return V[:, :, band], w, float(rel.min())


def stone_test(h: Callable, sweep: SurfaceSweep, band: int = 0, config: Tolerances = DEFAULT,
               max_phase_step: float = np.pi / 2, max_refine: int = 3) -> SweepResult:
    """Unwrapped Berry phase of ``band`` over the sweep; ``k = round(gamma_N / 2 pi)``.

    Consecutive loop phases are joined on the nearest 2 pi branch.  A jump
    above ``max_phase_step`` after the branch choice means the sweep is too
    coarse; the sweep is refined (when it can be) up to ``max_refine`` times.
    """
    sweep.validate(config)
    for attempt in range(max_refine + 1):
        try:
            return _sweep(h, sweep, band, config, max_phase_step)
        except SweepDiscontinuous:
            if sweep.refine is None or attempt == max_refine:
                raise
            sweep = sweep.refine()
    raise AssertionError("unreachable")  # pragma: no cover


def _sweep(h, sweep, band, config, max_phase_step) -> SweepResult:
    raw, gaps, spreads = [], [], []
    for i, pts in enumerate(sweep.loops):
        states, w, gap = _band_states(h, np.atleast_2d(pts), band, config)
        gaps.append(gap)
        spreads.append(float(w.max() - w.min()))
        try:
            raw.append(berry_phase(states))
        except OverlapVanishes as exc:
            exc.context["loop"] = i
            raise
    spread = max(max(spreads), np.finfo(float).tiny)
    min_gap = min(gaps)
    if min_gap < config.tol_gap * spread:
        i = int(np.argmin(gaps))
        raise DegenerateOnSurface("selected band degenerate on the surface", loop=i, gap=min_gap)
    gammas = [0.0]
    worst = 0.0
    for i in range(1, len(raw)):
        m = np.round((gammas[-1] - raw[i]) / (2 * np.pi))
        g = raw[i] + 2 * np.pi * m
        step = abs(g - gammas[-1])
        if step > max_phase_step:
            raise SweepDiscontinuous("Berry phase jumps between consecutive loops",
                                     loop=i, step=step)
        worst = max(worst, step)
        gammas.append(float(g))
    ratio = gammas[-1] / (2 * np.pi)
    k = int(np.rint(ratio))
    return SweepResult(np.array(gammas), k, abs(ratio - k), band, min_gap, worst)
