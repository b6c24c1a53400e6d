"""Numerical tolerances shared by every stage of the pipeline."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Central tolerance record; every operation takes one by reference.

    Defaults are engineering choices.  They can be overridden from the
    command line with ``--tol-<name>`` (dashes for underscores).
    """

    # skew / rotation algebra
    tol_orth: float = 1e-10
    tol_det: float = 1e-8
    tol_recon: float = 1e-9
    tol_pi: float = 1e-6
    tie_tol: float = 1e-3
    # loop lifting
    delta_step: float = 0.5
    delta_lift: float = 1.0
    tol_closure: float = 1e-8
    tol_return: float = 1e-6
    detour_strength: float = 0.3
    max_depth: int = 20
    k_round_tol: float = 0.05
    # eigenframe transport
    tol_sym: float = 1e-10
    tol_gap: float = 1e-8
    overlap_min: float = 0.75
    tol_perm: float = 1e-6
    # subspace projection
    sigma_min: float = 1e-8
    margin: float = 1e-6
    # surface sweeps
    tol_point: float = 1e-8

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]


DEFAULT = Tolerances()
