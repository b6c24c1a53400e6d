"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` and the pipeline
``stage`` it belongs to; the CLI maps codes to exit statuses.
"""

from __future__ import annotations


class SodegenError(Exception):
    code = "INTERNAL"
    stage = "internal"

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.context = context

    def to_dict(self) -> dict:
        out = {"code": self.code, "stage": self.stage, "message": self.message}
        if self.context:
            out["context"] = {k: _plain(v) for k, v in self.context.items()}
        return out


def _plain(v):
    try:
        import numpy as np

        if isinstance(v, np.generic):
            return v.item()
        if isinstance(v, np.ndarray):
            return v.tolist()
    except ImportError:  # pragma: no cover
        pass
    return v


def _make(name: str, code: str, stage: str, doc: str = "") -> type:
    return type(name, (SodegenError,), {"code": code, "stage": stage, "__doc__": doc})


# skewlin
NotOrthogonal = _make("NotOrthogonal", "NOT_ORTHOGONAL", "skewlin")
NegativeDeterminant = _make(
    "NegativeDeterminant", "NEGATIVE_DETERMINANT", "skewlin",
    "Orthogonal but det = -1: the frame is improperly oriented.")
NumericalFailure = _make("NumericalFailure", "NUMERICAL_FAILURE", "skewlin")
AngleNearPi = _make("AngleNearPi", "ANGLE_NEAR_PI", "skewlin")
BranchAmbiguous = _make("BranchAmbiguous", "BRANCH_AMBIGUOUS", "skewlin")

# homotopy
RefinementUnavailable = _make("RefinementUnavailable", "REFINEMENT_UNAVAILABLE", "homotopy")
MaxDepthExceeded = _make("MaxDepthExceeded", "MAX_DEPTH_EXCEEDED", "homotopy")
DegenerateSamples = _make("DegenerateSamples", "DEGENERATE_SAMPLES", "homotopy")
NotQuantized = _make("NotQuantized", "NOT_QUANTIZED", "homotopy")
WrongDimension = _make("WrongDimension", "WRONG_DIMENSION", "homotopy")
DimensionMismatch = _make("DimensionMismatch", "DIMENSION_MISMATCH", "homotopy")
NotClosed = _make("NotClosed", "NOT_CLOSED", "homotopy")
StepTooLarge = _make("StepTooLarge", "STEP_TOO_LARGE", "homotopy")

# oracles
NotScalar = _make("NotScalar", "NOT_SCALAR", "oracles")

# transport
DegenerateOnLoop = _make("DegenerateOnLoop", "DEGENERATE_ON_LOOP", "transport")
OverlapTooWeak = _make("OverlapTooWeak", "OVERLAP_TOO_WEAK", "transport")
NotSignedPermutation = _make("NotSignedPermutation", "NOT_SIGNED_PERMUTATION", "transport")
PermutedClosure = _make("PermutedClosure", "PERMUTED", "transport")
NotSymmetric = _make("NotSymmetric", "NOT_SYMMETRIC", "transport")

# subspace
ConditionViolated = _make("ConditionViolated", "CONDITION_VIOLATED", "subspace")
RankDeficient = _make("RankDeficient", "RANK_DEFICIENT", "subspace")

# stone
OverlapVanishes = _make("OverlapVanishes", "OVERLAP_VANISHES", "stone")
SweepDiscontinuous = _make("SweepDiscontinuous", "SWEEP_DISCONTINUOUS", "stone")
DegenerateOnSurface = _make("DegenerateOnSurface", "DEGENERATE_ON_SURFACE", "stone")

# cli
ParseError = _make("ParseError", "PARSE_ERROR", "cli")

ALL = [
    NotOrthogonal, NegativeDeterminant, NumericalFailure, AngleNearPi, BranchAmbiguous,
    RefinementUnavailable, MaxDepthExceeded, DegenerateSamples, NotQuantized,
    WrongDimension, DimensionMismatch, NotClosed, StepTooLarge, NotScalar,
    DegenerateOnLoop, OverlapTooWeak, NotSignedPermutation, PermutedClosure, NotSymmetric,
    ConditionViolated, RankDeficient, OverlapVanishes, SweepDiscontinuous,
    DegenerateOnSurface, ParseError,
]
