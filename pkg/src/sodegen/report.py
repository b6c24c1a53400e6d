"""Machine-readable verdict record shared by every pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__

CERTIFIED = "DEGENERACY_CERTIFIED"
INCONCLUSIVE = "INCONCLUSIVE"
VERDICTS = (CERTIFIED, INCONCLUSIVE)
REASONS = ("sign_reversal", "nontrivial_loop", "nonzero_winding", "nonzero_stone_k", "none")


def plain(x):
    """Recursively convert numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return plain(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


@dataclass
class TestReport:
    verdict: str
    reason: str
    invariants: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    surface_condition_checked: Optional[str] = None
    config: dict = field(default_factory=dict)
    version: str = __version__
    # in-memory intermediates (transport result, lifted curve); never serialized
    details: dict = field(default_factory=dict, repr=False, compare=False)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.reason not in REASONS:
            raise ValueError(f"unknown reason {self.reason!r}")
        if (self.verdict == CERTIFIED) == (self.reason == "none"):
            raise ValueError("reason must be 'none' exactly when the verdict is inconclusive")

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "reason": self.reason,
            "invariants": plain(self.invariants),
            "diagnostics": plain(self.diagnostics),
            "config": plain(self.config),
            "version": self.version,
        }
        if self.surface_condition_checked is not None:
            out["surface_condition_checked"] = self.surface_condition_checked
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TestReport":
        return cls(d["verdict"], d["reason"], d.get("invariants", {}), d.get("diagnostics", {}),
                   d.get("surface_condition_checked"), d.get("config", {}),
                   d.get("version", __version__))

    @classmethod
    def from_json(cls, s: str) -> "TestReport":
        return cls.from_dict(json.loads(s))
