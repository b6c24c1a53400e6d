"""Randomized loop geometries around conical intersections and their analytic verdicts."""

import numpy as np

from sodegen.models import ci_frame_turns
from sodegen.transport import ParameterLoop


def random_geometry(g, centers, spread=3.0, clearance=0.1):
    """Random ellipse or polygon whose curve stays ``clearance`` away from every center."""
    while True:
        if g.random() < 0.5:
            loop = ParameterLoop.ellipse(g.uniform(-spread / 2, spread / 2, 2),
                                         g.uniform(0.3, spread), g.uniform(0.3, spread),
                                         g.uniform(0, np.pi))
        else:
            m = int(g.integers(3, 8))
            ang = np.sort(g.uniform(0, 2 * np.pi, m))
            rad = g.uniform(0.4, spread, m)
            c = g.uniform(-spread / 2, spread / 2, 2)
            loop = ParameterLoop.polygon(c + np.stack([rad * np.cos(ang), rad * np.sin(ang)], 1))
        pts = np.array([loop.point(t) for t in np.linspace(0, 1, 2001)])
        if all(np.linalg.norm(pts - c, axis=1).min() > clearance for c in centers):
            return loop


def predicted(loop, centers):
    """(verdict, reason, winding or None) implied by the half-turns of the eigenframe."""
    pts = np.array([loop.point(t) for t in np.linspace(0, 1, 4001)[:-1]])
    turns = ci_frame_turns(pts, centers)
    if turns % 2:
        return "DEGENERACY_CERTIFIED", "sign_reversal", None
    if turns:
        return "DEGENERACY_CERTIFIED", "nonzero_winding", turns // 2
    return "INCONCLUSIVE", "none", 0
