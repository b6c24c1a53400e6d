"""Brute-force Z2 oracles through the double cover Spin(n) -> SO(n).

A loop based at I lifts to a path of rotors starting at 1; the loop is
nontrivial exactly when the lifted path ends at -1.  These routines share no
code with the logarithm-lifting classifier: step logarithms come from a
real Schur decomposition and rotors live in a dense Clifford algebra.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import NotScalar, StepTooLarge

try:
    from ._clifford import geometric_product

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - exercised when the extension is not built
    from ._clifford_py import geometric_product

    BACKEND = "numpy"

log = logging.getLogger(__name__)

MAX_SPIN_DIM = 12
_SERIES_TERMS = 20
_SERIES_TOL = 1e-14
# bivectors are halved until their l1 norm is below this before the series
_SCALE_TO = 1.0


class Rotor:
    """Even multivector of Cl(n, 0) stored densely by blade bitmask."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        self.n = n
        if coeffs is None:
            coeffs = np.zeros(1 << n)
            coeffs[0] = 1.0
        self.coeffs = np.ascontiguousarray(coeffs, dtype=float)

    def __mul__(self, other: "Rotor") -> "Rotor":
        return Rotor(self.n, geometric_product(self.coeffs, other.coeffs))

    def norm(self) -> float:
        return float(np.sqrt(self.coeffs @ self.coeffs))

    def normalized(self) -> "Rotor":
        return Rotor(self.n, self.coeffs / self.norm())

    def reverse(self) -> "Rotor":
        grade = np.array([bin(i).count("1") for i in range(1 << self.n)])
        sign = np.where((grade * (grade - 1) // 2) % 2, -1.0, 1.0)
        return Rotor(self.n, self.coeffs * sign)

    @property
    def scalar(self) -> float:
        return float(self.coeffs[0])

    def max_nonscalar(self) -> float:
        return float(np.abs(self.coeffs[1:]).max()) if len(self.coeffs) > 1 else 0.0

    def to_matrix(self) -> np.ndarray:
        """Rotation ``x -> r x r~`` as an n x n matrix."""
        rev = self.reverse()
        M = np.zeros((self.n, self.n))
        for j in range(self.n):
            e = np.zeros(1 << self.n)
            e[1 << j] = 1.0
            img = geometric_product(geometric_product(self.coeffs, e), rev.coeffs)
            for i in range(self.n):
                M[i, j] = img[1 << i]
        return M


@lru_cache(maxsize=None)
def _pair_index(n: int):
    i, j = np.triu_indices(n, 1)
    return i, j, (1 << i) | (1 << j)


def bivector(L: np.ndarray) -> np.ndarray:
    """Bivector of a skew generator: ``e_i e_j`` (i < j) gets ``L[i, j] / 2``.

    With this sign, ``exp`` of the bivector sandwiches to ``expm(L)``.
    """
    n = L.shape[0]
    i, j, blade = _pair_index(n)
    out = np.zeros(1 << n)
    out[blade] = 0.5 * L[i, j]
    return out


def rotor_exp(B: np.ndarray, n: int) -> Rotor:
    """Exponential of a bivector by scaling and squaring of a truncated series."""
    nrm = float(np.abs(B).sum())
    s = 0
    while nrm > _SCALE_TO:
        nrm *= 0.5
        s += 1
    Bs = B / (1 << s)
    total = np.zeros(1 << n)
    total[0] = 1.0
    term = total.copy()
    for k in range(1, _SERIES_TERMS + 1):
        term = geometric_product(term, Bs) / k
        total += term
        if np.abs(term).max() < _SERIES_TOL:
            break
    for _ in range(s):
        total = geometric_product(total, total)
    return Rotor(n, total)


def step_log(D: np.ndarray) -> np.ndarray:
    """Logarithm of a rotation whose angles are all below pi/2, via real Schur form.

    For an orthogonal matrix the real Schur form is block diagonal with
    1x1 blocks (+1) and 2x2 rotation blocks; each block's angle is read off
    with ``atan2`` and the log is rotated back.
    """
    C = 0.5 * (D + D.T)
    if np.linalg.eigvalsh(C).min() <= 0.0:
        raise StepTooLarge("frame increment rotates by pi/2 or more")
    T, Z = scipy.linalg.schur(D, output="real")
    n = D.shape[0]
    Lt = np.zeros((n, n))
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 0.0:
            theta = np.arctan2(0.5 * (T[i + 1, i] - T[i, i + 1]), 0.5 * (T[i, i] + T[i + 1, i + 1]))
            Lt[i + 1, i], Lt[i, i + 1] = theta, -theta
            i += 2
        else:
            i += 1
    L = Z @ Lt @ Z.T
    return 0.5 * (L - L.T)


def _increments(loop):
    S = loop.samples
    for k in range(len(S) - 1):
        yield k, S[k + 1] @ S[k].T


def spin_lift_sign(loop, tol: float = 1e-6) -> int:
    """Endpoint sign of the Spin(n) lift of a loop based at I: +1 trivial, -1 nontrivial."""
    n = loop.n
    if n > MAX_SPIN_DIM:
        raise ValueError(f"Clifford oracle is capped at n = {MAX_SPIN_DIM}")
    if n < 2:
        return 1
    rho = Rotor(n)
    drift = 0.0
    for k, D in _increments(loop):
        try:
            L = step_log(D)
        except StepTooLarge as exc:
            exc.context["index"] = k
            raise
        rho = rotor_exp(bivector(L), n) * rho
        nrm = rho.norm()
        drift = max(drift, abs(nrm - 1.0))
        rho = Rotor(n, rho.coeffs / nrm)
    if drift > 1e-10:
        log.debug("rotor norm drift before renormalization: %.3e", drift)
    if rho.max_nonscalar() > tol or abs(abs(rho.scalar) - 1.0) > tol:
        raise NotScalar("lifted endpoint is not +-1; loop not closed or precision lost",
                        scalar=rho.scalar, residual=rho.max_nonscalar())
    return 1 if rho.scalar > 0 else -1


def matrix_to_quaternion(R: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a 3x3 rotation, up to sign."""
    m = R
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    cands = np.array([
        [1 + tr, m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]],
        [m[2, 1] - m[1, 2], 1 + m[0, 0] - m[1, 1] - m[2, 2], m[0, 1] + m[1, 0], m[0, 2] + m[2, 0]],
        [m[0, 2] - m[2, 0], m[0, 1] + m[1, 0], 1 - m[0, 0] + m[1, 1] - m[2, 2], m[1, 2] + m[2, 1]],
        [m[1, 0] - m[0, 1], m[0, 2] + m[2, 0], m[1, 2] + m[2, 1], 1 - m[0, 0] - m[1, 1] + m[2, 2]],
    ])
    i = int(np.argmax(np.diag(cands)))
    q = cands[i]
    return q / np.linalg.norm(q)


def quaternion_lift(loop) -> int:
    """Endpoint sign of the unit-quaternion lift of an SO(3) loop based at I."""
    if loop.n != 3:
        raise ValueError("quaternion_lift needs n = 3")
    q = np.array([1.0, 0.0, 0.0, 0.0])
    for k, F in enumerate(loop.samples[1:], start=1):
        p = matrix_to_quaternion(F)
        dot = float(p @ q)
        # |dot| = cos(half the increment angle); pi/2 increments give 1/sqrt(2)
        if abs(dot) <= np.sqrt(0.5):
            raise StepTooLarge("quaternion increment too large", index=k)
        q = p if dot > 0 else -p
    return 1 if q[0] > 0 else -1
