"""Skew-symmetric and special-orthogonal matrix algebra.

Conventions
-----------
A plane block with angle ``a`` on the oriented orthonormal pair ``(u, v)`` is
the generator ``a * (u v^T - v u^T)``; in the plane basis it reads
``[[0, a], [-a, 0]]``.  Its exponential rotates ``u -> cos(a) u - sin(a) v``.
Every decomposition in this module uses that orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    AngleNearPi,
    BranchAmbiguous,
    NegativeDeterminant,
    NotOrthogonal,
    NumericalFailure,
)

TWO_PI = 2.0 * np.pi

# eigenvalue clusters of -A^2 (or of the symmetric part of R) closer than
# this (relative) are processed as one invariant subspace
_CLUSTER_REL = 1e-6
# angles closer than this are treated as exactly degenerate
_DEGENERATE_REL = 1e-10
# angles below this are treated as zero
_ZERO_REL = 1e-12
# rotation angles this close to 0 or pi join the +1 / -1 eigenspaces
_FIXED_ANGLE = 1e-9


def skew(M) -> np.ndarray:
    """Antisymmetric part of ``M``."""
    M = np.asarray(M, dtype=float)
    return 0.5 * (M - M.T)


def generator(u, v) -> np.ndarray:
    """Unit-angle plane generator ``u v^T - v u^T``."""
    return np.outer(u, v) - np.outer(v, u)


def validate_so(M, config: Tolerances = DEFAULT) -> np.ndarray:
    """Return a read-only copy of ``M`` after checking it lies in SO(n)."""
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotOrthogonal(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if n < 1 or not np.all(np.isfinite(M)):
        raise NotOrthogonal("matrix is empty or has non-finite entries")
    err = np.abs(M.T @ M - np.eye(n)).max()
    if err > config.tol_orth:
        raise NotOrthogonal(f"|M^T M - I|_max = {err:.3e} exceeds {config.tol_orth:g}",
                            residual=float(err))
    det = np.linalg.det(M)
    if abs(det + 1.0) <= config.tol_det:
        raise NegativeDeterminant("orthogonal matrix with determinant -1")
    if abs(det - 1.0) > config.tol_det:
        raise NotOrthogonal(f"determinant {det:.12g} is not +1", det=float(det))
    M.setflags(write=False)
    return M


def validate_skew(A, tol: float = 1e-10) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if np.abs(A + A.T).max() > tol * max(1.0, np.abs(A).max()):
        raise ValueError("matrix is not antisymmetric")
    return skew(A)


@dataclass(frozen=True)
class CanonicalSkewForm:
    """``A = basis @ D(angles) @ basis.T`` with 2x2 blocks ``[[0, a], [-a, 0]]``.

    Angles are sorted in descending order.  The basis always has determinant
    +1; when that is impossible with nonnegative angles (even n, no zero
    angle, negative Pfaffian) the last, smallest angle carries the sign.
    """

    basis: np.ndarray
    angles: np.ndarray
    has_zero_block: bool
    n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", self.basis.shape[0])

    def block_matrix(self) -> np.ndarray:
        return block_diagonal(self.angles, self.n)

    def reconstruct(self) -> np.ndarray:
        return self.basis @ self.block_matrix() @ self.basis.T

    def planes(self):
        for i, a in enumerate(self.angles):
            yield self.basis[:, 2 * i], self.basis[:, 2 * i + 1], float(a)


def block_diagonal(angles, n: int) -> np.ndarray:
    """Block matrix ``[a_1, ..., a_m]`` padded with zeros to size n."""
    D = np.zeros((n, n))
    for i, a in enumerate(angles):
        D[2 * i, 2 * i + 1] = a
        D[2 * i + 1, 2 * i] = -a
    return D


# ---------------------------------------------------------------------------
# subspace helpers


def _index_vector(P: np.ndarray) -> np.ndarray:
    """Projection of the lowest-index coordinate axis with a sizeable shadow in span(P)."""
    n, d = P.shape
    r = np.einsum("ij,ij->i", P, P)
    j = int(np.argmax(r >= 0.5 * d / n))
    u = P @ P[j]
    return u / np.linalg.norm(u)


def _complement(P: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the part of span(P) orthogonal to the columns of V."""
    k = P.shape[1] - V.shape[1]
    if k <= 0:
        return P[:, :0]
    Q = P - V @ (V.T @ P)
    U, _, _ = np.linalg.svd(Q, full_matrices=False)
    return U[:, :k]


def _planes_in_span(P: np.ndarray, A: np.ndarray, thresh: float):
    """Split span(P) into oriented planes, picking axes in coordinate-index order.

    Used on subspaces where ``A`` acts with a single angle (possibly zero), so
    any split is exact; the index rule only makes the choice deterministic.
    Returns the planes and the leftover (0 or 1 column) basis.
    """
    planes = []
    while P.shape[1] >= 2:
        u = _index_vector(P)
        w = P @ (P.T @ (-(A @ u)))
        w -= u * (u @ w)
        nw = np.linalg.norm(w)
        if nw > thresh:
            v = w / nw
        else:
            v = _index_vector(_complement(P, u[:, None]))
            v -= u * (u @ v)
            v /= np.linalg.norm(v)
        planes.append((u, v))
        P = _complement(P, np.column_stack([u, v]))
    return planes, P


def _clusters(values: np.ndarray, tol: float):
    """Index runs of a sorted array whose consecutive gaps are <= tol."""
    out, start = [], 0
    for i in range(1, len(values)):
        if abs(values[i] - values[i - 1]) > tol:
            out.append(slice(start, i))
            start = i
    out.append(slice(start, len(values)))
    return out


def _eigh(M):
    try:
        return np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolve failed: {exc}") from exc


# ---------------------------------------------------------------------------
# canonical form of skew matrices


def skew_canonical_form(A, config: Tolerances = DEFAULT) -> CanonicalSkewForm:
    """Block-diagonalize an antisymmetric matrix.

    The eigenspaces of the positive semidefinite matrix ``-A @ A`` give the
    invariant planes.  Clusters of nearly equal eigenvalues are resolved by a
    Hermitian eigensolve of ``1j * A`` restricted to the cluster, and exactly
    degenerate angles are split into planes in coordinate-index order.
    """
    A = skew(A)
    n = A.shape[0]
    scale = max(1.0, float(np.abs(A).max()) if n else 1.0)
    S = -(A @ A)
    lam, V = _eigh(0.5 * (S + S.T))
    lam, V = lam[::-1], V[:, ::-1]

    planes = []  # (u, v, angle)
    kernel = []
    for sl in _clusters(lam, _CLUSTER_REL * scale * scale):
        W = V[:, sl]
        m = W.shape[1]
        if m == 1:
            kernel.append(W)
            continue
        B = W.T @ A @ W
        mu, X = _eigh(1j * (0.5 * (B - B.T)))
        pos = np.nonzero(mu > _ZERO_REL * scale)[0][::-1]
        if len(pos) == 0:
            kernel.append(W)
            continue
        used = []
        for grp in _clusters(mu[pos], _DEGENERATE_REL * scale):
            idx = pos[grp]
            Y = W @ X[:, idx]
            span = np.column_stack([Y.real, -Y.imag]) * np.sqrt(2.0)
            span, _ = np.linalg.qr(span)
            for u, v in _planes_in_span(span, A, 0.5 * mu[idx].min())[0]:
                a = float(u @ A @ v)
                if a < 0:
                    v, a = -v, -a
                planes.append((u, v, a))
                used += [u, v]
        if len(used) < m:
            kernel.append(_complement(W, np.column_stack(used)))

    if kernel:
        K = np.column_stack(kernel)
        zero_planes, rest = _planes_in_span(K, A, 1e-9 * scale)
        for u, v in zero_planes:
            a = float(u @ A @ v)
            if a < 0:
                v, a = -v, -a
            planes.append((u, v, a))
    else:
        rest = np.zeros((n, 0))

    planes.sort(key=lambda p: -p[2])
    cols = []
    for u, v, _ in planes:
        cols += [u, v]
    cols += [rest[:, i] for i in range(rest.shape[1])]
    if len(cols) != n or len(planes) != n // 2:
        raise NumericalFailure("canonical form lost dimensions",
                               planes=len(planes), n=n)
    R = np.column_stack(cols) if n else np.zeros((0, 0))
    angles = np.array([p[2] for p in planes])
    if n and np.linalg.det(R) < 0:
        if n % 2:
            R[:, -1] *= -1.0
        else:
            # flip the last plane; its (smallest) angle changes sign
            R[:, -1] *= -1.0
            angles[-1] = -angles[-1]
    return CanonicalSkewForm(R, angles, bool(n % 2))


def skew_exp(A, config: Tolerances = DEFAULT) -> np.ndarray:
    """Exact matrix exponential of an antisymmetric matrix via its canonical form."""
    form = skew_canonical_form(A, config)
    n = form.n
    out = np.zeros((n, n))
    for u, v, a in form.planes():
        c, s = np.cos(a), np.sin(a)
        out += c * (np.outer(u, u) + np.outer(v, v)) + s * generator(u, v)
    if form.has_zero_block:
        w = form.basis[:, -1]
        out += np.outer(w, w)
    return out


# ---------------------------------------------------------------------------
# rotations


@dataclass
class RotationSplit:
    """Invariant decomposition of a rotation.

    ``planes`` holds ``(u, v, theta)`` with ``theta`` strictly inside (0, pi);
    ``fixed`` spans the +1 eigenspace and ``flipped`` the -1 eigenspace.
    """

    planes: list
    fixed: np.ndarray
    flipped: np.ndarray

    def reconstruct(self) -> np.ndarray:
        n = self.fixed.shape[0]
        out = self.fixed @ self.fixed.T - self.flipped @ self.flipped.T
        for u, v, t in self.planes:
            out = out + np.cos(t) * (np.outer(u, u) + np.outer(v, v)) + np.sin(t) * generator(u, v)
        return out if n else np.zeros((0, 0))


def _plane_angle(R, u, v):
    t = float(np.arctan2(u @ R @ v, u @ R @ u))
    if t < 0:
        return u, -v, -t
    return u, v, t


def rotation_split(R) -> RotationSplit:
    """Decompose ``R`` in SO(n) into rotation planes and its +-1 eigenspaces.

    The symmetric part ``(R + R^T)/2`` separates planes by cosine; clusters of
    nearly equal cosines are resolved through the Cayley transform of the
    restricted rotation, whose canonical form orders angles monotonically.
    """
    R = np.asarray(R, dtype=float)
    n = R.shape[0]
    c, V = _eigh(0.5 * (R + R.T))
    planes, fixed, flipped = [], [], []

    def assign(vecs, sign):
        (fixed if sign > 0 else flipped).extend(vecs)

    def add_plane(u, v):
        u, v, t = _plane_angle(R, u, v)
        if t <= _FIXED_ANGLE:
            assign([u, v], +1)
        elif t >= np.pi - _FIXED_ANGLE:
            assign([u, v], -1)
        else:
            planes.append((u, v, t))

    for sl in _clusters(c, _CLUSTER_REL):
        W = V[:, sl]
        m = W.shape[1]
        cbar = float(np.mean(c[sl]))
        if m == 1:
            if abs(abs(cbar) - 1.0) > 1e-6:
                raise NumericalFailure("unpaired rotation eigenvalue; input not orthogonal?",
                                       cosine=cbar)
            assign([W[:, 0]], 1 if cbar > 0 else -1)
        elif m == 2 and abs(abs(cbar) - 1.0) > 1e-3:
            add_plane(W[:, 0], W[:, 1])
        else:
            sigma = 1.0 if cbar >= 0 else -1.0
            M = sigma * (W.T @ R @ W)
            Im = np.eye(m)
            try:
                B = np.linalg.solve((M + Im).T, (M - Im).T).T
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure(f"Cayley transform failed: {exc}") from exc
            form = skew_canonical_form(skew(B))
            for a, b, beta in form.planes():
                if abs(beta) <= _ZERO_REL:
                    assign([W @ a, W @ b], sigma)
                else:
                    add_plane(W @ a, W @ b)
            if form.has_zero_block:
                assign([W @ form.basis[:, -1]], sigma)

    def stack(vs):
        return np.column_stack(vs) if vs else np.zeros((n, 0))

    return RotationSplit(planes, stack(fixed), stack(flipped))


def rotation_angles(R) -> np.ndarray:
    """Rotation angles of ``R`` in [0, pi], descending, padded with zeros/pis."""
    split = rotation_split(R)
    ang = [t for *_, t in split.planes]
    ang += [np.pi] * (split.flipped.shape[1] // 2)
    ang += [0.0] * ((np.asarray(R).shape[0] // 2) - len(ang))
    return np.sort(np.array(ang))[::-1]


def principal_log(R, config: Tolerances = DEFAULT) -> np.ndarray:
    """Logarithm with all rotation angles in [0, pi).

    Raises AngleNearPi when some angle lies within ``config.tol_pi`` of pi.
    """
    R = np.asarray(R, dtype=float)
    split = rotation_split(R)
    worst = max([t for *_, t in split.planes], default=0.0)
    if split.flipped.shape[1] or worst > np.pi - config.tol_pi:
        raise AngleNearPi("rotation angle at pi; principal logarithm is ill-conditioned",
                          angle=float(np.pi if split.flipped.shape[1] else worst))
    out = np.zeros_like(R)
    for u, v, t in split.planes:
        out += t * generator(u, v)
    return out


def _nearest_branch(value: float, offset: float, tie_tol: float) -> float:
    """Element of ``offset + 2 pi Z`` nearest ``value``; raises on a near tie."""
    m = np.round((value - offset) / TWO_PI)
    best = offset + TWO_PI * m
    d1 = abs(value - best)
    d2 = TWO_PI - d1
    if abs(d2 - d1) < tie_tol:
        raise BranchAmbiguous("two logarithm branches are equally close to the guide",
                              value=float(value), candidate=float(best))
    return float(best)


def _quantized_block(P: np.ndarray, G: np.ndarray, offset: float, tie_tol: float) -> np.ndarray:
    """Logarithm of +-I on span(P) whose planes follow the guide restricted there."""
    Gw = skew(P.T @ G @ P)
    form = skew_canonical_form(Gw)
    out = np.zeros((P.shape[1], P.shape[1]))
    for a, b, g in form.planes():
        lam = _nearest_branch(g, offset, tie_tol)
        out += lam * generator(a, b)
    if form.has_zero_block and offset != 0.0:
        raise NumericalFailure("odd-dimensional -1 eigenspace")
    return P @ out @ P.T


def nearest_log(R, guide, config: Tolerances = DEFAULT, base=None, check: bool = True) -> np.ndarray:
    """Logarithm of ``R`` on the branch nearest ``guide``.

    Each rotation plane of ``R`` keeps its own orientation and receives the
    angle ``theta + 2 pi m`` closest to the guide's component on that plane.
    On the +1 and -1 eigenspaces, where the planes of ``R`` are not unique,
    the planes are taken from the guide restricted to the eigenspace and
    angles are rounded to the nearest allowed value.

    ``base`` is ``exp(guide)`` if already known; it is only used for the
    step-size precondition when ``check`` is true.
    """
    R = np.asarray(R, dtype=float)
    G = skew(guide)
    if check:
        E = skew_exp(G, config) if base is None else np.asarray(base, dtype=float)
        step = float(np.abs(R - E).max())
        if step > config.delta_step:
            raise BranchAmbiguous("target is too far from exp(guide)", step=step)
    split = rotation_split(R)
    out = np.zeros_like(R)
    for u, v, t in split.planes:
        g = float(u @ G @ v)
        out += _nearest_branch(g, t, config.tie_tol) * generator(u, v)
    if split.fixed.shape[1] >= 2:
        out += _quantized_block(split.fixed, G, 0.0, config.tie_tol)
    if split.flipped.shape[1]:
        out += _quantized_block(split.flipped, G, np.pi, config.tie_tol)
    return out
