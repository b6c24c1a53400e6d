"""Model Hamiltonian families and frame-loop generators with known answers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .homotopy import FrameLoop
from .skewlin import skew_canonical_form
from .transport import HamiltonianSampler

SQRT2 = np.sqrt(2.0)
# unit-speed generator of the Jahn-Teller frame loop: axis (-1, 0, 1)/sqrt(2)
JT_GENERATOR = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 1.0], [0.0, -1.0, 0.0]]) / SQRT2
PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def rng(seed: int) -> np.random.Generator:
    """Counter-based generator so seeded families reproduce across platforms."""
    return np.random.Generator(np.random.Philox(seed))


# ---------------------------------------------------------------------------
# T x tau_2 Jahn-Teller loop in SO(3)


def jt_frame(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        [0.5 * (c + 1), -s / SQRT2, 0.5 * (c - 1)],
        [s / SQRT2, c, s / SQRT2],
        [0.5 * (c - 1), -s / SQRT2, 0.5 * (c + 1)],
    ])


def jt_lift(theta: float) -> np.ndarray:
    """Closed-form logarithm of ``jt_frame(theta)`` continuous in theta."""
    return theta * JT_GENERATOR


def jt_frame_loop(num_samples: int = 200) -> FrameLoop:
    """Uniformly sampled loop ``theta -> jt_frame(theta)``, theta in [0, 2 pi]."""
    if num_samples < 16:
        raise ValueError("num_samples must be at least 16")

    def sampler(t):
        return jt_frame(2 * np.pi * t) if 0.0 < t < 1.0 else np.eye(3)

    return FrameLoop.from_function(sampler, num_samples)


def jt_hamiltonian(x: float, y: float, levels=(1.0, 2.0, 3.0)) -> np.ndarray:
    """3x3 family whose eigenframe around the origin is the Jahn-Teller loop.

    ``H = r F(theta) diag(levels) F(theta)^T`` with (r, theta) polar
    coordinates; all three levels meet at the origin.
    """
    r = np.hypot(x, y)
    F = jt_frame(np.arctan2(y, x))
    return r * (F * np.asarray(levels)) @ F.T


# ---------------------------------------------------------------------------
# two-level conical intersections


def two_level_ci(x: float, y: float) -> np.ndarray:
    return np.array([[x, y], [y, -x]], dtype=float)


def two_center_ci(x: float, y: float, a: float = 1.0, scale: float = 1.0) -> np.ndarray:
    """Two conical intersections at (+-a, 0): ``f + i g = scale ((x-a) + i y)((x+a) + i y)``."""
    f = scale * (x * x - a * a - y * y)
    g = scale * 2.0 * x * y
    return np.array([[f, g], [g, -f]], dtype=float)


def point_winding(points, center) -> int:
    """Winding number of a closed planar polyline around ``center`` (angle sum)."""
    P = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    ang = np.arctan2(P[:, 1], P[:, 0])
    d = np.diff(np.append(ang, ang[0]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return int(np.rint(d.sum() / (2 * np.pi)))


def ci_frame_turns(points, centers) -> int:
    """Half-turns of the eigenframe of a CI family around a loop.

    The eigenvectors rotate by half the argument of ``f + i g``, and that
    argument winds once around each simple zero, so the frame turns by pi
    times the summed winding numbers about the centers.
    """
    return sum(point_winding(points, c) for c in centers)


# ---------------------------------------------------------------------------
# embedded block


@dataclass(frozen=True)
class EmbeddedBlock:
    """Jahn-Teller 3x3 block coupled weakly to a gapped remainder."""

    n: int
    eps: float
    rest: np.ndarray
    C0: np.ndarray
    Cx: np.ndarray
    Cy: np.ndarray

    def coupling(self, x, y) -> np.ndarray:
        return self.C0 + x * self.Cx + y * self.Cy

    def __call__(self, q) -> np.ndarray:
        x, y = float(q[0]), float(q[1])
        H = np.zeros((self.n, self.n))
        H[:3, :3] = jt_hamiltonian(x, y)
        H[3:, 3:] = self.rest
        C = self.eps * self.coupling(x, y)
        H[:3, 3:] = C
        H[3:, :3] = C.T
        return H


def embedded_block(n: int = 10, eps: float = 0.05, seed: int = 0,
                   coupling_norm: float = 14.0) -> HamiltonianSampler:
    """n x n family containing the Jahn-Teller block, coupled with strength ``eps``.

    The remainder has distinct eigenvalues 4, 5, ... (gap >= 1 above
    the block's levels on the unit circle).  The coupling is affine in (x, y)
    with random coefficients scaled so ``|C(Q)|_2 <= coupling_norm`` on the
    unit disc.
    """
    if n < 4:
        raise ValueError("embedded_block needs n >= 4")
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    g = rng(seed)
    m = n - 3
    Qr, _ = np.linalg.qr(g.standard_normal((m, m)))
    rest = (Qr * (4.0 + np.arange(m))) @ Qr.T
    C0, Cx, Cy = (g.standard_normal((3, m)) for _ in range(3))
    bound = sum(np.linalg.norm(C, 2) for C in (C0, Cx, Cy))
    s = coupling_norm / bound
    model = EmbeddedBlock(n, eps, 0.5 * (rest + rest.T), s * C0, s * Cx, s * Cy)
    return HamiltonianSampler(n, model, f"embedded_block(n={n},eps={eps},seed={seed})")


def spin_half_monopole(Q) -> np.ndarray:
    """``H = Q . sigma``; the two levels +-|Q| touch only at the origin."""
    Q = np.asarray(Q, dtype=float)
    return np.einsum("i,ijk->jk", Q, PAULI)


def random_symmetric_family(n: int, seed: int = 0):
    """``H(x, y) = A0 + x A1 + y A2`` with seeded random symmetric coefficients."""
    g = rng(seed)
    A = [g.standard_normal((n, n)) for _ in range(3)]
    A = [0.5 * (M + M.T) for M in A]

    def func(q):
        return A[0] + q[0] * A[1] + q[1] * A[2]

    return HamiltonianSampler(n, func, f"random_symmetric_family(n={n},seed={seed})")


# ---------------------------------------------------------------------------
# random loops with a prescribed class


def _unit_skew(g: np.random.Generator, n: int) -> np.ndarray:
    X = g.standard_normal((n, n))
    X = X - X.T
    return X / np.abs(X).max()


def _random_rotation(g: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(g.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1.0
    return Q


def block_rotation(angles, n: int) -> np.ndarray:
    """``exp`` of ``block_diagonal(angles, n)`` written out block by block."""
    F = np.eye(n)
    for i, a in enumerate(angles):
        c, s = np.cos(a), np.sin(a)
        F[2 * i:2 * i + 2, 2 * i:2 * i + 2] = [[c, s], [-s, c]]
    return F


@dataclass(frozen=True)
class RandomLoop:
    """``F(t) = Q exp(2 pi t Y) Q^T prod_j exp(a_j sin(2 pi f_j t) X_j)``.

    The wiggle factors are contractible (each is a closed path in a
    one-parameter subgroup that retracts along its scalar coefficient);
    the class is carried by the block generator ``Y`` with integer turns.
    Each ``X_j`` is stored by its canonical form so exponentials are exact.
    """

    n: int
    Q: np.ndarray
    turns: tuple
    gen_forms: tuple
    amps: tuple
    freqs: tuple
    target: str

    def __call__(self, t: float) -> np.ndarray:
        if t <= 0.0 or t >= 1.0:
            return np.eye(self.n)
        F = self.Q @ block_rotation([2 * np.pi * t * m for m in self.turns], self.n) @ self.Q.T
        for form, a, f in zip(self.gen_forms, self.amps, self.freqs):
            s = a * np.sin(2 * np.pi * f * t)
            F = F @ form.basis @ block_rotation(s * form.angles, self.n) @ form.basis.T
        return F


def random_so_loop(n: int, seed: int, target_class: str = "nontrivial", num_samples: int = 48,
                   verify: bool = True) -> FrameLoop:
    """Smooth random loop based at I whose class is fixed by construction.

    The block turns ``m_i`` have odd sum for ``nontrivial`` and even sum for
    ``trivial``.  With ``verify`` the class is confirmed by the Spin(n)
    oracle before returning.
    """
    if n < 3:
        raise ValueError("random_so_loop needs n >= 3")
    if target_class not in ("trivial", "nontrivial"):
        raise ValueError("target_class must be 'trivial' or 'nontrivial'")
    g = rng(seed)
    nb = n // 2
    while True:
        turns = g.integers(-1, 2, size=nb)
        if (int(np.abs(turns).sum()) % 2 == 1) == (target_class == "nontrivial"):
            break
    k = int(g.integers(1, 4))
    gens = tuple(skew_canonical_form(_unit_skew(g, n)) for _ in range(k))
    amps = tuple(float(a) for a in g.uniform(0.2, 1.2, size=k))
    freqs = tuple(int(f) for f in g.integers(1, 3, size=k))
    model = RandomLoop(n, _random_rotation(g, n), tuple(int(m) for m in turns), gens, amps, freqs,
                       target_class)
    loop = FrameLoop.from_function(model, num_samples)
    if verify:
        from .oracles import spin_lift_sign

        sign = spin_lift_sign(loop.refine(4))
        expect = -1 if target_class == "nontrivial" else 1
        if sign != expect:  # pragma: no cover - construction guarantees the class
            raise AssertionError(f"random loop class {sign} does not match target {expect}")
    return loop


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    NAMES = ("two_level_ci", "two_center_ci", "jt_t_tau2", "embedded_block",
             "random_symmetric_family", "spin_half_monopole")

    def __post_init__(self):
        if self.name not in self.NAMES:
            raise ValueError(f"unknown model {self.name!r}; choose from {', '.join(self.NAMES)}")
        allowed = _PARAMS[self.name]
        extra = set(self.params) - set(allowed)
        if extra:
            raise ValueError(f"unknown parameters for {self.name}: {sorted(extra)}")

    def full_params(self) -> dict:
        out = dict(_PARAMS[self.name])
        out.update(self.params)
        return out

    def sampler(self) -> HamiltonianSampler:
        """Real symmetric sampler (every model except the complex monopole)."""
        p = self.full_params()
        if self.name == "two_level_ci":
            return HamiltonianSampler(2, lambda q: two_level_ci(q[0], q[1]), self.name)
        if self.name == "two_center_ci":
            a, s = p["a"], p["scale"]
            return HamiltonianSampler(2, lambda q: two_center_ci(q[0], q[1], a, s), self.name)
        if self.name == "jt_t_tau2":
            return HamiltonianSampler(3, lambda q: jt_hamiltonian(q[0], q[1]), self.name)
        if self.name == "embedded_block":
            return embedded_block(int(p["n"]), p["eps"], self.seed, p["coupling_norm"])
        if self.name == "random_symmetric_family":
            return random_symmetric_family(int(p["n"]), self.seed)
        raise ValueError(f"{self.name} is complex Hermitian; use hermitian()")

    def hermitian(self):
        """Complex Hermitian evaluator for the Stone test."""
        if self.name == "spin_half_monopole":
            return spin_half_monopole
        real = self.sampler()
        return lambda q: real(q).astype(complex)


_PARAMS = {
    "two_level_ci": {},
    "two_center_ci": {"a": 1.0, "scale": 1.0},
    "jt_t_tau2": {},
    "embedded_block": {"n": 10, "eps": 0.05, "coupling_norm": 14.0},
    "random_symmetric_family": {"n": 4},
    "spin_half_monopole": {},
}
