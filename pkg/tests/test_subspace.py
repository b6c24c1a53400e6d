import numpy as np
import pytest
from hypothesis import given, strategies as st

from sodegen import errors, subspace
from sodegen.config import DEFAULT
from sodegen.models import embedded_block
from sodegen.subspace import (
    ReferenceSubspace, gram_schmidt_frame, gram_schmidt_frames, overlap_bound, project_and_check,
    subspace_degeneracy_test,
)
from sodegen.transport import ParameterLoop, run_degeneracy_test

from conftest import random_dependent_set

REF = ReferenceSubspace.coordinates(10, 3)
LOOP = ParameterLoop.circle((0, 0), 1, 200)

# frozen from the seed-0 coupling (coupling_norm 14) on the unit circle, 200 intervals
GOLDEN_MIN_OVERLAP = 0.986265326087744
# bracket of the first eps at which min overlap <= 2/3 + margin
EPS_PASS, EPS_FAIL = 0.8940241836928633, 0.8940241836932726


def direct_min_overlap(h, loop, ref, p):
    """Squared projection norms straight from eigh, no transport."""
    worst = np.inf
    for t in loop.params():
        _, V = np.linalg.eigh(h(loop.point(t)))
        c = ref.basis.T @ V[:, :p]
        worst = min(worst, float((c * c).sum(axis=0).min()))
    return worst


def test_reference_validation():
    with pytest.raises(ValueError):
        ReferenceSubspace(np.ones((4, 2)))
    with pytest.raises(ValueError):
        ReferenceSubspace(np.eye(3))
    ref = ReferenceSubspace.coordinates(5, 2)
    assert (ref.n, ref.p) == (5, 2)
    np.testing.assert_array_equal(ref.projector, np.diag([1, 1, 0, 0, 0.0]))


def test_overlap_bound_values():
    assert overlap_bound(2) == 0.5
    assert overlap_bound(3) == pytest.approx(2 / 3)


def test_frames_inside_subspace():
    frames = np.eye(5)[None, :, :3]
    d = project_and_check(frames, ReferenceSubspace.coordinates(5, 3))
    np.testing.assert_array_equal(d.overlaps, [[1.0, 1.0, 1.0]])
    assert d.condition_met and d.min_singular == pytest.approx(1.0)


def test_overlap_at_bound_fails():
    s = np.sqrt(0.5)
    F = np.zeros((4, 2))
    F[0, 0] = F[2, 0] = s
    F[1, 1] = F[3, 1] = s
    ref = ReferenceSubspace.coordinates(4, 2)
    d = project_and_check(F, ref, strict=False)
    assert not d.condition_met and d.min_overlap == pytest.approx(0.5)
    with pytest.raises(errors.ConditionViolated) as info:
        project_and_check(F, ref)
    assert info.value.context["bound"] == 0.5


def test_gram_schmidt_simple():
    phi = np.array([[1.0, np.sqrt(0.5)], [0.0, np.sqrt(0.5)]])
    np.testing.assert_allclose(gram_schmidt_frame(phi), np.eye(2), atol=1e-15)
    flipped = gram_schmidt_frame(np.array([[1.0, 0.0], [0.0, -2.0]]))
    np.testing.assert_allclose(flipped, np.eye(2))


def test_gram_schmidt_dependent():
    with pytest.raises(errors.RankDeficient):
        gram_schmidt_frame(np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_gram_schmidt_orientation_fixed_on_first():
    a = np.diag([1.0, -1.0])
    out = gram_schmidt_frames([a, a])
    assert np.all(np.linalg.det(out) > 0)
    with pytest.raises(errors.RankDeficient):
        gram_schmidt_frames([np.eye(2), a])


def test_rank_guard_fires_on_absurd_tolerance(monkeypatch):
    # only an impossible sigma_min can trip the guard; counted separately
    monkeypatch.setattr(subspace, "RANK_GUARD", {"checked": 0, "fired": 0})
    with pytest.raises(errors.RankDeficient):
        project_and_check(np.eye(4)[None, :, :2], ReferenceSubspace.coordinates(4, 2),
                          DEFAULT.replace(sigma_min=2.0))
    assert subspace.RANK_GUARD["fired"] == 1


def test_embedded_block_golden():
    h = embedded_block(10, 0.05)
    report = subspace_degeneracy_test(h, LOOP, REF)
    assert report.verdict == "DEGENERACY_CERTIFIED" and report.reason == "nontrivial_loop"
    assert report.invariants["k_list"] == [1]
    d = report.diagnostics
    assert d["min_overlap"] == pytest.approx(GOLDEN_MIN_OVERLAP, abs=1e-12)
    assert d["min_overlap"] == pytest.approx(direct_min_overlap(h, LOOP, REF, 3), abs=1e-12)
    assert d["overlap_margin"] == pytest.approx(GOLDEN_MIN_OVERLAP - 2 / 3, abs=1e-12)
    assert report.surface_condition_checked == "loop_only"


def test_embedded_block_agrees_with_full_test():
    h = embedded_block(10, 0.05)
    full = run_degeneracy_test(h, LOOP)
    proj = subspace_degeneracy_test(h, LOOP, REF)
    assert full.verdict == proj.verdict
    assert full.invariants["h"] % 2 == proj.invariants["h"] % 2


def test_condition_threshold():
    ok = subspace_degeneracy_test(embedded_block(10, EPS_PASS), LOOP, REF)
    assert ok.certified and 0 < ok.diagnostics["overlap_margin"] - DEFAULT.margin < 1e-9
    with pytest.raises(errors.ConditionViolated):
        subspace_degeneracy_test(embedded_block(10, EPS_FAIL), LOOP, REF)
    with pytest.raises(errors.ConditionViolated):
        subspace_degeneracy_test(embedded_block(10, 0.95), LOOP, REF)


def test_interior_samples():
    g = np.random.default_rng(0)
    r = np.sqrt(g.uniform(0.01, 1, 50))
    a = g.uniform(0, 2 * np.pi, 50)
    pts = np.stack([r * np.cos(a), r * np.sin(a)], 1)
    report = subspace_degeneracy_test(embedded_block(10, 0.05), LOOP, REF, interior_points=pts)
    assert report.surface_condition_checked == "loop_and_interior_samples"
    assert report.diagnostics["interior_min_overlap"] > 2 / 3


def test_subspace_requires_p_bands():
    with pytest.raises(ValueError):
        subspace_degeneracy_test(embedded_block(10, 0.05), LOOP, REF, bands=[0, 1])
    with pytest.raises(ValueError):
        subspace_degeneracy_test(embedded_block(10, 0.05), LOOP, ReferenceSubspace.coordinates(10, 1))


@pytest.mark.parametrize("eps", [0.0, 0.1, 0.2, 0.3, 0.4])
def test_full_test_stable_in_eps(eps):
    report = run_degeneracy_test(embedded_block(10, eps), LOOP)
    assert report.invariants["k_list"] == [1, 0, 0, 0, 0]


def test_min_overlap_decreases_continuously():
    # stays below the narrow avoided crossing of bands 1 and 2 near eps = 0.55
    eps = np.linspace(0.0, 0.45, 10)
    m = [subspace_degeneracy_test(embedded_block(10, e), LOOP, REF).diagnostics["min_overlap"]
         for e in eps]
    assert m[0] == pytest.approx(1.0)
    assert np.all(np.diff(m) < 0) and np.all(np.abs(np.diff(m)) < 0.1)


def test_narrow_avoided_crossing_reported_as_permuted():
    with pytest.raises(errors.PermutedClosure):
        subspace_degeneracy_test(embedded_block(10, 0.55), LOOP, REF)


@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_dependent_sets_have_large_dot(p, seed):
    V = random_dependent_set(np.random.default_rng(seed), p)
    G = np.abs(V.T @ V) - np.eye(p)
    assert G.max() >= 1.0 / (p - 1) - 1e-12


@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_condition_implies_independence(p, seed):
    g = np.random.default_rng(seed)
    n = p + 3
    ref = ReferenceSubspace.coordinates(n, p)
    # orthonormal frames tilted out of the subspace by a random amount
    X = np.linalg.qr(np.eye(n)[:, :p] + g.uniform(0, 0.6) * g.standard_normal((n, p)))[0]
    d = project_and_check(X, ref, strict=False)
    if d.condition_met:
        assert d.min_singular > 1e-8
