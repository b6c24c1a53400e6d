import numpy as np
import pytest
from hypothesis import given, strategies as st

from sodegen import errors
from sodegen.config import DEFAULT
from sodegen.models import ModelSpec, jt_hamiltonian, random_symmetric_family
from sodegen.transport import (
    ClosureKind, HamiltonianSampler, ParameterLoop, SampledLoop, closure_classify,
    run_degeneracy_test, transport_frames,
)

from ci_oracle import predicted, random_geometry

TWO_LEVEL = ModelSpec("two_level_ci").sampler()
TWO_CENTER = ModelSpec("two_center_ci").sampler()
JT = ModelSpec("jt_t_tau2").sampler()


def test_sampler_rejects_asymmetric_and_complex():
    h = HamiltonianSampler(2, lambda q: np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(errors.NotSymmetric):
        h([0.0])
    h = HamiltonianSampler(2, lambda q: np.array([[0.0, 1j], [-1j, 0.0]]))
    with pytest.raises(errors.NotSymmetric):
        h([0.0])
    h = HamiltonianSampler(3, lambda q: np.eye(2))
    with pytest.raises(errors.NotSymmetric):
        h([0.0])


def test_from_table_missing_point():
    h = HamiltonianSampler.from_table([[0.0], [1.0]], [np.eye(2), np.eye(2)])
    np.testing.assert_array_equal(h([1.0]), np.eye(2))
    with pytest.raises(errors.RefinementUnavailable):
        h([0.5])


def test_parameter_loop_closes_exactly():
    loop = ParameterLoop.circle((0.3, -0.2), 1.7, 50)
    np.testing.assert_array_equal(loop.point(0.0), loop.point(1.0))
    assert len(loop.params()) == 51
    sq = ParameterLoop.polygon([(0, 0), (1, 0), (1, 1), (0, 1)], 40)
    np.testing.assert_allclose(sq.point(0.25), [1, 0])
    np.testing.assert_allclose(sq.point(0.625), [0.5, 1])


def test_parameter_loop_rejects_bad_vertices():
    with pytest.raises(ValueError):
        ParameterLoop(np.array([[0, 0], [1, 0], [1, 1]]))
    with pytest.raises(ValueError):
        ParameterLoop.polygon([(0, 0), (0, 0), (1, 1)])


def test_constant_family():
    h = HamiltonianSampler(3, lambda q: np.diag([1.0, 2.0, 3.0]))
    tr = transport_frames(h, ParameterLoop.circle((0, 0), 1, 20))
    np.testing.assert_allclose(tr.closure, np.eye(3), atol=1e-14)
    assert tr.min_gap == pytest.approx(1.0)
    report = run_degeneracy_test(h, ParameterLoop.circle((0, 0), 1, 20))
    assert report.verdict == "INCONCLUSIVE"
    assert report.invariants["k_list"] == [0]


def test_two_level_enclosing_origin_reverses_signs():
    report = run_degeneracy_test(TWO_LEVEL, ParameterLoop.circle((0, 0), 1))
    assert report.verdict == "DEGENERACY_CERTIFIED" and report.reason == "sign_reversal"
    assert report.invariants["closure_signs"] == [-1, -1]


def test_two_level_not_enclosing():
    report = run_degeneracy_test(TWO_LEVEL, ParameterLoop.circle((3, 0), 1))
    assert report.verdict == "INCONCLUSIVE" and report.invariants["winding"] == 0


def test_two_center_enclosing_both_has_winding():
    report = run_degeneracy_test(TWO_CENTER, ParameterLoop.circle((0, 0), 3))
    assert report.invariants["closure_kind"] == "closed_loop"
    assert report.invariants["closure_signs"] == [1, 1]
    assert report.reason == "nonzero_winding" and report.invariants["winding"] == 1


def test_two_center_enclosing_one_reverses_signs():
    report = run_degeneracy_test(TWO_CENTER, ParameterLoop.circle((1, 0), 0.5))
    assert report.reason == "sign_reversal"


def test_jt_loop_nontrivial():
    report = run_degeneracy_test(JT, ParameterLoop.circle((0, 0), 1))
    assert report.reason == "nontrivial_loop"
    assert report.invariants["k_list"] == [1]
    assert report.diagnostics["max_int_residual"] < 1e-6


def test_loop_through_degeneracy():
    with pytest.raises(errors.DegenerateOnLoop):
        run_degeneracy_test(TWO_LEVEL, ParameterLoop.circle((1, 0), 1, 200))


def test_weak_overlap_without_refinement():
    # quarter turns around the CI rotate the eigenvectors by 45 degrees
    loop = ParameterLoop.polygon([(1, 1), (-1, 1), (-1, -1), (1, -1)], 4, refinable=False)
    with pytest.raises(errors.RefinementUnavailable):
        transport_frames(TWO_LEVEL, loop)


def test_coarse_loop_is_refined():
    tr = transport_frames(TWO_LEVEL, ParameterLoop.circle((0, 0), 1, 4))
    assert tr.refinements > 0
    assert closure_classify(tr) is ClosureKind.SIGN_REVERSAL


def test_matrix_stream_via_sampled_loop():
    ts = np.linspace(0, 1, 201)
    mats = [jt_hamiltonian(np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)) for t in ts]
    mats[-1] = mats[0]
    h = HamiltonianSampler.from_table(ts, mats)
    report = run_degeneracy_test(h, SampledLoop(ts))
    assert report.reason == "nontrivial_loop"


@pytest.mark.parametrize("C,kind", [
    (np.eye(3), ClosureKind.CLOSED_LOOP),
    (np.diag([-1.0, -1.0, 1.0]), ClosureKind.SIGN_REVERSAL),
    (np.diag([1.0, 1.0, -1.0]), ClosureKind.SIGN_REVERSAL),
])
def test_closure_classify(C, kind):
    assert closure_classify(C) is kind


def test_closure_permuted_and_invalid():
    with pytest.raises(errors.PermutedClosure):
        closure_classify(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(errors.NotSignedPermutation):
        closure_classify(np.array([[0.6, 0.8], [-0.8, 0.6]]))
    with pytest.raises(errors.NotSignedPermutation):
        closure_classify(np.ones((2, 2)))


def test_band_selection():
    tr = transport_frames(JT, ParameterLoop.circle((0, 0), 1), bands=[0])
    assert tr.frames.shape[1:] == (3, 1)
    assert np.rint(tr.closure[0, 0]) == 1.0
    with pytest.raises(ValueError):
        transport_frames(JT, ParameterLoop.circle((0, 0), 1), bands=[3])


@given(st.integers(0, 10**6))
def test_random_ci_geometries_match_oracle(seed):
    g = np.random.default_rng(seed)
    centers = [(1.0, 0.0), (-1.0, 0.0)]
    loop = random_geometry(g, centers)
    verdict, reason, w = predicted(loop, centers)
    report = run_degeneracy_test(TWO_CENTER, loop)
    assert (report.verdict, report.reason) == (verdict, reason)
    if w is not None:
        assert report.invariants["winding"] == w


@given(st.integers(3, 5), st.integers(0, 10**4))
def test_transported_frames_are_orthonormal(n, seed):
    h = random_symmetric_family(n, seed)
    loop = ParameterLoop.circle((0, 0), 0.05, 40)
    try:
        tr = transport_frames(h, loop)
    except errors.DegenerateOnLoop:
        return
    F = tr.frames
    err = np.abs(np.einsum("kji,kjl->kil", F, F) - np.eye(n)).max()
    assert err < 1e-10
    assert np.all(np.linalg.det(F) > 0)
    # continuity: consecutive frames are close to each other in the matched basis
    assert np.all(np.einsum("kii->k", np.einsum("kji,kjl->kil", F[:-1], F[1:])) > 0)
