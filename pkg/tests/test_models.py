import numpy as np
import pytest
from hypothesis import given, strategies as st

from sodegen.models import (
    JT_GENERATOR, ModelSpec, block_rotation, embedded_block, jt_frame, jt_frame_loop,
    jt_hamiltonian, point_winding, random_so_loop, spin_half_monopole, two_center_ci,
)
from sodegen.oracles import spin_lift_sign
from sodegen.skewlin import block_diagonal, skew_exp, validate_so


def test_jt_frame_closed_form():
    # entries of the closed-form frame at theta = pi / 2
    c = 0.5 * (1 + np.cos(np.pi / 2))
    F = jt_frame(np.pi / 2)
    assert F[0, 0] == pytest.approx(c)
    np.testing.assert_allclose(F, skew_exp(np.pi / 2 * JT_GENERATOR), atol=1e-14)
    np.testing.assert_allclose(jt_frame(2 * np.pi), np.eye(3), atol=1e-14)


def test_jt_loop_sampler_closes():
    loop = jt_frame_loop(50)
    np.testing.assert_array_equal(loop.samples[0], np.eye(3))
    np.testing.assert_array_equal(loop.samples[-1], np.eye(3))
    with pytest.raises(ValueError):
        jt_frame_loop(8)


def test_jt_hamiltonian_spectrum():
    H = jt_hamiltonian(0.6, 0.8)
    np.testing.assert_allclose(np.linalg.eigvalsh(H), [1, 2, 3], atol=1e-12)
    np.testing.assert_allclose(jt_hamiltonian(0.0, 0.0), np.zeros((3, 3)))


def test_two_center_zeros():
    for x in (1.0, -1.0):
        np.testing.assert_allclose(two_center_ci(x, 0.0), 0.0, atol=1e-15)
    assert np.abs(two_center_ci(0.0, 0.0)).max() > 0


def test_point_winding():
    ang = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    circle = np.stack([np.cos(ang), np.sin(ang)], 1)
    assert point_winding(circle, (0, 0)) == 1
    assert point_winding(circle[::-1], (0, 0)) == -1
    assert point_winding(circle, (3, 0)) == 0


def test_monopole_spectrum():
    q = np.array([0.3, -0.4, 1.2])
    np.testing.assert_allclose(np.linalg.eigvalsh(spin_half_monopole(q)),
                               [-np.linalg.norm(q), np.linalg.norm(q)])


def test_embedded_block_structure():
    h = embedded_block(10, 0.0)
    H = h((1.0, 0.0))
    np.testing.assert_allclose(np.linalg.eigvalsh(H), np.arange(1, 11), atol=1e-12)
    H1, H2 = embedded_block(10, 0.3)((0.2, 0.1)), embedded_block(10, 0.3)((0.2, 0.1))
    np.testing.assert_array_equal(H1, H2)
    for bad in ((3, 0.1), (10, 1.0), (10, -0.1)):
        with pytest.raises(ValueError):
            embedded_block(*bad)


def test_block_rotation_matches_exp():
    np.testing.assert_allclose(block_rotation([0.3, 1.1], 5),
                               skew_exp(block_diagonal([0.3, 1.1], 5)), atol=1e-14)


@given(st.integers(3, 8), st.integers(0, 10**6), st.sampled_from(["trivial", "nontrivial"]))
def test_random_loop_has_target_class(n, seed, target):
    loop = random_so_loop(n, seed, target, verify=False)
    for F in loop.samples[::7]:
        validate_so(F)
    np.testing.assert_array_equal(loop.samples[0], np.eye(n))
    assert spin_lift_sign(loop.refine(2)) == (-1 if target == "nontrivial" else 1)


def test_random_loop_arguments():
    with pytest.raises(ValueError):
        random_so_loop(2, 0)
    with pytest.raises(ValueError):
        random_so_loop(3, 0, "odd")
    random_so_loop(4, 1, "trivial", verify=True)


def test_model_spec():
    assert ModelSpec("two_center_ci", {"a": 2.0}).full_params() == {"a": 2.0, "scale": 1.0}
    with pytest.raises(ValueError):
        ModelSpec("nope")
    with pytest.raises(ValueError):
        ModelSpec("jt_t_tau2", {"x": 1})
    with pytest.raises(ValueError):
        ModelSpec("spin_half_monopole").sampler()
    h = ModelSpec("random_symmetric_family", {"n": 5}, seed=3).sampler()
    assert h((0.1, 0.2)).shape == (5, 5)
    assert ModelSpec("jt_t_tau2").hermitian()((1.0, 0.0)).dtype == complex
