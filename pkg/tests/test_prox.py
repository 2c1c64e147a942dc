import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ontd.prox import (
    project_nonneg,
    project_sym_box_psd,
    project_sym_box_psd_literal,
    shrinkage,
    trace_shift,
)

from oracles import box_projection_by_search


def test_shrinkage_examples():
    assert shrinkage(np.array([1.5]), 1.0)[0] == 0.5
    assert shrinkage(np.array([-0.3]), 0.5)[0] == 0.0
    X = np.array([[-2.0, 0.1], [3.0, -0.0]])
    np.testing.assert_array_equal(shrinkage(X, 0.0), X)


def test_shrinkage_negative_tau():
    with pytest.raises(ValueError):
        shrinkage(np.ones(2), -1.0)


@settings(max_examples=200)
@given(st.floats(-50, 50), st.floats(0, 10))
def test_shrinkage_is_l1_prox(x, tau):
    z = shrinkage(np.array([x]), tau)[0]
    if z != 0:
        assert abs(z - x + tau * np.sign(z)) <= 1e-12 * max(1.0, abs(x))
    else:
        assert abs(x) <= tau


def test_project_nonneg_examples():
    np.testing.assert_array_equal(project_nonneg(-np.ones((2, 2))), np.zeros((2, 2)))
    P = np.array([[0.0, 1.0], [2.0, 3.0]])
    np.testing.assert_array_equal(project_nonneg(P), P)
    np.testing.assert_array_equal(project_nonneg(np.array([-1.0, 2.0])), [0.0, 2.0])


def test_box_projection_examples():
    np.testing.assert_allclose(project_sym_box_psd(np.eye(3)), np.eye(3), atol=1e-14)
    np.testing.assert_allclose(project_sym_box_psd(np.diag([2.0, -1.0])), np.diag([1.0, 0.0]), atol=1e-14)
    out = project_sym_box_psd(np.array([[0.0, 2.0], [0.0, 0.0]]))
    np.testing.assert_allclose(out, np.full((2, 2), 0.5), atol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_box_projection_matches_grid_search(seed):
    B = np.random.default_rng(seed).uniform(-2, 2, (2, 2))
    np.testing.assert_allclose(project_sym_box_psd(B), box_projection_by_search(B), atol=1e-4)


def test_box_projection_output_spectrum_and_idempotence():
    rng = np.random.default_rng(11)
    for _ in range(10):
        B = rng.standard_normal((6, 6)) * 2
        M = project_sym_box_psd(B)
        np.testing.assert_array_equal(M, M.T)
        w = np.linalg.eigvalsh(M)
        assert w.min() >= -1e-10 and w.max() <= 1 + 1e-10
        assert np.abs(project_sym_box_psd(M) - M).max() <= 1e-10


def test_literal_variant_caps_spectrum_at_half():
    rng = np.random.default_rng(12)
    B = rng.standard_normal((5, 5)) * 3
    w = np.linalg.eigvalsh(project_sym_box_psd_literal(B))
    assert w.min() >= -1e-12 and w.max() <= 0.5 + 1e-12
    # the identity is not a fixed point, so this is not the box projection
    assert np.abs(project_sym_box_psd_literal(np.eye(3)) - 0.5 * np.eye(3)).max() < 1e-14


def test_trace_shift_examples():
    np.testing.assert_array_equal(trace_shift(np.diag([3.0, 1.0]), 2), np.diag([2.0, 0.0]))
    np.testing.assert_array_equal(trace_shift(np.eye(3), 3), np.eye(3))


def test_trace_shift_random_and_idempotent():
    rng = np.random.default_rng(13)
    for J in range(1, 6):
        B = rng.standard_normal((7, 7))
        K = trace_shift(B, J)
        assert abs(np.trace(K) - J) <= 1e-12
        np.testing.assert_allclose(trace_shift(K, J), K, atol=1e-14)


def test_nonneg_idempotent():
    X = np.random.default_rng(14).standard_normal((4, 4))
    np.testing.assert_array_equal(project_nonneg(project_nonneg(X)), project_nonneg(X))
