import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from chtumour import boundary_mass_matrix, build_basis
from chtumour.basis import composite_gauss, mode_derivatives, mode_values
from chtumour.errors import InsufficientQuadrature


def test_single_mode_is_normalised_constant():
    b = build_basis(1, 1.0)
    np.testing.assert_array_equal(b.lambdas, [0.0])
    np.testing.assert_allclose(b.traces[0], [1.0, 1.0], rtol=1e-15)


def test_second_eigenvalue_is_pi_squared():
    b = build_basis(2, 1.0)
    # oracle: Rayleigh quotient of the second mode by adaptive quadrature
    dw2 = lambda x: mode_derivatives(2, 1.0, np.array([x]))[1, 0]
    assert b.lambdas[1] == pytest.approx(quad(lambda x: dw2(x) ** 2, 0, 1)[0], rel=1e-12)
    assert b.lambdas[1] == pytest.approx(9.8696, abs=1e-4)


@pytest.mark.parametrize("k, L", [(4, 1.0), (16, 2.5), (33, 0.3)])
def test_constant_mode_has_zero_stiffness(k, L):
    b = build_basis(k, L)
    assert b.S[0, 0] == 0.0
    assert np.all(b.S[0] == 0.0)


@pytest.mark.parametrize("k, L", [(8, 1.0), (32, 1.0), (24, 3.0)])
def test_discrete_orthonormality_and_stiffness(k, L):
    b = build_basis(k, L)
    gram = b.W @ (b.quad_weights[:, None] * b.W.T)
    np.testing.assert_allclose(gram, np.eye(k), atol=1e-12)
    np.testing.assert_allclose(b.W[1:] @ b.quad_weights, 0.0, atol=1e-12)
    np.testing.assert_allclose(b.S, np.diag(b.lambdas), atol=1e-10 * max(1.0, b.lambdas[-1]))


def test_stiffness_entries_against_adaptive_quadrature():
    b = build_basis(5, 2.0)
    for i in range(5):
        for j in range(5):
            f = lambda x: (mode_derivatives(5, 2.0, np.array([x]))[i, 0] * mode_derivatives(5, 2.0, np.array([x]))[j, 0])
            assert b.S[i, j] == pytest.approx(quad(f, 0, 2, limit=200)[0], abs=1e-10)


def test_boundary_mass_entries():
    M = boundary_mass_matrix(build_basis(4, 1.0))
    assert M[0, 0] == pytest.approx(2.0, abs=1e-14)
    assert M[0, 1] == pytest.approx(0.0, abs=1e-14)
    assert M[1, 1] == pytest.approx(4.0, abs=1e-14)
    np.testing.assert_array_equal(M, M.T)


def test_boundary_mass_matches_trace_formula():
    b = build_basis(6, 1.7)
    w0 = mode_values(6, 1.7, np.array([0.0]))[:, 0]
    wL = mode_values(6, 1.7, np.array([1.7]))[:, 0]
    np.testing.assert_allclose(boundary_mass_matrix(b), np.outer(w0, w0) + np.outer(wL, wL), atol=1e-13)


def test_operators_are_psd_with_one_zero_mode():
    b = build_basis(20, 1.0)
    eig_s = np.linalg.eigvalsh(b.S)
    eig_m = np.linalg.eigvalsh(b.M_gamma)
    assert eig_s.min() > -1e-10 and eig_m.min() > -1e-10
    assert np.sum(np.abs(eig_s) < 1e-8) == 1


def test_project_examples():
    b = build_basis(8, 1.0)
    np.testing.assert_allclose(b.project(lambda x: 3.0 + 0 * x), [3.0] + [0.0] * 7, atol=1e-14)
    np.testing.assert_allclose(b.project(b.W[2]), np.eye(8)[2], atol=1e-13)
    # oracle: integral of x against the constant mode
    assert b.project(lambda x: x)[0] == pytest.approx(quad(lambda x: x, 0, 1)[0], abs=1e-14)


def test_eval_field_examples():
    b = build_basis(6, 1.0)
    x = np.array([0.0, 0.2, 0.77, 1.0])
    np.testing.assert_allclose(b.eval_field(np.eye(6)[0], x), 1.0, rtol=1e-15)
    np.testing.assert_array_equal(b.eval_field(np.zeros(6), x), 0.0)
    assert b.eval_field(np.eye(6)[1], np.array([0.0]))[0] == pytest.approx(np.sqrt(2.0), rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 40), L=st.floats(0.2, 5.0))
def test_parseval_and_round_trip(seed, k, L):
    b = build_basis(k, L)
    c = np.random.default_rng(seed).standard_normal(k)
    assert b.l2_norm(c) == pytest.approx(np.linalg.norm(c), rel=1e-10)
    np.testing.assert_allclose(b.project(b.eval_field(c)), c, atol=1e-10 * max(1, np.abs(c).max()))


def test_gauss_rule_integrates_polynomials():
    x, w = composite_gauss(2.0, 3)
    assert w.sum() == pytest.approx(2.0, rel=1e-15)
    assert np.dot(w, x**9) == pytest.approx(2.0**10 / 10, rel=1e-13)


def test_too_few_panels_rejected():
    with pytest.raises(InsufficientQuadrature):
        build_basis(16, 1.0, quad_panels=8)


def test_default_panels_saturate_quadrature():
    b1, b2 = build_basis(16), build_basis(16, quad_panels=64)
    np.testing.assert_allclose(b1.S, b2.S, atol=1e-10)
