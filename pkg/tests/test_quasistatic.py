import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chtumour import BoundaryData, CoefficientFunction, Coefficients, StepControl, integrate_quasistatic, solve_nutrient
from chtumour.assembly import AssembledOperators
from chtumour.errors import SingularOperator
from chtumour.quasistatic import nutrient_operator, rhs_quasistatic, rhs_quasistatic_reduced

from .conftest import make_problem

VARYING = Coefficients(
    m=CoefficientFunction.affine(1.0, 0.3, 0.7, 1.3),
    D=CoefficientFunction.table([-1, 0, 1], [0.6, 1.0, 1.8]),
)


def e(i, k=8):
    return np.eye(k)[i]


def test_constant_supply_gives_constant_nutrient():
    s = 0.6
    pr = make_problem("quasistatic", sigma_inf=s, eta=0.4)
    alpha = 0.3 * e(0)
    gamma = solve_nutrient(alpha, pr.assemble(alpha, 0.0), pr.params)
    np.testing.assert_allclose(gamma, s * e(0), atol=1e-13)


def test_without_transport_any_phase_gives_constant_nutrient(rng):
    s = 1.3
    pr = make_problem("quasistatic", k=16, sigma_inf=s, coeffs=VARYING)
    alpha = rng.uniform(-1, 1, 16)
    gamma = solve_nutrient(alpha, pr.assemble(alpha, 0.0), pr.params)
    np.testing.assert_allclose(pr.basis.eval_field(gamma), s, atol=1e-12)


def test_zero_supply_gives_zero_nutrient(rng):
    pr = make_problem("quasistatic", lambda_c=0.5)
    alpha = rng.uniform(-1, 1, 8)
    np.testing.assert_allclose(solve_nutrient(alpha, pr.assemble(alpha, 0.0), pr.params), 0.0, atol=1e-15)


def test_solution_satisfies_weak_form(rng):
    pr = make_problem("quasistatic", k=12, sigma_inf=BoundaryData.constant(1.0, 0.3), eta=0.7, lambda_c=0.9,
                      coeffs=VARYING)
    alpha = rng.uniform(-1, 1, 12)
    ops = pr.assemble(alpha, 0.0)
    gamma, stats = solve_nutrient(alpha, ops, pr.params, return_stats=True)
    # oracle: test the weak form against every mode with node-level integrals
    b = pr.basis
    phi, sigma = b.eval_field(alpha), b.eval_field(gamma)
    D = VARYING.D(phi)
    flux = D * (b.eval_gradient(gamma) - 0.7 * b.eval_gradient(alpha))
    h = pr.config.coeffs.h(phi)
    lhs = b.dW @ (b.quad_weights * flux) + 0.9 * b.W @ (b.quad_weights * h * sigma)
    robin = b.traces @ (1.0 * (np.array([1.0, 0.3]) - b.eval_traces(gamma)))
    np.testing.assert_allclose(lhs, robin, atol=1e-11)
    assert stats["min_eig"] > 0 and stats["residual"] < 1e-14


def test_singular_operator_reported():
    pr = make_problem("quasistatic")
    ops = pr.assemble(np.zeros(8), 0.0)
    broken = AssembledOperators(**{**ops.__dict__, "M_gamma": np.zeros((8, 8))})
    with pytest.raises(SingularOperator):
        solve_nutrient(np.zeros(8), broken, pr.params)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_reduced_and_staged_rhs_agree(seed):
    rng = np.random.default_rng(seed)
    pr = make_problem("quasistatic", k=10, sigma_inf=BoundaryData.constant(1.0, 0.4), chi_phi=0.8, eta=0.6,
                      lambda_p=0.5, lambda_a=0.2, lambda_c=0.7, coeffs=VARYING)
    alpha = rng.uniform(-1, 1, 10)
    a, b = rhs_quasistatic(alpha, 0.0, pr), rhs_quasistatic_reduced(alpha, 0.0, pr)
    np.testing.assert_allclose(a, b, atol=1e-12 * max(1.0, np.abs(a).max()))


def test_stationary_rhs_vanishes():
    pr = make_problem("quasistatic", sigma_inf=0.9, chi_phi=0.5)
    np.testing.assert_allclose(rhs_quasistatic(e(0), 0.0, pr), 0.0, atol=1e-14)


def test_apoptosis_only_row():
    pr = make_problem("quasistatic", lambda_a=0.4, L=2.0)
    d = rhs_quasistatic(np.zeros(8), 0.0, pr)
    assert d[0] == pytest.approx(-0.4 * np.sqrt(2.0) * 0.5, rel=1e-13)


def test_spd_certificate(rng):
    pr = make_problem("quasistatic", k=32, lambda_c=0.5, coeffs=VARYING)
    for _ in range(20):
        alpha = rng.uniform(-1, 1, 32)
        G = nutrient_operator(pr.assemble(alpha, 0.0), pr.params)
        np.linalg.cholesky(G)
        assert np.linalg.eigvalsh(G).min() > 0


@pytest.mark.parametrize("scheme", ["imex", "trapezoidal"])
def test_stationary_trajectory(scheme):
    pr = make_problem("quasistatic", sigma_inf=0.9, chi_phi=0.5, T=1.0)
    traj = integrate_quasistatic(e(0), pr, StepControl(dt=1e-2, scheme=scheme))
    np.testing.assert_allclose(np.array(traj.alphas) - e(0), 0.0, atol=1e-10)
    np.testing.assert_allclose(np.array(traj.gammas) - 0.9 * e(0), 0.0, atol=1e-10)


def test_gradient_flow_energy_decays():
    pr = make_problem("quasistatic", k=16, chi_phi=0.3, T=0.05)
    alpha0 = pr.basis.project(lambda x: np.tanh((0.25 - np.abs(x - 0.5)) / 0.08))
    traj = integrate_quasistatic(alpha0, pr, StepControl(dt=1e-4))
    assert np.max(np.diff(traj.column("gl_energy"))) <= 1e-9
    assert traj.column("gl_energy")[-1] < traj.column("gl_energy")[0]


def test_parabolic_config_rejected():
    with pytest.raises(ValueError, match="quasistatic"):
        integrate_quasistatic(e(0), make_problem("parabolic"))
