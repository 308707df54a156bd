import numpy as np
import pytest

from chtumour import GalerkinState, StepControl, integrate, mu_coeffs, rhs_parabolic
from chtumour.dynamics import initial_state
from chtumour.errors import BlowUp, StepLimitExceeded

from .conftest import make_problem


def e(i, k=8):
    return np.eye(k)[i]


# chemical potential -----------------------------------------------------------

def test_mu_vanishes_in_pure_tumour_without_nutrient():
    pr = make_problem(chi_phi=0.4)
    ops = pr.assemble(e(0), 0.0)
    np.testing.assert_allclose(mu_coeffs(e(0), np.zeros(8), ops, pr.params), 0.0, atol=1e-14)


def test_mu_vanishes_at_zero_state():
    pr = make_problem(chi_phi=0.4)
    ops = pr.assemble(np.zeros(8), 0.0)
    np.testing.assert_allclose(mu_coeffs(np.zeros(8), np.zeros(8), ops, pr.params), 0.0, atol=1e-15)


def test_mu_chemotaxis_term():
    pr = make_problem(chi_phi=0.4)
    ops = pr.assemble(np.zeros(8), 0.0)
    np.testing.assert_allclose(mu_coeffs(np.zeros(8), e(0), ops, pr.params), -0.4 * e(0), atol=1e-15)


# right-hand side --------------------------------------------------------------

def test_stationary_state_has_zero_rhs():
    s = 0.8
    pr = make_problem(sigma_inf=s, chi_phi=0.3, eta=0.2)
    da, dg = rhs_parabolic(GalerkinState(0.0, e(0), s * e(0)), pr)
    np.testing.assert_allclose(da, 0.0, atol=1e-14)
    np.testing.assert_allclose(dg, 0.0, atol=1e-14)


def test_active_transport_drive(rng):
    pr = make_problem(chi_phi=0.3)
    alpha = rng.uniform(-1, 1, 8)
    ops = pr.assemble(alpha, 0.0)
    _, dg = rhs_parabolic(GalerkinState(0.0, alpha, np.zeros(8)), pr, ops)
    np.testing.assert_allclose(dg, -ops.S_n @ (-0.3 * alpha), atol=1e-13)


def test_apoptosis_load_only():
    pr = make_problem(lambda_a=0.7)
    da, _ = rhs_parabolic(GalerkinState(0.0, np.zeros(8), np.zeros(8)), pr)
    # h(0) = 1/2 on a unit interval, w_1 = 1
    assert da[0] == pytest.approx(-0.7 * 0.5, rel=1e-14)
    assert da[0] < 0


def test_mass_rows_match_integrated_sources(rng):
    pr = make_problem(sigma_inf=(1.0), chi_phi=0.3, lambda_p=0.5, lambda_a=0.2, lambda_c=0.4, L=2.0)
    alpha, gamma = rng.uniform(-1, 1, (2, 8))
    da, dg = rhs_parabolic(GalerkinState(0.0, alpha, gamma), pr)
    b = pr.basis
    phi, sigma = b.eval_field(alpha), b.eval_field(gamma)
    h = pr.config.coeffs.h(phi)
    w1 = 1 / np.sqrt(2.0)
    # d/dt of the integral is the first coefficient rate times the integral of w_1
    assert da[0] * 2.0 * w1 == pytest.approx(b.integrate((0.5 * sigma - 0.2) * h), abs=1e-13)
    robin = 1.0 * np.sum(1.0 - b.eval_traces(gamma))
    assert dg[0] * 2.0 * w1 == pytest.approx(-0.4 * b.integrate(sigma * h) + robin, abs=1e-13)


def test_nondim_row_scaled_by_kappa(rng):
    base = dict(sigma_inf=1.0, theta=0.3, alpha_c=0.2)
    alpha, gamma = rng.uniform(-1, 1, (2, 8))
    _, dg1 = rhs_parabolic(GalerkinState(0.0, alpha, gamma), make_problem("nondim", kappa=1.0, **base))
    _, dg2 = rhs_parabolic(GalerkinState(0.0, alpha, gamma), make_problem("nondim", kappa=0.01, **base))
    np.testing.assert_allclose(dg2, 100.0 * dg1, rtol=1e-12)


# integration ------------------------------------------------------------------

@pytest.mark.parametrize("scheme", ["imex", "trapezoidal"])
def test_stationary_trajectory_is_constant(scheme):
    s = 0.8
    pr = make_problem(sigma_inf=s, chi_phi=0.3, T=1.0)
    traj = integrate(GalerkinState(0.0, e(0), s * e(0)), pr, StepControl(dt=1e-2, scheme=scheme))
    assert traj.times[-1] == 1.0
    np.testing.assert_allclose(np.array(traj.alphas) - e(0), 0.0, atol=1e-10)
    np.testing.assert_allclose(np.array(traj.gammas) - s * e(0), 0.0, atol=1e-10)


def test_phase_mass_conserved_without_sources():
    pr = make_problem(k=16, sigma_inf=0.5, chi_phi=0.3, T=0.05)
    init = initial_state(pr, lambda x: np.tanh((x - 0.4) / 0.1), 0.5)
    traj = integrate(init, pr, StepControl(dt=1e-4))
    mass = traj.column("mass_phi")
    assert np.max(np.abs(mass - mass[0])) < 1e-10


def test_trajectory_structure():
    pr = make_problem(k=8, sigma_inf=1.0, chi_phi=0.2, lambda_p=0.3, T=0.01)
    init = initial_state(pr, lambda x: np.cos(np.pi * x), 0.2)
    traj = integrate(init, pr, StepControl(dt=1e-3, adaptive=False))
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[0] == 0.0 and traj.times[-1] == 0.01
    np.testing.assert_array_equal(traj.alphas[0], init.alpha)
    assert len(traj.dts) == len(traj) - 1 == 10


def test_fixed_grid_rounds_to_whole_steps():
    pr = make_problem(T=0.01)
    traj = integrate(GalerkinState(0.0, 0.5 * e(0), e(0)), pr, StepControl(dt=3e-3, adaptive=False))
    assert len(traj.dts) == 4
    np.testing.assert_allclose(traj.dts, 0.0025, rtol=1e-14)


def test_adaptive_and_fixed_agree():
    pr = make_problem(k=8, sigma_inf=1.0, chi_phi=0.2, lambda_p=0.3, T=0.02)
    init = initial_state(pr, lambda x: 0.5 * np.cos(np.pi * x), 0.2)
    a = integrate(init, pr, StepControl(dt=1e-4, tol=1e-9))
    b = integrate(init, pr, StepControl(dt=2e-5, adaptive=False, scheme="trapezoidal"))
    np.testing.assert_allclose(a.alphas[-1], b.alphas[-1], atol=1e-5)
    np.testing.assert_allclose(a.gammas[-1], b.gammas[-1], atol=1e-5)


def test_state_validation():
    with pytest.raises(ValueError):
        GalerkinState(0.0, np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        GalerkinState(0.0, np.array([np.nan]), np.zeros(1))
    with pytest.raises(ValueError):
        StepControl(scheme="rk4")


def test_blow_up_detected():
    pr = make_problem()
    with pytest.raises(BlowUp):
        integrate(GalerkinState(0.0, 2e12 * e(0), np.zeros(8)), pr)


def test_step_limit():
    pr = make_problem(T=1.0)
    with pytest.raises(StepLimitExceeded):
        integrate(GalerkinState(0.0, e(1), np.zeros(8)), pr, StepControl(dt=1e-3, adaptive=False, max_steps=10))


def test_quasistatic_config_rejected():
    pr = make_problem("quasistatic")
    with pytest.raises(ValueError, match="quasistatic"):
        integrate(GalerkinState(0.0, e(0), e(0)), pr)
