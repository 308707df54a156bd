"""Quasi-static nutrient: sigma is slaved to phi through an elliptic
Robin problem, solved at every right-hand-side evaluation.

The nutrient coefficients satisfy

    (S_D + lambda_c M_h + K M_gamma) gamma = eta S_D alpha + K Sigma,

and the system matrix is symmetric positive definite for K > 0 (the
boundary term controls the constant mode that S_D annihilates).
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .assembly import AssembledOperators
from .diagnostics.records import quasistatic_record
from .dynamics import (
    GalerkinState,
    Problem,
    StepControl,
    Trajectory,
    _trapezoid_fixed_point,
    mu_coeffs,
    run_system,
)
from .errors import SingularOperator
from .model import ModelParams

RELATIVE_RESIDUAL_TOL = 1e-10


def nutrient_operator(ops: AssembledOperators, params: ModelParams) -> np.ndarray:
    return ops.S_D + params.lambda_c * ops.M_h + params.K * ops.M_gamma


def solve_nutrient(alpha, ops: AssembledOperators, params: ModelParams, return_stats: bool = False):
    """Nutrient coefficients for the phase coefficients ``alpha``.

    Dense Cholesky followed by one step of iterative refinement.  Raises
    :class:`SingularOperator` if the factorisation fails or the refined
    relative residual exceeds 1e-10.
    """
    G = nutrient_operator(ops, params)
    rhs = params.eta * (ops.S_D @ alpha) + params.K * ops.Sigma_vec
    try:
        factor = scipy.linalg.cho_factor(G, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularOperator(f"nutrient operator is not positive definite: {exc}") from None
    gamma = scipy.linalg.cho_solve(factor, rhs)
    gamma = gamma + scipy.linalg.cho_solve(factor, rhs - G @ gamma)
    scale = max(np.linalg.norm(rhs), np.linalg.norm(G) * np.linalg.norm(gamma))
    rel = float(np.linalg.norm(rhs - G @ gamma) / scale) if scale > 0 else 0.0
    if rel > RELATIVE_RESIDUAL_TOL:
        raise SingularOperator(f"nutrient solve relative residual {rel:.3e} exceeds {RELATIVE_RESIDUAL_TOL:g}")
    if not return_stats:
        return gamma
    eig = np.linalg.eigvalsh(G)
    return gamma, {"cond": float(eig[-1] / eig[0]), "min_eig": float(eig[0]), "residual": rel}


def rhs_quasistatic(alpha, t: float, problem: Problem, ops: AssembledOperators | None = None):
    """Phase-field right-hand side with the nutrient solved from ``alpha``."""
    p = problem.params
    if ops is None:
        ops = problem.assemble(alpha, t)
    gamma = solve_nutrient(alpha, ops, p)
    beta = mu_coeffs(alpha, gamma, ops, p)
    return -ops.S_m @ beta + p.lambda_p * (ops.M_h @ gamma) - p.lambda_a * ops.h_vec


def rhs_quasistatic_reduced(alpha, t: float, problem: Problem, ops: AssembledOperators | None = None):
    """The same right-hand side written as one closed ODE in ``alpha``:

        -B S_m S alpha - lambda_a h - A S_m psi
        + (chi_phi S_m + lambda_p M_h) G^{-1} (eta S_D alpha + K Sigma).
    """
    p = problem.params
    if ops is None:
        ops = problem.assemble(alpha, t)
    G = nutrient_operator(ops, p)
    drive = np.linalg.solve(G, p.eta * (ops.S_D @ alpha) + p.K * ops.Sigma_vec)
    return (
        -p.B * (ops.S_m @ (ops.S @ alpha))
        - p.lambda_a * ops.h_vec
        - p.A * (ops.S_m @ ops.psi_vec)
        + (p.chi_phi * ops.S_m + p.lambda_p * ops.M_h) @ drive
    )


class QuasistaticSystem:
    def __init__(self, problem: Problem):
        self.problem = problem

    def rhs(self, t, alpha):
        return rhs_quasistatic(alpha, t, self.problem)

    def imex_step(self, t, alpha, dt):
        p = self.problem.params
        ops = self.problem.assemble(alpha, t)
        gamma = solve_nutrient(alpha, ops, p)
        rhs = alpha + dt * (
            -ops.S_m @ (p.A * ops.psi_vec - p.chi_phi * gamma)
            + p.lambda_p * (ops.M_h @ gamma)
            - p.lambda_a * ops.h_vec
        )
        return np.linalg.solve(np.eye(alpha.size) + dt * p.B * (ops.S_m @ ops.S), rhs)

    def trapezoidal_step(self, t, alpha, dt):
        p = self.problem.params
        ops = self.problem.assemble(alpha, t)
        return _trapezoid_fixed_point(self.rhs, p.B * (ops.S_m @ ops.S), t, alpha, dt)

    def observe(self, t, alpha):
        pr = self.problem
        ops = pr.assemble(alpha, t)
        gamma, stats = solve_nutrient(alpha, ops, pr.params, return_stats=True)
        beta = mu_coeffs(alpha, gamma, ops, pr.params)
        rec = quasistatic_record(t, alpha, gamma, beta, ops, pr.config, pr.basis, pr.sigma_inf(t), stats)
        return alpha, gamma, beta, rec


def integrate_quasistatic(alpha0, problem: Problem, control: StepControl | None = None) -> Trajectory:
    """Integrate the phase field; ``gamma`` is recomputed at every state.

    ``alpha0`` may also be a :class:`GalerkinState`, whose ``gamma`` is
    ignored: the quasi-static nutrient has no initial value of its own.
    """
    if problem.config.mode != "quasistatic":
        raise ValueError("integrate_quasistatic needs a quasistatic configuration")
    if isinstance(alpha0, GalerkinState):
        alpha0 = alpha0.alpha
    control = control or StepControl()
    return run_system(QuasistaticSystem(problem), np.asarray(alpha0, dtype=float), problem.params.T, control, "quasistatic")
