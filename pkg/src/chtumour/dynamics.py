"""Galerkin ODE system for the parabolic model and its time integration.

The coefficient vectors ``alpha`` (phase field), ``gamma`` (nutrient) and
``beta`` (chemical potential) satisfy

    d alpha/dt = -S_m beta + lambda_p M_h gamma - lambda_a h
    beta       = A psi + B S alpha - chi_phi gamma
    d gamma/dt = -S_n (chi_sigma gamma - chi_phi alpha) - lambda_c M_h gamma
                 - K M_gamma gamma + K Sigma

where the weighted matrices and load vectors are reassembled from the
current ``alpha`` at every evaluation.

Two one-step schemes are available:

``imex``
    First order.  ``B S_m S`` (alpha) and ``chi_sigma S_n + K M_gamma +
    lambda_c M_h`` (gamma) are implicit with coefficients frozen at the start
    of the step; everything else is explicit.
``trapezoidal``
    Second order, fully implicit.  The nonlinear system is solved by a
    fixed-point iteration preconditioned with the frozen linear backbone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .assembly import AssembledOperators, BoundaryData, assemble
from .basis import Basis
from .diagnostics.records import DiagnosticsRecord, parabolic_record
from .errors import BlowUp, FixedPointFailure, StepLimitExceeded, StepUnderflow
from .model import ModelParams, ValidatedConfig

BLOWUP_THRESHOLD = 1e12
DT_MIN = 1e-14
FIXED_POINT_TOL = 1e-11
FIXED_POINT_MAXITER = 50
SCHEME_ORDER = {"imex": 1, "trapezoidal": 2}


@dataclass(frozen=True)
class Problem:
    """Everything a run needs besides the initial state."""

    config: ValidatedConfig
    basis: Basis
    sigma_inf: BoundaryData = field(default_factory=lambda: BoundaryData.constant(0.0))

    @property
    def params(self) -> ModelParams:
        return self.config.params

    def assemble(self, alpha, t: float) -> AssembledOperators:
        cfg = self.config
        return assemble(self.basis, alpha, cfg.coeffs, cfg.potential, self.sigma_inf(t))


@dataclass(frozen=True)
class GalerkinState:
    t: float
    alpha: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        if alpha.shape != gamma.shape or alpha.ndim != 1:
            raise ValueError("alpha and gamma must be vectors of equal length")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(gamma))):
            raise ValueError("state contains non-finite coefficients")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)


@dataclass(frozen=True)
class StepControl:
    dt: float = 1e-3
    tol: float = 1e-7
    max_steps: int = 200_000
    adaptive: bool = True
    scheme: str = "imex"
    dt_max: float | None = None  # default T/10

    def __post_init__(self):
        if self.scheme not in SCHEME_ORDER:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {sorted(SCHEME_ORDER)}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")


@dataclass
class Trajectory:
    mode: str
    times: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    gammas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    records: list = field(default_factory=list)
    dts: list = field(default_factory=list)
    rejected: int = 0

    def append(self, t: float, alpha, gamma, beta, record: DiagnosticsRecord, dt: float | None):
        self.times.append(float(t))
        self.alphas.append(np.array(alpha, dtype=float))
        self.gammas.append(np.array(gamma, dtype=float))
        self.betas.append(np.array(beta, dtype=float))
        self.records.append(record)
        if dt is not None:
            self.dts.append(float(dt))

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> GalerkinState:
        return GalerkinState(self.times[i], self.alphas[i], self.gammas[i])

    @property
    def final(self) -> GalerkinState:
        return self.state(-1)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def mu_coeffs(alpha, gamma, ops: AssembledOperators, params: ModelParams) -> np.ndarray:
    return params.A * ops.psi_vec + params.B * (ops.S @ alpha) - params.chi_phi * gamma


def nutrient_terms(config: ValidatedConfig, ops: AssembledOperators):
    """``(S_nut, diffusivity, transport, consumption, rate)`` of the nutrient row

        d gamma/dt = rate * [-S_nut (diffusivity gamma - transport alpha)
                             - consumption M_h gamma - K M_gamma gamma + K Sigma].

    The nondimensional form uses the D-mobility, unit diffusivity, ``theta``
    as transport, ``alpha_c`` as consumption and rate ``1/kappa``.
    """
    p = config.params
    if config.mode == "nondim":
        return ops.S_D, 1.0, p.theta, p.alpha_c, 1.0 / p.kappa
    return ops.S_n, p.chi_sigma, p.chi_phi, p.lambda_c, 1.0


def rhs_parabolic(state: GalerkinState, problem: Problem, ops: AssembledOperators | None = None):
    """Right-hand sides ``(dalpha, dgamma)`` of the parabolic Galerkin system."""
    p = problem.params
    alpha, gamma = state.alpha, state.gamma
    if ops is None:
        ops = problem.assemble(alpha, state.t)
    beta = mu_coeffs(alpha, gamma, ops, p)
    dalpha = -ops.S_m @ beta + p.lambda_p * (ops.M_h @ gamma) - p.lambda_a * ops.h_vec
    S_nut, diff, transport, cons, rate = nutrient_terms(problem.config, ops)
    dgamma = rate * (
        -S_nut @ (diff * gamma - transport * alpha)
        - cons * (ops.M_h @ gamma)
        - p.K * (ops.M_gamma @ gamma)
        + p.K * ops.Sigma_vec
    )
    return dalpha, dgamma


class ParabolicSystem:
    """Adapter giving the stepping driver a flat state vector ``[alpha, gamma]``."""

    def __init__(self, problem: Problem):
        self.problem = problem
        self.k = problem.basis.k

    def split(self, y):
        return y[: self.k], y[self.k :]

    def rhs(self, t, y):
        alpha, gamma = self.split(y)
        da, dg = rhs_parabolic(GalerkinState(t, alpha, gamma), self.problem)
        return np.concatenate([da, dg])

    def backbone(self, t, y):
        """Frozen stiff linear operators (alpha block, gamma block), as ``-L``."""
        p = self.problem.params
        alpha, _ = self.split(y)
        ops = self.problem.assemble(alpha, t)
        S_nut, diff, _, cons, rate = nutrient_terms(self.problem.config, ops)
        La = p.B * (ops.S_m @ ops.S)
        Lg = rate * (diff * S_nut + p.K * ops.M_gamma + cons * ops.M_h)
        return ops, (La, Lg)

    def imex_step(self, t, y, dt):
        p = self.problem.params
        alpha, gamma = self.split(y)
        ops = self.problem.assemble(alpha, t + dt)
        k = self.k
        eye = np.eye(k)
        rhs_a = alpha + dt * (
            -ops.S_m @ (p.A * ops.psi_vec - p.chi_phi * gamma)
            + p.lambda_p * (ops.M_h @ gamma)
            - p.lambda_a * ops.h_vec
        )
        alpha_new = np.linalg.solve(eye + dt * p.B * (ops.S_m @ ops.S), rhs_a)
        S_nut, diff, transport, cons, rate = nutrient_terms(self.problem.config, ops)
        Lg = diff * S_nut + p.K * ops.M_gamma + cons * ops.M_h
        rhs_g = gamma + dt * rate * (transport * (S_nut @ alpha) + p.K * ops.Sigma_vec)
        gamma_new = np.linalg.solve(eye + dt * rate * Lg, rhs_g)
        return np.concatenate([alpha_new, gamma_new])

    def trapezoidal_step(self, t, y, dt):
        _, (La, Lg) = self.backbone(t, y)
        L = scipy.linalg.block_diag(La, Lg)
        return _trapezoid_fixed_point(self.rhs, L, t, y, dt)

    def observe(self, t, y):
        alpha, gamma = self.split(y)
        pr = self.problem
        ops = pr.assemble(alpha, t)
        beta = mu_coeffs(alpha, gamma, ops, pr.params)
        rec = parabolic_record(t, alpha, gamma, beta, ops, pr.config, pr.basis, pr.sigma_inf(t))
        return alpha, gamma, beta, rec


def _trapezoid_fixed_point(rhs: Callable, L_minus, t, y, dt):
    """Solve ``z = y + dt/2 (f(t, y) + f(t + dt, z))``.

    ``L_minus`` is ``-J`` for the frozen stiff part; each sweep solves
    ``(I + dt/2 L_minus) z_new = y + dt/2 f(t, y) + dt/2 (f(t+dt, z) + L_minus z)``.
    """
    n = y.size
    lu = scipy.linalg.lu_factor(np.eye(n) + 0.5 * dt * L_minus)
    base = y + 0.5 * dt * rhs(t, y)
    z = y.copy()
    for _ in range(FIXED_POINT_MAXITER):
        z_new = scipy.linalg.lu_solve(lu, base + 0.5 * dt * (rhs(t + dt, z) + L_minus @ z))
        if not np.all(np.isfinite(z_new)):
            break
        delta = np.linalg.norm(z_new - z)
        z = z_new
        if delta <= FIXED_POINT_TOL * max(1.0, np.linalg.norm(z)):
            return z
    raise FixedPointFailure(f"trapezoidal fixed point did not converge in {FIXED_POINT_MAXITER} sweeps (dt={dt:g})")


def _check_blowup(y, t):
    if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP_THRESHOLD:
        raise BlowUp(f"coefficient magnitude exceeded {BLOWUP_THRESHOLD:g} at t={t:g}")


def run_system(system, y0: np.ndarray, T: float, control: StepControl, mode: str) -> Trajectory:
    """Drive ``system`` from t = 0 to ``T`` with fixed or step-doubling steps."""
    step = system.imex_step if control.scheme == "imex" else system.trapezoidal_step
    traj = Trajectory(mode=mode)
    y = np.array(y0, dtype=float)
    _check_blowup(y, 0.0)
    traj.append(0.0, *system.observe(0.0, y), dt=None)

    if not control.adaptive:
        n = max(1, math.ceil(T / control.dt - 1e-9))
        if n > control.max_steps:
            raise StepLimitExceeded(f"{n} fixed steps exceed max_steps={control.max_steps}")
        dt = T / n
        for i in range(n):
            t = i * dt
            y = step(t, y, dt)
            t_new = T if i == n - 1 else (i + 1) * dt
            _check_blowup(y, t_new)
            traj.append(t_new, *system.observe(t_new, y), dt=dt)
        return traj

    order = SCHEME_ORDER[control.scheme]
    dt_max = control.dt_max if control.dt_max is not None else T / 10.0
    proposal = min(control.dt, dt_max)
    t = 0.0
    attempts = 0
    while T - t > 1e-12 * T:
        dt = min(proposal, T - t)
        if dt < DT_MIN:
            raise StepUnderflow(f"step size {dt:.3e} fell below {DT_MIN:g} at t={t:g}")
        attempts += 1
        if attempts > control.max_steps:
            raise StepLimitExceeded(f"exceeded max_steps={control.max_steps} at t={t:g}")
        try:
            big = step(t, y, dt)
            small = step(t + 0.5 * dt, step(t, y, 0.5 * dt), 0.5 * dt)
            err = float(np.linalg.norm(big - small))
            if not math.isfinite(err):
                err = math.inf
        except (FixedPointFailure, np.linalg.LinAlgError):
            err = math.inf
        if err <= control.tol:
            t_new = T if T - (t + dt) <= 1e-12 * T else t + dt
            _check_blowup(small, t_new)
            y = small
            t = t_new
            traj.append(t, *system.observe(t, y), dt=dt)
            factor = 2.0 if err == 0.0 else min(2.0, max(0.2, 0.9 * (control.tol / err) ** (1.0 / (order + 1))))
            # grow from the proposal so a trimmed final step does not shrink it
            proposal = min(proposal * factor, dt_max)
        else:
            traj.rejected += 1
            factor = 0.2 if err == math.inf else max(0.2, 0.9 * (control.tol / err) ** (1.0 / (order + 1)))
            proposal = dt * factor
    return traj


def initial_state(problem: Problem, phi0, sigma0) -> GalerkinState:
    """Project initial data (callables of x, node arrays, or constants)."""
    b = problem.basis
    return GalerkinState(0.0, b.project(phi0), b.project(sigma0))


def integrate(initial: GalerkinState, problem: Problem, control: StepControl | None = None) -> Trajectory:
    if problem.config.mode == "quasistatic":
        raise ValueError("use quasistatic.integrate_quasistatic for quasistatic configurations")
    control = control or StepControl()
    system = ParabolicSystem(problem)
    y0 = np.concatenate([initial.alpha, initial.gamma])
    return run_system(system, y0, problem.params.T, control, problem.config.mode)
