"""Per-state diagnostics and the identity residuals computed from them.

All integrals use the basis quadrature, so for the Galerkin solution the
energy balances below hold exactly in continuous time; what remains in the
residual series is time-discretisation error.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from ..assembly import AssembledOperators
from ..basis import Basis
from ..model import ValidatedConfig


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    total_energy: float
    gl_energy: float
    dissipation: float
    boundary_flux: float
    source_work: float
    mass_phi: float
    mass_sigma: float
    psi_l1: float
    phi_h1_sq: float
    sigma_l2_sq: float
    sigma_h1_sq: float
    grad_mu_sq: float
    grad_sigma_sq: float
    sigma_gamma_sq: float
    mu_mean_residual: float
    row1_stiffness: float
    mass_rate_phi: float
    mass_rate_sigma: float

    @property
    def energy_rate(self) -> float:
        """Minus the predicted time derivative of ``total_energy``."""
        return self.dissipation + self.boundary_flux + self.source_work

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class QuasiDiagnosticsRecord(DiagnosticsRecord):
    """Quasi-static variant.

    ``total_energy`` is the Ginzburg-Landau energy (the nutrient carries no
    energy), ``dissipation`` is ``int m|grad mu|^2 + D|grad sigma|^2``,
    ``boundary_flux`` is ``K sum_Gamma sigma (sigma - sigma_inf)``,
    ``source_work`` is ``int lambda_c h sigma^2 - (lambda_p sigma - lambda_a) h (mu + chi_phi sigma)``
    and ``coupling`` collects the cross terms
    ``chi_phi int m grad mu . grad sigma - eta int D grad phi . grad sigma``.
    """

    coupling: float = 0.0
    balance_residual: float = 0.0
    h1_bound_lhs: float = 0.0
    h1_bound_rhs: float = 0.0
    nutrient_cond: float = 0.0
    refine_residual: float = 0.0

    @property
    def energy_rate(self) -> float:
        return self.dissipation + self.boundary_flux + self.source_work + self.coupling


def _common_fields(t, alpha, gamma, beta, ops: AssembledOperators, cfg: ValidatedConfig, basis: Basis):
    p = cfg.params
    wq = basis.quad_weights
    phi = ops.phi_nodes
    sigma = basis.eval_field(gamma)
    mu = basis.eval_field(beta)
    dphi = basis.eval_gradient(alpha)
    dsigma = basis.eval_gradient(gamma)
    dmu = basis.eval_gradient(beta)
    psi = cfg.potential.psi(phi)
    h = ops.h_nodes
    grad_phi_sq = wq @ dphi**2
    out = dict(
        t=float(t),
        gl_energy=float(wq @ (p.A * psi + 0.5 * p.B * dphi**2)),
        mass_phi=float(wq @ phi),
        mass_sigma=float(wq @ sigma),
        psi_l1=float(wq @ psi),
        phi_h1_sq=float(wq @ phi**2 + grad_phi_sq),
        sigma_l2_sq=float(wq @ sigma**2),
        sigma_h1_sq=float(wq @ (sigma**2 + dsigma**2)),
        grad_mu_sq=float(wq @ dmu**2),
        grad_sigma_sq=float(wq @ dsigma**2),
        mu_mean_residual=float(abs(wq @ mu - wq @ (p.A * cfg.potential.dpsi(phi) - p.chi_phi * sigma))),
        row1_stiffness=float(max(np.abs(ops.S_m[0]).max(), np.abs(ops.S_n[0]).max(), np.abs(ops.S_D[0]).max())),
        mass_rate_phi=float(wq @ ((p.lambda_p * sigma - p.lambda_a) * h)),
    )
    nodes = dict(phi=phi, sigma=sigma, mu=mu, dphi=dphi, dsigma=dsigma, dmu=dmu, h=h)
    return out, nodes


def parabolic_record(t, alpha, gamma, beta, ops, cfg: ValidatedConfig, basis: Basis, sigma_inf_values) -> DiagnosticsRecord:
    p = cfg.params
    wq = basis.quad_weights
    out, v = _common_fields(t, alpha, gamma, beta, ops, cfg, basis)
    phi, sigma, mu, h = v["phi"], v["sigma"], v["mu"], v["h"]
    n_sigma = p.chi_sigma * sigma + p.chi_phi * (1.0 - phi)
    dn_sigma = p.chi_sigma * v["dsigma"] - p.chi_phi * v["dphi"]
    m = cfg.coeffs.m(phi)
    n = cfg.coeffs.n(phi)
    phi_b = basis.eval_traces(alpha)
    sigma_b = basis.eval_traces(gamma)
    sigma_inf = np.asarray(sigma_inf_values, dtype=float)
    n_sigma_b = p.chi_sigma * sigma_b + p.chi_phi * (1.0 - phi_b)
    nutrient_energy = wq @ (0.5 * p.chi_sigma * sigma**2 + p.chi_phi * sigma * (1.0 - phi))
    out.update(
        total_energy=float(out["gl_energy"] + nutrient_energy),
        dissipation=float(wq @ (m * v["dmu"] ** 2 + n * dn_sigma**2)),
        boundary_flux=float(p.K * np.sum(n_sigma_b * (sigma_b - sigma_inf))),
        source_work=float(wq @ (-mu * (p.lambda_p * sigma - p.lambda_a) * h + p.lambda_c * sigma * h * n_sigma)),
        sigma_gamma_sq=float(np.sum(sigma_b**2)),
        mass_rate_sigma=float(-p.lambda_c * (wq @ (sigma * h)) + p.K * np.sum(sigma_inf - sigma_b)),
    )
    if cfg.mode == "nondim":
        consumption = wq @ (sigma * h)
        out["mass_rate_sigma"] = float((-p.alpha_c * consumption + p.K * np.sum(sigma_inf - sigma_b)) / p.kappa)
    return DiagnosticsRecord(**out)


def quasistatic_record(
    t, alpha, gamma, beta, ops, cfg: ValidatedConfig, basis: Basis, sigma_inf_values, solver_stats=None
) -> QuasiDiagnosticsRecord:
    p = cfg.params
    wq = basis.quad_weights
    out, v = _common_fields(t, alpha, gamma, beta, ops, cfg, basis)
    phi, sigma, mu, h = v["phi"], v["sigma"], v["mu"], v["h"]
    dphi, dsigma, dmu = v["dphi"], v["dsigma"], v["dmu"]
    m = cfg.coeffs.m(phi)
    D = cfg.coeffs.D(phi)
    sigma_b = basis.eval_traces(gamma)
    sigma_inf = np.asarray(sigma_inf_values, dtype=float)

    d_grad_sigma = wq @ (D * dsigma**2)
    transport = p.eta * (wq @ (D * dphi * dsigma))
    consumption = p.lambda_c * (wq @ (h * sigma**2))
    boundary_sq = p.K * np.sum(sigma_b**2)
    supply = p.K * np.sum(sigma_inf * sigma_b)
    D0, D1 = cfg.coeffs.D.bounds
    grad_phi_sq = wq @ dphi**2
    stats = solver_stats or {}
    out.update(
        total_energy=out["gl_energy"],
        dissipation=float(wq @ (m * dmu**2) + d_grad_sigma),
        boundary_flux=float(boundary_sq - supply),
        source_work=float(consumption - wq @ ((p.lambda_p * sigma - p.lambda_a) * h * (mu + p.chi_phi * sigma))),
        sigma_gamma_sq=float(np.sum(sigma_b**2)),
        mass_rate_sigma=0.0,
        coupling=float(p.chi_phi * (wq @ (m * dmu * dsigma)) - transport),
        balance_residual=float(d_grad_sigma - transport + consumption - (supply - boundary_sq)),
        h1_bound_lhs=float(0.5 * D0 * (wq @ dsigma**2) + 0.5 * p.K * np.sum(sigma_b**2)),
        h1_bound_rhs=float(0.5 * p.K * np.sum(sigma_inf**2) + 0.5 * D1 * p.eta**2 * grad_phi_sq),
        nutrient_cond=float(stats.get("cond", 0.0)),
        refine_residual=float(stats.get("residual", 0.0)),
    )
    return QuasiDiagnosticsRecord(**out)


def _trapezoid_steps(times, values):
    times = np.asarray(times)
    values = np.asarray(values)
    return 0.5 * np.diff(times) * (values[1:] + values[:-1])


def energy_identity_residual(traj) -> dict:
    """Per-step defect of the energy balance.

    ``raw[n] = E(t_{n+1}) - E(t_n) + trapezoid(energy_rate)`` over the step;
    ``rate[n] = raw[n] / dt_n`` is the defect per unit time and converges
    at the order of the time integrator.
    """
    times = np.asarray(traj.times)
    energy = np.array([r.total_energy for r in traj.records])
    rates = np.array([r.energy_rate for r in traj.records])
    raw = np.diff(energy) + _trapezoid_steps(times, rates)
    rate = raw / np.diff(times) if raw.size else raw
    return {
        "raw": raw,
        "rate": rate,
        "max_raw": float(np.max(np.abs(raw))) if raw.size else 0.0,
        "max_rate": float(np.max(np.abs(rate))) if rate.size else 0.0,
    }


def quasi_energy_residual(traj) -> dict:
    """Same as :func:`energy_identity_residual` for quasi-static records,
    where the energy is the Ginzburg-Landau part and the rate includes the
    nutrient balance and the cross terms."""
    return energy_identity_residual(traj)


def mass_residuals(traj) -> dict:
    """Per-step defects of the phase and nutrient mass balances."""
    times = np.asarray(traj.times)
    out = {}
    for mass, rate in (("mass_phi", "mass_rate_phi"), ("mass_sigma", "mass_rate_sigma")):
        m = np.array([getattr(r, mass) for r in traj.records])
        q = np.array([getattr(r, rate) for r in traj.records])
        out[mass] = np.diff(m) - _trapezoid_steps(times, q)
    return out


def apriori_monitors(traj) -> dict:
    """Maxima of the pointwise-in-time quantities and the cumulative
    integrals of the dissipative ones."""
    times = np.asarray(traj.times)
    col = {name: np.array([getattr(r, name) for r in traj.records]) for name in
           ("psi_l1", "phi_h1_sq", "sigma_l2_sq", "sigma_h1_sq", "grad_mu_sq", "grad_sigma_sq", "sigma_gamma_sq")}
    out = {f"max_{name}": float(np.max(col[name])) for name in ("psi_l1", "phi_h1_sq", "sigma_l2_sq", "sigma_h1_sq")}
    for name in ("grad_mu_sq", "grad_sigma_sq", "sigma_gamma_sq"):
        out[f"int_{name}"] = float(np.sum(_trapezoid_steps(times, col[name])))
    out["finite"] = bool(all(np.all(np.isfinite(v)) for v in col.values()) and all(np.isfinite(v) for v in out.values() if isinstance(v, float)))
    return out
