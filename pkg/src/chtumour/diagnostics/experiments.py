"""Verification experiments built on top of the integrators."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..basis import default_panels
from ..errors import ConfigError
from .records import apriori_monitors, energy_identity_residual

PERTURBED_MODES = 8


def _integrate(problem, alpha0, gamma0, control):
    # imported lazily: the integrators import the record module of this package
    from ..dynamics import GalerkinState, integrate
    from ..quasistatic import integrate_quasistatic

    if problem.config.mode == "quasistatic":
        return integrate_quasistatic(alpha0, problem, control)
    return integrate(GalerkinState(0.0, alpha0, gamma0), problem, control)


def initial_coefficients(cfg, problem, seed: int = 0):
    from ..config import phi0_function, sigma0_function

    L = problem.params.L
    alpha0 = problem.basis.project(phi0_function(cfg.phi0, L, seed))
    gamma0 = problem.basis.project(sigma0_function(cfg.sigma0, L))
    return alpha0, gamma0


def run(cfg, mode: str, seed: int = 0, control=None, k=None, quad_panels=None):
    """Build the problem for ``mode`` and integrate from the preset initial data."""
    problem = cfg.problem(mode, k=k, quad_panels=quad_panels)
    alpha0, gamma0 = initial_coefficients(cfg, problem, seed)
    return problem, _integrate(problem, alpha0, gamma0, control or cfg.control())


# continuous dependence ------------------------------------------------------

def _unit(rng, n, size):
    v = np.zeros(size)
    v[:n] = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def dependence_numerator(traj_a, traj_b, basis, mode: str) -> dict:
    """Norms of the difference of two trajectories on the same time grid."""
    if len(traj_a) != len(traj_b) or not np.allclose(traj_a.times, traj_b.times, rtol=0, atol=1e-14):
        raise ValueError("trajectories must share a time grid (use fixed steps)")
    times = np.asarray(traj_a.times)
    da = np.asarray(traj_a.alphas) - np.asarray(traj_b.alphas)
    dg = np.asarray(traj_a.gammas) - np.asarray(traj_b.gammas)
    db = np.asarray(traj_a.betas) - np.asarray(traj_b.betas)
    phi_sq = np.sum(da**2, axis=1)
    sigma_sq = np.sum(dg**2, axis=1)
    mu_sq = np.sum(db**2, axis=1)
    grad_phi_sq = np.einsum("ti,ij,tj->t", da, basis.S, da)
    grad_sigma_sq = np.einsum("ti,ij,tj->t", dg, basis.S, dg)
    gamma_sq = np.sum((dg @ basis.traces) ** 2, axis=1)
    integrand = mu_sq + grad_sigma_sq + gamma_sq + grad_phi_sq
    integral = float(np.sum(0.5 * np.diff(times) * (integrand[1:] + integrand[:-1])))
    sup = float(np.max(phi_sq if mode == "quasistatic" else phi_sq + sigma_sq))
    return {"sup": sup, "integral": integral, "total": sup + integral}


def continuous_dependence_experiment(cfg, eps_list, mode: str = "parabolic", seed: int = 0, workers: int = 1) -> dict:
    """Ratio of solution differences to data differences for a sweep of
    perturbation sizes.

    Initial and boundary data of the second trajectory are shifted by
    ``eps`` times fixed-seed unit perturbations (the first eight modes for
    phi and sigma, a constant offset at each boundary point for sigma_inf).
    A bounded ratio across the sweep is the discrete footprint of
    continuous dependence on the data.
    """
    if mode not in ("parabolic", "quasistatic"):
        raise ConfigError("continuous dependence is defined for parabolic and quasistatic modes")
    coeffs = cfg.coeffs
    needed = ("m", "n") if mode == "parabolic" else ("m", "D")
    for name in needed:
        if not getattr(coeffs, name).is_constant:
            raise ConfigError(f"continuous dependence needs a constant mobility {name}")

    problem = cfg.problem(mode)
    basis = problem.basis
    control = cfg.control(adaptive=False)
    alpha0, gamma0 = initial_coefficients(cfg, problem, seed)
    rng = np.random.default_rng(seed)
    km = min(basis.k, PERTURBED_MODES)
    d_alpha = _unit(rng, km, basis.k)
    d_gamma = _unit(rng, km, basis.k)
    d_bdry = rng.standard_normal(2)
    d_bdry /= np.linalg.norm(d_bdry)
    T = problem.params.T

    base = _integrate(problem, alpha0, gamma0, control)

    def one(eps):
        if eps == 0.0:
            return {"eps": 0.0, "numerator": 0.0, "denominator": 0.0, "Q": 0.0}
        shifted = type(problem)(problem.config, basis, problem.sigma_inf.shifted(*(eps * d_bdry)))
        traj = _integrate(shifted, alpha0 + eps * d_alpha, gamma0 + eps * d_gamma, control)
        num = dependence_numerator(traj, base, basis, mode)
        den = eps**2 * (1.0 + T) if mode == "quasistatic" else eps**2 * (2.0 + T)
        return {"eps": float(eps), "numerator": num["total"], "sup_part": num["sup"],
                "integral_part": num["integral"], "denominator": den, "Q": num["total"] / den}

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(one, [float(e) for e in eps_list]))
    qs = [r["Q"] for r in rows if r["eps"] > 0]
    spread = max(qs) / min(qs) if qs and min(qs) > 0 else float("inf") if qs else 1.0
    return {
        "experiment": "continuous_dependence",
        "mode": mode,
        "rows": rows,
        "Q_max": max(qs) if qs else 0.0,
        "Q_spread": spread,
        "finite": bool(all(np.isfinite(q) for q in qs)),
        "monitors": apriori_monitors(base),
    }


# Galerkin self-convergence --------------------------------------------------

def self_convergence(cfg, k_list, mode: str = "parabolic", seed: int = 0, check_quadrature: bool = True, workers: int = 1) -> dict:
    """``||phi_k - phi_2k||_L2`` at the final time for each ``k`` in
    ``k_list``, all runs on one fixed time grid and one quadrature rule."""
    k_list = sorted(int(k) for k in k_list)
    if any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise ConfigError("k_list must be strictly increasing")
    all_k = sorted(set(k_list) | {2 * k for k in k_list})
    panels = default_panels(all_k[-1])
    control = cfg.control(adaptive=False)

    def final_alpha(k, quad=panels):
        _, traj = run(cfg, mode, seed, control, k=k, quad_panels=quad)
        return traj.alphas[-1]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        finals = dict(zip(all_k, pool.map(final_alpha, all_k)))
    rows = []
    for k in k_list:
        coarse = np.zeros(2 * k)
        coarse[:k] = finals[k]
        rows.append({"k": k, "error": float(np.linalg.norm(coarse - finals[2 * k]))})
    errors = [r["error"] for r in rows]
    report = {
        "experiment": "self_convergence",
        "mode": mode,
        "rows": rows,
        "strictly_decreasing": bool(all(b < a for a, b in zip(errors, errors[1:]))),
    }
    if check_quadrature:
        k = k_list[-1]
        doubled = final_alpha(k, 2 * panels)
        report["quadrature_sensitivity"] = {"k": k, "panels": panels,
                                            "change": float(np.linalg.norm(doubled - finals[k]))}
    return report


# time-order study -----------------------------------------------------------

def dt_order_study(cfg, dt_levels, scheme: str, mode: str = "parabolic", seed: int = 0) -> dict:
    """Maximum energy-identity defect rate on a sequence of halved steps."""
    rows = []
    for dt in dt_levels:
        _, traj = run(cfg, mode, seed, cfg.control(adaptive=False, scheme=scheme, dt=float(dt)))
        res = energy_identity_residual(traj)
        rows.append({"dt": float(dt), "max_rate": res["max_rate"], "max_raw": res["max_raw"], "steps": len(traj) - 1})
    ratios = [a["max_rate"] / b["max_rate"] if b["max_rate"] > 0 else float("inf") for a, b in zip(rows, rows[1:])]
    observed = [float(np.log2(r)) if np.isfinite(r) and r > 0 else float("nan") for r in ratios]
    return {"experiment": "dt_order", "scheme": scheme, "mode": mode, "rows": rows,
            "ratios": ratios, "observed_order": observed}


# nondimensional kappa sweep -------------------------------------------------

def kappa_study(cfg, kappa_list, seed: int = 0) -> dict:
    """Distance between the nondimensional parabolic model at small kappa and
    the quasi-static model with matching transport and consumption.

    Reported only: with Robin data the quasi-static model is not known to be
    the kappa -> 0 limit.
    """
    control = cfg.control(adaptive=False)
    qs_cfg = cfg.replace(
        params=cfg.params.replace(eta=cfg.params.theta, lambda_c=cfg.params.alpha_c), sigma0=None
    )
    _, ref = run(qs_cfg, "quasistatic", seed, control)
    ref_alpha = np.asarray(ref.alphas)
    rows = []
    for kappa in kappa_list:
        kcfg = cfg.replace(params=cfg.params.replace(kappa=float(kappa)))
        _, traj = run(kcfg, "nondim", seed, control)
        diff = np.asarray(traj.alphas) - ref_alpha
        rows.append({"kappa": float(kappa),
                     "sup_phi_distance": float(np.sqrt(np.max(np.sum(diff**2, axis=1)))),
                     "final_phi_distance": float(np.linalg.norm(diff[-1]))})
    return {"experiment": "kappa_sweep", "rows": rows}
