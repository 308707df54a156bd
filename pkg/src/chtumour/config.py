"""JSON run configuration.

A configuration is one flat JSON object.  Model constants use the field
names of :class:`~chtumour.model.ModelParams`; the remaining keys select
discretisation, presets and experiment sweeps.  Unknown keys are rejected.
See README.md for the full key table.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import BoundaryData
from .basis import build_basis
from .dynamics import Problem, StepControl
from .errors import ConfigError
from .model import (
    MODES,
    POTENTIALS,
    CoefficientFunction,
    Coefficients,
    ModelParams,
    ValidatedConfig,
    active_transport_map,
    validate,
)

PARAM_KEYS = tuple(f.name for f in dataclasses.fields(ModelParams))
RUN_KEYS = (
    "mode",
    "k",
    "quad_panels",
    "m",
    "n",
    "D",
    "h",
    "potential",
    "active_transport",
    "phi0",
    "sigma0",
    "sigma_inf",
    "scheme",
    "dt",
    "tol",
    "max_steps",
    "adaptive",
    "eps_list",
    "k_list",
    "dt_levels",
    "kappa_list",
    "figures",
)
ALLOWED_KEYS = frozenset(PARAM_KEYS + RUN_KEYS)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    mode: str | None = None
    k: int = 32
    quad_panels: int | None = None
    coeffs: Coefficients = field(default_factory=Coefficients)
    potential: str = "truncated_double_well"
    active_transport: bool = False
    phi0: dict = field(default_factory=lambda: {"kind": "tanh", "center": 0.5, "width": 0.05, "radius": 0.25})
    sigma0: dict | None = None
    sigma_inf: BoundaryData = field(default_factory=lambda: BoundaryData.constant(1.0))
    scheme: str = "imex"
    dt: float = 1e-4
    tol: float = 1e-7
    max_steps: int = 200_000
    adaptive: bool = True
    eps_list: tuple = (1e-2, 1e-3, 1e-4)
    k_list: tuple = (8, 16, 32)
    dt_levels: tuple = ()
    kappa_list: tuple = (1e-1, 1e-2, 1e-3)
    figures: bool = True

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def resolved_mode(self, default: str) -> str:
        return self.mode or default

    def control(self, **overrides) -> StepControl:
        kw = dict(dt=self.dt, tol=self.tol, max_steps=self.max_steps, adaptive=self.adaptive, scheme=self.scheme)
        kw.update(overrides)
        return StepControl(**kw)

    def validated(self, mode: str) -> ValidatedConfig:
        params, coeffs = self.params, self.coeffs
        if self.active_transport:
            n, chi_sigma = active_transport_map(coeffs.D, params.chi_phi, params.eta)
            coeffs = coeffs.replace(n=n)
            params = params.replace(chi_sigma=chi_sigma)
        return validate(params, coeffs, POTENTIALS[self.potential](), mode)

    def problem(self, mode: str, k: int | None = None, quad_panels: int | None = None) -> Problem:
        k = self.k if k is None else k
        panels = self.quad_panels if quad_panels is None else quad_panels
        return Problem(self.validated(mode), build_basis(k, self.params.L, panels), self.sigma_inf)

    def to_dict(self) -> dict:
        out = {name: getattr(self.params, name) for name in PARAM_KEYS}
        out.update(
            mode=self.mode,
            k=self.k,
            quad_panels=self.quad_panels,
            m=self.coeffs.m.to_dict(),
            n=self.coeffs.n.to_dict(),
            D=self.coeffs.D.to_dict(),
            h=self.coeffs.h.to_dict(),
            potential=self.potential,
            active_transport=self.active_transport,
            phi0=self.phi0,
            sigma0=self.sigma0,
            sigma_inf=self.sigma_inf.to_dict(),
            scheme=self.scheme,
            dt=self.dt,
            tol=self.tol,
            max_steps=self.max_steps,
            adaptive=self.adaptive,
            eps_list=list(self.eps_list),
            k_list=list(self.k_list),
            dt_levels=list(self.dt_levels),
            kappa_list=list(self.kappa_list),
            figures=self.figures,
        )
        return {key: value for key, value in out.items() if value is not None}


def _number(doc, key, cast=float):
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return cast(value)


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(doc) - ALLOWED_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {unknown}")

    params = ModelParams(**{key: _number(doc, key) for key in PARAM_KEYS if key in doc})
    kw: dict = {"params": params}
    if "mode" in doc:
        if doc["mode"] not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {doc['mode']!r}")
        kw["mode"] = doc["mode"]
    for key in ("k", "max_steps"):
        if key in doc:
            kw[key] = _number(doc, key, int)
    if doc.get("quad_panels") is not None:
        kw["quad_panels"] = _number(doc, "quad_panels", int)
    for key in ("dt", "tol"):
        if key in doc:
            kw[key] = _number(doc, key)
    for key in ("adaptive", "active_transport", "figures"):
        if key in doc:
            if not isinstance(doc[key], bool):
                raise ConfigError(f"{key} must be true or false")
            kw[key] = doc[key]
    if "scheme" in doc:
        if doc["scheme"] not in ("imex", "trapezoidal"):
            raise ConfigError(f"scheme must be 'imex' or 'trapezoidal', got {doc['scheme']!r}")
        kw["scheme"] = doc["scheme"]
    if "potential" in doc:
        if doc["potential"] not in POTENTIALS:
            raise ConfigError(f"unknown potential {doc['potential']!r}")
        kw["potential"] = doc["potential"]

    coeffs = {}
    for key in ("m", "n", "D", "h"):
        if key in doc:
            try:
                coeffs[key] = CoefficientFunction.from_dict(doc[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad preset for {key}: {exc}") from None
    kw["coeffs"] = Coefficients(**coeffs)

    if "phi0" in doc:
        kw["phi0"] = _check_preset(doc["phi0"], PHI0_KEYS, "phi0")
    if doc.get("sigma0") is not None:
        kw["sigma0"] = _check_preset(doc["sigma0"], SIGMA0_KEYS, "sigma0")
    if "sigma_inf" in doc:
        kw["sigma_inf"] = BoundaryData.from_dict(doc["sigma_inf"])
    for key in ("eps_list", "k_list", "dt_levels", "kappa_list"):
        if key in doc:
            values = doc[key]
            if not isinstance(values, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
                raise ConfigError(f"{key} must be a list of numbers")
            kw[key] = tuple(int(v) for v in values) if key == "k_list" else tuple(float(v) for v in values)

    cfg = RunConfig(**kw)
    if cfg.mode == "quasistatic" and cfg.sigma0 is not None:
        raise ConfigError("quasistatic mode takes no sigma0: the nutrient is determined by phi")
    return cfg


def load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    return config_from_dict(doc)


# initial data ---------------------------------------------------------------

PHI0_KEYS = {
    "tanh": ({"center", "width"}, {"radius"}),
    "random": ({"amplitude"}, {"mean", "modes", "seed"}),
    "constant": ({"value"}, set()),
}
SIGMA0_KEYS = {
    "constant": ({"value"}, set()),
    "ramp": ({"left", "right"}, set()),
}


def _check_preset(preset, table, name):
    if isinstance(preset, (int, float)) and not isinstance(preset, bool):
        return {"kind": "constant", "value": float(preset)}
    if not isinstance(preset, dict):
        raise ConfigError(f"{name} must be a preset object")
    kind = preset.get("kind")
    if kind not in table:
        raise ConfigError(f"{name}: unknown kind {kind!r}; expected one of {sorted(table)}")
    required, optional = table[kind]
    keys = set(preset) - {"kind"}
    if not required <= keys or keys - required - optional:
        raise ConfigError(f"{name}: {kind!r} needs keys {sorted(required)} (optional {sorted(optional)}), got {sorted(keys)}")
    return dict(preset)


def phi0_function(preset: dict, L: float, seed: int = 0):
    """Callable initial phase field for a preset.

    ``tanh``: a single interface at ``center``, or with ``radius`` a tumour
    ``|x - center| < radius``; ``width`` is the interface thickness.
    ``random``: ``mean`` plus a fixed-seed combination of the first
    ``modes`` cosines, scaled so its sup norm is at most ``amplitude``.
    """
    kind = preset["kind"]
    if kind == "constant":
        value = float(preset["value"])
        return lambda x: np.full_like(np.asarray(x, dtype=float), value)
    if kind == "tanh":
        c, w = float(preset["center"]), float(preset["width"])
        if "radius" in preset:
            r = float(preset["radius"])
            return lambda x: np.tanh((r - np.abs(np.asarray(x) - c)) / (np.sqrt(2.0) * w))
        return lambda x: np.tanh((np.asarray(x) - c) / (np.sqrt(2.0) * w))
    mean = float(preset.get("mean", 0.0))
    amp = float(preset["amplitude"])
    modes = int(preset.get("modes", 6))
    rng = np.random.default_rng(int(preset.get("seed", seed)))
    c = rng.standard_normal(modes)
    c = c / np.sum(np.abs(c))
    j = np.arange(1, modes + 1)

    def phi0(x):
        x = np.asarray(x, dtype=float)
        return mean + amp * (c @ np.cos(np.outer(j, x) * np.pi / L))

    return phi0


def sigma0_function(preset: dict | None, L: float):
    if preset is None:
        preset = {"kind": "constant", "value": 0.0}
    if preset["kind"] == "constant":
        value = float(preset["value"])
        return lambda x: np.full_like(np.asarray(x, dtype=float), value)
    left, right = float(preset["left"]), float(preset["right"])
    return lambda x: left + (right - left) * np.asarray(x, dtype=float) / L
