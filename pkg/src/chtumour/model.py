"""Model constants, coefficient functions, the double-well potential and
the assumption checks that every run goes through before integration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    ConstraintViolated,
    DegenerateParameter,
    NonpositiveConstant,
)

MODES = ("parabolic", "nondim", "quasistatic")


@dataclass(frozen=True)
class ModelParams:
    A: float = 1.0
    B: float = 0.01
    K: float = 1.0
    chi_phi: float = 0.0
    chi_sigma: float = 1.0
    lambda_p: float = 0.0
    lambda_a: float = 0.0
    lambda_c: float = 0.0
    eta: float = 0.0
    kappa: float = 1.0
    theta: float = 0.0
    alpha_c: float = 0.0
    L: float = 1.0
    T: float = 1.0

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)


_PRESET_KEYS = {"constant": ("value",), "affine": ("a", "b", "lo", "hi"), "table": ("x", "y")}

STRICTLY_POSITIVE = ("A", "B", "K", "chi_sigma", "L", "T")
NONNEGATIVE = ("chi_phi", "lambda_p", "lambda_a", "lambda_c", "eta", "theta", "alpha_c")


@dataclass(frozen=True)
class CoefficientFunction:
    """A certifiable scalar coefficient ``R -> R``.

    Three presets are supported:

    * ``constant``: ``value``
    * ``affine``: ``clip(a + b*t, lo, hi)``
    * ``table``: piecewise-linear interpolation of ``(x, y)`` with constant
      extension outside the table.

    Because the form is known, the bounds and the Lipschitz constant are
    exact rather than sampled.
    """

    kind: str
    params: tuple = ()

    @classmethod
    def constant(cls, value: float) -> "CoefficientFunction":
        return cls("constant", (float(value),))

    @classmethod
    def affine(cls, a: float, b: float, lo: float, hi: float) -> "CoefficientFunction":
        if lo > hi:
            raise ConstraintViolated(f"affine preset needs lo <= hi, got lo={lo}, hi={hi}")
        return cls("affine", (float(a), float(b), float(lo), float(hi)))

    @classmethod
    def table(cls, x, y) -> "CoefficientFunction":
        x = tuple(float(v) for v in x)
        y = tuple(float(v) for v in y)
        if len(x) != len(y) or len(x) < 2:
            raise ConstraintViolated("table preset needs matching x and y with at least two entries")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ConstraintViolated("table preset needs strictly increasing x")
        return cls("table", (x, y))

    @classmethod
    def from_dict(cls, preset) -> "CoefficientFunction":
        if isinstance(preset, (int, float)):
            return cls.constant(preset)
        preset = dict(preset)
        kind = preset.pop("kind", None)
        keys = _PRESET_KEYS.get(kind)
        if keys is None:
            raise ConstraintViolated(f"unknown coefficient preset kind {kind!r}")
        if set(preset) != set(keys):
            raise ConstraintViolated(
                f"preset {kind!r} needs exactly the keys {list(keys)}, got {sorted(preset)}"
            )
        return getattr(cls, kind)(*(preset[k] for k in keys))

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.params[0]}
        if self.kind == "affine":
            a, b, lo, hi = self.params
            return {"kind": "affine", "a": a, "b": b, "lo": lo, "hi": hi}
        x, y = self.params
        return {"kind": "table", "x": list(x), "y": list(y)}

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.params[0])
        if self.kind == "affine":
            a, b, lo, hi = self.params
            return np.clip(a + b * t, lo, hi)
        x, y = self.params
        return np.interp(t, x, y)

    @property
    def bounds(self) -> tuple[float, float]:
        if self.kind == "constant":
            return self.params[0], self.params[0]
        if self.kind == "affine":
            a, b, lo, hi = self.params
            if b == 0.0:
                v = min(max(a, lo), hi)
                return v, v
            return lo, hi
        y = self.params[1]
        return min(y), max(y)

    @property
    def lipschitz(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "affine":
            return abs(self.params[1])
        x, y = self.params
        return max(abs((y1 - y0) / (x1 - x0)) for x0, x1, y0, y1 in zip(x, x[1:], y, y[1:]))

    @property
    def is_constant(self) -> bool:
        lo, hi = self.bounds
        return lo == hi

    def scaled(self, factor: float) -> "CoefficientFunction":
        """Return ``factor * self``; ``factor`` must be positive."""
        if factor <= 0:
            raise DegenerateParameter(f"scale factor must be positive, got {factor}")
        if self.kind == "constant":
            return CoefficientFunction.constant(self.params[0] * factor)
        if self.kind == "affine":
            a, b, lo, hi = self.params
            return CoefficientFunction.affine(a * factor, b * factor, lo * factor, hi * factor)
        x, y = self.params
        return CoefficientFunction.table(x, [v * factor for v in y])


def default_h(t):
    """Interpolation function ``clamp((t + 1) / 2, 0, 1)``."""
    return np.clip(0.5 * (np.asarray(t, dtype=float) + 1.0), 0.0, 1.0)


DEFAULT_H = CoefficientFunction.affine(0.5, 0.5, 0.0, 1.0)


@dataclass(frozen=True)
class Coefficients:
    m: CoefficientFunction = field(default_factory=lambda: CoefficientFunction.constant(1.0))
    n: CoefficientFunction = field(default_factory=lambda: CoefficientFunction.constant(1.0))
    D: CoefficientFunction = field(default_factory=lambda: CoefficientFunction.constant(1.0))
    h: CoefficientFunction = DEFAULT_H

    def replace(self, **changes) -> "Coefficients":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Potential:
    """Double-well potential with the growth constants it is certified for:
    ``psi(t) >= R1 t^2 - R2``, ``|dpsi(t)| <= R3 (1 + |t|)`` and
    ``dpsi`` Lipschitz with constant ``lip_dpsi``."""

    name: str
    psi: Callable
    dpsi: Callable
    R1: float
    R2: float
    R3: float
    lip_dpsi: float


def _truncated_psi(s):
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    inner = 0.25 * (1.0 - s * s) ** 2
    outer = (a - 1.0) ** 2
    return np.where(a <= 1.0, inner, outer)


def _truncated_dpsi(s):
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    inner = -s * (1.0 - s * s)
    outer = 2.0 * (a - 1.0) * np.sign(s)
    return np.where(a <= 1.0, inner, outer)


def default_potential() -> Potential:
    """Quartic double well inside [-1, 1], continued quadratically outside.

    Both branches have second derivative 2 at ``|s| = 1``, so the potential
    is C^2 there.  ``|psi''| <= 2`` everywhere gives ``lip_dpsi = 2``;
    ``(|t| - 1)^2 - t^2/2 + 1 = (|t| - 2)^2 / 2`` gives ``R1 = 1/2``,
    ``R2 = 1``; the outer branch forces ``R3 = 2``.
    """
    return Potential(
        name="truncated_double_well",
        psi=_truncated_psi,
        dpsi=_truncated_dpsi,
        R1=0.5,
        R2=1.0,
        R3=2.0,
        lip_dpsi=2.0,
    )


POTENTIALS = {"truncated_double_well": default_potential}


def active_transport_map(D_fn: CoefficientFunction, chi_phi: float, eta: float):
    """Mobility and diffusivity that turn the chemotaxis/diffusion flux into
    the active-transport form ``-D(phi) grad(sigma - eta*phi)``.

    Returns ``(n, chi_sigma)`` with ``n = eta*D/chi_phi`` and
    ``chi_sigma = chi_phi/eta``.
    """
    if chi_phi <= 0 or eta <= 0:
        raise DegenerateParameter(
            f"active transport needs chi_phi > 0 and eta > 0 (got chi_phi={chi_phi}, eta={eta})"
        )
    return D_fn.scaled(eta / chi_phi), chi_phi / eta


@dataclass(frozen=True)
class ValidatedConfig:
    params: ModelParams
    coeffs: Coefficients
    potential: Potential
    mode: str

    @property
    def h_inf(self) -> float:
        return self.coeffs.h.bounds[1]


def coupling_threshold(params: ModelParams, pot: Potential) -> float:
    """Lower bound ``2 chi_phi^2 / (chi_sigma R1)`` that A must exceed."""
    return 2.0 * params.chi_phi**2 / (params.chi_sigma * pot.R1)


def validate(params: ModelParams, coeffs: Coefficients, pot: Potential, mode: str) -> ValidatedConfig:
    if mode not in MODES:
        raise ConstraintViolated(f"unknown mode {mode!r}; expected one of {MODES}")
    for name in STRICTLY_POSITIVE:
        value = getattr(params, name)
        if not (np.isfinite(value) and value > 0):
            raise NonpositiveConstant(f"{name} must be positive, got {value}")
    for name in NONNEGATIVE:
        value = getattr(params, name)
        if not (np.isfinite(value) and value >= 0):
            raise ConstraintViolated(f"{name} must be non-negative, got {value}")

    for name in ("m", "n", "D"):
        lo, _ = getattr(coeffs, name).bounds
        if not lo > 0:
            raise NonpositiveConstant(f"mobility {name} must have a positive lower bound, got {lo}")
    h_lo, _ = coeffs.h.bounds
    if h_lo < 0:
        raise ConstraintViolated(f"interpolation function h must be non-negative, lower bound {h_lo}")
    if float(coeffs.h(-1.0)) != 0.0 or float(coeffs.h(1.0)) != 1.0:
        raise ConstraintViolated("interpolation function must satisfy h(-1) = 0 and h(1) = 1")

    for name in ("R1", "R2", "R3", "lip_dpsi"):
        if not getattr(pot, name) > 0:
            raise NonpositiveConstant(f"potential constant {name} must be positive")

    if mode == "parabolic":
        bound = coupling_threshold(params, pot)
        if not params.A > bound:
            raise ConstraintViolated(
                "coupling constraint A > 2*chi_phi^2/(chi_sigma*R1) violated: "
                f"A={params.A} but 2*chi_phi^2/(chi_sigma*R1)={bound}"
            )
    elif mode == "nondim":
        if not params.kappa > 0:
            raise NonpositiveConstant(f"kappa must be positive in nondim mode, got {params.kappa}")
    return ValidatedConfig(params=params, coeffs=coeffs, potential=pot, mode=mode)
