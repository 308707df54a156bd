"""State-dependent Galerkin matrices and load vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import Basis
from .errors import ConfigError
from .model import Coefficients, Potential


@dataclass(frozen=True)
class BoundaryData:
    """Far-field nutrient supply: one value at each end of the interval,
    varying in time.

    ``constant``: fixed ``(left, right)``; ``table``: piecewise-linear in t
    through ``times``/``left``/``right``; ``sinusoid``: constant plus
    ``amplitude * sin(2 pi t / period)`` on both ends.
    """

    kind: str = "constant"
    left: tuple = (0.0,)
    right: tuple = (0.0,)
    times: tuple = ()
    amplitude: float = 0.0
    period: float = 1.0

    @classmethod
    def constant(cls, left: float, right: float | None = None) -> "BoundaryData":
        right = left if right is None else right
        return cls("constant", (float(left),), (float(right),))

    @classmethod
    def table(cls, times, left, right) -> "BoundaryData":
        times, left, right = (tuple(float(v) for v in a) for a in (times, left, right))
        if not (len(times) == len(left) == len(right)) or len(times) < 1:
            raise ConfigError("sigma_inf table needs equal-length t, left, right")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("sigma_inf table times must be strictly increasing")
        return cls("table", left, right, times)

    @classmethod
    def sinusoid(cls, left: float, right: float, amplitude: float, period: float) -> "BoundaryData":
        if period <= 0:
            raise ConfigError("sigma_inf sinusoid period must be positive")
        return cls("sinusoid", (float(left),), (float(right),), (), float(amplitude), float(period))

    @classmethod
    def from_dict(cls, preset) -> "BoundaryData":
        if isinstance(preset, (int, float)):
            return cls.constant(preset)
        preset = dict(preset)
        kind = preset.pop("kind", "constant")
        allowed = {
            "constant": {"left", "right"},
            "table": {"t", "left", "right"},
            "sinusoid": {"left", "right", "amplitude", "period"},
        }
        if kind not in allowed:
            raise ConfigError(f"unknown sigma_inf kind {kind!r}")
        extra = set(preset) - allowed[kind]
        if extra:
            raise ConfigError(f"unknown keys in sigma_inf: {sorted(extra)}")
        try:
            if kind == "constant":
                return cls.constant(preset["left"], preset.get("right"))
            if kind == "table":
                return cls.table(preset["t"], preset["left"], preset["right"])
            return cls.sinusoid(preset["left"], preset["right"], preset["amplitude"], preset["period"])
        except KeyError as exc:
            raise ConfigError(f"sigma_inf {kind!r} is missing key {exc}") from None

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "left": self.left[0], "right": self.right[0]}
        if self.kind == "table":
            return {"kind": "table", "t": list(self.times), "left": list(self.left), "right": list(self.right)}
        return {
            "kind": "sinusoid",
            "left": self.left[0],
            "right": self.right[0],
            "amplitude": self.amplitude,
            "period": self.period,
        }

    def __call__(self, t: float) -> np.ndarray:
        if self.kind == "constant":
            return np.array([self.left[0], self.right[0]])
        if self.kind == "table":
            return np.array([np.interp(t, self.times, self.left), np.interp(t, self.times, self.right)])
        s = self.amplitude * np.sin(2.0 * np.pi * t / self.period)
        return np.array([self.left[0] + s, self.right[0] + s])

    def shifted(self, delta_left: float, delta_right: float) -> "BoundaryData":
        """Same profile plus a constant offset at each end."""
        left = tuple(v + delta_left for v in self.left)
        right = tuple(v + delta_right for v in self.right)
        return BoundaryData(self.kind, left, right, self.times, self.amplitude, self.period)

    def sup_norm_sq(self, T: float) -> float:
        """``sup_t ||sigma_inf(t)||^2`` on the boundary (two points)."""
        if self.kind == "constant":
            return self.left[0] ** 2 + self.right[0] ** 2
        if self.kind == "table":
            ts = np.concatenate([[0.0, T], [t for t in self.times if 0.0 <= t <= T]])
            return float(max(np.sum(self(t) ** 2) for t in ts))
        ts = np.linspace(0.0, T, 2001)
        return float(max(np.sum(self(t) ** 2) for t in ts))


@dataclass(frozen=True)
class AssembledOperators:
    S: np.ndarray
    S_m: np.ndarray
    S_n: np.ndarray
    S_D: np.ndarray
    M_h: np.ndarray
    M_gamma: np.ndarray
    psi_vec: np.ndarray
    h_vec: np.ndarray
    Sigma_vec: np.ndarray
    phi_nodes: np.ndarray
    h_nodes: np.ndarray


def weighted_stiffness(basis: Basis, weight_nodes) -> np.ndarray:
    out = (basis.dW * (basis.quad_weights * weight_nodes)) @ basis.dW.T
    return 0.5 * (out + out.T)


def weighted_mass(basis: Basis, weight_nodes) -> np.ndarray:
    out = (basis.W * (basis.quad_weights * weight_nodes)) @ basis.W.T
    return 0.5 * (out + out.T)


def boundary_load(basis: Basis, sigma_inf_values) -> np.ndarray:
    """``Sigma_j = sigma_inf(0) w_j(0) + sigma_inf(L) w_j(L)``."""
    return basis.traces @ np.asarray(sigma_inf_values, dtype=float)


def assemble(
    basis: Basis,
    alpha,
    coeffs: Coefficients,
    pot: Potential,
    sigma_inf_values=(0.0, 0.0),
) -> AssembledOperators:
    phi = basis.eval_field(alpha)
    h = coeffs.h(phi)
    wq = basis.quad_weights
    return AssembledOperators(
        S=basis.S,
        S_m=weighted_stiffness(basis, coeffs.m(phi)),
        S_n=weighted_stiffness(basis, coeffs.n(phi)),
        S_D=weighted_stiffness(basis, coeffs.D(phi)),
        M_h=weighted_mass(basis, h),
        M_gamma=basis.M_gamma,
        psi_vec=basis.W @ (wq * pot.dpsi(phi)),
        h_vec=basis.W @ (wq * h),
        Sigma_vec=boundary_load(basis, sigma_inf_values),
        phi_nodes=phi,
        h_nodes=h,
    )
