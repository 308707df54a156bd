"""Neumann-Laplacian cosine eigenbasis on (0, L) with a composite
Gauss-Legendre rule.

Every inner product in the package (mass, stiffness, boundary and the
nonlinear assemblies) is taken with the one rule stored here, which is what
makes the Galerkin energy and mass identities hold to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientQuadrature

GAUSS_POINTS = 5
ORTHONORMALITY_TOL = 1e-10


def default_panels(k: int) -> int:
    return max(2 * k, 16)


def composite_gauss(L: float, panels: int, points: int = GAUSS_POINTS):
    """Nodes and weights of the ``points``-point Gauss-Legendre rule on each
    of ``panels`` equal sub-intervals of (0, L)."""
    ref_x, ref_w = np.polynomial.legendre.leggauss(points)
    edges = np.linspace(0.0, L, panels + 1)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = (half[:, None] * ref_x[None, :] + 0.5 * (a + b)[:, None]).ravel()
    weights = (half[:, None] * ref_w[None, :]).ravel()
    return nodes, weights


def mode_values(k: int, L: float, x) -> np.ndarray:
    """``k x len(x)`` table of ``w_i(x)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    i = np.arange(k)[:, None]
    vals = np.sqrt(2.0 / L) * np.cos(i * np.pi * x[None, :] / L)
    vals[0, :] = 1.0 / np.sqrt(L)
    return vals


def mode_derivatives(k: int, L: float, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    i = np.arange(k)[:, None]
    vals = -np.sqrt(2.0 / L) * (i * np.pi / L) * np.sin(i * np.pi * x[None, :] / L)
    # the constant mode has an identically zero gradient, not a rounded one
    vals[0, :] = 0.0
    return vals


@dataclass(frozen=True, eq=False)
class Basis:
    k: int
    L: float
    quad_panels: int
    lambdas: np.ndarray
    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    W: np.ndarray
    dW: np.ndarray
    traces: np.ndarray  # (k, 2): w_i(0), w_i(L)
    S: np.ndarray
    M_gamma: np.ndarray
    ortho_residual: float
    mean_residual: float
    stiffness_residual: float

    @property
    def n_nodes(self) -> int:
        return self.quad_nodes.size

    def integrate(self, values) -> float:
        return float(np.dot(self.quad_weights, values))

    def project(self, f) -> np.ndarray:
        """L2 projection coefficients ``int f w_j`` by quadrature.

        ``f`` is a callable of x or an array of values at the quadrature nodes.
        """
        vals = f(self.quad_nodes) if callable(f) else np.asarray(f, dtype=float)
        vals = np.broadcast_to(vals, self.quad_nodes.shape)
        return self.W @ (self.quad_weights * vals)

    def eval_field(self, coeffs, points=None) -> np.ndarray:
        """Synthesis ``sum_i coeffs_i w_i`` at ``points`` (default: quadrature nodes)."""
        coeffs = np.asarray(coeffs, dtype=float)
        if points is None:
            return coeffs @ self.W
        return coeffs @ mode_values(self.k, self.L, points)

    def eval_gradient(self, coeffs, points=None) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if points is None:
            return coeffs @ self.dW
        return coeffs @ mode_derivatives(self.k, self.L, points)

    def eval_traces(self, coeffs) -> np.ndarray:
        """Values at x = 0 and x = L."""
        return np.asarray(coeffs, dtype=float) @ self.traces

    def l2_norm(self, coeffs) -> float:
        return float(np.sqrt(self.integrate(self.eval_field(coeffs) ** 2)))

    def summary(self) -> dict:
        return {
            "k": self.k,
            "L": self.L,
            "quad_panels": self.quad_panels,
            "lambdas": self.lambdas.tolist(),
            "ortho_residual": self.ortho_residual,
            "mean_residual": self.mean_residual,
            "stiffness_residual": self.stiffness_residual,
        }


def boundary_mass_matrix(basis: Basis) -> np.ndarray:
    """``(M_gamma)_ij = w_i(0) w_j(0) + w_i(L) w_j(L)``."""
    return basis.traces @ basis.traces.T


def build_basis(k: int, L: float = 1.0, quad_panels: int | None = None) -> Basis:
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    if quad_panels is None:
        quad_panels = default_panels(k)
    if quad_panels < k:
        raise InsufficientQuadrature(f"quad_panels={quad_panels} is below k={k}")

    nodes, weights = composite_gauss(L, quad_panels)
    W = mode_values(k, L, nodes)
    dW = mode_derivatives(k, L, nodes)
    traces = mode_values(k, L, [0.0, L])
    lambdas = (np.arange(k) * np.pi / L) ** 2

    gram = (W * weights) @ W.T
    ortho = float(np.abs(gram - np.eye(k)).max())
    if ortho > ORTHONORMALITY_TOL:
        raise InsufficientQuadrature(
            f"orthonormality residual {ortho:.3e} exceeds {ORTHONORMALITY_TOL:g}; raise quad_panels"
        )
    means = W[1:] @ weights
    mean_res = float(np.abs(means).max()) if k > 1 else 0.0

    S = (dW * weights) @ dW.T
    S = 0.5 * (S + S.T)
    stiff_res = float(np.abs(S - np.diag(lambdas)).max() / max(1.0, lambdas[-1]))

    return Basis(
        k=k,
        L=float(L),
        quad_panels=quad_panels,
        lambdas=lambdas,
        quad_nodes=nodes,
        quad_weights=weights,
        W=W,
        dW=dW,
        traces=traces,
        S=S,
        M_gamma=traces @ traces.T,
        ortho_residual=ortho,
        mean_residual=mean_res,
        stiffness_residual=stiff_res,
    )
