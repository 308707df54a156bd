import numpy as np
import pytest

from chtumour import BoundaryData, Coefficients, ModelParams, Problem, build_basis, default_potential, validate


def make_problem(mode="parabolic", k=8, sigma_inf=0.0, coeffs=None, quad_panels=None, **params):
    """Validated problem on a fresh basis; ``sigma_inf`` may be a number or BoundaryData."""
    p = ModelParams(**params)
    cfg = validate(p, coeffs or Coefficients(), default_potential(), mode)
    if not isinstance(sigma_inf, BoundaryData):
        sigma_inf = BoundaryData.constant(sigma_inf)
    return Problem(cfg, build_basis(k, p.L, quad_panels), sigma_inf)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
