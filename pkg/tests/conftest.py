"""Shared fixtures and independent numerical oracles.

The finite-difference helpers here deliberately avoid the analytic formulas
in ljswarm.potential; they exist to check those formulas, so they only ever
call the scalar energy evaluation (or the gradient, for the Hessian check).
"""

import numpy as np
import pytest

from ljswarm.model import Configuration, build_system
from ljswarm.potential import _potential_raw, _gradient_raw


def make_params(n, radius=0.5, mass=1.0, damping=0.8, well_depth=1.0, dimension=2):
    return build_system([(mass, damping, radius)] * n, well_depth, dimension)


def fd_gradient(positions, params, step=None):
    """Central finite differences of the total potential, one coordinate at a time."""
    x = np.array(positions, dtype=float)
    if step is None:
        step = 1e-6 * max(1.0, float(np.linalg.norm(x)))
    grad = np.zeros_like(x)
    flat = x.ravel()
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + step
        up = _potential_raw(x, params)
        flat[k] = orig - step
        down = _potential_raw(x, params)
        flat[k] = orig
        grad.ravel()[k] = (up - down) / (2.0 * step)
    return grad


def fd_hessian(positions, params, step=1e-6):
    """Central finite differences of the analytic gradient."""
    x = np.array(positions, dtype=float)
    m = x.size
    H = np.zeros((m, m))
    flat = x.ravel()
    for k in range(m):
        orig = flat[k]
        flat[k] = orig + step
        up = _gradient_raw(x, params).ravel()
        flat[k] = orig - step
        down = _gradient_raw(x, params).ravel()
        flat[k] = orig
        H[:, k] = (up - down) / (2.0 * step)
    return H


def random_positions(rng, n, params, half_width=1.0, min_sep_factor=0.4,
                     max_draws=10_000):
    """Uniform box placement rejected until every pair clears its separation floor."""
    floor = min_sep_factor * params.sigma_table
    for _ in range(max_draws):
        pts = rng.uniform(-half_width, half_width, size=(n, params.dimension))
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        np.fill_diagonal(dist, np.inf)
        if np.all(dist >= floor):
            return pts
    raise RuntimeError("could not draw a well-separated configuration")


def random_configuration(rng, n, params, half_width=1.0, min_sep_factor=0.4,
                         with_velocities=False):
    pts = random_positions(rng, n, params, half_width, min_sep_factor)
    vel = rng.normal(scale=0.3, size=pts.shape) if with_velocities else np.zeros_like(pts)
    return Configuration(positions=pts, velocities=vel)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
