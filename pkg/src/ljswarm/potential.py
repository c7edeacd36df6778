"""Lennard-Jones 12-6 pair potential: energies, forces, curvature, and bounds.

The pair interaction at separation r with collision distance sigma and well
depth a is

    phi(sigma, r) = 4*a*((sigma/r)**12 - (sigma/r)**6)

which blows up as r -> 0, tends to 0 from below as r -> infinity, and attains
its minimum value -a at the zero-force separation r = 2**(1/6)*sigma. The
total potential of a configuration is the sum of phi over all pairs i < j.

All operations here are pure; pairwise accumulation uses a fixed enumeration
so repeated calls on the same inputs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (CollisionError, Configuration, SystemParams, check_shapes)


class InvalidEnergyError(ValueError):
    """An energy value is inconsistent with the system (bound denominator <= 0)."""


def _check_pair_args(sigma: float, r: float, a: float):
    if not (math.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be positive and finite, got {sigma}")
    if not (math.isfinite(a) and a > 0):
        raise ValueError(f"well depth a must be positive and finite, got {a}")
    if not (math.isfinite(r) and r > 0):
        raise CollisionError(f"separation must be positive and finite, got {r}")


def phi(sigma: float, r: float, a: float) -> float:
    """Pair potential 4*a*((sigma/r)**12 - (sigma/r)**6).

    Positive (repulsive regime) for r < sigma, zero at r = sigma, and at its
    minimum value -a at r = 2**(1/6)*sigma.
    """
    _check_pair_args(sigma, r, a)
    s6 = (sigma / r) ** 6
    return 4.0 * a * (s6 * s6 - s6)


def phi_derivative(sigma: float, r: float, a: float) -> float:
    """First derivative d(phi)/dr = (24*a/r) * ((sigma/r)**6 - 2*(sigma/r)**12)."""
    _check_pair_args(sigma, r, a)
    s6 = (sigma / r) ** 6
    return (24.0 * a / r) * (s6 - 2.0 * s6 * s6)


def pair_force_magnitude(sigma: float, r: float, a: float) -> float:
    """Scalar pair force -d(phi)/dr = (24*a/r) * (2*(sigma/r)**12 - (sigma/r)**6).

    Positive means repulsion, negative attraction. The unique zero on
    (0, inf) is at r = 2**(1/6)*sigma.
    """
    _check_pair_args(sigma, r, a)
    s6 = (sigma / r) ** 6
    return (24.0 * a / r) * (2.0 * s6 * s6 - s6)


def phi_second_derivative(sigma: float, r: float, a: float) -> float:
    """Second derivative d2(phi)/dr2 = (24*a/r**2) * (26*(sigma/r)**12 - 7*(sigma/r)**6).

    At the zero-force separation this equals 72*a / (2**(1/3) * sigma**2) > 0,
    so that separation is a strict minimum of phi.
    """
    _check_pair_args(sigma, r, a)
    s6 = (sigma / r) ** 6
    return (24.0 * a / r ** 2) * (26.0 * s6 * s6 - 7.0 * s6)


def zero_force_distance(sigma: float) -> float:
    """Separation at which the pair force vanishes and phi attains -a."""
    return 2.0 ** (1.0 / 6.0) * sigma


# ---------------------------------------------------------------------------
# array-level kernels shared with the integrator (positions as (N, d) arrays)
# ---------------------------------------------------------------------------

def _diff_and_distance(positions: np.ndarray):
    """Pairwise difference tensor (N, N, d) and distance matrix with inf diagonal."""
    diff = positions[:, None, :] - positions[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(r, np.inf)
    if np.any(r == 0.0):
        raise CollisionError("coincident agents (some r_ij = 0)")
    return diff, r


def _potential_raw(positions: np.ndarray, params: SystemParams) -> float:
    _, r = _diff_and_distance(positions)
    a = params.well_depth
    s6 = (params.sigma_table / r) ** 6
    iu = np.triu_indices(positions.shape[0], 1)
    return float(np.sum(4.0 * a * (s6[iu] * s6[iu] - s6[iu])))


def _gradient_raw(positions: np.ndarray, params: SystemParams) -> np.ndarray:
    """Rows of the potential gradient: row i is d(U)/d(x_i), shape (N, d)."""
    diff, r = _diff_and_distance(positions)
    a = params.well_depth
    s6 = (params.sigma_table / r) ** 6
    dphi = (24.0 * a / r) * (s6 - 2.0 * s6 * s6)
    coef = dphi / r
    return np.einsum("ij,ijk->ik", coef, diff)


def total_potential(config: Configuration, params: SystemParams) -> float:
    """Total potential energy: sum of phi over all pairs i < j."""
    check_shapes(config, params)
    return _potential_raw(config.positions, params)


@dataclass(frozen=True, eq=False)
class GradientVector:
    """Gradient of the total potential with respect to all positions.

    ``entries[i]`` is the gradient with respect to agent i's position. Because
    the potential depends only on position differences, the rows sum to the
    zero vector (action equals reaction).
    """

    entries: np.ndarray
    norm: float = field(init=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "norm", float(np.linalg.norm(entries)))

    @property
    def per_agent_norms(self) -> np.ndarray:
        return np.linalg.norm(self.entries, axis=1)

    @property
    def max_agent_norm(self) -> float:
        return float(self.per_agent_norms.max())


def gradient(config: Configuration, params: SystemParams) -> GradientVector:
    """Analytic gradient of the total potential at a configuration."""
    check_shapes(config, params)
    return GradientVector(_gradient_raw(config.positions, params))


def hessian(config: Configuration, params: SystemParams) -> np.ndarray:
    """Analytic Hessian of the total potential, as a dense (d*N, d*N) matrix.

    Assembled per pair from the radial decomposition

        block = (phi'' - phi'/r) * u u^T + (phi'/r) * I

    with u the pair unit vector, accumulated into the diagonal blocks (i, i),
    (j, j) with a plus sign and the off-diagonal blocks (i, j), (j, i) with a
    minus sign. The d uniform-translation directions are always in the null
    space.
    """
    check_shapes(config, params)
    x = config.positions
    n, d = x.shape
    a = params.well_depth
    H = np.zeros((n * d, n * d))
    eye = np.eye(d)
    for i in range(n - 1):
        for j in range(i + 1, n):
            u = x[i] - x[j]
            r = float(np.linalg.norm(u))
            if r <= 0.0:
                raise CollisionError(f"agents {i} and {j} coincide")
            uhat = u / r
            sig = params.sigma_table[i, j]
            k_r = phi_second_derivative(sig, r, a)
            k_t = phi_derivative(sig, r, a) / r
            block = (k_r - k_t) * np.outer(uhat, uhat) + k_t * eye
            si, sj = slice(i * d, (i + 1) * d), slice(j * d, (j + 1) * d)
            H[si, si] += block
            H[sj, sj] += block
            H[si, sj] -= block
            H[sj, si] -= block
    return H


def potential_lower_bound(config: Configuration, params: SystemParams) -> float:
    """Closed-form lower bound on the total potential at a configuration:

        2*a*sigma_min**12 * sum_{i<j} r_ij**-12  -  2*a*C(N,2)

    This never exceeds total_potential (per pair, 4*a*(s**12 - s**6) >=
    2*a*s**12 - 2*a since (s**6 - 1)**2 >= 0).
    """
    check_shapes(config, params)
    _, r = _diff_and_distance(config.positions)
    n = config.n_agents
    iu = np.triu_indices(n, 1)
    a = params.well_depth
    smin = params.sigma_min
    return float(2.0 * a * smin ** 12 * np.sum(r[iu] ** -12.0)
                 - 2.0 * a * math.comb(n, 2))


def collision_bound(e0: float, params: SystemParams) -> float:
    """Uniform lower bound on all pairwise distances for all t >= 0:

        ( 2*a*sigma_min**12 / (E0 + 2*a*C(N,2)) ) ** (1/12)

    valid for any trajectory started with finite total energy E0. The
    denominator is positive whenever E0 is a reachable energy (the potential
    itself is bounded below by -a*C(N,2)).
    """
    n = params.n_agents
    a = params.well_depth
    denom = e0 + 2.0 * a * math.comb(n, 2)
    if not (math.isfinite(denom) and denom > 0):
        raise InvalidEnergyError(
            f"E0 + 2*a*C(N,2) = {denom} must be positive; inconsistent energy {e0}")
    return float((2.0 * a * params.sigma_min ** 12 / denom) ** (1.0 / 12.0))


@dataclass(frozen=True)
class BoundReport:
    """Closed-form bounds evaluated for one configuration and its energy."""

    r_min_theory: float
    u_lower: float
    sigma_min: float


def bound_report(config: Configuration, params: SystemParams) -> BoundReport:
    """Evaluate the distance and potential bounds at a configuration.

    The energy entering the distance bound is the configuration's total
    energy (kinetic plus potential).
    """
    check_shapes(config, params)
    kinetic = 0.5 * float(np.sum(params.masses[:, None] * config.velocities ** 2))
    e0 = kinetic + _potential_raw(config.positions, params)
    return BoundReport(r_min_theory=collision_bound(e0, params),
                       u_lower=potential_lower_bound(config, params),
                       sigma_min=params.sigma_min)


# ---------------------------------------------------------------------------
# spectrum helpers: translation deflation and the smallest structural eigenvalue
# ---------------------------------------------------------------------------

def translation_basis(n: int, dim: int) -> np.ndarray:
    """Orthonormal basis (dim rows) of the uniform-translation directions in R^(dim*n)."""
    basis = np.zeros((dim, n * dim))
    for k in range(dim):
        basis[k, k::dim] = 1.0 / math.sqrt(n)
    return basis


def deflated_spectrum(H: np.ndarray, n: int, dim: int) -> np.ndarray:
    """Eigenvalues of the Hessian projected onto the complement of the
    uniform-translation subspace, in ascending order. The dim projected-out
    directions reappear as (numerically) zero eigenvalues."""
    basis = translation_basis(n, dim)
    P = np.eye(n * dim) - basis.T @ basis
    return np.linalg.eigvalsh(P @ H @ P)


def min_nonzero_eigenvalue(H: np.ndarray, n: int, dim: int,
                           zero_tol: float = 1e-8) -> float:
    """Smallest structurally nonzero eigenvalue of the deflated Hessian.

    Eigenvalues with magnitude below ``zero_tol`` times the spectral radius
    are treated as symmetry zero modes (translations, and rotations at
    equilibria) and skipped. Returns 0.0 if every eigenvalue is a zero mode.
    """
    spec = deflated_spectrum(H, n, dim)
    radius = float(np.abs(spec).max())
    if radius == 0.0:
        return 0.0
    nonzero = spec[np.abs(spec) > zero_tol * radius]
    if nonzero.size == 0:
        return 0.0
    return float(nonzero.min())
