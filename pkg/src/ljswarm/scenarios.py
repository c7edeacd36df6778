"""Built-in experiment setups and independent oracles for their equilibria.

Every scenario uses the benchmark parameter set (unit mass, damping 0.8,
radius 0.5 so every pair's collision distance is 0.5, well depth 1.0) in the
plane, starts from rest, and carries expected endpoint values computed from
the model itself (never hard-coded observations): the zero-force pair
separation, the pair potential minimum, and the force-balance root of the
three-agent line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorSettings
from .model import Configuration, SystemParams, build_system
from .potential import collision_bound, pair_force_magnitude, phi, zero_force_distance

DEFAULT_MASS = 1.0
DEFAULT_DAMPING = 0.8
# chosen so each pair's collision distance, the mean of the two radii, is 0.5
DEFAULT_RADIUS = 0.5
DEFAULT_WELL_DEPTH = 1.0

# x-axis separation for the two-agent run; inside the attraction regime
TWO_AGENT_SEPARATION = 0.7296
# equilateral side as a multiple of the zero-force separation
EQUILATERAL_SIDE_FACTOR = 1.2
# initial spacing of the collinear run as a multiple of sigma
COLLINEAR_SPACING_FACTOR = 1.3

_UNIT_PERTURBATION_ANGLE = 2.0 * math.pi * (1.0 - 2.0 / (1.0 + math.sqrt(5.0)))


class PackingError(RuntimeError):
    """Random placement could not satisfy the separation rule."""


class SplitMix64:
    """Tiny deterministic generator with published constants.

    Produces an identical stream for a given seed on every platform, so
    seeded scenarios are reproducible bit-for-bit anywhere.
    """

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = int(seed) & self._MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return (z ^ (z >> 31)) & self._MASK

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * (self.next_u64() >> 11) * 2.0 ** -53


@dataclass(frozen=True)
class Scenario:
    """A named experiment: system parameters, initial state, expected endpoint.

    ``expected`` maps quantity names to (value, provenance) pairs; values are
    computed from analytic formulas or the oracles in this module.
    """

    name: str
    params: SystemParams
    initial: Configuration
    settings: IntegratorSettings
    expected: dict[str, tuple[float, str]] | None = None


def default_params(n: int, dimension: int = 2) -> SystemParams:
    """Benchmark parameter set for n identical agents."""
    spec = [(DEFAULT_MASS, DEFAULT_DAMPING, DEFAULT_RADIUS)] * n
    return build_system(spec, DEFAULT_WELL_DEPTH, dimension)


def two_agent() -> Scenario:
    """Two agents at rest on the x-axis, separated beyond the zero-force distance."""
    params = default_params(2)
    sigma = params.sigma(0, 1)
    half = TWO_AGENT_SEPARATION / 2.0
    initial = Configuration(positions=[[-half, 0.0], [half, 0.0]],
                            velocities=np.zeros((2, 2)))
    a = params.well_depth
    e0 = phi(sigma, TWO_AGENT_SEPARATION, a)
    rstar = zero_force_distance(sigma)
    expected = {
        "final_r12": (rstar, "zero-force pair separation 2**(1/6)*sigma"),
        "E_infinity": (-a, "pair potential value at the zero-force separation"),
        "r_min_theory": (collision_bound(e0, params),
                         "closed-form distance bound from the initial energy"),
    }
    return Scenario(name="two_agent", params=params, initial=initial,
                    settings=IntegratorSettings(t_end=80.0), expected=expected)


def equilateral_three(perturbation: float = 0.01) -> Scenario:
    """Three agents near the equilateral equilibrium.

    The triangle side starts at EQUILATERAL_SIDE_FACTOR times the zero-force
    separation and each vertex is displaced by ``perturbation`` along a fixed,
    deterministic direction, so the run exercises convergence back to the
    symmetric formation rather than starting on it.
    """
    if perturbation < 0:
        raise ValueError(f"perturbation must be nonnegative, got {perturbation}")
    params = default_params(3)
    sigma = params.sigma(0, 1)
    side = EQUILATERAL_SIDE_FACTOR * zero_force_distance(sigma)
    verts = np.array([[0.0, 0.0],
                      [side, 0.0],
                      [side / 2.0, math.sqrt(3.0) / 2.0 * side]])
    verts -= verts.mean(axis=0)
    for k in range(3):
        angle = _UNIT_PERTURBATION_ANGLE * k
        verts[k] += perturbation * np.array([math.cos(angle), math.sin(angle)])
    initial = Configuration(positions=verts, velocities=np.zeros((3, 2)))
    a = params.well_depth
    rstar = zero_force_distance(sigma)
    expected = {
        "final_pair_distance": (rstar, "zero-force pair separation"),
        "E_infinity": (-3.0 * a, "three pairs at the potential minimum"),
    }
    return Scenario(name="equilateral_three", params=params, initial=initial,
                    settings=IntegratorSettings(t_end=120.0), expected=expected)


def collinear_three() -> Scenario:
    """Three collinear agents at rest; the line is an invariant subspace.

    Started axis-aligned so the transverse coordinates stay exactly zero and
    the run converges to the collinear equilibrium, whose outer spacing comes
    from the force-balance oracle below.
    """
    params = default_params(3)
    sigma = params.sigma(0, 1)
    b0 = COLLINEAR_SPACING_FACTOR * sigma
    initial = Configuration(positions=[[-b0, 0.0], [0.0, 0.0], [b0, 0.0]],
                            velocities=np.zeros((3, 2)))
    bstar = collinear_equilibrium_spacing(sigma, params.well_depth)
    a = params.well_depth
    e_inf = 2.0 * phi(sigma, bstar, a) + phi(sigma, 2.0 * bstar, a)
    expected = {
        "final_r12": (bstar, "outer spacing from the force-balance root"),
        "final_r13": (2.0 * bstar, "twice the force-balance root"),
        "E_infinity": (e_inf, "potential of the collinear equilibrium"),
    }
    return Scenario(name="collinear_three", params=params, initial=initial,
                    settings=IntegratorSettings(t_end=120.0), expected=expected)


def collinear_equilibrium_spacing(sigma: float, a: float) -> float:
    """Outer spacing b* of the three-agent collinear equilibrium.

    Solves the force balance on an outer agent,
    pair_force(sigma, b) + pair_force(sigma, 2 b) = 0, by bisection on
    [sigma, 2 sigma] to 1e-12. The bracket is always valid: the force sum is
    strongly repulsive at b = sigma and attractive at b = 2 sigma. The far
    pair's attraction compresses the outer pairs slightly below the two-body
    zero-force distance, so they supply the outward repulsion that closes the
    balance; the root is independent of a, which scales out. In closed form
    b* = sigma * (2 * (1 + 2**-13) / (1 + 2**-7)) ** (1/6).
    """
    if not (sigma > 0 and a > 0):
        raise ValueError("sigma and a must be positive")

    def balance(b: float) -> float:
        return pair_force_magnitude(sigma, b, a) + pair_force_magnitude(sigma, 2.0 * b, a)

    lo, hi = sigma, 2.0 * sigma
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if balance(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def n_agent_random(n: int, seed: int, box_half_width: float = 1.0) -> Scenario:
    """n agents at rest, placed uniformly in a square box by a seeded generator.

    A drawn configuration is rejected and redrawn whenever any pair is closer
    than 0.3 times its collision distance; after 10000 rejected draws the
    packing is declared infeasible.
    """
    if n < 2:
        raise ValueError(f"need at least 2 agents, got {n}")
    if box_half_width <= 0:
        raise ValueError(f"box_half_width must be positive, got {box_half_width}")
    params = default_params(n)
    rng = SplitMix64(seed)
    w = box_half_width
    min_sep = 0.3 * params.sigma_table
    for _ in range(10_000):
        pts = np.array([[rng.uniform(-w, w), rng.uniform(-w, w)] for _ in range(n)])
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        np.fill_diagonal(dist, np.inf)
        if np.all(dist >= min_sep):
            initial = Configuration(positions=pts, velocities=np.zeros((n, 2)))
            return Scenario(name=f"n_agent_random(n={n}, seed={seed})",
                            params=params, initial=initial,
                            settings=IntegratorSettings(t_end=600.0),
                            expected=None)
    raise PackingError(
        f"could not place {n} agents with min separation {0.3:.2f}*sigma in "
        f"[-{w}, {w}]^2 after 10000 draws")


def random_eight(seed: int = 1) -> Scenario:
    """Eight agents placed randomly in the unit-half-width box."""
    scenario = n_agent_random(8, seed=seed, box_half_width=1.0)
    return Scenario(name="random_eight", params=scenario.params,
                    initial=scenario.initial, settings=scenario.settings,
                    expected=None)


CATALOG = {
    "two_agent": (two_agent, "two agents relaxing to the zero-force separation"),
    "equilateral_three": (equilateral_three,
                          "perturbed equilateral triangle relaxing to the rigid formation"),
    "collinear_three": (collinear_three,
                        "three agents on a line relaxing to the collinear equilibrium"),
    "random_eight": (random_eight,
                     "eight agents from a seeded random placement in [-1, 1]^2"),
}


def build(name: str, seed: int | None = None) -> Scenario:
    """Instantiate a catalog scenario by name; ``seed`` applies to seeded ones."""
    if name not in CATALOG:
        raise KeyError(f"unknown scenario {name!r}; available: {sorted(CATALOG)}")
    factory, _ = CATALOG[name]
    if name == "random_eight":
        return factory(seed=1 if seed is None else seed)
    return factory()
