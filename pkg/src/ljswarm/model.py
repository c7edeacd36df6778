"""Core domain types: per-agent parameters, system parameters, and instantaneous states.

All types are immutable after construction and safe to share across threads.
Positions and velocities are stored as two contiguous (N, d) blocks; the
stacked first-order state vector is materialized only at the integrator
boundary (see :mod:`ljswarm.integrate`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist


class CollisionError(ValueError):
    """Two agents coincide, or a pair separation is not strictly positive."""


def _require(cond, msg):
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class AgentParams:
    """Physical parameters of one agent: mass, linear damping coefficient, radius."""

    mass: float
    damping: float
    radius: float

    def __post_init__(self):
        _require(math.isfinite(self.mass) and self.mass > 0,
                 f"mass must be a positive finite number, got {self.mass}")
        _require(math.isfinite(self.damping) and self.damping >= 0,
                 f"damping must be nonnegative and finite, got {self.damping}")
        _require(math.isfinite(self.radius) and self.radius > 0,
                 f"radius must be a positive finite number, got {self.radius}")


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Validated parameters of an N-agent system.

    Holds the agent list, the well depth ``a`` of the pair potential, and the
    spatial dimension. The pairwise collision distance table
    ``sigma[i, j] = (radius_i + radius_j) / 2`` is precomputed and symmetric
    by construction.
    """

    agents: tuple[AgentParams, ...]
    well_depth: float
    dimension: int

    masses: np.ndarray = field(init=False, repr=False)
    damping: np.ndarray = field(init=False, repr=False)
    radii: np.ndarray = field(init=False, repr=False)
    sigma_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        _require(len(self.agents) >= 2,
                 f"need at least 2 agents, got {len(self.agents)}")
        _require(all(isinstance(a, AgentParams) for a in self.agents),
                 "agents must be AgentParams instances")
        _require(math.isfinite(self.well_depth) and self.well_depth > 0,
                 f"well_depth must be a positive finite number, got {self.well_depth}")
        _require(self.dimension in (2, 3),
                 f"dimension must be 2 or 3, got {self.dimension}")
        masses = np.array([a.mass for a in self.agents], dtype=float)
        damping = np.array([a.damping for a in self.agents], dtype=float)
        radii = np.array([a.radius for a in self.agents], dtype=float)
        sigma = 0.5 * (radii[:, None] + radii[None, :])
        for name, arr in (("masses", masses), ("damping", damping),
                          ("radii", radii), ("sigma_table", sigma)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def sigma(self, i: int, j: int) -> float:
        """Collision distance of the pair (i, j)."""
        return float(self.sigma_table[i, j])

    @property
    def sigma_min(self) -> float:
        """Smallest pairwise collision distance over all i < j."""
        iu = np.triu_indices(self.n_agents, 1)
        return float(self.sigma_table[iu].min())

    @property
    def uniform_damping(self) -> float | None:
        """The common damping coefficient, or None if agents differ."""
        if np.all(self.damping == self.damping[0]):
            return float(self.damping[0])
        return None


def build_system(agent_specs, well_depth: float, dimension: int) -> SystemParams:
    """Build validated SystemParams from (mass, damping, radius) triples.

    Parameters
    ----------
    agent_specs : sequence of (mass, damping, radius)
        One triple per agent; at least two agents required.
    well_depth : float
        Depth ``a`` of the pair potential well (must be positive).
    dimension : int
        Spatial dimension, 2 or 3.
    """
    agents = tuple(AgentParams(float(m), float(c), float(q))
                   for m, c, q in agent_specs)
    return SystemParams(agents=agents, well_depth=float(well_depth),
                        dimension=int(dimension))


@dataclass(frozen=True, eq=False)
class Configuration:
    """Instantaneous state of the system: (N, d) positions and velocities at a time.

    Construction rejects any state in which two agents coincide, so every
    Configuration is collision-free by contract. Arrays are copied and made
    read-only.
    """

    positions: np.ndarray
    velocities: np.ndarray
    time: float = 0.0
    min_distance: float = field(init=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        vel = np.array(self.velocities, dtype=float)
        _require(pos.ndim == 2 and pos.shape[0] >= 2 and pos.shape[1] >= 1,
                 f"positions must be an (N>=2, d) array, got shape {pos.shape}")
        _require(vel.shape == pos.shape,
                 f"velocities shape {vel.shape} must match positions shape {pos.shape}")
        _require(np.all(np.isfinite(pos)) and np.all(np.isfinite(vel)),
                 "positions and velocities must be finite")
        _require(math.isfinite(self.time) and self.time >= 0,
                 f"time must be nonnegative and finite, got {self.time}")
        dmin = float(pdist(pos).min())
        if dmin <= 0.0:
            raise CollisionError("configuration has coincident agents (some r_ij = 0)")
        pos.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "min_distance", dmin)

    @property
    def n_agents(self) -> int:
        return self.positions.shape[0]

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]


def check_shapes(config: Configuration, params: SystemParams):
    """Raise ValueError unless the configuration matches the system's (N, d)."""
    _require(config.n_agents == params.n_agents,
             f"configuration has {config.n_agents} agents, system has {params.n_agents}")
    _require(config.dimension == params.dimension,
             f"configuration is {config.dimension}-dimensional, system is "
             f"{params.dimension}-dimensional")


@dataclass(frozen=True, eq=False)
class PairGeometry:
    """Geometry of one agent pair: separation, collision distance, scaled
    separation w = r / sigma, and the unit vector pointing from agent j to agent i."""

    i: int
    j: int
    distance: float
    sigma: float
    w: float
    unit_vector: np.ndarray

    def __post_init__(self):
        u = np.array(self.unit_vector, dtype=float)
        norm = float(np.linalg.norm(u))
        _require(abs(norm - 1.0) <= 1e-12,
                 f"unit vector norm {norm} deviates from 1 by more than 1e-12")
        u.setflags(write=False)
        object.__setattr__(self, "unit_vector", u)


def pair_geometry(config: Configuration, params: SystemParams,
                  i: int, j: int) -> PairGeometry:
    """Distance, collision distance, scaled separation, and unit vector for pair (i, j).

    The unit vector points from agent j toward agent i. Swapping i and j
    negates the unit vector and leaves the distance unchanged.
    """
    check_shapes(config, params)
    n = config.n_agents
    _require(0 <= i < n and 0 <= j < n, f"indices ({i}, {j}) out of range for {n} agents")
    _require(i != j, "pair indices must differ")
    delta = config.positions[i] - config.positions[j]
    r = float(np.linalg.norm(delta))
    if r <= 0.0:
        raise CollisionError(f"agents {i} and {j} coincide")
    sigma = params.sigma(i, j)
    return PairGeometry(i=i, j=j, distance=r, sigma=sigma, w=r / sigma,
                        unit_vector=delta / r)
