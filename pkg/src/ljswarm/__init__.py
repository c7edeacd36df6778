"""Simulation and verification toolkit for damped multi-agent formations
driven by the gradient of a Lennard-Jones 12-6 pair potential."""

__version__ = "0.1.0"

from .model import (AgentParams, CollisionError, Configuration, PairGeometry,
                    SystemParams, build_system, pair_geometry)
from .potential import (BoundReport, GradientVector, InvalidEnergyError,
                        collision_bound, gradient, hessian,
                        pair_force_magnitude, phi, phi_second_derivative,
                        potential_lower_bound, total_potential,
                        zero_force_distance)
from .integrate import (IntegratorSettings, Trajectory, integrate, rhs)
from .analysis import (EnergyBreakdown, EquilibriumReport, FitDegenerateError,
                       RateFit, check_collision_bound, check_energy_decay,
                       classify_equilibrium, energy, fit_decay_rate,
                       velocity_integral)
from .scenarios import (PackingError, Scenario, collinear_equilibrium_spacing,
                        collinear_three, equilateral_three, n_agent_random,
                        two_agent)

__all__ = [
    "AgentParams", "BoundReport", "CollisionError", "Configuration",
    "EnergyBreakdown", "EquilibriumReport", "FitDegenerateError",
    "GradientVector", "IntegratorSettings", "InvalidEnergyError",
    "PackingError", "PairGeometry", "RateFit", "Scenario", "SystemParams",
    "Trajectory", "build_system", "check_collision_bound",
    "check_energy_decay", "classify_equilibrium", "collinear_equilibrium_spacing",
    "collinear_three", "collision_bound", "energy", "equilateral_three",
    "fit_decay_rate", "gradient", "hessian", "integrate", "n_agent_random",
    "pair_force_magnitude", "pair_geometry", "phi", "phi_second_derivative",
    "potential_lower_bound", "rhs", "total_potential", "two_agent",
    "velocity_integral", "zero_force_distance",
]
