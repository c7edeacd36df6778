"""Verification of the flow's guarantees on integrated trajectories.

Checks implemented here:

* total energy is a Lyapunov function: nonincreasing between snapshots, and
  its decrease matches the damping dissipation integral;
* all pairwise distances stay above the closed-form collision bound;
* endpoint states are equilibria (zero velocity, zero gradient) and are
  classified rigid or degenerate from the deflated Hessian spectrum;
* the late-time approach to an equilibrium is exponential, with the observed
  rate matching min(gamma / (2 m), lambda_min / gamma) from the linearization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Configuration, SystemParams, check_shapes
from .integrate import (EQUILIBRIUM_GRAD_TOL, EQUILIBRIUM_VEL_TOL, Trajectory)
from . import potential


class FitDegenerateError(RuntimeError):
    """The requested fit window contains too little usable signal."""


@dataclass(frozen=True)
class EnergyBreakdown:
    """Kinetic, potential, and total energy of one configuration."""

    kinetic: float
    potential: float
    total: float


def energy(config: Configuration, params: SystemParams) -> EnergyBreakdown:
    """Kinetic energy 0.5*sum(m_i*|v_i|^2), pair potential sum, and their total."""
    check_shapes(config, params)
    kinetic = 0.5 * float(np.sum(params.masses[:, None] * config.velocities ** 2))
    pot = potential.total_potential(config, params)
    return EnergyBreakdown(kinetic=kinetic, potential=pot, total=kinetic + pot)


@dataclass(frozen=True)
class DecayViolation:
    """One snapshot interval on which the energy-decay contract failed."""

    index: int
    time: float
    kind: str  # "increase" or "identity"
    amount: float
    tolerance: float


def _dissipation_series(traj: Trajectory, params: SystemParams) -> np.ndarray:
    """Instantaneous dissipation sum_i c_i * |v_i|^2 at each snapshot."""
    out = np.empty(len(traj))
    for k, snap in enumerate(traj.snapshots):
        out[k] = float(np.sum(params.damping[:, None] * snap.velocities ** 2))
    return out


# the dissipation identity is a quadrature statement; it is only contractual
# when snapshots are at least this dense
IDENTITY_CHECK_MAX_INTERVAL = 0.01


def check_energy_decay(traj: Trajectory, params: SystemParams) -> list[DecayViolation]:
    """Verify monotone energy decay and the dissipation identity; report violations.

    Two per-interval checks:

    * no increase: E(t_{k+1}) <= E(t_k) + drift, with drift
      10 * (rel_tol * |E(t_k)| + abs_tol) from the integrator tolerances;
    * identity: the energy drop matches the trapezoid-rule dissipation
      integral of sum_i c_i |v_i|^2 within 1% of the run's total dissipated
      energy (the per-interval drop itself crosses zero at velocity turning
      points, so it cannot serve as the relative scale). Applied only when
      the snapshot interval is at most 0.01; coarser output leaves the
      trapezoid rule too little resolution for the 1% budget to be meaningful.

    An empty list means the trajectory passes both checks everywhere.
    """
    if len(traj) < 2:
        return []
    e = traj.total_energy
    t = traj.times
    w = _dissipation_series(traj, params)
    total_drop = float(e[0] - e.min())
    rel_tol, abs_tol = traj.settings.rel_tol, traj.settings.abs_tol
    check_identity = (traj.settings.snapshot_interval
                      <= IDENTITY_CHECK_MAX_INTERVAL * (1 + 1e-12))
    violations = []
    for k in range(len(traj) - 1):
        drift = 10.0 * (rel_tol * abs(e[k]) + abs_tol)
        de = e[k + 1] - e[k]
        if de > drift:
            violations.append(DecayViolation(index=k, time=float(t[k + 1]),
                                             kind="increase", amount=float(de),
                                             tolerance=drift))
        if not check_identity:
            continue
        dissipated = 0.5 * (w[k] + w[k + 1]) * (t[k + 1] - t[k])
        mismatch = abs(de + dissipated)
        tol = 0.01 * total_drop + drift
        if mismatch > tol:
            violations.append(DecayViolation(index=k, time=float(t[k + 1]),
                                             kind="identity", amount=float(mismatch),
                                             tolerance=tol))
    return violations


@dataclass(frozen=True)
class CollisionBoundReport:
    """Observed versus theoretical minimum pairwise distance over a trajectory."""

    min_observed: float
    bound: float
    sigma_min: float
    violated: bool


def check_collision_bound(traj: Trajectory, params: SystemParams) -> CollisionBoundReport:
    """Compare the smallest observed pair distance with the bound from E(t0)."""
    e0 = float(traj.total_energy[0])
    bound = potential.collision_bound(e0, params)
    min_observed = float(traj.min_distance.min())
    return CollisionBoundReport(min_observed=min_observed, bound=bound,
                                sigma_min=params.sigma_min,
                                violated=min_observed < bound)


CLASS_RIGID = "rigid"
CLASS_DEGENERATE = "degenerate"


@dataclass(frozen=True)
class EquilibriumReport:
    """Whether a state is an equilibrium, and the character of its Hessian.

    ``nonzero_spectrum_min`` is the smallest eigenvalue of the potential
    Hessian after deflating the uniform translations and skipping symmetry
    zero modes; positive means the formation is rigid, otherwise degenerate.
    """

    is_equilibrium: bool
    gradient_norm: float
    velocity_norm: float
    classification: str
    nonzero_spectrum_min: float


def classify_equilibrium(config: Configuration, params: SystemParams) -> EquilibriumReport:
    """Evaluate equilibrium criteria and classify the configuration's Hessian.

    A state is an equilibrium when the largest per-agent gradient magnitude
    and velocity magnitude are both below 1e-8. Classification depends only
    on positions, so it is invariant under uniform translation and rigid
    rotation of the configuration.
    """
    check_shapes(config, params)
    grad = potential.gradient(config, params)
    gnorm = grad.max_agent_norm
    vnorm = float(np.linalg.norm(config.velocities, axis=1).max())
    H = potential.hessian(config, params)
    lam = potential.min_nonzero_eigenvalue(H, config.n_agents, config.dimension)
    return EquilibriumReport(
        is_equilibrium=(gnorm < EQUILIBRIUM_GRAD_TOL and vnorm < EQUILIBRIUM_VEL_TOL),
        gradient_norm=gnorm,
        velocity_norm=vnorm,
        classification=CLASS_RIGID if lam > 0 else CLASS_DEGENERATE,
        nonzero_spectrum_min=lam,
    )


@dataclass(frozen=True)
class RateFit:
    """Observed and predicted exponential decay rates toward an equilibrium."""

    alpha_observed: float
    alpha_predicted: float
    r_squared: float
    fit_window: tuple[float, float]
    n_points: int


def residual_series(traj: Trajectory, target: Configuration,
                    params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Distance-to-target residual at each snapshot.

    For two agents the residual is |r_12(t) - r_12(target)|. For larger
    systems it is the Frobenius distance between the snapshot and the target
    after subtracting each one's centroid (equilibria are identified only up
    to uniform translation; rotations are not quotiented out).
    """
    check_shapes(target, params)
    n = params.n_agents
    t = traj.times
    if n == 2:
        r_target = float(np.linalg.norm(target.positions[0] - target.positions[1]))
        rho = np.array([abs(float(np.linalg.norm(s.positions[0] - s.positions[1]))
                            - r_target) for s in traj.snapshots])
    else:
        ref = target.positions - target.positions.mean(axis=0)
        rho = np.empty(len(traj))
        for k, snap in enumerate(traj.snapshots):
            aligned = snap.positions - snap.positions.mean(axis=0)
            rho[k] = float(np.linalg.norm(aligned - ref))
    return t, rho


def _residual_scale(target: Configuration) -> float:
    if target.n_agents == 2:
        return float(np.linalg.norm(target.positions[0] - target.positions[1]))
    ref = target.positions - target.positions.mean(axis=0)
    return float(np.linalg.norm(ref))


def _local_maxima(values: np.ndarray) -> np.ndarray:
    """Indices of interior points not smaller than both neighbors."""
    if values.size < 3:
        return np.array([], dtype=int)
    v = values
    mask = (v[1:-1] >= v[:-2]) & (v[1:-1] >= v[2:])
    return np.flatnonzero(mask) + 1


# an oscillating residual needs at least this many peaks before the fit
# switches from raw samples to the peak envelope
_MIN_PEAKS_FOR_ENVELOPE = 8
# leading samples are dropped until this many consecutive inter-point slopes
# agree with their mean to within 5%
_SLOPE_STABILIZE_COUNT = 4
_SLOPE_STABILIZE_RTOL = 0.05


def _stabilized_start(t: np.ndarray, logr: np.ndarray) -> int:
    slopes = np.diff(logr) / np.diff(t)
    k = _SLOPE_STABILIZE_COUNT
    for i in range(slopes.size - k + 1):
        window = slopes[i:i + k]
        mean = window.mean()
        if mean == 0:
            continue
        if np.max(np.abs(window - mean)) <= _SLOPE_STABILIZE_RTOL * abs(mean):
            return i
    return 0


def predicted_rate(target: Configuration, params: SystemParams) -> float:
    """Linearized decay rate min(gamma / (2 m), lambda_min / gamma) at a target.

    lambda_min is the smallest structurally nonzero eigenvalue of the deflated
    Hessian at the target. With heterogeneous agents the per-agent rates are
    combined conservatively (slowest agent governs).
    """
    H = potential.hessian(target, params)
    lam = potential.min_nonzero_eigenvalue(H, target.n_agents, target.dimension)
    gamma = float(params.damping.max())
    slow = float(np.min(params.damping / (2.0 * params.masses)))
    return min(slow, lam / gamma)


def fit_decay_rate(traj: Trajectory, target: Configuration, params: SystemParams,
                   window: tuple[float, float] | None = None) -> RateFit:
    """Least-squares exponential rate of the log residual toward a target.

    The underdamped approach to an equilibrium oscillates, so the log
    residual has deep dips at every crossing of the target; when the series
    shows enough interior peaks the regression runs on the peak envelope,
    which decays at the same exponential rate without the dips. Monotone
    residuals (no peaks) are fitted directly. Leading samples are dropped
    until the local slope stabilizes, and trailing samples below the
    numerical noise floor (1e3 * machine epsilon relative to the target
    scale) are discarded. ``window`` restricts the samples considered before
    these trims.
    """
    t, rho = residual_series(traj, target, params)
    if window is not None:
        lo, hi = window
        if not (lo < hi):
            raise FitDegenerateError(f"empty fit window ({lo}, {hi})")
        mask = (t >= lo) & (t <= hi)
        t, rho = t[mask], rho[mask]

    floor = 1e3 * np.finfo(float).eps * _residual_scale(target)
    peaks = _local_maxima(rho)
    if peaks.size >= _MIN_PEAKS_FOR_ENVELOPE:
        t, rho = t[peaks], rho[peaks]
    keep = rho > floor
    t, rho = t[keep], rho[keep]
    if t.size < 5:
        raise FitDegenerateError(
            "fewer than 5 usable residual samples above the noise floor; "
            "widen the window or end it before machine-precision saturation")
    logr = np.log(rho)
    start = _stabilized_start(t, logr)
    t, logr = t[start:], logr[start:]

    design = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(design, logr, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((logr - fitted) ** 2))
    ss_tot = float(np.sum((logr - logr.mean()) ** 2))
    if ss_tot == 0.0:
        raise FitDegenerateError("residual series is constant over the fit window")
    return RateFit(alpha_observed=float(-coef[0]),
                   alpha_predicted=predicted_rate(target, params),
                   r_squared=1.0 - ss_res / ss_tot,
                   fit_window=(float(t[0]), float(t[-1])),
                   n_points=int(t.size))


def velocity_integral(traj: Trajectory, params: SystemParams) -> float:
    """Trapezoid-rule dissipation integral sum_i c_i * int |v_i|^2 dt.

    On a converged trajectory this matches E(t0) - E(t_end) up to quadrature
    error. With uniform damping gamma it equals gamma * int sum_i |v_i|^2 dt;
    heterogeneous damping weights each agent by its own coefficient.
    """
    if len(traj) < 2:
        return 0.0
    w = _dissipation_series(traj, params)
    return float(np.trapezoid(w, traj.times))
