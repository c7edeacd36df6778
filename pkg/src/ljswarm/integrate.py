"""Time integration of the damped gradient flow with adaptive error control.

The second-order dynamics

    m_i * x_i'' = -c_i * x_i' - grad_i U(x)

are advanced as a first-order system in the stacked state
y = [positions.ravel(), velocities.ravel()]. Two step controllers are
available behind one interface: an explicit embedded Runge-Kutta 5(4) pair,
and an implicit stiff L-stable collocation method (Radau IIA, order 5) whose
Newton iterations use the analytic Jacobian assembled from the potential's
Hessian. The implicit method is the default; the near-collision force growth
makes the system stiff and an A-stable method keeps step sizes governed by
accuracy only.

Integration stops early once the state is numerically at an equilibrium:
largest per-agent gradient magnitude and velocity both below 1e-8, sustained
over two consecutive snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45, Radau

from .model import CollisionError, Configuration, SystemParams, check_shapes
from .potential import _gradient_raw, _potential_raw, hessian

METHOD_ADAPTIVE_EXPLICIT = "adaptive_explicit"
METHOD_IMPLICIT_STIFF = "implicit_stiff"
METHODS = (METHOD_ADAPTIVE_EXPLICIT, METHOD_IMPLICIT_STIFF)

STATUS_COMPLETED = "completed"
STATUS_EQUILIBRIUM = "equilibrium_reached"
STATUS_STEP_FAILURE = "step_failure"

# equilibrium stopping thresholds (largest per-agent gradient / velocity norm)
EQUILIBRIUM_GRAD_TOL = 1e-8
EQUILIBRIUM_VEL_TOL = 1e-8

# hitting a step below this fraction of t_end is a hard failure, not a warning
MIN_STEP_FRACTION = 1e-14


@dataclass(frozen=True)
class IntegratorSettings:
    """Tolerances, method selection, and output cadence for one integration run."""

    t_end: float
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    method: str = METHOD_IMPLICIT_STIFF
    max_step: float = math.inf
    snapshot_interval: float = 0.01

    def __post_init__(self):
        if not (math.isfinite(self.rel_tol) and self.rel_tol > 0):
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if not (math.isfinite(self.abs_tol) and self.abs_tol > 0):
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.max_step > 0:
            raise ValueError(f"max_step must be positive, got {self.max_step}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError(f"t_end must be finite and nonnegative, got {self.t_end}")
        if not (math.isfinite(self.snapshot_interval) and self.snapshot_interval > 0):
            raise ValueError(
                f"snapshot_interval must be positive, got {self.snapshot_interval}")
        if self.t_end > 0 and self.snapshot_interval > self.t_end:
            raise ValueError(
                f"snapshot_interval {self.snapshot_interval} exceeds t_end {self.t_end}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered snapshots of one run plus per-snapshot diagnostics.

    Diagnostic arrays are aligned with ``snapshots``: total/kinetic/potential
    energy, minimum pairwise distance, and the largest per-agent gradient
    magnitude. ``status`` is one of completed / equilibrium_reached /
    step_failure; a failure never passes silently.
    """

    snapshots: tuple[Configuration, ...]
    times: np.ndarray
    total_energy: np.ndarray
    kinetic_energy: np.ndarray
    potential_energy: np.ndarray
    min_distance: np.ndarray
    gradient_norm: np.ndarray
    status: str
    settings: IntegratorSettings
    message: str = ""

    def __post_init__(self):
        if len(self.snapshots) == 0:
            raise ValueError("trajectory must contain at least one snapshot")
        t = np.asarray(self.times, dtype=float)
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("snapshot times must be strictly increasing")
        for name in ("times", "total_energy", "kinetic_energy",
                     "potential_energy", "min_distance", "gradient_norm"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (len(self.snapshots),):
                raise ValueError(f"{name} must have one entry per snapshot")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def initial(self) -> Configuration:
        return self.snapshots[0]

    @property
    def final(self) -> Configuration:
        return self.snapshots[-1]


def _split(y: np.ndarray, n: int, d: int):
    return y[: n * d].reshape(n, d), y[n * d:].reshape(n, d)


def stack_state(config: Configuration) -> np.ndarray:
    """Stack a configuration into the flat integrator state vector."""
    return np.concatenate([config.positions.ravel(), config.velocities.ravel()])


def rhs(config: Configuration, params: SystemParams) -> np.ndarray:
    """Time derivative of the stacked state at a configuration.

    The position block's derivative is the velocity; the velocity block's
    derivative is (-c_i * v_i - grad_i U) / m_i.
    """
    check_shapes(config, params)
    return _rhs_raw(stack_state(config), params, config.n_agents, config.dimension)


def _rhs_raw(y: np.ndarray, params: SystemParams, n: int, d: int) -> np.ndarray:
    x, v = _split(y, n, d)
    grad = _gradient_raw(x, params)
    acc = (-params.damping[:, None] * v - grad) / params.masses[:, None]
    return np.concatenate([v.ravel(), acc.ravel()])


def system_jacobian(config: Configuration, params: SystemParams) -> np.ndarray:
    """Analytic Jacobian of the stacked right-hand side.

    Block form [[0, I], [-M^-1 H, -M^-1 C]] with H the potential Hessian,
    M the diagonal mass matrix, and C the diagonal damping matrix.
    """
    check_shapes(config, params)
    n, d = config.n_agents, config.dimension
    return _jacobian_raw(stack_state(config), params, n, d)


def _jacobian_raw(y: np.ndarray, params: SystemParams, n: int, d: int) -> np.ndarray:
    x, v = _split(y, n, d)
    H = hessian(Configuration(x, v), params)
    m = np.repeat(params.masses, d)
    c = np.repeat(params.damping, d)
    nd = n * d
    J = np.zeros((2 * nd, 2 * nd))
    J[:nd, nd:] = np.eye(nd)
    J[nd:, :nd] = -H / m[:, None]
    J[nd:, nd:] = np.diag(-c / m)
    return J


def finite_difference_jacobian(config: Configuration, params: SystemParams,
                               step: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of the right-hand side.

    Independent of the analytic assembly; a drop-in replacement if the
    analytic form is ever in doubt, and the oracle used to test it.
    """
    check_shapes(config, params)
    n, d = config.n_agents, config.dimension
    y0 = stack_state(config)
    J = np.zeros((y0.size, y0.size))
    for k in range(y0.size):
        yp = y0.copy()
        yp[k] += step
        ym = y0.copy()
        ym[k] -= step
        J[:, k] = (_rhs_raw(yp, params, n, d) - _rhs_raw(ym, params, n, d)) / (2 * step)
    return J


def _snapshot_schedule(t0: float, settings: IntegratorSettings) -> np.ndarray:
    """Snapshot times after t0: multiples of the interval, ending exactly at t0 + t_end."""
    t_final = t0 + settings.t_end
    dt = settings.snapshot_interval
    n_whole = int(math.floor(settings.t_end / dt + 1e-9))
    times = t0 + dt * np.arange(1, n_whole + 1)
    if times.size and abs(times[-1] - t_final) <= 1e-9 * dt:
        times[-1] = t_final
    elif times.size == 0 or times[-1] < t_final:
        times = np.append(times, t_final)
    return times


def _diagnostics(y: np.ndarray, params: SystemParams, n: int, d: int):
    x, v = _split(y, n, d)
    grad = _gradient_raw(x, params)
    diff = x[:, None, :] - x[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(r, np.inf)
    u = _potential_raw(x, params)
    k = 0.5 * float(np.sum(params.masses[:, None] * v ** 2))
    gnorm = float(np.linalg.norm(grad, axis=1).max())
    vnorm = float(np.linalg.norm(v, axis=1).max())
    return dict(kinetic=k, potential=u, total=k + u,
                min_distance=float(r.min()), gradient_norm=gnorm,
                velocity_norm=vnorm)


class _Recorder:
    def __init__(self, params: SystemParams, n: int, d: int):
        self.params, self.n, self.d = params, n, d
        self.snapshots = []
        self.times = []
        self.total = []
        self.kinetic = []
        self.potential = []
        self.min_distance = []
        self.gradient_norm = []

    def record(self, t: float, y: np.ndarray) -> bool:
        """Append one snapshot; return True if it is numerically at equilibrium."""
        x, v = _split(y, self.n, self.d)
        diag = _diagnostics(y, self.params, self.n, self.d)
        self.snapshots.append(Configuration(x, v, time=t))
        self.times.append(t)
        self.total.append(diag["total"])
        self.kinetic.append(diag["kinetic"])
        self.potential.append(diag["potential"])
        self.min_distance.append(diag["min_distance"])
        self.gradient_norm.append(diag["gradient_norm"])
        return (diag["gradient_norm"] < EQUILIBRIUM_GRAD_TOL
                and diag["velocity_norm"] < EQUILIBRIUM_VEL_TOL)

    def build(self, status: str, settings: IntegratorSettings, message: str = ""):
        return Trajectory(snapshots=tuple(self.snapshots),
                          times=np.array(self.times),
                          total_energy=np.array(self.total),
                          kinetic_energy=np.array(self.kinetic),
                          potential_energy=np.array(self.potential),
                          min_distance=np.array(self.min_distance),
                          gradient_norm=np.array(self.gradient_norm),
                          status=status, settings=settings, message=message)


def integrate(initial: Configuration, params: SystemParams,
              settings: IntegratorSettings) -> Trajectory:
    """Advance the system from an initial configuration.

    Runs until t_end, an equilibrium is detected (gradient and velocity
    below threshold on two consecutive snapshots), or the step controller
    fails. Snapshots with diagnostics are emitted every snapshot_interval.
    Identical inputs produce bit-identical trajectories.
    """
    check_shapes(initial, params)
    n, d = params.n_agents, params.dimension
    recorder = _Recorder(params, n, d)
    t0 = initial.time
    y0 = stack_state(initial)
    eq_prev = recorder.record(t0, y0)

    if settings.t_end == 0:
        return recorder.build(STATUS_COMPLETED, settings)

    def fun(t, y):
        return _rhs_raw(y, params, n, d)

    if settings.method == METHOD_ADAPTIVE_EXPLICIT:
        solver = RK45(fun, t0, y0, t0 + settings.t_end,
                      rtol=settings.rel_tol, atol=settings.abs_tol,
                      max_step=settings.max_step)
    else:
        def jac(t, y):
            return _jacobian_raw(y, params, n, d)

        solver = Radau(fun, t0, y0, t0 + settings.t_end,
                       rtol=settings.rel_tol, atol=settings.abs_tol,
                       max_step=settings.max_step, jac=jac)

    snap_times = _snapshot_schedule(t0, settings)
    step_floor = MIN_STEP_FRACTION * settings.t_end
    idx = 0
    status = STATUS_COMPLETED
    message = ""

    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            status = STATUS_STEP_FAILURE
            message = "step controller failed (tolerances unattainable)"
            break
        if solver.step_size is not None and solver.step_size < step_floor:
            status = STATUS_STEP_FAILURE
            message = (f"step size {solver.step_size:.3e} fell below the floor "
                       f"{step_floor:.3e}")
            break
        # accepted states must stay collision-free
        x, _ = _split(solver.y, n, d)
        diffs = x[:, None, :] - x[None, :, :]
        rr = np.sqrt(np.einsum("ijk,ijk->ij", diffs, diffs))
        np.fill_diagonal(rr, np.inf)
        if not np.all(rr > 0):
            raise CollisionError("integration produced a collided state")
        dense = solver.dense_output()
        reached_equilibrium = False
        while idx < snap_times.size and snap_times[idx] <= solver.t + 1e-12:
            t_snap = min(snap_times[idx], solver.t)
            eq_now = recorder.record(float(snap_times[idx]), dense(t_snap))
            idx += 1
            if eq_now and eq_prev:
                reached_equilibrium = True
                break
            eq_prev = eq_now
        if reached_equilibrium:
            status = STATUS_EQUILIBRIUM
            break

    return recorder.build(status, settings, message)
