"""Run artifacts on disk: trajectory files, data series, summaries, configs.

The trajectory format is line-delimited plain text, one snapshot per line:
time, the N*d positions row-major, the N*d velocities, then total / kinetic /
potential energy, minimum pairwise distance, and gradient norm. Numbers are
written with 17 significant digits, so a parsed file reproduces the original
doubles bit for bit. Header lines (prefixed '#') carry the shape, run status,
and integrator settings needed to rebuild the Trajectory object.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from pathlib import Path

import numpy as np
import yaml

from .integrate import IntegratorSettings, Trajectory
from .model import Configuration, build_system
from .scenarios import Scenario

TRAJECTORY_FILENAME = "trajectory.txt"
SUMMARY_FILENAME = "summary.json"
ENERGY_SERIES_FILENAME = "energy_series.csv"
DISTANCE_SERIES_FILENAME = "distance_series.csv"
RESIDUAL_SERIES_FILENAME = "residual_series.csv"
RATE_FILENAME = "rate.json"

_FMT = "%.17g"


def _fmt_row(values) -> str:
    return " ".join(_FMT % v for v in values)


def write_trajectory(path, traj: Trajectory) -> Path:
    """Write a trajectory to a plain-text snapshot-per-line file."""
    path = Path(path)
    n = traj.initial.n_agents
    d = traj.initial.dimension
    settings = json.dumps(dataclasses.asdict(traj.settings), sort_keys=True)
    lines = [
        "# ljswarm trajectory v1",
        f"# n={n}",
        f"# d={d}",
        f"# status={traj.status}",
        f"# message={traj.message}",
        f"# settings={settings}",
        "# columns: time positions*{nd} velocities*{nd} total kinetic potential"
        " min_distance gradient_norm".replace("{nd}", str(n * d)),
    ]
    for k, snap in enumerate(traj.snapshots):
        row = np.concatenate([
            [traj.times[k]],
            snap.positions.ravel(),
            snap.velocities.ravel(),
            [traj.total_energy[k], traj.kinetic_energy[k],
             traj.potential_energy[k], traj.min_distance[k],
             traj.gradient_norm[k]],
        ])
        lines.append(_fmt_row(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_trajectory(path) -> Trajectory:
    """Parse a trajectory file back into a Trajectory object."""
    path = Path(path)
    header: dict[str, str] = {}
    rows = []
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value
            continue
        rows.append(np.array(line.split(), dtype=float))
    if not rows:
        raise ValueError(f"no snapshot rows in {path}")
    n = int(header["n"])
    d = int(header["d"])
    settings = IntegratorSettings(**json.loads(header["settings"]))
    nd = n * d
    expected_width = 1 + 2 * nd + 5
    snapshots = []
    times, total, kinetic, potential, min_dist, grad = [], [], [], [], [], []
    for row in rows:
        if row.size != expected_width:
            raise ValueError(f"snapshot row has {row.size} fields, expected {expected_width}")
        t = row[0]
        pos = row[1:1 + nd].reshape(n, d)
        vel = row[1 + nd:1 + 2 * nd].reshape(n, d)
        snapshots.append(Configuration(pos, vel, time=t))
        times.append(t)
        total.append(row[1 + 2 * nd])
        kinetic.append(row[2 + 2 * nd])
        potential.append(row[3 + 2 * nd])
        min_dist.append(row[4 + 2 * nd])
        grad.append(row[5 + 2 * nd])
    return Trajectory(snapshots=tuple(snapshots), times=np.array(times),
                      total_energy=np.array(total), kinetic_energy=np.array(kinetic),
                      potential_energy=np.array(potential),
                      min_distance=np.array(min_dist), gradient_norm=np.array(grad),
                      status=header.get("status", "completed"),
                      settings=settings, message=header.get("message", ""))


def write_energy_series(path, traj: Trajectory) -> Path:
    path = Path(path)
    lines = ["time,total,kinetic,potential"]
    for k in range(len(traj)):
        lines.append(",".join(_FMT % v for v in (
            traj.times[k], traj.total_energy[k], traj.kinetic_energy[k],
            traj.potential_energy[k])))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_distance_series(path, traj: Trajectory, max_pair_columns: int = 12) -> Path:
    """Per-snapshot minimum distance, plus every pair distance for small systems."""
    path = Path(path)
    n = traj.initial.n_agents
    iu = np.triu_indices(n, 1)
    with_pairs = iu[0].size <= max_pair_columns
    headers = ["time", "min_distance"]
    if with_pairs:
        headers += [f"r_{i}_{j}" for i, j in zip(*iu)]
    lines = [",".join(headers)]
    for k, snap in enumerate(traj.snapshots):
        row = [traj.times[k], traj.min_distance[k]]
        if with_pairs:
            diff = snap.positions[:, None, :] - snap.positions[None, :, :]
            dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            row += list(dist[iu])
        lines.append(",".join(_FMT % v for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_residual_series(path, times, residuals) -> Path:
    path = Path(path)
    lines = ["time,residual"]
    for t, r in zip(times, residuals):
        lines.append(",".join((_FMT % t, _FMT % r)))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_series(path) -> dict[str, np.ndarray]:
    """Read a csv series written by the writers above into named columns."""
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    names = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return {name: data[:, k] for k, name in enumerate(names)}


def write_summary(path, summary: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path


def read_summary(path) -> dict:
    return json.loads(Path(path).read_text())


def config_hash(payload: dict) -> str:
    """Stable short hash of a run's resolved configuration."""
    encoded = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(encoded).hexdigest()[:16]


def settings_payload(settings: IntegratorSettings) -> dict:
    payload = dataclasses.asdict(settings)
    if math.isinf(payload["max_step"]):
        payload["max_step"] = None
    return payload


def load_scenario_config(path) -> Scenario:
    """Build a custom scenario from a YAML config file.

    Schema (documented in the README): top-level ``name``, ``well_depth``,
    ``dimension``, an ``agents`` list with per-agent mass / damping / radius /
    position / optional velocity, and an ``integrator`` section matching
    IntegratorSettings field names.
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ValueError(f"could not parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"{path} must contain a mapping at the top level")
    for key in ("well_depth", "dimension", "agents"):
        if key not in raw:
            raise ValueError(f"{path} is missing required key {key!r}")
    agents = raw["agents"]
    if not isinstance(agents, list) or len(agents) < 2:
        raise ValueError("agents must be a list with at least two entries")
    spec, positions, velocities = [], [], []
    for k, entry in enumerate(agents):
        try:
            spec.append((entry["mass"], entry["damping"], entry["radius"]))
            positions.append([float(v) for v in entry["position"]])
            velocities.append([float(v) for v in
                               entry.get("velocity", [0.0] * len(entry["position"]))])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"agent entry {k} is malformed: {exc}") from exc
    params = build_system(spec, raw["well_depth"], raw["dimension"])
    initial = Configuration(positions=np.array(positions),
                            velocities=np.array(velocities))
    integrator = dict(raw.get("integrator", {}))
    if integrator.get("max_step") is None:
        integrator.pop("max_step", None)
    integrator.setdefault("t_end", 80.0)
    settings = IntegratorSettings(**integrator)
    name = str(raw.get("name", path.stem))
    return Scenario(name=name, params=params, initial=initial,
                    settings=settings, expected=None)
