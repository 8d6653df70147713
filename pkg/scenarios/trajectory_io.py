"""
Trajectory files and gnuplot-ready plot data.

A trajectory file is comma-separated with a commented header::

    # herding trajectory
    # schema: 1
    # scenario_hash: <sha256 or ->
    # drivers: M
    # evaders: N
    # steps: n
    # grid: uniform
    # seed: <int or ->
    # columns: t,d1_x,d1_y,...

Rows hold t, driver then evader positions, driver then evader velocities and
the (kappa_p, kappa_c) pair of each driver, written with 17 significant digits.
"""
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from diagnostics.utils import energy_series, lyapunov_series, require_equal_friction
from dynamics.models import Trajectory
from dynamics.utils import gathering_radius
from main.exceptions import TrajectoryFormatError, UsageError

logger = logging.getLogger(__name__)

SCHEMA = 1
TITLE = 'herding trajectory'
PLOT_SERIES = ('tracks', 'markers', 'controls', 'gathering_radius', 'energy', 'lyapunov')


def trajectory_columns(n_drivers, n_evaders):
    drivers = [f"d{j + 1}" for j in range(n_drivers)]
    evaders = [f"e{i + 1}" for i in range(n_evaders)]
    columns = ['t']
    columns += [f"{name}_{axis}" for name in drivers + evaders for axis in ('x', 'y')]
    columns += [f"{name}_{axis}" for name in drivers + evaders for axis in ('vx', 'vy')]
    columns += [f"{name}_{control}" for name in drivers for control in ('kp', 'kc')]
    return columns


@contextmanager
def atomic_write(path):
    """Open a temporary file next to ``path`` and move it into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile('w', dir=path.parent, prefix=f".{path.name}.", delete=False)
    try:
        with handle:
            yield handle
        os.replace(handle.name, path)
    except BaseException:
        os.unlink(handle.name)
        raise


def _rows(traj):
    count = len(traj.times)
    controls = np.stack([traj.kp, traj.kc], axis=2).reshape(count, -1)
    return np.column_stack([traj.times, traj.state_vectors(), controls])


def write_trajectory(traj, path, scenario_hash=None, seed=None):
    """
    Write a trajectory file atomically.

    scenario_hash and seed default to the trajectory's metadata.
    """
    scenario_hash = scenario_hash or traj.metadata.get('scenario_hash')
    seed = seed if seed is not None else traj.metadata.get('seed')
    columns = trajectory_columns(traj.n_drivers, traj.n_evaders)
    header = '\n'.join([
        TITLE,
        f"schema: {SCHEMA}",
        f"scenario_hash: {scenario_hash or '-'}",
        f"drivers: {traj.n_drivers}",
        f"evaders: {traj.n_evaders}",
        f"steps: {traj.n_steps}",
        f"grid: {'uniform' if traj.is_uniform else 'nonuniform'}",
        f"seed: {'-' if seed is None else seed}",
        f"columns: {','.join(columns)}",
    ])
    with atomic_write(path) as handle:
        np.savetxt(handle, _rows(traj), fmt='%.17g', delimiter=',', header=header, comments='# ')
    logger.debug(f"Wrote {traj.n_steps + 1} rows to {path}")


def _read_header(path):
    header = {}
    with open(path) as handle:
        for line in handle:
            if not line.startswith('#'):
                break
            key, sep, value = line[1:].strip().partition(':')
            if sep:
                header[key.strip()] = value.strip()
    return header


def read_trajectory(path):
    """
    Read a trajectory file written by write_trajectory.

    Raises:
        TrajectoryFormatError: If the header is missing or does not match the rows
    """
    try:
        header = _read_header(path)
        n_drivers, n_evaders, n_steps = (int(header[key]) for key in ('drivers', 'evaders', 'steps'))
        columns = header['columns'].split(',')
    except OSError as exc:
        raise TrajectoryFormatError(f"Cannot read trajectory {path}: {exc}")
    except (KeyError, ValueError):
        raise TrajectoryFormatError(f"{path}: missing or malformed trajectory header")

    if int(header.get('schema', SCHEMA)) != SCHEMA:
        raise TrajectoryFormatError(f"{path}: unsupported schema {header['schema']}")
    if columns != trajectory_columns(n_drivers, n_evaders):
        raise TrajectoryFormatError(f"{path}: column list does not match {n_drivers} drivers and {n_evaders} evaders")

    try:
        rows = np.loadtxt(path, delimiter=',', comments='#', ndmin=2)
    except ValueError as exc:
        raise TrajectoryFormatError(f"{path}: unreadable rows: {exc}")
    if rows.shape != (n_steps + 1, len(columns)):
        raise TrajectoryFormatError(f"{path}: expected {n_steps + 1} rows of {len(columns)} values, found {rows.shape}")

    count = len(rows)
    width = 4 * (n_drivers + n_evaders)
    controls = rows[:, 1 + width:].reshape(count, n_drivers, 2)
    seed = header.get('seed', '-')
    metadata = {
        'scenario_hash': None if header.get('scenario_hash', '-') == '-' else header['scenario_hash'],
        'seed': None if seed == '-' else int(seed),
    }
    return Trajectory.from_vectors(
        rows[:, 0], rows[:, 1:1 + width], controls[:, :, 0], controls[:, :, 1],
        n_drivers, n_evaders, metadata=metadata,
    )


def _plot_block(traj, name, kernels):
    times = traj.times
    drivers = [f"d{j + 1}" for j in range(traj.n_drivers)]
    evaders = [f"e{i + 1}" for i in range(traj.n_evaders)]
    if name == 'tracks':
        columns = ['t'] + [f"{agent}_{axis}" for agent in drivers + evaders for axis in ('x', 'y')] + ['ec_x', 'ec_y']
        data = np.column_stack([times, traj.driver_pos.reshape(len(times), -1), traj.evader_pos.reshape(len(times), -1), traj.barycenters()])
        return columns, data
    if name == 'markers':
        # rows: agent index (drivers first), stage (0 initial, 1 final), x, y
        points = np.concatenate([traj.driver_pos[[0, -1]], traj.evader_pos[[0, -1]]], axis=1)
        rows = [(agent, stage, *points[stage, agent]) for agent in range(points.shape[1]) for stage in (0, 1)]
        return ['agent', 'stage', 'x', 'y'], np.array(rows, dtype=float)
    if name == 'controls':
        columns = ['t'] + [f"{agent}_{control}" for agent in drivers for control in ('kp', 'kc')]
        return columns, np.column_stack([times, np.stack([traj.kp, traj.kc], axis=2).reshape(len(times), -1)])
    if name == 'gathering_radius':
        radius = [gathering_radius(traj.state_at(index)) for index in range(len(times))]
        return ['t', 'radius'], np.column_stack([times, radius])

    if kernels is None:
        if traj.model is None:
            raise UsageError(f"The {name} series needs the kernels of the run")
        kernels = traj.model.kernels
    u, v = traj.relative()
    if name == 'energy':
        return ['t', 'energy'], np.column_stack([times, energy_series(u, v, kernels)])
    nu = require_equal_friction(traj)
    return ['t', 'lyapunov'], np.column_stack([times, lyapunov_series(u, v, traj.kc[:, 0], nu, kernels)])


def export_plot_data(traj, path, series=PLOT_SERIES[:4], kernels=None):
    """
    Write the requested series as gnuplot data blocks.

    Blocks are separated by two blank lines (select them with ``index``) and
    start with a ``# block: <name>`` line followed by ``# columns: ...``.
    energy and lyapunov need a one-driver, one-evader run.

    Args:
        traj: Trajectory
        path: Output file
        series: Names from PLOT_SERIES, in output order
        kernels: KernelSet for energy and lyapunov when the trajectory carries no model
    """
    unknown = [name for name in series if name not in PLOT_SERIES]
    if unknown:
        raise UsageError(f"Unknown plot series {unknown}, expected names from {PLOT_SERIES}")
    blocks = [(name, *_plot_block(traj, name, kernels)) for name in series]

    with atomic_write(path) as handle:
        handle.write(f"# herding plot data\n# schema: {SCHEMA}\n# blocks: {','.join(series)}\n")
        for name, columns, data in blocks:
            handle.write(f"\n\n# block: {name}\n")
            np.savetxt(handle, data, fmt='%.17g', delimiter=' ', header=f"columns: {' '.join(columns)}", comments='# ')
    logger.debug(f"Wrote plot blocks {list(series)} to {path}")
