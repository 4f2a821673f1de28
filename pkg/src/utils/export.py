# CSV Export Utilities
# Trajectory, formation and sweep files: 15 significant digits, LF line endings

from pathlib import Path
from typing import Union

import pandas as pd

from src.services.design import SweepResult
from src.services.formation import FormationTrace
from src.services.simulation import SimulationError, Trajectory, TrajectoryKind

FLOAT_FORMAT = "%.15g"

PathLike = Union[str, Path]


def _write(df: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """Columns t, agent_1 .. agent_n, source."""
    columns = {"t": traj.times}
    for i in range(traj.n):
        columns[f"agent_{i + 1}"] = traj.states[:, i]
    columns["source"] = traj.source
    return pd.DataFrame(columns)


def write_trajectory_csv(traj: Trajectory, path: PathLike) -> Path:
    return _write(trajectory_frame(traj), path)


def read_trajectory_csv(
    path: PathLike, kind: TrajectoryKind = "first-order", divergent: bool = False
) -> Trajectory:
    """
    Parse a trajectory CSV back into a Trajectory.

    Raises:
        SimulationError: If the header is not t, agent_1 .. agent_n, source
    """
    df = pd.read_csv(path, float_precision="round_trip")
    agents = [c for c in df.columns if c.startswith("agent_")]
    expected = ["t"] + [f"agent_{i + 1}" for i in range(len(agents))] + ["source"]
    if list(df.columns) != expected or not agents:
        raise SimulationError(f"{path}: unexpected trajectory header {list(df.columns)}")
    t = df["t"].to_numpy(dtype=float)
    delta_t = float(t[1] - t[0]) if len(t) > 1 else 1.0
    return Trajectory(
        delta_t=delta_t,
        states=df[agents].to_numpy(dtype=float),
        source=df["source"].to_numpy(dtype=float),
        kind=kind,
        divergent=divergent,
    )


def formation_frame(trace: FormationTrace) -> pd.DataFrame:
    """Columns t, x_1, y_1, ..., x_n, y_n."""
    columns = {"t": trace.times}
    for i in range(trace.n):
        columns[f"x_{i + 1}"] = trace.positions[:, i, 0]
        columns[f"y_{i + 1}"] = trace.positions[:, i, 1]
    return pd.DataFrame(columns)


def write_formation_csv(trace: FormationTrace, path: PathLike) -> Path:
    return _write(formation_frame(trace), path)


def write_sweep_csv(result: SweepResult, path: PathLike) -> Path:
    """Columns gain, radius."""
    return _write(pd.DataFrame({"gain": result.grid, "radius": result.radii}), path)


def read_sweep_csv(path: PathLike) -> pd.DataFrame:
    df = pd.read_csv(path, float_precision="round_trip")
    if list(df.columns) != ["gain", "radius"]:
        raise ValueError(f"{path}: unexpected sweep header {list(df.columns)}")
    return df

