"""Delimited and JSON artifact writers.

Floats are written with shortest round-trip formatting so reloading an
artifact reproduces the numbers exactly and reruns are byte-identical.
CSV columns use the display units named in the headers (mm, ml, deg);
in-memory quantities stay SI.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .control import RunLog
from .errors import ScenarioError
from .workspace import PoseCloud

RUNLOG_HEADER = [
    "t [s]",
    "x_d [mm]", "y_d [mm]", "z_d [mm]",
    "x_m [mm]", "y_m [mm]", "z_m [mm]",
    "x [mm]", "y [mm]", "z [mm]",
    "V1 [ml]", "V2 [ml]", "V3 [ml]",
    "Fx [N]", "Fy [N]", "Fz [N]",
]

CLOUD_HEADER = [
    "V1 [ml]", "V2 [ml]", "V3 [ml]",
    "x [mm]", "y [mm]", "z [mm]",
    "rx [deg]", "ry [deg]", "rz [deg]",
]


def _fmt(x) -> str:
    return repr(float(x))


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_runlog_csv(path, log: RunLog) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUNLOG_HEADER)
        for i in range(log.time.shape[0]):
            row = (
                [log.time[i]]
                + list(log.target[i] * 1e3)
                + list(log.measured[i] * 1e3)
                + list(log.actual[i] * 1e3)
                + list(log.volumes[i] * 1e6)
                + list(log.force[i])
            )
            writer.writerow([_fmt(x) for x in row])
    return path


def read_runlog_csv(path) -> RunLog:
    """Reload a run log; the control-signal channel is not persisted."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RUNLOG_HEADER:
            raise ScenarioError(f"{path} is not a run log (unexpected header)")
        rows = [[float(x) for x in row] for row in reader if row]
    if not rows:
        raise ScenarioError(f"{path} contains no samples")
    data = np.asarray(rows)
    return RunLog(
        time=data[:, 0],
        target=data[:, 1:4] * 1e-3,
        measured=data[:, 4:7] * 1e-3,
        actual=data[:, 7:10] * 1e-3,
        volumes=data[:, 10:13] * 1e-6,
        control=np.zeros((data.shape[0], 3)),
        force=data[:, 13:16],
    )


def write_cloud_csv(path, cloud: PoseCloud) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CLOUD_HEADER)
        for i in range(len(cloud)):
            row = (
                list(cloud.volumes[i] * 1e6)
                + list(cloud.positions[i] * 1e3)
                + list(np.degrees(cloud.orientations[i]))
            )
            writer.writerow([_fmt(x) for x in row])
    return path


def read_cloud_csv(path) -> PoseCloud:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CLOUD_HEADER:
            raise ScenarioError(f"{path} is not a pose-cloud file (unexpected header)")
        rows = [[float(x) for x in row] for row in reader if row]
    data = np.asarray(rows)
    return PoseCloud(
        volumes=data[:, 0:3] * 1e-6,
        positions=data[:, 3:6] * 1e-3,
        orientations=np.radians(data[:, 6:9]),
    )


def write_table_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) if isinstance(x, (int, float, np.floating)) else str(x) for x in row])
    return path
