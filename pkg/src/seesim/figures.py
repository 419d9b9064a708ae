"""Matplotlib renderings written next to the delimited artifacts."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .control import RunLog
from .environment import IndentationReport
from .workspace import PoseCloud


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def runlog_figures(log: RunLog, outdir) -> list[Path]:
    outdir = Path(outdir)
    track = log.time >= 0.0
    paths = []

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(log.target[track, 0] * 1e3, log.target[track, 1] * 1e3, "k--", lw=1, label="demand")
    ax.plot(log.actual[track, 0] * 1e3, log.actual[track, 1] * 1e3, lw=1.2, label="tip")
    ax.set_xlabel("x [mm]")
    ax.set_ylabel("y [mm]")
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("trajectory trace")
    paths.append(_save(fig, outdir / "trace_xy.png"))

    err = (log.target - log.actual) * 1e3
    fig, ax = plt.subplots(figsize=(6, 3.2))
    for j, name in enumerate("xyz"):
        ax.plot(log.time, err[:, j], lw=0.9, label=f"e_{name}")
    ax.plot(log.time, np.linalg.norm(err, axis=1), "k", lw=1.1, label="|e|")
    ax.axvline(0.0, color="grey", lw=0.6)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("error [mm]")
    ax.legend(loc="best", fontsize=8, ncol=4)
    paths.append(_save(fig, outdir / "errors.png"))

    fig, ax = plt.subplots(figsize=(6, 3.2))
    for j in range(log.volumes.shape[1]):
        ax.plot(log.time, log.volumes[:, j] * 1e6, lw=0.9, label=f"V{j + 1}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("injected volume [ml]")
    ax.legend(loc="best", fontsize=8)
    paths.append(_save(fig, outdir / "volumes.png"))
    return paths


def workspace_figures(cloud: PoseCloud, outdir, circles_mm: dict | None = None) -> list[Path]:
    """Scatter projections of the reached positions, with requirement outlines."""
    outdir = Path(outdir)
    pos = cloud.positions * 1e3
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.2))
    axes[0].scatter(pos[:, 0], pos[:, 1], s=3, c=pos[:, 2], cmap="viridis")
    axes[0].set_xlabel("x [mm]")
    axes[0].set_ylabel("y [mm]")
    axes[0].set_aspect("equal")
    axes[1].scatter(pos[:, 0], pos[:, 2], s=3, c=np.hypot(pos[:, 0], pos[:, 1]), cmap="viridis")
    axes[1].set_xlabel("x [mm]")
    axes[1].set_ylabel("z [mm]")
    if circles_mm:
        centre = circles_mm.get("centre_mm", (0.0, 0.0, 0.0))
        theta = np.linspace(0, 2 * np.pi, 120)
        for label, (radius, height) in circles_mm.get("cylinders", {}).items():
            axes[0].plot(
                centre[0] + radius * np.cos(theta),
                centre[1] + radius * np.sin(theta),
                lw=1.0,
                label=label,
            )
            axes[1].plot(
                [centre[0] - radius, centre[0] + radius, centre[0] + radius, centre[0] - radius, centre[0] - radius],
                [centre[2] - height / 2, centre[2] - height / 2, centre[2] + height / 2, centre[2] + height / 2, centre[2] - height / 2],
                lw=1.0,
                label=label,
            )
        axes[0].legend(loc="best", fontsize=7)
    fig.suptitle("reached tip positions")
    return [_save(fig, outdir / "workspace.png")]


def stiffness_figure(levels, axial, transversal, outdir) -> list[Path]:
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    ax.plot(np.asarray(levels) * 100, np.asarray(axial) / 1e3, "o-", label="axial")
    ax.plot(np.asarray(levels) * 100, np.asarray(transversal) / 1e3, "s-", label="transversal")
    ax.set_xlabel("extension level [%]")
    ax.set_ylabel("stiffness [N/mm]")
    ax.legend(loc="best", fontsize=8)
    return [_save(fig, Path(outdir) / "stiffness.png")]


def indentation_figure(report: IndentationReport, outdir) -> list[Path]:
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    ax.plot(report.lateral_forces, report.displacement_ratio * 100, "o-", label="displacement")
    ax.plot(report.lateral_forces, report.tilt_ratio * 100, "s-", label="tilt")
    ax.set_xlabel("lateral contact force [N]")
    ax.set_ylabel("motion relative to free sweep [%]")
    ax.legend(loc="best", fontsize=8)
    return [_save(fig, Path(outdir) / "indentation.png")]
