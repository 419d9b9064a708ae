"""Scenario execution: parameter parsing, simulation, artifact persistence.

A scenario document names a kind, an output directory, and kind-specific
parameters (unit-aware, like the robot config). Running a scenario writes
delimited artifacts, a JSON summary, and rendered figures into the output
directory and returns the summary.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import figures
from .artifacts import (
    read_runlog_csv,
    write_cloud_csv,
    write_json,
    write_runlog_csv,
    write_table_csv,
)
from .config import RobotConfig, parse_quantity
from .control import TriangleTrajectory, run_closed_loop, tracking_summary
from .environment import TissueParams, indentation_sweep, serial_stiffness, visceral_stiffness
from .errors import ScenarioError
from .model import effective_tip_stiffness, fraction_to_volume, inflate, max_injected_volume
from .session import PROTOCOL_VERSION, decode_frame, encode_frame, replay_session
from .workspace import coverage, force_deflection, map_workspace, summarize_workspace

SCENARIO_KINDS = (
    "workspace_map",
    "closed_loop",
    "open_loop_teleop",
    "stiffness_sweep",
    "indentation_sweep",
    "safety_report",
)


@dataclass(frozen=True)
class Scenario:
    """One runnable experiment description."""

    kind: str
    output: str = "run"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r} (expected one of {SCENARIO_KINDS})")
        if not isinstance(self.params, dict):
            raise ScenarioError("scenario params must be a mapping")


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    except yaml.YAMLError as exc:
        raise ScenarioError(f"YAML parse error in {path}: {exc}")
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ScenarioError(f"{path}: scenario document must be a mapping with a 'kind'")
    unknown = set(doc) - {"kind", "output", "params"}
    if unknown:
        raise ScenarioError(f"{path}: unknown scenario keys {sorted(unknown)}")
    return Scenario(
        kind=doc["kind"],
        output=doc.get("output", "run"),
        params=doc.get("params") or {},
    )


def output_root(override=None) -> Path:
    """Artifact root: explicit override, else the log-dir env var, else ./runs."""
    if override is not None:
        return Path(override)
    return Path(os.environ.get("SEESIM_LOG_DIR", "runs"))


def _param(params: dict, key: str, dimension: str | None, default):
    if key not in params:
        return default
    if dimension is None:
        return params[key]
    return parse_quantity(params[key], dimension, f"params.{key}")


def _reject_unknown(params: dict, allowed: set[str], kind: str) -> None:
    unknown = set(params) - allowed
    if unknown:
        raise ScenarioError(f"{kind}: unknown parameters {sorted(unknown)}")


def run_scenario(cfg: RobotConfig, scenario: Scenario, out_dir=None) -> dict:
    """Execute the scenario and persist artifacts. Returns the summary."""
    outdir = output_root(out_dir) / scenario.output
    outdir.mkdir(parents=True, exist_ok=True)
    runner = {
        "workspace_map": _run_workspace_map,
        "closed_loop": _run_closed_loop,
        "open_loop_teleop": _run_open_loop_teleop,
        "stiffness_sweep": _run_stiffness_sweep,
        "indentation_sweep": _run_indentation_sweep,
        "safety_report": _run_safety_report,
    }[scenario.kind]
    summary = runner(cfg, scenario.params, outdir)
    # Keep persisted artifacts free of absolute paths so reruns are
    # byte-identical regardless of where they land.
    summary["scenario"] = {"kind": scenario.kind, "output": scenario.output}
    write_json(outdir / "summary.json", summary)
    return summary


def _run_workspace_map(cfg: RobotConfig, params: dict, outdir: Path) -> dict:
    _reject_unknown(params, {"increments", "voxel"}, "workspace_map")
    increments = int(_param(params, "increments", None, 10))
    voxel = _param(params, "voxel", "length", 0.25e-3)
    cloud = map_workspace(cfg.geometry, increments)
    write_cloud_csv(outdir / "workspace.csv", cloud)
    budget = force_deflection(cfg.stiffness_floor, cfg.requirement)
    cov_unloaded = coverage(cloud, cfg.requirement, voxel=voxel)
    cov_loaded = coverage(cloud, cfg.requirement, voxel=voxel, adjusted=budget)
    cov_orientation = coverage(cloud, cfg.requirement, mode="orientation")
    extents = summarize_workspace(cloud)
    figures.workspace_figures(
        cloud,
        outdir,
        circles_mm={
            "centre_mm": (0.0, 0.0, extents["max_extension"] * 1e3 / 2),
            "cylinders": {
                "demand": (cfg.requirement.radial_translation * 1e3, cfg.requirement.axial_translation * 1e3),
                "demand+deflection": (budget.adjusted_radial * 1e3, budget.adjusted_axial * 1e3),
            },
        },
    )
    return {
        "increments": increments,
        "poses": extents["poses"],
        "coverage": {
            "translation_unloaded": cov_unloaded,
            "translation_loaded": cov_loaded,
            "orientation": cov_orientation,
        },
        "deflection_mm": {
            "axial": budget.axial_deflection * 1e3,
            "transversal": budget.transversal_deflection * 1e3,
        },
        "adjusted_requirement_mm": {
            "axial": budget.adjusted_axial * 1e3,
            "radial": budget.adjusted_radial * 1e3,
        },
        "extents_mm_deg": {
            "max_extension": extents["max_extension"] * 1e3,
            "max_lateral_deflection": extents["max_lateral_deflection"] * 1e3,
            "max_tilt": math.degrees(extents["max_tilt"]),
            "max_twist": math.degrees(extents["max_twist"]),
        },
    }


def _run_closed_loop(cfg: RobotConfig, params: dict, outdir: Path) -> dict:
    _reject_unknown(
        params,
        {"base", "height", "tilt", "speed", "centre_height", "noise_sigma", "seed", "loaded", "settle_time", "hold_time"},
        "closed_loop",
    )
    trajectory = TriangleTrajectory(
        base=_param(params, "base", "length", 12.33e-3),
        height=_param(params, "height", "length", 10.0e-3),
        tilt=_param(params, "tilt", "angle", 0.0),
        centre_height=_param(params, "centre_height", "length", 13.0e-3),
        speed=_param(params, "speed", "speed", 1.0e-3),
    )
    loaded = bool(_param(params, "loaded", None, cfg.environment.kind != "none"))
    contact = None
    if loaded:
        from .environment import ElasticPatch

        contact = cfg.environment.make_patch() or ElasticPatch.with_preload_force(
            cfg.environment.preload_force, normal_stiffness=cfg.environment.normal_stiffness
        )
    log = run_closed_loop(
        cfg.geometry,
        cfg.control,
        trajectory,
        contact=contact,
        sensor_noise_sigma=_param(params, "noise_sigma", "length", cfg.sensor_sigma),
        seed=int(_param(params, "seed", None, cfg.seed)),
        settle_time=_param(params, "settle_time", "time", 5.0),
        hold_time=_param(params, "hold_time", "time", 2.0),
    )
    path = write_runlog_csv(outdir / "runlog.csv", log)
    # Statistics come from the persisted file so they round-trip exactly.
    reloaded = read_runlog_csv(path)
    stats = tracking_summary(reloaded)
    figures.runlog_figures(reloaded, outdir)
    return {
        "errors_mm": {
            key: {k: v * 1e3 for k, v in row.items()} for key, row in stats.items()
        },
        "loaded": loaded,
        "duration_s": trajectory.duration,
        "samples": int(log.time.shape[0]),
    }


def _run_open_loop_teleop(cfg: RobotConfig, params: dict, outdir: Path) -> dict:
    _reject_unknown(params, {"duration", "commands"}, "open_loop_teleop")
    duration = _param(params, "duration", "time", 10.0)
    commands = params.get("commands") or []
    inbound = []
    for i, cmd in enumerate(commands):
        if not isinstance(cmd, dict):
            raise ScenarioError(f"open_loop_teleop: command {i} must be a mapping")
        unknown = set(cmd) - {"t", "vz", "wx", "wy"}
        if unknown:
            raise ScenarioError(f"open_loop_teleop: command {i} has unknown keys {sorted(unknown)}")
        t = parse_quantity(cmd.get("t", 0.0), "time", f"commands[{i}].t")
        frame = {
            "v": PROTOCOL_VERSION,
            "type": "command",
            "vz": float(cmd.get("vz", 0.0)),
            "wx": float(cmd.get("wx", 0.0)),
            "wy": float(cmd.get("wy", 0.0)),
            "t": t,
        }
        inbound.append((t, encode_frame(frame)))
    outbound = replay_session(cfg, inbound, duration)
    frames = [decode_frame(line) for line in outbound]
    states = [f for f in frames if f["type"] == "state"]
    rows = [
        [f["t"]]
        + f["position_mm"]
        + f["tilt_deg"]
        + f["volumes_ml"]
        + [int(s) for s in f["saturated"]]
        for f in states
    ]
    write_table_csv(
        outdir / "frames.csv",
        ["t [s]", "x [mm]", "y [mm]", "z [mm]", "rx [deg]", "ry [deg]", "rz [deg]",
         "V1 [ml]", "V2 [ml]", "V3 [ml]", "sat1", "sat2", "sat3"],
        rows,
    )
    (outdir / "outbound.log").write_text("\n".join(outbound) + "\n", encoding="utf-8")
    saturated_any = [any(f["saturated"]) for f in states]
    return {
        "frames": len(states),
        "duration_s": duration,
        "final_position_mm": states[-1]["position_mm"] if states else None,
        "final_tilt_deg": states[-1]["tilt_deg"] if states else None,
        "saturated_fraction": float(np.mean(saturated_any)) if states else 0.0,
        "errors": len([f for f in frames if f["type"] == "error"]),
    }


def _run_stiffness_sweep(cfg: RobotConfig, params: dict, outdir: Path) -> dict:
    _reject_unknown(params, {"levels"}, "stiffness_sweep")
    levels = [float(x) for x in params.get("levels", (0.25, 0.5, 0.75, 1.0))]
    axial, transversal = [], []
    for level in levels:
        state = inflate(cfg.geometry, np.full(cfg.geometry.n_sfa, level * max_injected_volume()))
        axial.append(effective_tip_stiffness(cfg.geometry, state, [0.0, 0.0, 1.0]))
        transversal.append(effective_tip_stiffness(cfg.geometry, state, [1.0, 0.0, 0.0]))
    write_table_csv(
        outdir / "stiffness.csv",
        ["level", "axial [N/mm]", "transversal [N/mm]"],
        [[lev, ax / 1e3, tr / 1e3] for lev, ax, tr in zip(levels, axial, transversal)],
    )
    figures.stiffness_figure(levels, axial, transversal, outdir)
    return {
        "levels": levels,
        "axial_n_per_mm": [a / 1e3 for a in axial],
        "transversal_n_per_mm": [t / 1e3 for t in transversal],
        "min_axial_n_per_mm": min(axial) / 1e3,
        "min_transversal_n_per_mm": min(transversal) / 1e3,
        "axial_monotone_decreasing": all(a > b for a, b in zip(axial, axial[1:])),
    }


def _run_indentation_sweep(cfg: RobotConfig, params: dict, outdir: Path) -> dict:
    _reject_unknown(params, {"depths", "inflation"}, "indentation_sweep")
    depths = [
        parse_quantity(d, "length", f"params.depths[{i}]")
        for i, d in enumerate(params.get("depths", ("0 mm", "5 mm", "10 mm", "15 mm")))
    ]
    report = indentation_sweep(
        cfg.geometry, depths, inflation=float(_param(params, "inflation", None, 0.6))
    )
    write_table_csv(
        outdir / "indentation.csv",
        ["depth [mm]", "lateral force [N]", "displacement ratio", "tilt ratio"],
        [
            [d * 1e3, f, dr, tr]
            for d, f, dr, tr in zip(
                report.depths, report.lateral_forces, report.displacement_ratio, report.tilt_ratio
            )
        ],
    )
    figures.indentation_figure(report, outdir)
    return {
        "depths_mm": [d * 1e3 for d in report.depths],
        "displacement_slope_pct_per_n": report.displacement_slope,
        "tilt_slope_pct_per_n": report.tilt_slope,
        "displacement_attenuates_faster": report.displacement_slope > report.tilt_slope,
        "min_displacement_ratio": float(report.displacement_ratio.min()),
    }


def _run_safety_report(cfg: RobotConfig, params: dict, outdir: Path) -> dict:
    _reject_unknown(
        params,
        {"youngs_modulus", "contact_radius", "thickness", "motion", "reference_tissue_stiffness"},
        "safety_report",
    )
    tissue = TissueParams(
        youngs_modulus=_param(params, "youngs_modulus", "pressure", 8.42e3),
        contact_radius=_param(params, "contact_radius", "length", 10e-3),
        thickness=_param(params, "thickness", "length", 10e-3),
    )
    motion = _param(params, "motion", "length", 10e-3)
    reference = _param(params, "reference_tissue_stiffness", "stiffness", 39.37e3)
    k_formula = visceral_stiffness(tissue)
    k_robot = cfg.stiffness_floor.transversal
    k_comb = serial_stiffness(reference, k_robot)
    return {
        "inputs": {
            "tissue_modulus_kpa": tissue.youngs_modulus / 1e3,
            "contact_radius_mm": tissue.contact_radius * 1e3,
            "thickness_mm": tissue.thickness * 1e3,
            "robot_transversal_stiffness_n_per_mm": k_robot / 1e3,
            "motion_mm": motion * 1e3,
        },
        "tissue_stiffness_formula_n_per_m": k_formula,
        "tissue_stiffness_reference_n_per_mm": reference / 1e3,
        "combined_stiffness_n_per_mm": k_comb / 1e3,
        "rigid_clamp_force_n": reference * motion,
        "compliant_clamp_force_n": k_comb * motion,
        "note": (
            "the reference tissue stiffness is inconsistent with the stiffness "
            "formula at the stated inputs; both values are reported and the "
            "combined-spring chain uses the reference one"
        ),
    }
