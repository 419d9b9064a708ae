"""Reachable-set mapping, requirement coverage, and repeatability statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import Delaunay, QhullError
from scipy.stats import chi2, norm

from .errors import EmptyCloudError, InsufficientSamplesError, InvalidParameterError
from .mechanics import rotation_vector
from .model import SeeGeometry, SeeState, fraction_to_volume, simulate_batch

Array = np.ndarray

DEFAULT_VOXEL = 0.25e-3
DEFAULT_ANGLE_VOXEL = np.radians(0.05)
# Chi-square normality fits need a minimum sample count to be meaningful.
MIN_SAMPLES_FOR_FIT = 24


@dataclass(frozen=True)
class Requirement:
    """Clinical workspace demand: translation cylinder, tilt cone, tip forces."""

    axial_translation: float = 5.22e-3
    radial_translation: float = 7.75e-3
    tilt: float = np.radians(5.08)
    normal_force: float = 8.01
    tangential_force: float = 4.42

    def __post_init__(self):
        for name in (
            "axial_translation",
            "radial_translation",
            "tilt",
            "normal_force",
            "tangential_force",
        ):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise InvalidParameterError(f"Requirement.{name} must be >= 0, got {v}")


@dataclass(frozen=True)
class KminEstimate:
    """Stiffness floor of the mechanism across the workspace [N/m]."""

    axial: float = 14.41e3
    transversal: float = 1.51e3

    def __post_init__(self):
        if self.axial <= 0 or self.transversal <= 0:
            raise InvalidParameterError("stiffness floor entries must be positive")


@dataclass(frozen=True)
class DeflectionBudget:
    """Force-induced deflection and the correspondingly enlarged requirement."""

    axial_deflection: float
    transversal_deflection: float
    adjusted_axial: float
    adjusted_radial: float


@dataclass(frozen=True)
class PoseCloud:
    """Reached tip poses over a grid of injected volumes.

    orientations hold rotation-vector components (tilt about x/y, twist about
    z), in radians.
    """

    volumes: Array
    positions: Array
    orientations: Array

    def __post_init__(self):
        vol = np.asarray(self.volumes, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        ori = np.asarray(self.orientations, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or ori.shape != pos.shape or vol.shape[0] != pos.shape[0]:
            raise InvalidParameterError(
                f"inconsistent cloud shapes: {vol.shape}, {pos.shape}, {ori.shape}"
            )
        if not (np.all(np.isfinite(vol)) and np.all(np.isfinite(pos)) and np.all(np.isfinite(ori))):
            raise InvalidParameterError("pose cloud contains non-finite entries")
        object.__setattr__(self, "volumes", vol)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "orientations", ori)

    def __len__(self) -> int:
        return self.positions.shape[0]


def map_workspace(g: SeeGeometry, increments: int) -> PoseCloud:
    """Simulate every grid combination of inflation fractions from rest.

    `increments` steps per actuator yield (increments + 1)**n grid points,
    each reached by a straight-line inflation from the deflated state.
    """
    if increments < 2:
        raise InvalidParameterError(f"increments must be >= 2, got {increments}")
    fractions = np.linspace(0.0, 1.0, increments + 1)
    axes = np.meshgrid(*([fractions] * g.n_sfa), indexing="ij")
    grid = np.stack([a.ravel() for a in axes], axis=1)
    volumes = fraction_to_volume(grid)
    try:
        positions, rotations, vol, _ = simulate_batch(g, volumes)
    except Exception:
        _locate_failing_point(g, volumes)
        raise
    return PoseCloud(vol, positions, rotation_vector(rotations))


def _locate_failing_point(g: SeeGeometry, volumes: Array) -> None:
    """Re-run rows one by one to name the grid point that broke the solver."""
    from .errors import SeesimError

    for row in volumes:
        try:
            simulate_batch(g, row[None, :])
        except SeesimError as exc:
            ml = ", ".join(f"{v * 1e6:.3f}" for v in row)
            raise type(exc)(f"{exc} (grid point volumes [{ml}] ml)") from exc


def force_deflection(k: KminEstimate, req: Requirement) -> DeflectionBudget:
    """Deflection under the required tip forces at the stiffness floor.

    Componentwise compliance: axial force over axial stiffness, tangential
    force over transversal stiffness. The adjusted requirement enlarges the
    demanded translations by these deflections.
    """
    if k.axial <= 0 or k.transversal <= 0:
        raise InvalidParameterError("stiffness floor entries must be positive")
    d_ax = req.normal_force / k.axial
    d_tr = req.tangential_force / k.transversal
    return DeflectionBudget(
        axial_deflection=d_ax,
        transversal_deflection=d_tr,
        adjusted_axial=req.axial_translation + d_ax,
        adjusted_radial=req.radial_translation + d_tr,
    )


def _hull_centroid(points: Array, tri: Delaunay) -> Array:
    """Volume (or area) centroid of the triangulated hull interior."""
    simplices = points[tri.simplices]
    edges = simplices[:, 1:] - simplices[:, :1]
    weights = np.abs(np.linalg.det(edges))
    return (simplices.mean(axis=1) * weights[:, None]).sum(axis=0) / weights.sum()


def coverage(
    cloud: PoseCloud,
    req: Requirement,
    *,
    mode: str = "translation",
    voxel: float = DEFAULT_VOXEL,
    angle_voxel: float = DEFAULT_ANGLE_VOXEL,
    frame_rotation: Array | None = None,
    adjusted: DeflectionBudget | None = None,
) -> float:
    """Fraction of the requirement volume reachable by the cloud.

    Translation mode voxelizes a cylinder (radius = radial demand, height =
    axial demand) centred at the centroid of the reached-position hull and
    reports the voxel fraction inside the hull. Orientation mode runs the
    analogous disk test on tilt-about-x/y. Passing `adjusted` replaces the
    translation demands with the force-adjusted ones. `frame_rotation`
    orients the voxel grid (the requirement is axisymmetric, so this only
    fixes the sampling frame).
    """
    if len(cloud) == 0:
        raise EmptyCloudError("cannot compute coverage of an empty pose cloud")
    if mode == "translation":
        radius = req.radial_translation if adjusted is None else adjusted.adjusted_radial
        height = req.axial_translation if adjusted is None else adjusted.adjusted_axial
        if radius == 0 or height == 0:
            return 1.0
        points = cloud.positions
        try:
            tri = Delaunay(points)
        except QhullError:
            return 0.0
        centre = _hull_centroid(points, tri)
        half = np.array([radius, radius, height / 2.0])
        counts = np.ceil(half / voxel).astype(int)
        ax = [np.arange(-c, c + 1) * voxel for c in counts]
        X, Y, Z = np.meshgrid(*ax, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
        mask = (np.hypot(pts[:, 0], pts[:, 1]) <= radius) & (np.abs(pts[:, 2]) <= height / 2.0)
        pts = pts[mask]
        if frame_rotation is not None:
            pts = pts @ np.asarray(frame_rotation, dtype=float).T
        inside = tri.find_simplex(pts + centre) >= 0
        return float(inside.mean())
    if mode == "orientation":
        if req.tilt == 0:
            return 1.0
        tilts = cloud.orientations[:, :2]
        try:
            tri = Delaunay(tilts)
        except QhullError:
            return 0.0
        centre = _hull_centroid(tilts, tri)
        c = int(np.ceil(req.tilt / angle_voxel))
        axis = np.arange(-c, c + 1) * angle_voxel
        U, V = np.meshgrid(axis, axis, indexing="ij")
        pts = np.stack([U.ravel(), V.ravel()], axis=1)
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= req.tilt]
        if frame_rotation is not None:
            R2 = np.asarray(frame_rotation, dtype=float)[:2, :2]
            pts = pts @ R2.T
        inside = tri.find_simplex(pts + centre) >= 0
        return float(inside.mean())
    raise InvalidParameterError(f"unknown coverage mode {mode!r}")


def summarize_workspace(cloud: PoseCloud) -> dict:
    """Headline extents of the reached poses (SI units)."""
    if len(cloud) == 0:
        raise EmptyCloudError("cannot summarize an empty pose cloud")
    lateral = np.hypot(cloud.positions[:, 0], cloud.positions[:, 1])
    tilt = np.hypot(cloud.orientations[:, 0], cloud.orientations[:, 1])
    return {
        "poses": len(cloud),
        "max_extension": float(cloud.positions[:, 2].max()),
        "min_extension": float(cloud.positions[:, 2].min()),
        "max_lateral_deflection": float(lateral.max()),
        "max_tilt": float(tilt.max()),
        "max_twist": float(np.abs(cloud.orientations[:, 2]).max()),
    }


@dataclass(frozen=True)
class RepeatabilityStats:
    """Per-configuration scatter of repeated approaches to the same volumes."""

    samples: int
    mean_position_error: float
    std_position_error: float
    mean_orientation_error: float
    std_orientation_error: float
    position_p_values: Array
    orientation_p_values: Array


def _normal_fit_p_value(x: Array) -> float:
    """Chi-square goodness-of-fit p-value against a fitted normal."""
    n = x.size
    if n < MIN_SAMPLES_FOR_FIT:
        return float("nan")
    mu = x.mean()
    sigma = x.std(ddof=1)
    if sigma == 0:
        return float("nan")
    bins = max(4, min(10, n // 6))
    edges = norm.ppf(np.linspace(0.0, 1.0, bins + 1), loc=mu, scale=sigma)
    edges[0], edges[-1] = -np.inf, np.inf
    observed, _ = np.histogram(x, bins=edges)
    expected = n / bins
    stat = ((observed - expected) ** 2 / expected).sum()
    dof = bins - 3
    return float(chi2.sf(stat, dof))


def repeatability_stats(
    groups: Sequence[tuple[Array, Array]],
) -> list[RepeatabilityStats]:
    """Scatter statistics for repeated pose samples, grouped by configuration.

    Each group is (positions (k, 3), orientations (k, 3)). Errors are
    Euclidean distances to the per-group mean pose; per-axis chi-square
    normality p-values are NaN when the group is too small to fit.
    """
    out = []
    for positions, orientations in groups:
        pos = np.asarray(positions, dtype=float)
        ori = np.asarray(orientations, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or ori.shape != pos.shape:
            raise InvalidParameterError(f"bad group shapes {pos.shape}, {ori.shape}")
        k = pos.shape[0]
        if k < 2:
            raise InsufficientSamplesError(f"need >= 2 samples per configuration, got {k}")
        pos_err = np.linalg.norm(pos - pos.mean(axis=0), axis=1)
        ori_err = np.linalg.norm(ori - ori.mean(axis=0), axis=1)
        out.append(
            RepeatabilityStats(
                samples=k,
                mean_position_error=float(pos_err.mean()),
                std_position_error=float(pos_err.std(ddof=1)),
                mean_orientation_error=float(ori_err.mean()),
                std_orientation_error=float(ori_err.std(ddof=1)),
                position_p_values=np.array([_normal_fit_p_value(pos[:, j]) for j in range(3)]),
                orientation_p_values=np.array([_normal_fit_p_value(ori[:, j]) for j in range(3)]),
            )
        )
    return out


def states_to_cloud(states: Sequence[SeeState]) -> PoseCloud:
    """Collect simulation states into a pose cloud."""
    if not states:
        raise EmptyCloudError("no states to collect")
    return PoseCloud(
        np.stack([s.volumes for s in states]),
        np.stack([s.tip_position for s in states]),
        rotation_vector(np.stack([s.tip_rotation for s in states])),
    )
