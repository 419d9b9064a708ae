"""External load models: elastic contact patch, tissue springs, indentation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .mechanics import Wrench, rotation_vector
from .model import (
    SeeGeometry,
    _Walker,
    fraction_to_volume,
    inflate,
    max_injected_volume,
)

Array = np.ndarray


@dataclass(frozen=True)
class ElasticPatch:
    """Unilateral linear spring pressed against the tip along a fixed normal.

    The normal points from the tip into the patch: tip motion along it deepens
    the indentation. Preload displacement sets the standing force at the rest
    pose; the contact never pulls.
    """

    normal_stiffness: float = 5.0e3
    preload_displacement: float = 1.0e-3
    contact_normal: tuple[float, float, float] = (0.0, 0.0, 1.0)
    friction: float = 0.0

    def __post_init__(self):
        if self.normal_stiffness < 0:
            raise InvalidParameterError("patch stiffness must be >= 0")
        n = np.asarray(self.contact_normal, dtype=float)
        norm = np.linalg.norm(n)
        if not np.isfinite(norm) or norm == 0:
            raise InvalidParameterError("contact normal must be a nonzero vector")
        object.__setattr__(self, "contact_normal", tuple(n / norm))

    @classmethod
    def with_preload_force(cls, force: float, normal_stiffness: float = 5.0e3, **kw) -> "ElasticPatch":
        return cls(
            normal_stiffness=normal_stiffness,
            preload_displacement=force / normal_stiffness,
            **kw,
        )

    def indentation(self, tip_position) -> float:
        n = np.asarray(self.contact_normal)
        return self.preload_displacement + float(n @ np.asarray(tip_position, dtype=float))

    def force(self, tip_position) -> Array:
        """Restoring force on the tip [N]; zero once contact separates."""
        n = np.asarray(self.contact_normal)
        depth = self.indentation(tip_position)
        return -n * self.normal_stiffness * max(depth, 0.0)

    def tangent(self, tip_position) -> Array:
        n = np.asarray(self.contact_normal)
        if self.indentation(tip_position) <= 0.0:
            return np.zeros((3, 3))
        return self.normal_stiffness * np.outer(n, n)


def patch_wrench(patch: ElasticPatch, tip_pose) -> Wrench:
    """Contact wrench at the tip for the given pose (position or (position, R))."""
    position = tip_pose[0] if isinstance(tip_pose, tuple) else tip_pose
    return Wrench(patch.force(position), np.zeros(3), frame="tip")


@dataclass(frozen=True)
class TissueParams:
    """Soft-tissue contact patch: modulus, contact radius, layer thickness."""

    youngs_modulus: float = 8.42e3
    contact_radius: float = 10e-3
    thickness: float = 10e-3

    def __post_init__(self):
        for name in ("youngs_modulus", "contact_radius", "thickness"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"TissueParams.{name} must be positive")


def visceral_stiffness(t: TissueParams) -> float:
    """Normal stiffness of the tissue layer: E * pi * r^2 / d [N/m]."""
    return t.youngs_modulus * np.pi * t.contact_radius**2 / t.thickness


def serial_stiffness(k1: float, k2: float) -> float:
    """Stiffness of two springs in series [same units as inputs]."""
    if k1 <= 0 or k2 <= 0:
        raise InvalidParameterError("serial stiffness requires positive inputs")
    return 1.0 / (1.0 / k1 + 1.0 / k2)


def clamp_contact_force(k: float, dx: float) -> float:
    """Force built up when a clamped contact is displaced by dx."""
    if dx < 0:
        raise InvalidParameterError("displacement must be >= 0")
    return k * dx


@dataclass(frozen=True)
class LateralSpringContact:
    """Depth-parameterised lateral spring at the tip (indentation phantom).

    Resists tip motion in the horizontal plane around the engagement point;
    deeper indentation stiffens the lateral coupling linearly.
    """

    stiffness: float
    anchor: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def force(self, tip_position) -> Array:
        p = np.asarray(tip_position, dtype=float)
        delta = p - np.asarray(self.anchor)
        return -self.stiffness * np.array([delta[0], delta[1], 0.0])

    def tangent(self, tip_position) -> Array:
        return self.stiffness * np.diag([1.0, 1.0, 0.0])


# Lateral spring stiffness per metre of indentation depth, calibrated so that
# a 15 mm indentation attenuates the free lateral sweep to roughly 28%.
LATERAL_STIFFNESS_PER_DEPTH = 1.05e6


@dataclass(frozen=True)
class IndentationReport:
    """Attenuation of lateral motion and tilt against indentation contacts."""

    depths: Array
    lateral_forces: Array
    displacement_ratio: Array
    tilt_ratio: Array
    displacement_slope: float
    tilt_slope: float


def indentation_sweep(
    g: SeeGeometry,
    depths,
    *,
    inflation: float = 0.6,
    sweep_fraction: float = 0.55,
    stiffness_per_depth: float = LATERAL_STIFFNESS_PER_DEPTH,
) -> IndentationReport:
    """Replay a lateral volume sweep against springs of increasing depth.

    The free sweep drives the tip from its negative to positive x-limit at the
    given mean inflation by redistributing volume between the two off-axis
    actuators. The same volume schedule is replayed open loop against a
    lateral spring per depth; the report normalises reached displacement and
    tilt to the free run and linearises their decline against the measured
    lateral force (percent per newton).
    """
    depths = np.asarray(depths, dtype=float)
    if np.any(depths < 0):
        raise InvalidParameterError("indentation depths must be >= 0")
    v_mid = inflation * max_injected_volume()
    swing = sweep_fraction * v_mid
    # Redistribution along the cosine pattern of the actuator angles sweeps
    # the tip along the x axis (the principal plane of actuator 1).
    pattern = np.array([1.0, -0.5, -0.5])
    schedule = np.array([v_mid - swing * pattern, v_mid + swing * pattern])
    x_range, tilt_range, force_peak = [], [], []
    for depth in depths:
        contact = (
            None
            if depth == 0 or stiffness_per_depth == 0
            else LateralSpringContact(stiffness_per_depth * depth)
        )
        walker = _Walker(g, 1, contact=contact)
        xs, tilts, forces = [], [], []
        for target in schedule:
            walker.advance(target[None, :], walker.w_applied)
            xs.append(walker.p[0, 0])
            tilts.append(rotation_vector(walker.R[0])[1])
            forces.append(
                0.0 if contact is None else float(np.linalg.norm(contact.force(walker.p[0])[:2]))
            )
        x_range.append(abs(xs[1] - xs[0]))
        tilt_range.append(abs(tilts[1] - tilts[0]))
        force_peak.append(max(forces))
    x_range = np.asarray(x_range)
    tilt_range = np.asarray(tilt_range)
    forces = np.asarray(force_peak)
    disp_ratio = x_range / x_range[0]
    tilt_ratio = tilt_range / tilt_range[0]
    # Percent attenuation per newton of lateral force, via least squares.
    def slope(ratio):
        if np.allclose(forces, 0.0):
            return 0.0
        A = np.stack([forces, np.ones_like(forces)], axis=1)
        coef, *_ = np.linalg.lstsq(A, 100.0 * (1.0 - ratio), rcond=None)
        return float(coef[0])

    return IndentationReport(
        depths=depths,
        lateral_forces=forces,
        displacement_ratio=disp_ratio,
        tilt_ratio=tilt_ratio,
        displacement_slope=slope(disp_ratio),
        tilt_slope=slope(tilt_ratio),
    )
