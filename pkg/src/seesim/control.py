"""Actuation maps and controllers for the simulated end-effector.

The closed loop mirrors the physical architecture: a trajectory generator
emits position targets at a low rate, a PI position law converts the error
into per-actuator volume demands through the actuation map, and syringe
pumps slew toward those demands under a rate limit while the quasi-static
plant follows the injected volumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NonFiniteInputError
from .mechanics import rotation_vector
from .model import (
    ContactModel,
    SeeGeometry,
    SeeState,
    _Walker,
    jacobian_v,
    max_injected_volume,
)

Array = np.ndarray


@dataclass(frozen=True)
class ActuatorFit:
    """Linear volume-to-extension characterisation of one actuator.

    The fit maps total injected volume (from empty) to length change; below
    the linear-region onset the extension is clamped to the boundary value,
    which is the pre-fill convention used throughout.
    """

    slope: float = 6.61e-3 / 1e-6
    intercept: float = -5.52e-3
    linear_region_start: float = 1.25e-6
    channel_area: float = np.pi * (6.9e-3) ** 2

    def __post_init__(self):
        if self.slope <= 0:
            raise InvalidParameterError(f"fit slope must be positive, got {self.slope}")
        if self.linear_region_start < 0 or self.channel_area <= 0:
            raise InvalidParameterError("fit region start must be >= 0 and channel area > 0")


def volume_extension(fit: ActuatorFit, volume: float) -> float:
    """Length change of one actuator at the given total injected volume [m].

    Clamps to the linear-region boundary value below the region onset, so the
    map is continuous there.
    """
    if volume < 0:
        raise InvalidParameterError(f"volume must be >= 0, got {volume}")
    v = max(volume, fit.linear_region_start)
    return fit.slope * v + fit.intercept


@dataclass(frozen=True)
class ControlConfig:
    """Gains, rates, and saturation limits of the position controller.

    The pump time constant models the low-level syringe drives as first-order
    servos toward the demanded volumes; it damps the discrete position loop
    the same way the physical stepper dynamics do.
    """

    k_p: float = 0.3e-6 / 1e-3
    k_i: float = 0.03e-6 / 1e-3
    target_rate: float = 2.0
    control_rate: float = 30.0
    pump_rate_limit: float = 0.5e-6
    pump_time_constant: float = 0.15
    volume_limits: tuple[float, float] = (0.0, max_injected_volume())
    integral_limit: float = 10e-3

    def __post_init__(self):
        if self.k_p < 0 or self.k_i < 0:
            raise InvalidParameterError("controller gains must be >= 0")
        if self.target_rate <= 0 or self.control_rate <= 0:
            raise InvalidParameterError("rates must be positive")
        if self.pump_rate_limit <= 0:
            raise InvalidParameterError("pump rate limit must be positive")
        if self.pump_time_constant <= 0:
            raise InvalidParameterError("pump time constant must be positive")
        if not self.volume_limits[0] < self.volume_limits[1]:
            raise InvalidParameterError("volume limits must be an increasing pair")
        if self.integral_limit <= 0:
            raise InvalidParameterError("integral limit must be positive")


def open_loop_rates(state: SeeState, v_cart, cfg: ControlConfig | None = None) -> Array:
    """Per-actuator volume rates realising a Cartesian tip rate command.

    Projects the 6-component rate onto the actuation axes and scales by the
    channel area. When a config is given, rates saturate at the pump limit
    with uniform scaling so the commanded direction is preserved.
    """
    v = np.asarray(v_cart, dtype=float).reshape(6)
    if not np.all(np.isfinite(v)):
        raise NonFiniteInputError("cartesian rate command contains non-finite entries")
    rates = state.geometry.sfa.channel_area * (jacobian_v(state).T @ v)
    if cfg is not None:
        peak = np.abs(rates).max()
        if peak > cfg.pump_rate_limit:
            rates = rates * (cfg.pump_rate_limit / peak)
    return rates


def pi_step(
    error,
    integral,
    cfg: ControlConfig,
    state: SeeState,
    dt: float,
    *,
    saturated: bool = False,
) -> tuple[Array, Array]:
    """One PI update: position error to desired per-actuator volume changes.

    The integral accumulates error * dt unless a pump saturated on the
    previous step (conditional anti-windup) and is norm-clamped. The control
    signal maps through the translational rows of the actuation map, and the
    demanded volume change is clipped so target volumes stay within limits.
    """
    if dt <= 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    e = np.asarray(error, dtype=float).reshape(3)
    acc = np.asarray(integral, dtype=float).reshape(3)
    if not saturated:
        acc = acc + e * dt
    norm = np.linalg.norm(acc)
    if norm > cfg.integral_limit:
        acc = acc * (cfg.integral_limit / norm)
    u = cfg.k_p * e + cfg.k_i * acc
    dv = jacobian_v(state)[:3, :].T @ u
    lo, hi = cfg.volume_limits
    dv = np.clip(state.volumes + dv, lo, hi) - state.volumes
    return dv, acc


@dataclass(frozen=True)
class TriangleTrajectory:
    """Closed isosceles-triangle tip path, optionally tilted about its base."""

    base: float = 12.33e-3
    height: float = 10.0e-3
    tilt: float = 0.0
    centre_height: float = 13.0e-3
    speed: float = 1.0e-3

    def __post_init__(self):
        if self.base <= 0 or self.height <= 0 or self.speed <= 0:
            raise InvalidParameterError("triangle dimensions and speed must be positive")

    @property
    def vertices(self) -> Array:
        """Base corners then apex; the tilt rotates the apex about the base edge."""
        z0 = self.centre_height
        apex = np.array(
            [0.0, self.height * np.cos(self.tilt), z0 + self.height * np.sin(self.tilt)]
        )
        return np.array(
            [
                [-self.base / 2.0, 0.0, z0],
                [self.base / 2.0, 0.0, z0],
                apex,
            ]
        )

    @property
    def perimeter(self) -> float:
        v = self.vertices
        loop = np.vstack([v, v[:1]])
        return float(np.linalg.norm(np.diff(loop, axis=0), axis=1).sum())

    @property
    def duration(self) -> float:
        return self.perimeter / self.speed

    def position(self, t: float) -> Array:
        """Point on the perimeter at time t (holds the start before 0 / after one lap)."""
        v = self.vertices
        loop = np.vstack([v, v[:1]])
        seg = np.diff(loop, axis=0)
        lengths = np.linalg.norm(seg, axis=1)
        s = np.clip(t, 0.0, self.duration) * self.speed
        for i in range(3):
            if s <= lengths[i] or i == 2:
                frac = min(s / lengths[i], 1.0)
                return loop[i] + frac * seg[i]
            s -= lengths[i]
        return loop[0]


def triangle_trajectory(
    base: float = 12.33e-3,
    height: float = 10.0e-3,
    tilt: float = 0.0,
    rate: float = 2.0,
    *,
    speed: float = 1.0e-3,
    centre_height: float = 13.0e-3,
) -> tuple[Array, Array, TriangleTrajectory]:
    """Waypoint schedule traversing the triangle perimeter once.

    Waypoints are emitted at the target rate; the vertex passage times are
    included so the schedule polyline traces the exact perimeter. Returns
    (times, waypoints, trajectory).
    """
    traj = TriangleTrajectory(base, height, tilt, centre_height, speed)
    v = traj.vertices
    loop = np.vstack([v, v[:1]])
    seg_lengths = np.linalg.norm(np.diff(loop, axis=0), axis=1)
    vertex_times = np.concatenate([[0.0], np.cumsum(seg_lengths)]) / traj.speed
    times = np.unique(np.concatenate([np.arange(0.0, traj.duration, 1.0 / rate), vertex_times]))
    points = np.stack([traj.position(t) for t in times])
    return times, points, traj


@dataclass
class RunLog:
    """Time-stamped closed-loop traces (SI units).

    Settle-phase samples carry negative timestamps; tracking starts at t = 0.
    """

    time: Array
    target: Array
    measured: Array
    actual: Array
    volumes: Array
    control: Array
    force: Array

    def __post_init__(self):
        k = self.time.shape[0]
        for name in ("target", "measured", "actual", "volumes", "control", "force"):
            arr = getattr(self, name)
            if arr.shape[0] != k:
                raise InvalidParameterError(f"RunLog.{name} length {arr.shape[0]} != {k}")
        if np.any(np.diff(self.time) <= 0):
            raise InvalidParameterError("RunLog timestamps must be strictly increasing")
        if not all(
            np.all(np.isfinite(getattr(self, n)))
            for n in ("time", "target", "measured", "actual", "volumes", "control", "force")
        ):
            raise NonFiniteInputError("RunLog contains non-finite entries")


def run_closed_loop(
    g: SeeGeometry,
    cfg: ControlConfig,
    trajectory: TriangleTrajectory,
    contact: ContactModel | None = None,
    sensor_noise_sigma: float = 0.0,
    seed: int = 0,
    settle_time: float = 5.0,
    hold_time: float = 2.0,
) -> RunLog:
    """Track the trajectory with the PI loop against the quasi-static plant.

    Targets update at the configured target rate (zero-order hold); the
    controller and plant step at the control rate. Measured positions add
    seeded Gaussian noise per axis. An optional contact model is engaged
    quasi-statically before the settle phase; after the lap the start vertex
    is held for hold_time so the trace closes.
    """
    dt = 1.0 / cfg.control_rate
    rng = np.random.default_rng(seed)
    walker = _Walker(g, 1, contact=contact)
    if contact is not None:
        preload = np.zeros(6)
        preload[:3] = contact.force(walker.p[0])
        for frac in np.linspace(0.0, 1.0, 21)[1:]:
            walker.advance(walker.vol, (frac * preload)[None, :])

    n_settle = int(round(settle_time * cfg.control_rate))
    n_track = int(np.ceil((trajectory.duration + hold_time) * cfg.control_rate))
    integral = np.zeros(3)
    saturated = False
    rows = []
    target_hold = trajectory.position(0.0)
    last_target_tick = -np.inf
    for k in range(-n_settle, n_track + 1):
        t = k * dt
        if t >= 0 and t - last_target_tick >= 1.0 / cfg.target_rate - 1e-12:
            target_hold = trajectory.position(t)
            last_target_tick = t
        state = SeeState(g, walker.vol[0], walker.p[0], walker.R[0], walker.tau[0])
        noise = rng.normal(scale=sensor_noise_sigma, size=3) if sensor_noise_sigma > 0 else np.zeros(3)
        measured = state.tip_position + noise
        error = target_hold - measured
        dv, integral = pi_step(error, integral, cfg, state, dt, saturated=saturated)
        u = cfg.k_p * error + cfg.k_i * integral
        # First-order pump servo toward the demand, under the rate limit.
        slew = cfg.pump_rate_limit * dt
        applied = np.clip(dv * min(dt / cfg.pump_time_constant, 1.0), -slew, slew)
        lo, hi = cfg.volume_limits
        new_vol = np.clip(walker.vol[0] + applied, lo, hi)
        saturated = bool(
            np.any(np.abs(applied) >= slew - 1e-18)
            or np.any(new_vol != walker.vol[0] + applied)
        )
        force = contact.force(walker.p[0]) if contact is not None else np.zeros(3)
        rows.append(
            (
                t,
                target_hold.copy(),
                measured,
                state.tip_position.copy(),
                state.volumes.copy(),
                u,
                force,
            )
        )
        walker.advance(new_vol[None, :], walker.w_applied)
    time, target, measured, actual, volumes, control, force = map(np.array, zip(*rows))
    return RunLog(time, target, measured, actual, volumes, control, force)


def tracking_summary(log: RunLog) -> dict:
    """Per-axis and Euclidean tracking-error statistics over the tracking phase.

    A pure function of the log contents: errors are demand minus actual
    position for samples with t >= 0.
    """
    sel = log.time >= 0.0
    err = log.target[sel] - log.actual[sel]
    eucl = np.linalg.norm(err, axis=1)
    out = {}
    for j, axis in enumerate("xyz"):
        out[f"e{axis}"] = {
            "mean": float(np.abs(err[:, j]).mean()),
            "std": float(np.abs(err[:, j]).std(ddof=1)),
            "max": float(np.abs(err[:, j]).max()),
        }
    out["euclidean"] = {
        "mean": float(eucl.mean()),
        "std": float(eucl.std(ddof=1)),
        "max": float(eucl.max()),
    }
    return out
