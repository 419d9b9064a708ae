"""Parallel-mechanism assembly and incremental kinetostatic solver.

The end-effector couples n tilted linear fluidic actuators between a fixed
base and the probe platform. Injected volumes impose axial-elongation
constraints on the actuators; elastic beam reactions balance external tip
wrenches. Each increment solves a saddle-point system pairing the lumped tip
stiffness with the volumetric constraint columns, then composes the tip pose
update.

Frames: tip displacements and wrenches are expressed with world-aligned axes
at the current tip origin. Actuator attachment frames are fixed in the
platform; their world placement follows the tip rotation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Protocol, Sequence

import numpy as np

from .errors import (
    InvalidParameterError,
    NonFiniteInputError,
    SingularSystemError,
    StepSizeError,
)
from .mechanics import (
    FramePlacement,
    SfaParams,
    SmallDisplacement,
    Wrench,
    cross_matrix,
    orthonormalize,
    rotation_exp,
    timoshenko_stiffness,
    wrench_adjoint,
)

Array = np.ndarray

# Working-fluid bookkeeping: actuators are pre-filled to the start of the
# linear volume-extension region; state volumes count injection above that.
PREFILL_VOLUME = 1.25e-6
MAX_TOTAL_VOLUME = 5.0e-6

# Incremental stepping policy.
DEFAULT_MAX_VOLUME_STEP = 0.01e-6
DEFAULT_MAX_ROTATION_STEP = 0.01
CONDITION_LIMIT = 1e12
RESIDUAL_LIMIT = 1e-10


def max_injected_volume() -> float:
    """Working volume range of one actuator above the pre-fill."""
    return MAX_TOTAL_VOLUME - PREFILL_VOLUME


def fraction_to_volume(fraction) -> Array:
    """Map inflation fraction(s) in [0, 1] to injected volume above pre-fill."""
    f = np.asarray(fraction, dtype=float)
    if np.any(f < -1e-12) or np.any(f > 1.0 + 1e-12):
        raise InvalidParameterError("inflation fraction must lie in [0, 1]")
    return f * max_injected_volume()


@dataclass(frozen=True)
class SeeGeometry:
    """Layout of the actuator set around the probe axis.

    The default placement radius is calibrated so the simulated workspace
    reproduces the measured lateral-reach scale of the physical device; the
    source publication does not state the as-built value.
    """

    n_sfa: int = 3
    placement_radius: float = 15e-3
    angular_spacing: float = 2.0 * np.pi / 3.0
    tilt_angle: float = np.radians(15.0)
    tilt_direction: str = "inward"
    sfa: SfaParams = SfaParams()

    def __post_init__(self):
        if self.n_sfa < 3:
            raise InvalidParameterError(f"n_sfa must be >= 3, got {self.n_sfa}")
        if self.placement_radius <= 0:
            raise InvalidParameterError("placement_radius must be positive")
        if not 0 <= self.tilt_angle < np.pi / 2:
            raise InvalidParameterError("tilt_angle must lie in [0, pi/2)")
        if self.tilt_direction not in ("inward", "outward"):
            raise InvalidParameterError(
                f"tilt_direction must be 'inward' or 'outward', got {self.tilt_direction!r}"
            )


def build_sfa_frames(g: SeeGeometry) -> list[FramePlacement]:
    """Attachment frames of the actuators, expressed in the deflated tip frame.

    Frame i sits on the placement circle at i * angular_spacing, with its
    z-axis (the actuation axis) tilted by tilt_angle toward or away from the
    probe axis.
    """
    sign = -1.0 if g.tilt_direction == "inward" else 1.0
    frames = []
    for i in range(g.n_sfa):
        ang = i * g.angular_spacing
        radial = np.array([np.cos(ang), np.sin(ang), 0.0])
        tangent = np.array([-np.sin(ang), np.cos(ang), 0.0])
        rot = rotation_exp(sign * g.tilt_angle * tangent)
        frames.append(FramePlacement(rot, g.placement_radius * radial))
    return frames


@dataclass(frozen=True)
class SeeState:
    """Snapshot of the mechanism: injected volumes, tip pose, fluid reactions."""

    geometry: SeeGeometry
    volumes: Array
    tip_position: Array
    tip_rotation: Array
    tau_v: Array

    def __post_init__(self):
        vol = np.asarray(self.volumes, dtype=float).reshape(self.geometry.n_sfa)
        if np.any(vol < -1e-15) or np.any(vol > max_injected_volume() + 1e-12):
            raise InvalidParameterError("volumes must lie within [0, max injected volume]")
        object.__setattr__(self, "volumes", vol)
        object.__setattr__(self, "tip_position", np.asarray(self.tip_position, dtype=float).reshape(3))
        object.__setattr__(self, "tip_rotation", np.asarray(self.tip_rotation, dtype=float).reshape(3, 3))
        tau = np.asarray(self.tau_v, dtype=float).reshape(self.geometry.n_sfa)
        if not np.all(np.isfinite(tau)):
            raise NonFiniteInputError("tau_v contains non-finite entries")
        object.__setattr__(self, "tau_v", tau)

    @property
    def tip_pose(self) -> tuple[Array, Array]:
        return self.tip_position, self.tip_rotation

    @property
    def lengths(self) -> Array:
        """Current actuator lengths: rest length plus constrained elongation."""
        return self.geometry.sfa.length + self.volumes / self.geometry.sfa.channel_area

    @property
    def sfa_frames(self) -> list[FramePlacement]:
        """Current attachment placements (world axes, about the tip origin)."""
        R = self.tip_rotation
        return [
            FramePlacement(R @ f.rotation, R @ f.translation) for f in build_sfa_frames(self.geometry)
        ]


def deflated_state(g: SeeGeometry) -> SeeState:
    return SeeState(g, np.zeros(g.n_sfa), np.zeros(3), np.eye(3), np.zeros(g.n_sfa))


def _block_rotation(R: Array) -> Array:
    """blockdiag(R, R) for (..., 3, 3) input."""
    shape = R.shape[:-2] + (6, 6)
    out = np.zeros(shape)
    out[..., :3, :3] = R
    out[..., 3:, 3:] = R
    return out


def _base_adjoints(g: SeeGeometry) -> Array:
    return np.stack([wrench_adjoint(f) for f in build_sfa_frames(g)])


def _assemble_arrays(g: SeeGeometry, R: Array, lengths: Array) -> tuple[Array, Array, Array]:
    """Lumped stiffness K, constraint columns Jv, and augmented matrix M.

    Batched: R (..., 3, 3) and lengths (..., n) yield K (..., 6, 6),
    Jv (..., 6, n), M (..., 6+n, 6+n).
    """
    n = g.n_sfa
    ad = _base_adjoints(g)
    block = _block_rotation(R)
    J = block[..., None, :, :] @ ad
    k_el = timoshenko_stiffness(g.sfa, lengths)
    K = (J @ k_el @ np.swapaxes(J, -1, -2)).sum(axis=-3)
    Jv = np.moveaxis(J[..., :, 2], -2, -1)
    M = np.zeros(R.shape[:-2] + (6 + n, 6 + n))
    M[..., :6, :6] = K
    M[..., :6, 6:] = Jv
    M[..., 6:, :6] = np.swapaxes(Jv, -1, -2)
    return K, Jv, M


def jacobian_theta(state: SeeState, i: int) -> Array:
    """Wrench map of actuator i into world-aligned tip coordinates."""
    if not 0 <= i < state.geometry.n_sfa:
        raise InvalidParameterError(f"actuator index {i} out of range")
    ad = wrench_adjoint(build_sfa_frames(state.geometry)[i])
    return _block_rotation(state.tip_rotation) @ ad


def jacobian_v(state: SeeState) -> Array:
    """6 x n map whose column i is the actuation axis of actuator i (with moment arm)."""
    _, Jv, _ = _assemble_arrays(state.geometry, state.tip_rotation, state.lengths)
    return Jv


def lumped_stiffness(state: SeeState) -> Array:
    """Sum of actuator stiffnesses transformed to the tip frame."""
    K, _, _ = _assemble_arrays(state.geometry, state.tip_rotation, state.lengths)
    return K


@dataclass(frozen=True)
class AugmentedSystem:
    """Saddle-point system coupling tip stiffness with volumetric constraints."""

    matrix: Array
    rhs: Array
    channel_area: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 7:
            raise InvalidParameterError(f"augmented matrix must be square (6+n), got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NonFiniteInputError("augmented matrix contains non-finite entries")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "rhs", np.asarray(self.rhs, dtype=float).reshape(m.shape[0]))

    @property
    def n_constraints(self) -> int:
        return self.matrix.shape[0] - 6


def assemble_augmented(K: Array, Jv: Array, channel_area: float) -> AugmentedSystem:
    """Stack [[K, Jv], [Jv^T, 0]] with a zero right-hand side."""
    K = np.asarray(K, dtype=float)
    Jv = np.asarray(Jv, dtype=float)
    if K.shape != (6, 6) or Jv.ndim != 2 or Jv.shape[0] != 6:
        raise InvalidParameterError(f"expected K (6,6) and Jv (6,n), got {K.shape} and {Jv.shape}")
    n = Jv.shape[1]
    M = np.zeros((6 + n, 6 + n))
    M[:6, :6] = K
    M[:6, 6:] = Jv
    M[6:, :6] = Jv.T
    return AugmentedSystem(M, np.zeros(6 + n), channel_area)


def augmented_system(state: SeeState) -> AugmentedSystem:
    """Assemble the saddle-point system at the given state."""
    K, Jv, _ = _assemble_arrays(state.geometry, state.tip_rotation, state.lengths)
    return assemble_augmented(K, Jv, state.geometry.sfa.channel_area)


def _solve_vec(A: Array, b: Array) -> Array:
    """np.linalg.solve with an explicit trailing vector axis (batch-safe)."""
    return np.linalg.solve(A, b[..., None])[..., 0]


def _equilibrated_solve(M: Array, rhs: Array) -> Array:
    """Row/column-equilibrated solve with one step of iterative refinement."""
    scale = 1.0 / np.sqrt(np.clip(np.abs(M).max(axis=-1), 1e-300, None))
    Ms = scale[..., :, None] * M * scale[..., None, :]
    try:
        y = _solve_vec(Ms, scale * rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"augmented system is singular: {exc}") from exc
    x = scale * y
    resid = rhs - np.einsum("...ij,...j->...i", M, x)
    dy = _solve_vec(Ms, scale * resid)
    return x + scale * dy


def _check_condition(M: Array, context: str = "") -> None:
    sv = np.linalg.svd(M, compute_uv=False)
    smin = sv[..., -1]
    smax = sv[..., 0]
    bad = (smin <= 0) | (smax > CONDITION_LIMIT * smin)
    if np.any(bad):
        where = f" at {context}" if context else ""
        raise SingularSystemError(
            f"augmented system condition estimate exceeds {CONDITION_LIMIT:g}{where}"
        )


def solve_increment(system: AugmentedSystem, dw, dvolumes) -> tuple[SmallDisplacement, Array]:
    """Solve one increment: external wrench change and injected volume change.

    Returns the tip displacement increment and the constraint-reaction
    increment. The solution is verified against the assembled system to a
    1e-10 relative residual and constraint-row residual.
    """
    n = system.n_constraints
    w = dw.as_array() if isinstance(dw, Wrench) else np.asarray(dw, dtype=float).reshape(6)
    dv = np.asarray(dvolumes, dtype=float).reshape(n)
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(dv))):
        raise NonFiniteInputError("increment inputs contain non-finite entries")
    _check_condition(system.matrix)
    rhs = np.concatenate([w, dv / system.channel_area])
    sol = _equilibrated_solve(system.matrix, rhs)
    resid = np.linalg.norm(system.matrix @ sol - rhs)
    if resid > RESIDUAL_LIMIT * max(1.0, np.linalg.norm(rhs)):
        raise SingularSystemError(f"solve residual {resid:.3e} exceeds tolerance")
    constraint = np.linalg.norm(system.matrix[6:, :6] @ sol[:6] - rhs[6:])
    if constraint > RESIDUAL_LIMIT * max(1.0, np.linalg.norm(rhs[6:])):
        raise SingularSystemError(f"constraint residual {constraint:.3e} exceeds tolerance")
    return SmallDisplacement.from_array(sol[:6]), sol[6:]


class ContactModel(Protocol):
    """Tip-point contact: restoring force and its translation-block tangent."""

    def force(self, position: Array) -> Array: ...

    def tangent(self, position: Array) -> Array: ...


class _RotationStepTooLarge(Exception):
    pass


class _Walker:
    """Batched incremental stepper over volume/wrench paths."""

    def __init__(
        self,
        g: SeeGeometry,
        batch: int,
        max_volume_step: float = DEFAULT_MAX_VOLUME_STEP,
        max_rotation_step: float = DEFAULT_MAX_ROTATION_STEP,
        contact: ContactModel | None = None,
    ):
        self.g = g
        self.n = g.n_sfa
        self.max_volume_step = max_volume_step
        self.max_rotation_step = max_rotation_step
        self.contact = contact
        self.p = np.zeros((batch, 3))
        self.R = np.broadcast_to(np.eye(3), (batch, 3, 3)).copy()
        self.vol = np.zeros((batch, self.n))
        self.tau = np.zeros((batch, self.n))
        self.w_applied = np.zeros((batch, 6))
        self._carry = np.zeros((batch, 6))
        # SVD-based conditioning checks dominate large batches; stride them
        # and rely on the per-step residual check in between.
        self._cond_stride = 1 if batch == 1 else 25
        self._steps_done = 0
        if contact is not None and batch != 1:
            raise InvalidParameterError("contact coupling supports single-run stepping only")

    def snapshot(self):
        return (self.p.copy(), self.R.copy(), self.vol.copy(), self.tau.copy(), self.w_applied.copy(), self._carry.copy())

    def restore(self, snap):
        self.p, self.R, self.vol, self.tau, self.w_applied, self._carry = [s.copy() for s in snap]

    def _substep(self, dvol: Array, dw: Array) -> None:
        g = self.g
        lengths = g.sfa.length + self.vol / g.sfa.channel_area
        K, Jv, M = _assemble_arrays(g, self.R, lengths)
        if self.contact is not None:
            M[..., :3, :3] += self.contact.tangent(self.p[0])
        if self._steps_done % self._cond_stride == 0:
            _check_condition(M)
        self._steps_done += 1
        rhs = np.concatenate([dw + self._carry, dvol / g.sfa.channel_area], axis=-1)
        sol = _equilibrated_solve(M, rhs)
        resid = np.linalg.norm(np.einsum("...ij,...j->...i", M, sol) - rhs, axis=-1)
        if np.any(resid > RESIDUAL_LIMIT * np.maximum(1.0, np.linalg.norm(rhs, axis=-1))):
            raise SingularSystemError("incremental solve residual exceeds tolerance")
        du, dv, dtau = sol[..., :3], sol[..., 3:6], sol[..., 6:]
        if np.max(np.linalg.norm(dv, axis=-1)) > self.max_rotation_step:
            raise _RotationStepTooLarge
        p_new = self.p + du
        carry = np.zeros_like(self._carry)
        if self.contact is not None:
            f_old = self.contact.force(self.p[0])
            f_new = self.contact.force(p_new[0])
            tangent = self.contact.tangent(self.p[0])
            carry[0, :3] = f_new - f_old + tangent @ du[0]
        self.p = p_new
        self.R = orthonormalize(rotation_exp(dv) @ self.R)
        self.vol = self.vol + dvol
        self.tau = self.tau + dtau
        self.w_applied = self.w_applied + dw
        self._carry = carry

    def advance(self, target_vol: Array, target_w: Array) -> None:
        """Walk to the target volumes/wrench, subdividing per the step policy."""
        dvol_full = np.asarray(target_vol, dtype=float) - self.vol
        dw_full = np.asarray(target_w, dtype=float) - self.w_applied
        if not (np.all(np.isfinite(dvol_full)) and np.all(np.isfinite(dw_full))):
            raise NonFiniteInputError("schedule contains non-finite entries")
        n_sub = max(1, int(np.ceil(np.max(np.abs(dvol_full)) / self.max_volume_step)))
        for attempt in range(10):
            snap = self.snapshot()
            try:
                for _ in range(n_sub):
                    self._substep(dvol_full / n_sub, dw_full / n_sub)
                return
            except _RotationStepTooLarge:
                self.restore(snap)
                n_sub *= 2
        raise StepSizeError(
            "rotation increment exceeds the step policy even after repeated subdivision"
        )

    def states(self) -> list[SeeState]:
        return [
            SeeState(self.g, self.vol[b], self.p[b], self.R[b], self.tau[b])
            for b in range(self.p.shape[0])
        ]


def simulate_quasistatic(
    g: SeeGeometry,
    volume_path,
    wrench_path=None,
    steps: int | None = None,
    *,
    max_volume_step: float = DEFAULT_MAX_VOLUME_STEP,
    max_rotation_step: float = DEFAULT_MAX_ROTATION_STEP,
    contact: ContactModel | None = None,
) -> list[SeeState]:
    """Quasi-static run from the deflated state along scheduled volumes/wrenches.

    volume_path: (m, n) injected volumes above pre-fill per schedule point.
    wrench_path: (m, 6) external tip wrenches, or None for unloaded motion.
    steps: optional resampling of both schedules to this many points.
    Returns the state history including the initial deflated state. Schedule
    segments are internally subdivided to honour the step-size policy.
    """
    vol = np.atleast_2d(np.asarray(volume_path, dtype=float))
    if vol.shape[1] != g.n_sfa:
        raise InvalidParameterError(f"volume_path must have {g.n_sfa} columns, got {vol.shape}")
    if wrench_path is None:
        wr = np.zeros((vol.shape[0], 6))
    else:
        wr = np.atleast_2d(np.asarray(wrench_path, dtype=float))
    if wr.shape != (vol.shape[0], 6):
        raise InvalidParameterError(
            f"wrench_path shape {wr.shape} does not match volume_path length {vol.shape[0]}"
        )
    if steps is not None:
        if steps < 1:
            raise InvalidParameterError("steps must be >= 1")
        t_old = np.linspace(0.0, 1.0, vol.shape[0])
        t_new = np.linspace(0.0, 1.0, steps)
        vol = np.stack([np.interp(t_new, t_old, vol[:, j]) for j in range(vol.shape[1])], axis=1)
        wr = np.stack([np.interp(t_new, t_old, wr[:, j]) for j in range(6)], axis=1)
    walker = _Walker(
        g, 1, max_volume_step=max_volume_step, max_rotation_step=max_rotation_step, contact=contact
    )
    history = walker.states()
    for k in range(vol.shape[0]):
        try:
            walker.advance(vol[k][None, :], wr[k][None, :])
        except SingularSystemError as exc:
            raise SingularSystemError(f"{exc} (schedule point {k})") from exc
        history.extend(walker.states())
    return history


def simulate_batch(
    g: SeeGeometry,
    volume_targets,
    wrench_targets=None,
    *,
    max_volume_step: float = DEFAULT_MAX_VOLUME_STEP,
    max_rotation_step: float = DEFAULT_MAX_ROTATION_STEP,
) -> tuple[Array, Array, Array, Array]:
    """Run straight-line inflations for a batch of volume targets.

    Returns (positions (b,3), rotations (b,3,3), volumes (b,n), tau (b,n)).
    All runs step together; the step count follows the largest target.
    """
    targets = np.atleast_2d(np.asarray(volume_targets, dtype=float))
    b = targets.shape[0]
    wr = np.zeros((b, 6)) if wrench_targets is None else np.atleast_2d(np.asarray(wrench_targets, dtype=float))
    walker = _Walker(g, b, max_volume_step=max_volume_step, max_rotation_step=max_rotation_step)
    walker.advance(targets, wr)
    return walker.p, walker.R, walker.vol, walker.tau


def inflate(g: SeeGeometry, volumes, wrench=None, **kwargs) -> SeeState:
    """Straight-line inflation from the deflated state to the given volumes."""
    vol = np.asarray(volumes, dtype=float).reshape(1, g.n_sfa)
    wr = None if wrench is None else np.asarray(wrench, dtype=float).reshape(1, 6)
    return simulate_quasistatic(g, vol, wr, **kwargs)[-1]


def displacement_probe(
    state: SeeState,
    direction,
    total: float = 1e-5,
    steps: int = 5,
) -> tuple[Array, Array, SeeState]:
    """Impose a tip translation along `direction` and recover the reaction force.

    Emulates a displacement-controlled probing of the mechanism: translation
    prescribed, platform rotations free (no external moment), fluid reactions
    held at their current values while chamber volumes follow the constraint
    rows. Returns (displacements, reaction-force components along the
    direction, final state).
    """
    d = np.asarray(direction, dtype=float).reshape(3)
    norm = np.linalg.norm(d)
    if not np.isfinite(norm) or norm == 0:
        raise InvalidParameterError("probe direction must be a nonzero finite vector")
    d = d / norm
    g = state.geometry
    p = state.tip_position.copy()
    R = state.tip_rotation.copy()
    vol = state.volumes.copy()
    h = total / steps
    disps = np.zeros(steps + 1)
    forces = np.zeros(steps + 1)
    f_acc = np.zeros(3)
    for k in range(steps):
        lengths = g.sfa.length + vol / g.sfa.channel_area
        K, Jv, M = _assemble_arrays(g, R, lengths)
        _check_condition(M, context="displacement probe")
        du = d * h
        K_uu, K_uv = K[:3, :3], K[:3, 3:]
        K_vu, K_vv = K[3:, :3], K[3:, 3:]
        dv = np.linalg.solve(K_vv, -K_vu @ du)
        df = K_uu @ du + K_uv @ dv
        dx = np.concatenate([du, dv])
        vol = vol + g.sfa.channel_area * (Jv.T @ dx)
        p = p + du
        R = orthonormalize(rotation_exp(dv) @ R)
        f_acc = f_acc + df
        disps[k + 1] = (k + 1) * h
        forces[k + 1] = f_acc @ d
    final = SeeState(g, np.clip(vol, 0.0, max_injected_volume()), p, R, state.tau_v)
    return disps, forces, final


def effective_tip_stiffness(g: SeeGeometry, state: SeeState, direction) -> float:
    """Translational stiffness seen at the tip along a unit direction [N/m].

    Numerically differentiates the probing reaction force with respect to the
    imposed displacement at the given operating state. Central differencing
    cancels the first-order drift of the operating point along the probe.
    """
    if g != state.geometry:
        raise InvalidParameterError("geometry does not match the state's geometry")
    d = np.asarray(direction, dtype=float).reshape(3)
    total, steps = 1e-5, 4
    disps, fwd, _ = displacement_probe(state, d, total=total, steps=steps)
    _, bwd, _ = displacement_probe(state, -d, total=total, steps=steps)
    slope = (fwd[-1] + bwd[-1]) / (2.0 * disps[-1])
    if slope <= 0:
        raise SingularSystemError("probed stiffness is not positive")
    return float(slope)
