"""Frame algebra and beam-element stiffness primitives.

All quantities are SI (m, N, Pa, rad) unless noted otherwise. Wrenches are
ordered [Fx, Fy, Fz, Mx, My, Mz], small displacements [ux, uy, uz, vx, vy, vz].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NonFiniteInputError, StepSizeError

Array = np.ndarray

# Hard cap on a single incremental rotation; first-order composition breaks
# down well before this.
MAX_ROTATION_STEP = 0.2

ORTHONORMALITY_TOL = 1e-9


def _as_vec3(v, name: str = "vector") -> Array:
    arr = np.asarray(v, dtype=float)
    if arr.shape[-1] != 3:
        raise InvalidParameterError(f"{name} must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(f"{name} contains non-finite entries")
    return arr


def cross_matrix(d) -> Array:
    """Skew-symmetric matrix M such that M @ v == cross(d, v).

    Supports batching: input (..., 3) yields (..., 3, 3).
    """
    d = _as_vec3(d, "cross_matrix input")
    dx, dy, dz = d[..., 0], d[..., 1], d[..., 2]
    zero = np.zeros_like(dx)
    rows = np.stack(
        [
            np.stack([zero, -dz, dy], axis=-1),
            np.stack([dz, zero, -dx], axis=-1),
            np.stack([-dy, dx, zero], axis=-1),
        ],
        axis=-2,
    )
    return rows


def is_rotation(R, tol: float = ORTHONORMALITY_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape[-2:] != (3, 3) or not np.all(np.isfinite(R)):
        return False
    eye = np.eye(3)
    ortho = np.max(np.abs(np.swapaxes(R, -1, -2) @ R - eye))
    det = np.linalg.det(R)
    return bool(ortho < tol and np.max(np.abs(det - 1.0)) < tol)


def orthonormalize(R) -> Array:
    """Project onto the nearest rotation matrix (polar decomposition)."""
    R = np.asarray(R, dtype=float)
    u, _, vt = np.linalg.svd(R)
    out = u @ vt
    # Guard against reflections from degenerate inputs.
    det = np.linalg.det(out)
    if np.any(det < 0):
        raise InvalidParameterError("input is closer to a reflection than a rotation")
    return out


def rotation_exp(v) -> Array:
    """Rotation matrix exp([v]x) via Rodrigues' formula. Batched over (..., 3)."""
    v = _as_vec3(v, "rotation vector")
    theta = np.linalg.norm(v, axis=-1)
    small = theta < 1e-8
    # Series expansions keep the small-angle branch smooth.
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(small, 1.0 - theta**2 / 6.0, np.sin(theta) / np.where(small, 1.0, theta))
        c = np.where(
            small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(theta)) / np.where(small, 1.0, theta) ** 2
        )
    K = cross_matrix(v)
    eye = np.broadcast_to(np.eye(3), K.shape)
    return eye + s[..., None, None] * K + c[..., None, None] * (K @ K)


def rotation_vector(R) -> Array:
    """Inverse of rotation_exp: the rotation vector of R. Batched over (..., 3, 3)."""
    R = np.asarray(R, dtype=float)
    tr = np.clip((np.trace(R, axis1=-2, axis2=-1) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(tr)
    w = np.stack(
        [
            R[..., 2, 1] - R[..., 1, 2],
            R[..., 0, 2] - R[..., 2, 0],
            R[..., 1, 0] - R[..., 0, 1],
        ],
        axis=-1,
    )
    sin_theta = np.sin(theta)
    small = theta < 1e-7
    near_pi = theta > np.pi - 1e-5
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(small, 0.5 + theta**2 / 12.0, theta / np.where(small, 1.0, 2.0 * sin_theta))
    out = w * scale[..., None]
    if np.any(near_pi):
        # Axis from the dominant diagonal entry; sign fixed from the skew part.
        flat = out.reshape(-1, 3)
        Rf = R.reshape(-1, 3, 3)
        th = np.atleast_1d(theta).reshape(-1)
        for idx in np.nonzero(np.atleast_1d(near_pi).reshape(-1))[0]:
            A = (Rf[idx] + np.eye(3)) / 2.0
            axis = np.sqrt(np.clip(np.diag(A), 0.0, None))
            k = int(np.argmax(axis))
            if axis[k] > 0:
                axis = A[:, k] / axis[k]
                axis /= np.linalg.norm(axis)
            flat[idx] = axis * th[idx]
        out = flat.reshape(out.shape)
    return out


def rotation_update(R, v) -> Array:
    """Compose an incremental rotation vector onto R: exp([v]x) @ R.

    The result is re-orthonormalized so repeated updates do not drift.
    Raises StepSizeError when |v| exceeds the per-step cap.
    """
    v = _as_vec3(v, "rotation increment")
    if not is_rotation(R, tol=1e-6):
        raise InvalidParameterError("rotation_update requires an orthonormal R")
    mag = np.max(np.linalg.norm(v, axis=-1))
    if mag >= MAX_ROTATION_STEP:
        raise StepSizeError(
            f"rotation increment {mag:.3g} rad exceeds the {MAX_ROTATION_STEP} rad per-step cap"
        )
    return orthonormalize(rotation_exp(v) @ np.asarray(R, dtype=float))


@dataclass(frozen=True)
class FramePlacement:
    """Pose of a local frame expressed in a reference frame."""

    rotation: Array
    translation: Array

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        d = _as_vec3(self.translation, "placement translation")
        if not is_rotation(R, tol=1e-8):
            raise InvalidParameterError("placement rotation is not orthonormal")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", d)

    @classmethod
    def identity(cls) -> "FramePlacement":
        return cls(np.eye(3), np.zeros(3))

    def compose(self, other: "FramePlacement") -> "FramePlacement":
        """Placement of other's frame when other is expressed in this frame."""
        return FramePlacement(
            self.rotation @ other.rotation,
            self.translation + self.rotation @ other.translation,
        )

    def inverse(self) -> "FramePlacement":
        return FramePlacement(self.rotation.T, -self.rotation.T @ self.translation)


def wrench_adjoint(p: FramePlacement) -> Array:
    """6x6 map taking wrenches in the local frame to the reference frame.

    Block structure [[R, 0], [D R, R]] with D the cross-product matrix of the
    frame origin. Its transpose maps reference-frame small displacements to
    local ones.
    """
    R = p.rotation
    D = cross_matrix(p.translation)
    out = np.zeros((6, 6))
    out[:3, :3] = R
    out[3:, 3:] = R
    out[3:, :3] = D @ R
    return out


@dataclass(frozen=True)
class Wrench:
    """Force/moment pair acting at a frame origin."""

    force: Array
    moment: Array
    frame: str = "tip"

    def __post_init__(self):
        object.__setattr__(self, "force", _as_vec3(self.force, "force"))
        object.__setattr__(self, "moment", _as_vec3(self.moment, "moment"))

    @classmethod
    def zero(cls, frame: str = "tip") -> "Wrench":
        return cls(np.zeros(3), np.zeros(3), frame)

    @classmethod
    def from_array(cls, w, frame: str = "tip") -> "Wrench":
        w = np.asarray(w, dtype=float).reshape(6)
        return cls(w[:3], w[3:], frame)

    def as_array(self) -> Array:
        return np.concatenate([self.force, self.moment])


@dataclass(frozen=True)
class SmallDisplacement:
    """First-order translation/rotation pair of a frame."""

    translation: Array
    rotation: Array
    frame: str = "tip"

    def __post_init__(self):
        object.__setattr__(self, "translation", _as_vec3(self.translation, "translation"))
        object.__setattr__(self, "rotation", _as_vec3(self.rotation, "rotation"))

    @classmethod
    def from_array(cls, x, frame: str = "tip") -> "SmallDisplacement":
        x = np.asarray(x, dtype=float).reshape(6)
        return cls(x[:3], x[3:], frame)

    def as_array(self) -> Array:
        return np.concatenate([self.translation, self.rotation])


@dataclass(frozen=True)
class SfaParams:
    """Material and geometry constants of one soft fluidic actuator.

    The bending rigidity (youngs_modulus * second_moment) is an effective,
    calibrated quantity; it is not derivable from the cross-section geometry.
    """

    length: float = 45e-3
    area: float = np.pi * (10e-3) ** 2
    channel_area: float = np.pi * (6.9e-3) ** 2
    youngs_modulus: float = 301.51e3
    second_moment: float = 1200e-8
    shear_modulus: float = field(default=0.5 * 301.51e3)
    torsion_constant: float = 0.5 * np.pi * 1e4 * 1e-12
    shear_correction: float = 5.0 / 6.0

    def __post_init__(self):
        for name in (
            "length",
            "area",
            "channel_area",
            "youngs_modulus",
            "second_moment",
            "shear_modulus",
            "torsion_constant",
            "shear_correction",
        ):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidParameterError(f"SfaParams.{name} must be strictly positive, got {value}")
        if self.shear_correction > 1.0:
            raise InvalidParameterError(
                f"SfaParams.shear_correction must lie in (0, 1], got {self.shear_correction}"
            )


def timoshenko_phi(p: SfaParams, length=None):
    """Shear-deformation parameter of the beam element.

    The source model was calibrated with lengths in millimetres and the
    parameter defined through L^3, which makes it unit-dependent; millimetre
    evaluation is therefore part of the model definition. Accepts an optional
    current length (scalar or array) replacing the rest length.
    """
    L = p.length if length is None else np.asarray(length, dtype=float)
    if np.any(np.asarray(L) <= 0) or not np.all(np.isfinite(L)):
        raise InvalidParameterError("beam length must be strictly positive and finite")
    i_mm = p.second_moment * 1e12
    a_mm = p.area * 1e6
    l_mm = L * 1e3
    return 12.0 * p.youngs_modulus * i_mm / ((a_mm / p.shear_correction) * p.shear_modulus * l_mm**3)


def timoshenko_stiffness(p: SfaParams, length=None) -> Array:
    """6x6 tip stiffness of one actuator modelled as a Timoshenko beam element.

    Entries are SI (N/m, N/rad, N*m/rad). Broadcasts over an array of current
    lengths: shape (...,) yields (..., 6, 6).
    """
    L = np.asarray(p.length if length is None else length, dtype=float)
    if np.any(L <= 0) or not np.all(np.isfinite(L)):
        raise InvalidParameterError("beam length must be strictly positive and finite")
    phi = timoshenko_phi(p, L)
    ei = p.youngs_modulus * p.second_moment
    kb = 12.0 * ei / ((1.0 + phi) * L**3)
    kc = 6.0 * ei / ((1.0 + phi) * L**2)
    kr = (4.0 + phi) * ei / ((1.0 + phi) * L)
    ka = p.youngs_modulus * p.area / L
    kt = p.shear_modulus * p.torsion_constant / L
    zero = np.zeros_like(kb)
    rows = [
        [kb, zero, zero, zero, kc, zero],
        [zero, kb, zero, -kc, zero, zero],
        [zero, zero, ka, zero, zero, zero],
        [zero, -kc, zero, kr, zero, zero],
        [kc, zero, zero, zero, kr, zero],
        [zero, zero, zero, zero, zero, kt],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)
