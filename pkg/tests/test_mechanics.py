"""Frame algebra and beam element tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seesim.errors import InvalidParameterError, StepSizeError
from seesim.mechanics import (
    FramePlacement,
    SfaParams,
    cross_matrix,
    rotation_exp,
    rotation_update,
    rotation_vector,
    timoshenko_phi,
    timoshenko_stiffness,
    wrench_adjoint,
)

finite_floats = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(finite_floats, finite_floats, finite_floats).map(np.array)


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


class TestCrossMatrix:
    def test_zero_vector(self):
        assert np.array_equal(cross_matrix(np.zeros(3)), np.zeros((3, 3)))

    def test_canonical_basis(self):
        expected = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
        assert np.allclose(cross_matrix(np.array([1.0, 0.0, 0.0])), expected)

    @given(d=vec3, v=vec3)
    def test_matches_componentwise_cross_product(self, d, v):
        scale = 1.0 + np.linalg.norm(d) * np.linalg.norm(v)
        assert np.allclose(cross_matrix(d) @ v, np.cross(d, v), atol=1e-12 * scale)

    @given(d=vec3)
    def test_annihilates_own_vector(self, d):
        assert np.all(np.abs(cross_matrix(d) @ d) < 1e-12 * max(1.0, float(np.dot(d, d))))

    @given(d=vec3)
    def test_skew_symmetric(self, d):
        M = cross_matrix(d)
        assert np.array_equal(M, -M.T)


def random_placement(rng):
    R = rotation_exp(rng.uniform(-np.pi / 2, np.pi / 2, 3))
    return FramePlacement(R, rng.uniform(-0.1, 0.1, 3))


class TestWrenchAdjoint:
    def test_identity_placement(self):
        assert np.allclose(wrench_adjoint(FramePlacement.identity()), np.eye(6))

    def test_pure_translation_moment_arm(self):
        # Unit x-force applied at a frame sitting at (0, 0, h): moment about
        # the reference origin is d x F = (0, h, 0).
        h = 0.07
        ad = wrench_adjoint(FramePlacement(np.eye(3), np.array([0.0, 0.0, h])))
        w = ad @ np.array([1.0, 0, 0, 0, 0, 0])
        assert np.allclose(w, [1.0, 0.0, 0.0, 0.0, h, 0.0], atol=1e-15)

    def test_composition(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            p1, p2 = random_placement(rng), random_placement(rng)
            lhs = wrench_adjoint(p1.compose(p2))
            rhs = wrench_adjoint(p1) @ wrench_adjoint(p2)
            assert np.allclose(lhs, rhs, atol=1e-10)

    def test_inverse_matches_inverse_placement(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = random_placement(rng)
            lhs = np.linalg.inv(wrench_adjoint(p))
            rhs = wrench_adjoint(p.inverse())
            assert np.allclose(lhs, rhs, atol=1e-10)

    def test_block_structure(self):
        rng = np.random.default_rng(3)
        p = random_placement(rng)
        ad = wrench_adjoint(p)
        assert np.allclose(ad[:3, :3], p.rotation)
        assert np.allclose(ad[3:, 3:], p.rotation)
        assert np.allclose(ad[:3, 3:], 0.0)
        assert np.allclose(ad[3:, :3], cross_matrix(p.translation) @ p.rotation)


class TestTimoshenkoPhi:
    def test_table_defaults(self):
        # 20 * I / (A * L^3) in millimetre units with G = E/2, alpha = 5/6.
        assert timoshenko_phi(SfaParams()) == pytest.approx(8.38347, rel=1e-5)

    def test_vanishes_with_second_moment(self):
        p = SfaParams(second_moment=1e-30)
        assert timoshenko_phi(p) == pytest.approx(0.0, abs=1e-12)

    def test_cubic_length_scaling(self):
        p = SfaParams()
        assert timoshenko_phi(p, length=2 * p.length) == pytest.approx(timoshenko_phi(p) / 8.0)

    def test_rejects_nonpositive_parameters(self):
        with pytest.raises(InvalidParameterError):
            SfaParams(youngs_modulus=-1.0)
        with pytest.raises(InvalidParameterError):
            SfaParams(length=0.0)
        with pytest.raises(InvalidParameterError):
            SfaParams(shear_correction=1.5)


class TestTimoshenkoStiffness:
    def test_axial_entry(self):
        K = timoshenko_stiffness(SfaParams())
        # E*A/L with Table defaults, in N/m.
        assert K[2, 2] == pytest.approx(2104.9369, rel=1e-6)

    def test_torsion_entry(self):
        K = timoshenko_stiffness(SfaParams())
        # G*J/L: 52.62 N*mm/rad.
        assert K[5, 5] * 1e3 == pytest.approx(52.6234, rel=1e-5)

    def test_euler_bernoulli_limit(self):
        # Vanishing shear parameter recovers 12EI/L^3, 6EI/L^2, 4EI/L.
        p = SfaParams(second_moment=1e-12)
        K = timoshenko_stiffness(p)
        ei = p.youngs_modulus * p.second_moment
        L = p.length
        assert K[0, 0] == pytest.approx(12 * ei / L**3, rel=1e-6)
        assert K[0, 4] == pytest.approx(6 * ei / L**2, rel=1e-6)
        assert K[4, 4] == pytest.approx(4 * ei / L, rel=1e-6)

    def test_symmetry_and_positive_semidefinite(self):
        K = timoshenko_stiffness(SfaParams())
        assert np.allclose(K, K.T, atol=1e-9)
        eig = np.linalg.eigvalsh(K)
        assert eig.min() >= -1e-9 * eig.max()

    def test_sign_pattern(self):
        K = timoshenko_stiffness(SfaParams())
        assert K[0, 4] > 0 and K[4, 0] > 0
        assert K[1, 3] < 0 and K[3, 1] < 0

    def test_quadratic_form_nonnegative(self):
        K = timoshenko_stiffness(SfaParams())
        rng = np.random.default_rng(11)
        for _ in range(200):
            dx = rng.normal(size=6)
            assert dx @ K @ dx >= -1e-9 * np.linalg.norm(dx) ** 2

    def test_batched_lengths(self):
        p = SfaParams()
        lengths = np.array([0.045, 0.05, 0.06])
        K = timoshenko_stiffness(p, lengths)
        assert K.shape == (3, 6, 6)
        for i, L in enumerate(lengths):
            assert np.allclose(K[i], timoshenko_stiffness(p, L))
        # Stiffness softens as the actuator lengthens.
        assert K[0, 2, 2] > K[1, 2, 2] > K[2, 2, 2]
        assert K[0, 0, 0] > K[1, 0, 0] > K[2, 0, 0]


class TestRotationUpdate:
    def test_zero_increment_is_identity(self):
        R = rotation_exp(np.array([0.1, -0.2, 0.3]))
        assert np.allclose(rotation_update(R, np.zeros(3)), R, atol=1e-12)

    def test_incremental_z_rotation_matches_closed_form(self):
        R = np.eye(3)
        for _ in range(100):
            R = rotation_update(R, np.array([0.0, 0.0, np.pi / 200]))
        assert np.allclose(R, rot_z(np.pi / 2), atol=1e-6)

    def test_orthonormality_drift(self):
        rng = np.random.default_rng(0)
        R = np.eye(3)
        increments = rng.uniform(-1e-3, 1e-3, size=(100_000, 3))
        for v in increments:
            R = rotation_update(R, v)
        assert np.max(np.abs(R.T @ R - np.eye(3))) < 1e-8
        assert abs(np.linalg.det(R) - 1.0) < 1e-8

    def test_step_too_large(self):
        with pytest.raises(StepSizeError):
            rotation_update(np.eye(3), np.array([0.3, 0.0, 0.0]))

    def test_log_exp_roundtrip(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            v = rng.uniform(-1.5, 1.5, 3)
            assert np.allclose(rotation_vector(rotation_exp(v)), v, atol=1e-9)
