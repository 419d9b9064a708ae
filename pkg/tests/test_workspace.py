"""Workspace mapping, coverage, and repeatability tests."""

import numpy as np
import pytest
from scipy.spatial import ConvexHull, Delaunay

from seesim.errors import EmptyCloudError, InsufficientSamplesError, InvalidParameterError
from seesim.model import SeeGeometry, fraction_to_volume, max_injected_volume
from seesim.workspace import (
    DeflectionBudget,
    KminEstimate,
    PoseCloud,
    Requirement,
    coverage,
    force_deflection,
    map_workspace,
    repeatability_stats,
    summarize_workspace,
)


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def blob_cloud(n=300, seed=0, scale=8e-3):
    """Synthetic anisotropic point blob used as a stand-in reachable set."""
    rng = np.random.default_rng(seed)
    pos = rng.normal(size=(n, 3)) * np.array([scale, 0.8 * scale, 0.5 * scale])
    pos[:, 2] += 12e-3
    ori = rng.normal(scale=np.radians(4.0), size=(n, 3))
    return PoseCloud(np.zeros((n, 3)), pos, ori)


class TestMapWorkspace:
    @pytest.fixture(scope="class")
    @staticmethod
    def small_map():
        return map_workspace(SeeGeometry(), increments=4)

    def test_grid_count(self, small_map):
        assert len(small_map) == 125

    def test_counting_formula(self):
        # increments=10 over three actuators gives 11^3 grid points; checked
        # on the grid construction without running the full simulation.
        fr = np.linspace(0, 1, 11)
        grid = np.stack([a.ravel() for a in np.meshgrid(fr, fr, fr, indexing="ij")], axis=1)
        assert grid.shape == (1331, 3)

    def test_contains_deflated_pose(self, small_map):
        at_zero = np.all(small_map.volumes == 0.0, axis=1)
        assert at_zero.sum() == 1
        assert np.allclose(small_map.positions[at_zero], 0.0, atol=1e-12)

    def test_cyclic_volume_permutation_rotates_cloud(self, small_map):
        # Permuting the volume columns reaches the same position set rotated
        # by the actuator spacing.
        Rz = rot_z(2 * np.pi / 3)
        rotated = small_map.positions @ Rz.T
        original = {tuple(np.round(p, 12)) for p in small_map.positions}
        # Match each rotated point to the original set within 1e-9.
        for p in rotated:
            dists = np.linalg.norm(small_map.positions - p, axis=1)
            assert dists.min() < 1e-9

    def test_increment_validation(self):
        with pytest.raises(InvalidParameterError):
            map_workspace(SeeGeometry(), increments=1)

    def test_summary_fields(self, small_map):
        s = summarize_workspace(small_map)
        assert s["poses"] == 125
        assert s["max_extension"] == pytest.approx(
            max_injected_volume() / SeeGeometry().sfa.channel_area / np.cos(SeeGeometry().tilt_angle),
            rel=1e-6,
        )
        assert s["max_lateral_deflection"] > 5e-3
        assert s["max_twist"] < np.radians(2.0)


class TestForceDeflection:
    def test_reference_numbers(self):
        # 8.01 N / 14.41 N/mm and 4.42 N / 1.51 N/mm.
        budget = force_deflection(KminEstimate(), Requirement())
        assert budget.axial_deflection * 1e3 == pytest.approx(0.56, abs=0.05)
        assert budget.transversal_deflection * 1e3 == pytest.approx(2.93, abs=0.05)
        assert budget.adjusted_axial * 1e3 == pytest.approx(5.78, abs=0.05)
        assert budget.adjusted_radial * 1e3 == pytest.approx(10.68, abs=0.05)

    def test_zero_force_keeps_requirement(self):
        req = Requirement(normal_force=0.0, tangential_force=0.0)
        budget = force_deflection(KminEstimate(), req)
        assert budget.axial_deflection == 0.0
        assert budget.transversal_deflection == 0.0
        assert budget.adjusted_axial == req.axial_translation
        assert budget.adjusted_radial == req.radial_translation

    def test_linear_in_force(self):
        k = KminEstimate()
        for factor in (0.5, 2.0, 3.7):
            req = Requirement(normal_force=8.01 * factor, tangential_force=4.42 * factor)
            base = force_deflection(k, Requirement())
            scaled = force_deflection(k, req)
            assert scaled.axial_deflection == pytest.approx(factor * base.axial_deflection)
            assert scaled.transversal_deflection == pytest.approx(
                factor * base.transversal_deflection
            )

    def test_rejects_zero_stiffness(self):
        with pytest.raises(InvalidParameterError):
            KminEstimate(axial=0.0)


class TestCoverage:
    def test_zero_requirement_is_fully_covered(self):
        cloud = blob_cloud()
        req = Requirement(axial_translation=0.0, radial_translation=0.0, tilt=0.0)
        assert coverage(cloud, req) == 1.0
        assert coverage(cloud, req, mode="orientation") == 1.0

    def test_empty_cloud_rejected(self):
        cloud = PoseCloud(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 3)))
        with pytest.raises(EmptyCloudError):
            coverage(cloud, Requirement())

    def test_matches_monte_carlo_volume_oracle(self):
        # Requirement cylinder strictly containing the hull: the covered
        # fraction equals hull volume over cylinder volume.
        cloud = blob_cloud(seed=3)
        pos = cloud.positions
        radius = 1.05 * np.hypot(pos[:, 0], pos[:, 1]).max()
        centre_z = pos[:, 2]  # cylinder is centred at the hull centroid
        height = 2.2 * (centre_z.max() - centre_z.min())
        req = Requirement(axial_translation=height, radial_translation=radius)
        got = coverage(cloud, req)
        hull = ConvexHull(pos)
        exact = hull.volume / (np.pi * radius**2 * height)
        assert got == pytest.approx(exact, abs=0.02)
        # Independent Monte-Carlo integration of the same ratio.
        rng = np.random.default_rng(11)
        tri = Delaunay(pos)
        n = 40000
        r = radius * np.sqrt(rng.uniform(size=n))
        th = rng.uniform(0, 2 * np.pi, n)
        z = rng.uniform(-height / 2, height / 2, n)
        simplices = pos[tri.simplices]
        weights = np.abs(np.linalg.det(simplices[:, 1:] - simplices[:, :1]))
        centroid = (simplices.mean(axis=1) * weights[:, None]).sum(axis=0) / weights.sum()
        samples = np.stack([r * np.cos(th), r * np.sin(th), z], axis=1) + centroid
        mc = (tri.find_simplex(samples) >= 0).mean()
        assert got == pytest.approx(mc, abs=0.02)

    def test_monotone_under_uniform_scaling(self):
        cloud = blob_cloud(seed=5)
        base = Requirement()
        fractions = [
            coverage(
                cloud,
                Requirement(
                    axial_translation=s * base.axial_translation,
                    radial_translation=s * base.radial_translation,
                ),
            )
            for s in (0.25, 0.5, 1.0, 1.5, 2.5)
        ]
        for a, b in zip(fractions, fractions[1:]):
            assert b <= a + 0.01

    def test_rotation_invariance(self):
        cloud = blob_cloud(seed=7)
        req = Requirement()
        base = coverage(cloud, req)
        ang = 0.7332
        Rz = rot_z(ang)
        rotated = PoseCloud(cloud.volumes, cloud.positions @ Rz.T, cloud.orientations)
        assert coverage(rotated, req, frame_rotation=Rz) == pytest.approx(base, abs=1e-12)

    def test_adjusted_budget_shrinks_coverage(self):
        cloud = blob_cloud(seed=9)
        req = Requirement()
        budget = force_deflection(KminEstimate(), req)
        assert coverage(cloud, req, adjusted=budget) <= coverage(cloud, req)

    def test_orientation_mode_disk(self):
        rng = np.random.default_rng(13)
        ori = rng.uniform(-np.radians(20), np.radians(20), size=(400, 3))
        cloud = PoseCloud(np.zeros((400, 3)), rng.normal(size=(400, 3)), ori)
        # Small cone inside the reached tilts: fully covered.
        assert coverage(cloud, Requirement(tilt=np.radians(2.0)), mode="orientation") == 1.0
        # Huge cone: only partially covered.
        assert coverage(cloud, Requirement(tilt=np.radians(60.0)), mode="orientation") < 0.5


class TestRepeatability:
    def test_identical_samples_give_zero(self):
        pos = np.tile([[1e-3, 2e-3, 3e-3]], (10, 1))
        ori = np.tile([[0.01, 0.02, 0.0]], (10, 1))
        (stats,) = repeatability_stats([(pos, ori)])
        assert stats.mean_position_error == pytest.approx(0.0, abs=1e-15)
        assert stats.std_position_error == pytest.approx(0.0, abs=1e-15)
        assert stats.mean_orientation_error == pytest.approx(0.0, abs=1e-15)

    def test_two_symmetric_samples(self):
        d = 0.4e-3
        pos = np.array([[d, 0, 0], [-d, 0, 0]])
        ori = np.zeros((2, 3))
        (stats,) = repeatability_stats([(pos, ori)])
        assert stats.mean_position_error == pytest.approx(d)

    def test_recovers_injected_noise(self):
        rng = np.random.default_rng(17)
        sigma = 0.03e-3
        true_pose = np.array([1.0e-3, -2.0e-3, 5.36e-3])
        groups = []
        for _ in range(6):
            pos = true_pose + rng.normal(scale=sigma, size=(50, 3))
            ori = rng.normal(scale=np.radians(0.05), size=(50, 3))
            groups.append((pos, ori))
        stats = repeatability_stats(groups)
        # Per-axis std of a 3D Gaussian: mean Euclidean error is sigma*sqrt(8/pi).
        expected_mean = sigma * np.sqrt(8.0 / np.pi)
        for s in stats:
            assert s.mean_position_error == pytest.approx(expected_mean, rel=0.2)
        # Normal-fit p-values behave like p-values: spread out, not collapsed.
        p = np.concatenate([s.position_p_values for s in stats])
        assert np.all(np.isfinite(p))
        assert 0.15 < p.mean() < 0.85

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamplesError):
            repeatability_stats([(np.zeros((1, 3)), np.zeros((1, 3)))])

    def test_small_groups_skip_normality_fit(self):
        rng = np.random.default_rng(19)
        pos = rng.normal(size=(5, 3))
        (stats,) = repeatability_stats([(pos, np.zeros((5, 3)))])
        assert np.all(np.isnan(stats.position_p_values))
        assert stats.mean_position_error > 0
