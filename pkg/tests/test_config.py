"""Configuration parsing and validation tests."""

import math

import numpy as np
import pytest

from seesim.config import (
    RobotConfig,
    config_from_dict,
    load_config,
    parse_quantity,
)
from seesim.errors import ConfigError


class TestParseQuantity:
    def test_bare_number_is_si(self):
        assert parse_quantity(0.045, "length", "x") == 0.045

    def test_unit_conversions(self):
        assert parse_quantity("45 mm", "length", "x") == pytest.approx(0.045)
        assert parse_quantity("15 deg", "angle", "x") == pytest.approx(0.2618, abs=1e-4)
        assert parse_quantity("301.51 kPa", "pressure", "x") == pytest.approx(301510.0)
        assert parse_quantity("1200 cm^4", "second_moment", "x") == pytest.approx(1.2e-5)
        assert parse_quantity("5 ml", "volume", "x") == pytest.approx(5e-6)
        assert parse_quantity("0.3 ml/mm", "gain_p", "x") == pytest.approx(3e-4)
        assert parse_quantity("0.03 ml/(mm s)", "gain_i", "x") == pytest.approx(3e-5)
        assert parse_quantity("14.41 N/mm", "stiffness", "x") == pytest.approx(14410.0)
        assert parse_quantity("6.61 mm/ml", "extension_per_volume", "x") == pytest.approx(6610.0)

    def test_wrong_dimension_rejected(self):
        with pytest.raises(ConfigError, match="dimension"):
            parse_quantity("5 ml", "length", "chamber")

    def test_unknown_unit_rejected(self):
        with pytest.raises(ConfigError, match="unknown unit"):
            parse_quantity("3 furlongs", "length", "x")

    def test_garbage_rejected(self):
        with pytest.raises(ConfigError):
            parse_quantity("not-a-number", "length", "x")
        with pytest.raises(ConfigError):
            parse_quantity(True, "length", "x")


class TestConfigFromDict:
    def test_empty_document_gives_defaults(self):
        cfg = config_from_dict(None)
        assert cfg.geometry.sfa.length == pytest.approx(45e-3)
        assert cfg.geometry.sfa.youngs_modulus == pytest.approx(301.51e3)
        assert cfg.geometry.sfa.shear_modulus == pytest.approx(0.5 * 301.51e3)
        assert cfg.geometry.tilt_angle == pytest.approx(math.radians(15.0))
        assert cfg.geometry.n_sfa == 3
        assert cfg.fit.slope == pytest.approx(6610.0)
        assert cfg.fit.intercept == pytest.approx(-5.52e-3)
        assert cfg.control.k_p == pytest.approx(3e-4)
        assert cfg.control.k_i == pytest.approx(3e-5)
        assert cfg.control.target_rate == 2.0
        assert cfg.control.control_rate == 30.0
        assert cfg.requirement.axial_translation == pytest.approx(5.22e-3)
        assert cfg.requirement.radial_translation == pytest.approx(7.75e-3)
        assert cfg.stiffness_floor.axial == pytest.approx(14410.0)
        assert cfg.sensor_sigma == pytest.approx(0.2e-3)

    def test_tilt_angle_string(self):
        cfg = config_from_dict({"geometry": {"tilt_angle": "15 deg"}})
        assert cfg.geometry.tilt_angle == pytest.approx(0.2618, abs=1e-4)

    def test_negative_area_rejected_with_field_path(self):
        with pytest.raises(ConfigError, match="sfa.cross_section_area"):
            config_from_dict({"sfa": {"cross_section_area": "-100 mm^2"}})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="geometry.colour"):
            config_from_dict({"geometry": {"colour": "red"}})

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="plasma"):
            config_from_dict({"plasma": {}})

    def test_shear_modulus_defaults_to_half_youngs(self):
        cfg = config_from_dict({"sfa": {"youngs_modulus": "200 kPa"}})
        assert cfg.geometry.sfa.shear_modulus == pytest.approx(100e3)

    def test_explicit_shear_modulus_kept(self):
        cfg = config_from_dict(
            {"sfa": {"youngs_modulus": "200 kPa", "shear_modulus": "80 kPa"}}
        )
        assert cfg.geometry.sfa.shear_modulus == pytest.approx(80e3)

    def test_channel_area_propagates_to_fit(self):
        cfg = config_from_dict({"sfa": {"channel_area": "100 mm^2"}})
        assert cfg.fit.channel_area == pytest.approx(1e-4)

    def test_environment_patch(self):
        cfg = config_from_dict(
            {"environment": {"kind": "patch", "preload_force": "5 N"}}
        )
        patch = cfg.environment.make_patch()
        assert patch is not None
        assert np.linalg.norm(patch.force(np.zeros(3))) == pytest.approx(5.0)

    def test_environment_none(self):
        assert config_from_dict({}).environment.make_patch() is None

    def test_bad_environment_kind(self):
        with pytest.raises(ConfigError, match="environment.kind"):
            config_from_dict({"environment": {"kind": "swamp"}})

    def test_non_integer_seed_rejected(self):
        with pytest.raises(ConfigError, match="seed"):
            config_from_dict({"noise": {"seed": 1.5}})


class TestLoadConfig:
    def test_round_trip_file(self, tmp_path):
        doc = """
geometry:
  placement_radius: 15 mm
  tilt_angle: 15 deg
sfa:
  youngs_modulus: 301.51 kPa
control:
  k_p: 0.3 ml/mm
noise:
  seed: 42
"""
        p = tmp_path / "robot.yaml"
        p.write_text(doc)
        cfg = load_config(p)
        assert cfg.seed == 42
        assert cfg.geometry.placement_radius == pytest.approx(15e-3)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.yaml"
        p.write_text("")
        assert isinstance(load_config(p), RobotConfig)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.yaml")

    def test_invalid_yaml(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("geometry: [unclosed")
        with pytest.raises(ConfigError, match="YAML"):
            load_config(p)
