"""Config schema, validation, merging, and hashing tests."""

import json

import pytest

from xrmimo.config import build_config, config_hash, default_config_dict, load_config
from xrmimo.exceptions import ConfigurationError


class TestDefaults:
    def test_builds_and_hash_is_stable(self):
        a = build_config()
        b = build_config()
        assert a.hash == b.hash
        assert len(a.hash) == 16

    def test_default_tables(self):
        cfg = build_config()
        structures = cfg.frame_structures()
        assert set(structures) == {"A", "B"}
        assert structures["A"].n_ul_symb == 4
        assert structures["B"].n_ul_symb == 8
        assert cfg.scenario_ids() == [1, 2, 3]
        assert cfg.sensitivity["ber_grid"] == [1e-5, 1e-4, 1e-3, 1e-2]

    def test_hash_changes_with_content(self):
        base = config_hash(default_config_dict())
        changed = default_config_dict()
        changed["seed"] = 999
        assert config_hash(changed) != base


class TestValidation:
    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigurationError, match="unknown keys"):
            build_config({"sed": 1})

    def test_unknown_nested_key_has_path(self):
        with pytest.raises(ConfigurationError, match="latency"):
            build_config({"latency": {"trails": 10}})

    def test_ber_grid_bounds(self):
        with pytest.raises(ConfigurationError, match="ber_grid"):
            build_config({"sensitivity": {"ber_grid": [0.0]}})
        with pytest.raises(ConfigurationError, match="ber_grid"):
            build_config({"sensitivity": {"ber_grid": [0.5]}})

    def test_trials_minimum(self):
        with pytest.raises(ConfigurationError, match="trials"):
            build_config({"latency": {"trials": 0}})

    def test_scenario_keys_must_be_known(self):
        with pytest.raises(ConfigurationError):
            build_config({"scenarios": {"9": {}}})

    def test_empty_frame_structures_rejected(self):
        with pytest.raises(ConfigurationError, match="frame"):
            build_config({"frame_structures": {}})

    def test_bad_layout_role(self):
        with pytest.raises(ConfigurationError, match="layout"):
            build_config({"frame_structures": {
                "X": {"layout": ["pilot", "up", "dl"]}}})

    def test_channel_file_source_needs_paths(self):
        with pytest.raises(ConfigurationError, match="paths"):
            build_config({"ber": {"channel": {"source": "files"}}})

    def test_channel_antennas_exceed_users(self):
        with pytest.raises(ConfigurationError, match="antennas"):
            build_config({"ber": {"channel": {"antennas": 4, "users": 4}}})

    def test_exec_model_kinds(self):
        cfg = build_config({"scenarios": {
            "1": {"device_exec": {"kind": "empirical", "samples": [0.01, 0.02]},
                  "offloaded_exec": {"kind": "truncated_normal", "mean": 0.01,
                                      "std": 0.002}},
        }})
        models = cfg.exec_models()
        assert set(models) == {1}
        with pytest.raises(ConfigurationError):
            build_config({"scenarios": {
                "1": {"device_exec": {"kind": "empirical", "samples": []}}}})

    def test_bad_type_messages(self):
        with pytest.raises(ConfigurationError, match="seed"):
            build_config({"seed": "abc"})
        with pytest.raises(ConfigurationError, match="expected a mapping"):
            build_config({"latency": 5})


class TestReplaceAndMerge:
    def test_frame_structures_replaced_wholesale(self):
        cfg = build_config({"frame_structures": {
            "C": {"layout": ["pilot", "ul", "dl"]}}})
        assert set(cfg.frame_structures()) == {"C"}

    def test_scalar_sections_merge(self):
        cfg = build_config({"latency": {"trials": 7}})
        assert cfg.latency["trials"] == 7
        assert cfg.latency["deadline_s"] == 0.200

    def test_scenarios_replaced_wholesale(self):
        cfg = build_config({"scenarios": {
            "3": {"ul_payload_bits": 1000,
                  "device_exec": {"kind": "constant", "value": 0.0},
                  "offloaded_exec": {"kind": "constant", "value": 0.0}}}})
        assert cfg.scenario_ids() == [3]
        assert cfg.scenario_payload_bits() == {3: 1000}


class TestLoadConfig:
    def test_yaml_file(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("seed: 42\nlatency:\n  trials: 5\n")
        cfg = load_config(path)
        assert cfg.seed == 42
        assert cfg.latency["trials"] == 5

    def test_json_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"seed": 7, "output_dir": "out"}))
        cfg = load_config(path)
        assert cfg.seed == 7
        assert str(cfg.output_dir) == "out"

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("seed: 42\n")
        cfg = load_config(path, overrides={"seed": 100})
        assert cfg.seed == 100

    def test_non_mapping_rejected(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_yaml_integer_scenario_keys(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "scenarios:\n"
            "  1:\n"
            "    ul_payload_bits: 500\n"
        )
        cfg = load_config(path)
        assert cfg.scenario_payload_bits() == {1: 500}
