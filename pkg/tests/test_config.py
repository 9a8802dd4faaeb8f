import json
import logging

import pytest

from core.config import Config, load_mapping
from core.errors import InvalidInput
from core.logger import setup_logger, verbosity_to_level


class TestConfig:
    def test_defaults_without_file(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        config = Config()
        assert config.config_path is None
        assert config.get("penalty") == "p2"
        assert config.get("solver.eps_opt") == 1e-10
        assert config.get("solver.max_iter", 123) == 123
        assert config["simulation.rng_seed"] == 7

    def test_file_is_merged_over_defaults(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / ".hybridloc.yaml").write_text("solver:\n  eps_opt: 1.0e-8\npenalty: mae\n", encoding="utf-8")
        config = Config()
        assert config.get("solver.eps_opt") == 1e-8
        assert config.get("solver.beta") == "auto"
        assert config.get("penalty") == "mae"

    def test_explicit_path(self, tmp_path):
        path = tmp_path / "custom.yml"
        path.write_text("experiment:\n  repetitions: 5\n", encoding="utf-8")
        config = Config(str(path))
        assert config.get("experiment.repetitions") == 5
        assert config.get("experiment.metric") == "mse"

    @pytest.mark.parametrize("content", [b"- a\n- b\n", b"solver: [unclosed\n", b"penalty: p2\xff\n"])
    def test_unusable_file_warns_and_keeps_defaults(self, tmp_path, content):
        path = tmp_path / "hybridloc.yaml"
        path.write_bytes(content)
        with pytest.warns(UserWarning):
            config = Config(str(path))
        assert config.get("penalty") == "p2"

    def test_set_and_section(self, tmp_path):
        config = Config(str(tmp_path / "absent.yaml"))
        config.set("simulation.length", 30.0)
        config.set("extra.nested.value", 1)
        assert config.get("simulation.length") == 30.0
        assert config.get("extra.nested.value") == 1
        section = config.section("simulation")
        section["length"] = 99.0
        assert config.get("simulation.length") == 30.0
        assert config.section("penalty") == {}

    def test_deep_merge(self):
        merged = Config.deep_merge({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"c": 5}, "e": 6})
        assert merged == {"a": {"b": 1, "c": 5}, "d": 3, "e": 6}


class TestLoadMapping:
    def test_json_and_yaml(self, tmp_path):
        json_path = tmp_path / "c.json"
        json_path.write_text(json.dumps({"length": 20, "technologies": ["ble"]}), encoding="utf-8")
        assert load_mapping(str(json_path)) == {"length": 20, "technologies": ["ble"]}
        empty = tmp_path / "empty.yaml"
        empty.write_text("", encoding="utf-8")
        assert load_mapping(str(empty)) == {}

    def test_rejects_non_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("[1, 2]\n", encoding="utf-8")
        with pytest.raises(InvalidInput):
            load_mapping(str(path))

    @pytest.mark.parametrize("content", [b"length: 20\n\xff\n", b"technologies: [ble,\n"])
    def test_unparsable_file_is_invalid_input(self, tmp_path, content):
        path = tmp_path / "corridor.yaml"
        path.write_bytes(content)
        with pytest.raises(InvalidInput):
            load_mapping(str(path))


class TestLogger:
    @pytest.mark.parametrize(
        "verbose, quiet, expected",
        [(0, False, "INFO"), (1, False, "DEBUG"), (4, False, "DEBUG"), (2, True, "WARNING")],
    )
    def test_verbosity(self, verbose, quiet, expected):
        assert verbosity_to_level(verbose, quiet) == expected

    def test_default_level_is_kept(self):
        assert verbosity_to_level(0, default="ERROR") == "ERROR"

    def test_handlers(self):
        logger = setup_logger("hybridloc-test", "DEBUG", use_rich=False)
        assert logger.level == logging.DEBUG
        assert len(logger.handlers) == 1
        assert isinstance(logger.handlers[0], logging.StreamHandler)
        assert logging.getLogger("core").handlers == logger.handlers

        rich_logger = setup_logger("hybridloc-test", "bogus")
        assert rich_logger.level == logging.INFO
        assert type(rich_logger.handlers[0]).__name__ == "RichHandler"
