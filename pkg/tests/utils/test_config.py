import pytest
import yaml

from src.utils.config import (
    OutputFormat,
    Pipeline,
    blob_hash,
    environment_overrides,
    load_acceptance,
    parse_config,
    parse_config_text,
)
from src.utils.errors import ConfigError


def test_minimal_config_is_filled_from_defaults(cfg_text):
    config = parse_config_text(cfg_text)
    assert config.pipeline == Pipeline.STABLE
    assert config.seed == 7
    assert config.model.d == 1 and config.model.s == 2.5 and config.model.L == 1024
    assert config.model.beta == 1.0 and config.model.nn_prob_one
    assert config.grids.n_grid[0] == 256
    assert config.output.format == OutputFormat.JSON
    assert config.checks is None


def test_nested_model_section():
    config = parse_config_text("pipeline: heatkernel\nseed: 1\nmodel:\n  d: 2\n  s: 3.5\n  L: 64\n")
    assert config.model.d == 2 and config.model.alpha == pytest.approx(1.5)


def test_tail_exponent_must_exceed_dimension():
    with pytest.raises(ConfigError) as info:
        parse_config_text("pipeline: stable\nseed: 7\nd: 2\ns: 1.5\nL: 64\n")
    assert info.value.line == 4


def test_unknown_key_reports_its_line():
    with pytest.raises(ConfigError) as info:
        parse_config_text("pipeline: stable\nseed: 7\nd: 1\ns: 1.5\nL: 64\nwalkers: 3\n")
    assert info.value.line == 6
    assert "walkers" in str(info.value)


def test_missing_key():
    with pytest.raises(ConfigError) as info:
        parse_config_text("pipeline: stable\nd: 1\ns: 1.5\nL: 64\n")
    assert "missing required key" in str(info.value)


def test_bad_section_value_reports_its_line():
    with pytest.raises(ConfigError) as info:
        parse_config_text("pipeline: stable\nseed: 7\nd: 1\ns: 1.5\nL: 64\nwalks:\n  per_n: 0\n")
    assert info.value.line == 7


def test_malformed_yaml():
    with pytest.raises(ConfigError):
        parse_config_text("pipeline: [stable\n")
    with pytest.raises(ConfigError):
        parse_config_text("- a\n- b\n")


def test_canonical_form_and_hash(cfg_text):
    a = parse_config_text(cfg_text)
    b = parse_config_text("L: 1024\ns: 2.5\nd: 1\nseed: 7\npipeline: stable\n")
    assert a.canonical() == b.canonical()
    assert a.config_hash() == b.config_hash()
    assert a.with_overrides(seed=8).config_hash() != a.config_hash()


def test_overrides(cfg_text):
    config = parse_config_text(cfg_text).with_overrides(**{"output.out": "elsewhere", "seed": 3, "output.workers": None})
    assert config.output.out == "elsewhere"
    assert config.seed == 3
    assert config.output.workers == 1


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("LRPLAB_OUT", "/tmp/lrp")
    monkeypatch.setenv("LRPLAB_WORKERS", "4")
    assert environment_overrides() == {"output.out": "/tmp/lrp", "output.workers": 4}
    monkeypatch.setenv("LRPLAB_WORKERS", "many")
    with pytest.raises(ConfigError):
        environment_overrides()


def test_parse_config_file(tmp_path, cfg_text):
    target = tmp_path / "exp.yaml"
    target.write_text(cfg_text)
    assert parse_config(target).seed == 7
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.yaml")


def test_blob_hash_matches_git():
    assert blob_hash(b"") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"


def test_acceptance_presets_are_valid():
    presets = load_acceptance()
    assert presets
    for preset in presets:
        assert {"id", "name", "config"} <= set(preset)
        parse_config_text(yaml.safe_dump(preset["config"]))
