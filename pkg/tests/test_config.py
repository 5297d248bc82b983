import logging
from pathlib import Path

import pytest
from pydantic import ValidationError

from vertisplit.core import config as config_module
from vertisplit.core.config import (
    AppConfig,
    PcorOptions,
    RunConfig,
    SplitMode,
    Subcommand,
    default_threads,
    load_config,
)
from vertisplit.core.errors import ConfigError
from vertisplit.core.logs import setup_logging
from vertisplit.core.manifest import SplitManifest, SourceInfo


def test_missing_file_gives_defaults():
    cfg = load_config()
    assert cfg == AppConfig()
    assert cfg.log_level == "WARNING"


def test_yaml_file_is_loaded_and_cached(isolated_config: Path):
    isolated_config.write_text("threads: 3\nlog_level: INFO\n")
    assert load_config().threads == 3

    isolated_config.write_text("threads: 5\n")
    assert load_config().threads == 3
    config_module._clear_config_cache()
    assert load_config().threads == 5


def test_invalid_yaml_raises_config_error(isolated_config: Path):
    isolated_config.write_text("threads: zero\n")
    with pytest.raises(ConfigError):
        load_config()


def test_threads_env_overrides_file(isolated_config: Path, monkeypatch):
    isolated_config.write_text("threads: 3\n")
    assert default_threads() == 3
    monkeypatch.setenv(config_module.THREADS_ENV, "7")
    assert default_threads() == 7


def test_threads_env_must_be_positive_integer(monkeypatch):
    monkeypatch.setenv(config_module.THREADS_ENV, "beaucoup")
    with pytest.raises(ConfigError):
        default_threads()
    monkeypatch.setenv(config_module.THREADS_ENV, "0")
    with pytest.raises(ConfigError):
        default_threads()


def test_pcor_defaults():
    opts = PcorOptions()
    assert (opts.kind.value, opts.exact_dim_threshold, opts.truncate_rank) == ("spearman", 100, 400)


class TestRunConfig:
    def test_importance_requires_alphas(self):
        with pytest.raises(ValidationError, match="--alpha"):
            RunConfig(subcommand=Subcommand.SPLIT, mode=SplitMode.IMPORTANCE)

    def test_importance_rejects_beta(self):
        with pytest.raises(ValidationError, match="correlation"):
            RunConfig(subcommand=Subcommand.SPLIT, mode=SplitMode.IMPORTANCE, alphas=[1.0, 1.0], beta=0.5)

    def test_correlation_rejects_alphas(self):
        with pytest.raises(ValidationError):
            RunConfig(subcommand=Subcommand.SPLIT, mode=SplitMode.CORRELATION, beta=0.5, alphas=[1.0])

    def test_beta_range(self):
        with pytest.raises(ValidationError, match="hors de"):
            RunConfig(subcommand=Subcommand.SPLIT, mode=SplitMode.CORRELATION, beta=1.2)

    def test_counts_match_parties(self):
        with pytest.raises(ValidationError):
            RunConfig(subcommand=Subcommand.SPLIT, mode=SplitMode.CORRELATION, beta=0.5, parties=3, counts=[2, 2])

    def test_other_subcommands_skip_mode_checks(self):
        cfg = RunConfig(subcommand=Subcommand.VALIDATE)
        assert cfg.suites == ["all"]
        assert cfg.seed == 0


def test_manifest_json_is_stable():
    manifest = SplitManifest(
        seed=3,
        mode=SplitMode.IMPORTANCE,
        params={"alphas": [1.0, 1.0, 1.0]},
        assignment=[0, 2, 2, 1],
        source=SourceInfo(rows=5, columns=4),
    )
    text = manifest.to_json()
    assert text.endswith("\n")
    assert manifest.num_parties == 3
    assert SplitManifest.model_validate_json(text).to_json() == text


def test_setup_logging_is_idempotent():
    logger = setup_logging("debug")
    handlers = len(logger.handlers)
    assert setup_logging("INFO") is logger
    assert len(logger.handlers) == handlers
    assert logger.level == logging.INFO
