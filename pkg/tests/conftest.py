"""Fixtures partagées: isolation de la configuration utilisateur, datasets CSV temporaires."""

import numpy as np
import pandas as pd
import pytest

from vertisplit.core import config as config_module
from vertisplit.core.config import BrkgaConfig


@pytest.fixture(autouse=True)
def isolated_config(tmp_path_factory, monkeypatch):
    """Aucun test ne lit ~/.vertisplit ni l'environnement de la machine."""
    missing = tmp_path_factory.mktemp("cfg") / "config.yaml"
    monkeypatch.setenv(config_module.CONFIG_ENV, str(missing))
    monkeypatch.delenv(config_module.THREADS_ENV, raising=False)
    config_module._clear_config_cache()
    yield missing
    config_module._clear_config_cache()


@pytest.fixture
def small_brkga() -> BrkgaConfig:
    return BrkgaConfig(population_size=30, max_generations=40, stall_generations=15, seed=0)


def write_csv(path, X, names=None, labels=None):
    frame = pd.DataFrame(np.asarray(X), columns=names or [f"f{j}" for j in range(np.asarray(X).shape[1])])
    if labels is not None:
        frame["label"] = labels
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


@pytest.fixture
def regression_csv(tmp_path):
    """200 lignes, 6 features corrélées, label linéaire (colonne 'label')."""
    rng = np.random.default_rng(7)
    latent = rng.standard_normal((200, 3))
    X = np.hstack([latent, latent @ rng.standard_normal((3, 3))]) + 0.3 * rng.standard_normal((200, 6))
    y = X @ np.array([1.0, 2.0, 0.5, 1.0, -1.0, 0.7]) + 0.1 * rng.standard_normal(200)
    return write_csv(tmp_path / "global.csv", X, labels=y)
