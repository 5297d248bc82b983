"""Split par importance: allocation des features selon des proportions de Dirichlet."""

import logging
from typing import Optional

import numpy as np

from vertisplit.core.config import DirichletSpec
from vertisplit.core.dataset_io import GlobalDataset, PartyPartition
from vertisplit.core.errors import ConfigError, PartitionError

logger = logging.getLogger(__name__)


def _log_gamma_variates(alphas: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """log G_i avec G_i ~ Gamma(α_i, 1), méthode de Marsaglia-Tsang.

    Pour α < 1: G(α) = G(α + 1)·U^(1/α), calculé en log pour rester
    représentable avec des α très petits.
    """
    log_g = np.empty(alphas.size)
    for i, alpha in enumerate(alphas):
        boosted = alpha < 1.0
        a = alpha + 1.0 if boosted else alpha
        d = a - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        while True:
            x = rng.standard_normal()
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = rng.random()
            if np.log(u) < 0.5 * x * x + d - d * v + d * np.log(v):
                break
        log_g[i] = np.log(d * v)
        if boosted:
            log_g[i] += np.log(rng.random()) / alpha
    return log_g


def sample_dirichlet(spec: DirichletSpec, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Vecteur de probabilités r ~ Dir(α), renormalisé (Σ r = 1)."""
    alphas = np.asarray(spec.alphas, dtype=np.float64)
    if np.any(alphas <= 0) or not np.all(np.isfinite(alphas)):
        raise ConfigError(f"Les α doivent être strictement positifs: {spec.alphas}")
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    if alphas.size == 1:
        return np.ones(1)

    log_g = _log_gamma_variates(alphas, rng)
    weights = np.exp(log_g - log_g.max())
    return weights / weights.sum()


def split_by_importance(ds: GlobalDataset, spec: DirichletSpec) -> PartyPartition:
    """Tire r ~ Dir(α), puis attribue chaque feature à la party k avec probabilité r_k.

    Avec la garde, K features distinctes tirées uniformément sont d'abord
    données une à chaque party et exclues du tirage.
    """
    K, m = spec.num_parties, ds.m
    rng = np.random.default_rng(spec.seed)
    if spec.guard_nonempty and m < K:
        raise PartitionError(f"Garde active: {m} features pour {K} parties")

    r = sample_dirichlet(spec, rng)
    assignment = np.full(m, -1, dtype=np.int64)
    if spec.guard_nonempty:
        seeded = rng.choice(m, size=K, replace=False)
        assignment[seeded] = np.arange(K)

    free = np.flatnonzero(assignment < 0)
    assignment[free] = rng.choice(K, size=free.size, p=r)

    part = PartyPartition(assignment=assignment, num_parties=K)
    logger.info(f"Split importance: r = {np.round(r, 4).tolist()}, tailles = {part.counts().tolist()}")
    return part
