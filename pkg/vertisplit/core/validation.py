"""Harnais de validation: propriétés des métriques et des splits vérifiées par oracle.

Chaque suite retourne un CheckResult; `validate` échoue (code 1) si une suite échoue.
"""

import logging
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np
from sklearn.datasets import make_classification

from vertisplit.core.config import BrkgaConfig, CorrelationKind, DirichletSpec, PcorOptions
from vertisplit.core.corr_metrics import (
    CorrelationMatrix,
    feature_exchange_trend,
    icor_from_correlation,
    mcor,
    pcor,
    truncation_ablation,
)
from vertisplit.core.dataset_io import GlobalDataset, PartyPartition
from vertisplit.core.errors import ConfigError
from vertisplit.core.fixtures import latent_block_dataset, latent_factor_matrix, two_block_fixture
from vertisplit.core.party_eval import (
    dirichlet_mean_variance,
    estimate_beta,
    party_shapley,
    symmetric_alpha_from_variance,
)
from vertisplit.core.split_correlation import Direction, optimize_extreme, split_by_correlation
from vertisplit.core.split_importance import split_by_importance

logger = logging.getLogger(__name__)

KINDS = (CorrelationKind.SPEARMAN, CorrelationKind.PEARSON)


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "seconds": round(self.seconds, 3), "details": self.details}


@dataclass
class ValidationContext:
    seeds: int = 3
    threads: Optional[int] = None
    brkga: BrkgaConfig = field(default_factory=BrkgaConfig)


def check_pcor_mcor(ctx: ValidationContext) -> CheckResult:
    """Pcor(X, X) = mcor(X) sur 100 matrices aléatoires corrélées."""
    rng = np.random.default_rng(0)
    worst = 0.0
    for t in range(100):
        n, m = int(rng.integers(20, 201)), int(rng.integers(2, 17))
        X = rng.standard_normal((n, m)) @ rng.standard_normal((m, m))
        kind = KINDS[t % 2]
        worst = max(worst, abs(pcor(X, X, PcorOptions(kind=kind)) - mcor(X, kind)))
    return CheckResult("pcor-mcor", worst <= 1e-9, {"matrices": 100, "max_abs_diff": worst})


def check_pcor_range(ctx: ValidationContext) -> CheckResult:
    """0 ≤ Pcor ≤ 1 sur 1000 paires de largeurs différentes."""
    rng = np.random.default_rng(1)
    low, high = np.inf, -np.inf
    for t in range(1000):
        n = int(rng.integers(5, 61))
        p, q = rng.choice(np.arange(1, 21), size=2, replace=False)
        latent = rng.standard_normal((n, int(rng.integers(1, 6))))
        Xi = latent @ rng.standard_normal((latent.shape[1], p)) + rng.random() * rng.standard_normal((n, p))
        Xj = latent @ rng.standard_normal((latent.shape[1], q)) + rng.random() * rng.standard_normal((n, q))
        value = pcor(Xi, Xj, PcorOptions(kind=KINDS[t % 2]))
        low, high = min(low, value), max(high, value)
    return CheckResult("pcor-range", 0.0 <= low and high <= 1.0, {"pairs": 1000, "min": low, "max": high})


def check_perfect_corr(ctx: ValidationContext) -> CheckResult:
    """m colonnes identiques: Pcor(X, X) = 1."""
    rng = np.random.default_rng(2)
    x = rng.standard_normal(50)
    worst = 0.0
    for m in range(2, 11):
        X = np.tile(x[:, np.newaxis], (1, m))
        for kind in KINDS:
            worst = max(worst, abs(pcor(X, X, PcorOptions(kind=kind)) - 1.0))
    return CheckResult("perfect-corr", worst <= 1e-6, {"max_abs_diff": worst})


def enumerate_equal_splits(ds: GlobalDataset, opts: Optional[PcorOptions] = None) -> list[tuple[frozenset, float]]:
    """Icor de toutes les découpes en deux parties de même taille (oracle exhaustif)."""
    opts = opts or PcorOptions()
    corr = CorrelationMatrix.from_dataset(ds, opts.kind)
    m = ds.m
    results = []
    for first in combinations(range(m), m // 2):
        assignment = np.ones(m, dtype=np.int64)
        assignment[list(first)] = 0
        part = PartyPartition(assignment=assignment, num_parties=2)
        results.append((frozenset(first), icor_from_correlation(corr, part, opts, threads=1)))
    return results


def check_icor_bounds(ctx: ValidationContext, sizes: Sequence[int] = (2, 3, 4)) -> CheckResult:
    """Bloc D1 | D2: minimum unique (à l'échange près), maximum aux découpes équilibrées, Icor ≤ 0."""
    details, passed = {}, True
    for m in sizes:
        ds = two_block_fixture(m)
        block1 = frozenset(range(m))
        landscape = enumerate_equal_splits(ds)
        values = np.array([v for _, v in landscape])
        shared = [len(first & block1) for first, _ in landscape]
        low, high = values.min(), values.max()

        balanced = {m // 2, (m + 1) // 2}
        minimizers = {u for u, v in zip(shared, values) if v <= low + 1e-9}
        maximizers = {u for u, v in zip(shared, values) if v >= high - 1e-9}
        structure_ok = minimizers == {0, m} and maximizers == balanced and high <= 1e-9

        _, brkga_min = optimize_extreme(ds, [m, m], Direction.MIN, ctx.brkga, threads=ctx.threads)
        _, brkga_max = optimize_extreme(ds, [m, m], Direction.MAX, ctx.brkga, threads=ctx.threads)
        brkga_ok = abs(brkga_min - low) <= 1e-6 and abs(brkga_max - high) <= 1e-6

        passed &= bool(structure_ok and brkga_ok)
        details[f"m={m}"] = {
            "splits": len(landscape),
            "icor_min": float(low),
            "icor_max": float(high),
            "brkga_min": brkga_min,
            "brkga_max": brkga_max,
            "structure_ok": bool(structure_ok),
        }
    return CheckResult("icor-bounds", passed, details)


def _is_reconstruction(partition: PartyPartition, block_of: np.ndarray) -> bool:
    return all(np.unique(block_of[group]).size == 1 for group in partition.groups())


def check_reconstruction(ctx: ValidationContext) -> CheckResult:
    """β = 0 sur 3 blocs indépendants mélangés: chaque party retrouve un seul bloc."""
    hits = []
    for seed in range(ctx.seeds):
        blocks = latent_block_dataset(num_blocks=3, block_size=10, n=500, seed=seed)
        cfg = ctx.brkga.model_copy(update={"seed": seed})
        result = split_by_correlation(blocks.dataset, 0.0, [10, 10, 10], cfg, threads=ctx.threads)
        hits.append(_is_reconstruction(result.partition, blocks.block_of))
    rate = float(np.mean(hits))
    return CheckResult("reconstruction", rate >= 0.95, {"seeds": ctx.seeds, "rate": rate})


def _importance_shares(alphas: list[float], m: int, seeds: int, importance: np.ndarray) -> np.ndarray:
    ds = GlobalDataset(features=np.zeros((1, m)))
    shares = np.empty((seeds, len(alphas)))
    for seed in range(seeds):
        part = split_by_importance(ds, DirichletSpec(alphas=alphas, seed=seed))
        shares[seed] = np.bincount(part.assignment, weights=importance, minlength=len(alphas)) / importance.sum()
    return shares


def check_dirichlet(ctx: ValidationContext, seeds: int = 200, m: int = 1000) -> CheckResult:
    """Parts d'importance ∝ α, et dispersion décroissante quand α symétrique grandit."""
    alphas = [1.0, 2.0, 7.0]
    expected = np.array(alphas) / sum(alphas)
    uniform = _importance_shares(alphas, m, seeds, np.ones(m)).mean(axis=0)
    positive = _importance_shares(alphas, m, seeds, np.random.default_rng(3).random(m) + 0.1).mean(axis=0)
    proportional = bool(np.all(np.abs(uniform - expected) <= 0.02) and np.all(np.abs(positive - expected) <= 0.02))

    stds = [float(_importance_shares([a] * 3, m, seeds, np.ones(m)).std()) for a in (0.1, 1.0, 10.0, 100.0)]
    decreasing = all(x > y for x, y in zip(stds, stds[1:]))

    return CheckResult(
        "dirichlet",
        proportional and decreasing,
        {
            "mean_shares_uniform": uniform.tolist(),
            "mean_shares_random": positive.tolist(),
            "expected": expected.tolist(),
            "std_by_alpha": dict(zip(["0.1", "1", "10", "100"], stds)),
        },
    )


def check_mean_alpha(ctx: ValidationContext) -> CheckResult:
    """Variance moyenne d'un Dir(α) symétrique puis formule inverse: α retrouvé."""
    worst = 0.0
    for K in range(2, 9):
        for alpha in (0.1, 1.0, 10.0, 100.0):
            sigma = dirichlet_mean_variance([alpha] * K)
            worst = max(worst, abs(symmetric_alpha_from_variance(sigma, K) - alpha))
    return CheckResult("mean-alpha", worst <= 1e-9, {"max_abs_diff": worst})


def check_beta_roundtrip(ctx: ValidationContext, betas: Sequence[float] = (0.0, 0.3, 0.6, 1.0)) -> CheckResult:
    """Split à β puis estimation: |β̂ - β| ≤ 0.15 par graine, moyenne ≤ 0.10 par β."""
    errors = np.empty((ctx.seeds, len(betas)))
    for seed in range(ctx.seeds):
        blocks = latent_block_dataset(num_blocks=3, block_size=10, n=500, seed=seed)
        cfg = ctx.brkga.model_copy(update={"seed": seed})
        for b, beta in enumerate(betas):
            result = split_by_correlation(blocks.dataset, beta, [10, 10, 10], cfg, threads=ctx.threads)
            estimated = estimate_beta(blocks.dataset, result.partition, cfg, threads=ctx.threads)
            errors[seed, b] = abs(estimated - beta)
    passed = bool(np.all(errors <= 0.15) and np.all(errors.mean(axis=0) <= 0.10))
    return CheckResult(
        "beta-roundtrip",
        passed,
        {"betas": list(betas), "max_error": float(errors.max()), "mean_error": errors.mean(axis=0).tolist()},
    )


def check_truncation(ctx: ValidationContext) -> CheckResult:
    """d_t ≥ d: erreur nulle; 500 features: erreur(d_t=400) ≤ erreur(d_t=100)."""
    rng = np.random.default_rng(4)
    X = rng.standard_normal((60, 30)) @ rng.standard_normal((30, 30))
    _, lossless = truncation_ablation(X[:, :15], X[:, 15:], [15, 20])
    lossless_ok = all(p.relative_error == 0.0 and not p.truncated for p in lossless)

    wide = latent_factor_matrix(1000, 500, seed=5)
    exact, points = truncation_ablation(wide, wide, [100, 400])
    trend_ok = points[1].relative_error <= points[0].relative_error

    return CheckResult(
        "truncation",
        lossless_ok and trend_ok,
        {
            "exact_pcor": exact,
            "points": [
                {"truncate_rank": p.truncate_rank, "relative_error": p.relative_error, "speedup": p.speedup}
                for p in points
            ],
        },
    )


def _game_dataset(K: int) -> tuple[GlobalDataset, PartyPartition]:
    return GlobalDataset(features=np.zeros((1, K))), PartyPartition(assignment=np.arange(K), num_parties=K)


def check_shapley(ctx: ValidationContext) -> CheckResult:
    """Additivité, joueur nul, efficacité (exacte et Monte-Carlo)."""
    c = np.array([1.0, 2.0, 3.0])
    ds, part = _game_dataset(3)
    additive = party_shapley(ds, part, lambda s: float(sum(c[i] for i in s)))
    additive_ok = np.allclose(additive.per_party, c, atol=1e-12)

    null = party_shapley(ds, part, lambda s: float(sum(c[i] for i in s if i != 2)) ** 2)
    null_ok = null.per_party[2] == 0.0 and abs(null.per_party.sum() - null.grand_value) <= 1e-9

    K = 12
    weights = np.linspace(0.5, 2.0, K)
    ds, part = _game_dataset(K)
    mc = party_shapley(ds, part, lambda s: float(sum(weights[i] for i in s)) ** 1.5, budget=256, seed=0)
    tolerance = 3.0 * float(np.sqrt(np.sum(mc.stderr**2))) + 1e-9
    mc_ok = mc.method == "monte_carlo" and abs(mc.per_party.sum() - mc.grand_value) <= tolerance

    return CheckResult(
        "shapley",
        bool(additive_ok and null_ok and mc_ok),
        {
            "additive": additive.per_party.tolist(),
            "null_player": float(null.per_party[2]),
            "monte_carlo_efficiency_gap": float(abs(mc.per_party.sum() - mc.grand_value)),
        },
    )


def check_exchange(ctx: ValidationContext) -> CheckResult:
    """Échange progressif de features: Pcor interne = mcor, corrélation inter minimale aux extrémités."""
    X1, _ = make_classification(n_samples=1000, n_features=10, n_informative=2, n_redundant=8, random_state=0)
    X2, _ = make_classification(n_samples=1000, n_features=10, n_informative=2, n_redundant=8, random_state=1)
    steps = feature_exchange_trend(X1, X2)
    inter = [s.inter_pcor for s in steps]
    inner = [s.inner_pcor_1 for s in steps]
    mid = len(steps) // 2

    mcor_gap = max(max(abs(s.inner_pcor_1 - s.mcor_1), abs(s.inner_pcor_2 - s.mcor_2)) for s in steps)
    trend_ok = inter[0] < inter[mid] and inter[-1] < inter[mid] and inner[0] > inner[mid]
    return CheckResult(
        "exchange",
        mcor_gap <= 1e-9 and trend_ok,
        {"inter_pcor": inter, "inner_pcor": inner, "max_pcor_mcor_gap": mcor_gap},
    )


SUITES: dict[str, Callable[[ValidationContext], CheckResult]] = {
    "pcor-mcor": check_pcor_mcor,
    "pcor-range": check_pcor_range,
    "perfect-corr": check_perfect_corr,
    "icor-bounds": check_icor_bounds,
    "reconstruction": check_reconstruction,
    "dirichlet": check_dirichlet,
    "mean-alpha": check_mean_alpha,
    "beta-roundtrip": check_beta_roundtrip,
    "truncation": check_truncation,
    "shapley": check_shapley,
    "exchange": check_exchange,
}

# Suites longues (plusieurs splits par corrélation complets)
SLOW_SUITES = ("reconstruction", "beta-roundtrip")


def expand_suites(names: Sequence[str]) -> list[str]:
    selected: list[str] = []
    for name in names:
        if name == "all":
            expanded = list(SUITES)
        elif name == "quick":
            expanded = [s for s in SUITES if s not in SLOW_SUITES]
        elif name in SUITES:
            expanded = [name]
        else:
            raise ConfigError(f"Suite inconnue: {name} (choix: all, quick, {', '.join(SUITES)})")
        selected.extend(s for s in expanded if s not in selected)
    return selected


def run_suites(
    names: Sequence[str],
    seeds: int = 3,
    threads: Optional[int] = None,
    cfg: Optional[BrkgaConfig] = None,
    on_result: Optional[Callable[[CheckResult], None]] = None,
) -> list[CheckResult]:
    ctx = ValidationContext(seeds=seeds, threads=threads, brkga=cfg or BrkgaConfig())
    results = []
    for name in expand_suites(names):
        start = time.perf_counter()
        result = SUITES[name](ctx)
        result.seconds = time.perf_counter() - start
        logger.info(f"{name}: {'OK' if result.passed else 'ÉCHEC'} ({result.seconds:.1f}s)")
        results.append(result)
        if on_result is not None:
            on_result(result)
    return results
