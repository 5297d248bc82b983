"""Évaluation d'une partition existante: importance des parties (Shapley) et (α, β) comparables."""

import logging
import math
import threading
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional, Protocol

import numpy as np
from sklearn.linear_model import Ridge, RidgeClassifier
from sklearn.metrics import accuracy_score, r2_score
from sklearn.model_selection import train_test_split

from vertisplit.core.config import BoundMode, BrkgaConfig, PcorOptions, TaskKind
from vertisplit.core.corr_metrics import CorrelationMatrix, icor_from_correlation
from vertisplit.core.dataset_io import GlobalDataset, PartyPartition
from vertisplit.core.errors import EstimationError, IndeterminateError, MetricError, ShapleyError
from vertisplit.core.split_correlation import Direction, PermutationScorer, optimize_extreme, stream_rng
from vertisplit.core.workers import ordered_map

logger = logging.getLogger(__name__)

# Au-delà, Shapley est estimé par permutations Monte-Carlo
EXACT_MAX_PARTIES = 10
# Valeur donnée aux importances nulles avant renormalisation
ZERO_IMPORTANCE_NUDGE = 1e-6
# Largeur minimale de [Icor_min, Icor_max] pour que β soit identifiable
FLAT_LANDSCAPE = 1e-9
# Nombre de classes distinctes sous lequel des labels entiers sont une classification
MAX_AUTO_CLASSES = 20


class CharacteristicFn(Protocol):
    def __call__(self, subset: frozenset[int]) -> float: ...


def infer_task(labels: np.ndarray) -> TaskKind:
    integral = np.all(np.equal(np.mod(labels, 1), 0))
    if integral and np.unique(labels).size <= MAX_AUTO_CLASSES:
        return TaskKind.CLASSIFICATION
    return TaskKind.REGRESSION


class RidgeCharacteristic:
    """v(S): qualité d'une régression ridge sur les features des parties de S,
    moins celle du prédicteur de base (moyenne ou classe majoritaire), donc v(∅) = 0.

    R² en régression, exactitude en classification, sur un découpage 80/20 fixé par la graine.
    """

    def __init__(
        self,
        ds: GlobalDataset,
        part: PartyPartition,
        task: Optional[TaskKind] = None,
        seed: int = 0,
        alpha: float = 1e-3,
        test_size: float = 0.2,
    ):
        if ds.labels is None:
            raise EstimationError("Labels requis pour évaluer l'importance des parties")
        part.check_against(ds)
        self.ds = ds
        self.groups = part.groups()
        self.task = TaskKind(task) if task is not None else infer_task(ds.labels)
        self.alpha = alpha
        self.train_idx, self.test_idx = train_test_split(
            np.arange(ds.n), test_size=test_size, random_state=seed % (2**32)
        )
        self._cache: dict[frozenset[int], float] = {}
        self._lock = threading.Lock()
        self._baseline = self._baseline_score()

    def _baseline_score(self) -> float:
        y_train, y_test = self.ds.labels[self.train_idx], self.ds.labels[self.test_idx]
        if self.task == TaskKind.CLASSIFICATION:
            values, counts = np.unique(y_train, return_counts=True)
            majority = values[np.argmax(counts)]
            return accuracy_score(y_test, np.full(y_test.size, majority))
        return r2_score(y_test, np.full(y_test.size, y_train.mean()), force_finite=True)

    def _score(self, subset: frozenset[int]) -> float:
        if not subset:
            return self._baseline
        cols = np.concatenate([self.groups[k] for k in sorted(subset)])
        if cols.size == 0:
            return self._baseline
        X = self.ds.columns(cols)
        y = self.ds.labels
        X_train, X_test = X[self.train_idx], X[self.test_idx]
        y_train, y_test = y[self.train_idx], y[self.test_idx]

        if self.task == TaskKind.CLASSIFICATION:
            if np.unique(y_train).size < 2:
                return self._baseline
            model = RidgeClassifier(alpha=self.alpha).fit(X_train, y_train)
            return accuracy_score(y_test, model.predict(X_test))
        model = Ridge(alpha=self.alpha).fit(X_train, y_train)
        return r2_score(y_test, model.predict(X_test), force_finite=True)

    def __call__(self, subset: frozenset[int]) -> float:
        subset = frozenset(subset)
        with self._lock:
            if subset in self._cache:
                return self._cache[subset]
        value = float(self._score(subset) - self._baseline)
        with self._lock:
            self._cache[subset] = value
        return value


@dataclass
class ShapleyEstimate:
    per_party: np.ndarray
    method: str
    samples: int
    stderr: np.ndarray
    grand_value: float

    def to_dict(self) -> dict:
        return {
            "per_party": self.per_party.tolist(),
            "method": self.method,
            "samples": self.samples,
            "stderr": self.stderr.tolist(),
            "grand_value": self.grand_value,
        }


def _anchored(cf: Callable[[frozenset[int]], float], threads: Optional[int]) -> Callable[[list], list[float]]:
    """Évalue v sur une liste de sous-ensembles, v(∅) ramené à 0."""

    def _safe(subset: frozenset[int]) -> float:
        try:
            return float(cf(subset))
        except ShapleyError:
            raise
        except Exception as e:
            raise ShapleyError(subset, e) from e

    empty_value = _safe(frozenset())

    def _evaluate(subsets: list[frozenset[int]]) -> list[float]:
        return [v - empty_value for v in ordered_map(_safe, subsets, threads)]

    return _evaluate


def _exact_shapley(evaluate, K: int) -> tuple[np.ndarray, float, int]:
    subsets = [frozenset(c) for size in range(K + 1) for c in combinations(range(K), size)]
    values = dict(zip(subsets, evaluate(subsets)))
    phi = np.zeros(K)
    for i in range(K):
        others = [k for k in range(K) if k != i]
        for size in range(K):
            weight = math.factorial(size) * math.factorial(K - size - 1) / math.factorial(K)
            for combo in combinations(others, size):
                s = frozenset(combo)
                phi[i] += weight * (values[s | {i}] - values[s])
    return phi, values[frozenset(range(K))], len(subsets)


def _monte_carlo_shapley(evaluate, K: int, budget: int, seed: int) -> tuple[np.ndarray, np.ndarray, float]:
    rng = np.random.default_rng(seed)
    orders = [rng.permutation(K) for _ in range(budget)]

    needed: dict[frozenset[int], None] = {frozenset(): None}
    for order in orders:
        for t in range(1, K + 1):
            needed.setdefault(frozenset(order[:t].tolist()), None)
    subsets = list(needed)
    values = dict(zip(subsets, evaluate(subsets)))

    contributions = np.zeros((budget, K))
    for b, order in enumerate(orders):
        previous = 0.0
        for t in range(K):
            current = values[frozenset(order[: t + 1].tolist())]
            contributions[b, order[t]] = current - previous
            previous = current
    phi = contributions.mean(axis=0)
    stderr = contributions.std(axis=0, ddof=1) / np.sqrt(budget)
    return phi, stderr, values[frozenset(range(K))]


def party_shapley(
    ds: GlobalDataset,
    part: PartyPartition,
    cf: Optional[CharacteristicFn] = None,
    budget: int = 256,
    seed: int = 0,
    *,
    method: str = "auto",
    task: Optional[TaskKind] = None,
    threads: Optional[int] = None,
) -> ShapleyEstimate:
    """Valeurs de Shapley des parties: énumération exacte si K ≤ 10, sinon Monte-Carlo."""
    K = part.num_parties
    if K < 1:
        raise EstimationError("Au moins une party est requise")
    if method not in ("auto", "exact", "monte_carlo"):
        raise EstimationError(f"Méthode Shapley inconnue: {method}")
    if cf is None:
        cf = RidgeCharacteristic(ds, part, task=task, seed=seed)
    evaluate = _anchored(cf, threads)

    exact = method == "exact" or (method == "auto" and K <= EXACT_MAX_PARTIES)
    if exact:
        phi, grand, samples = _exact_shapley(evaluate, K)
        estimate = ShapleyEstimate(phi, "exact_enumeration", samples, np.zeros(K), float(grand))
    else:
        if budget < 2:
            raise EstimationError(f"Budget Monte-Carlo {budget} < 2 permutations")
        phi, stderr, grand = _monte_carlo_shapley(evaluate, K, budget, seed)
        estimate = ShapleyEstimate(phi, "monte_carlo", budget, stderr, float(grand))

    logger.info(f"Shapley ({estimate.method}): {np.round(estimate.per_party, 4).tolist()}")
    return estimate


# ============================================================================
# α: Dirichlet équivalent à l'importance observée
# ============================================================================


def dirichlet_mean_variance(alphas) -> float:
    """Moyenne sur i de Var(X_i) pour X ~ Dir(α)."""
    alphas = np.asarray(alphas, dtype=np.float64)
    a0 = alphas.sum()
    return float(np.mean(alphas * (a0 - alphas) / (a0**2 * (a0 + 1.0))))


def symmetric_alpha_from_variance(sigma: float, num_parties: int) -> float:
    """α du Dirichlet symétrique de variance moyenne σ: (K - 1 - K²σ) / (K³σ)."""
    if sigma <= 0:
        raise EstimationError(f"Variance moyenne σ = {sigma}: α symétrique indéfini")
    K = num_parties
    return (K - 1 - K**2 * sigma) / (K**3 * sigma)


@dataclass
class AlphaEstimate:
    alpha_vec: np.ndarray
    symmetric_alpha: float
    dispersion_alpha: float
    sigma: float = field(default=0.0)


def estimate_alpha(shapley: ShapleyEstimate) -> AlphaEstimate:
    """Importances normalisées en paramètres de Dirichlet, plus l'α symétrique équivalent.

    `dispersion_alpha` ajuste la dispersion observée des parts autour de 1/K:
    petit quand une party domine, grand quand l'importance est équilibrée.
    """
    importance = np.maximum(np.asarray(shapley.per_party, dtype=np.float64), 0.0)
    K = importance.size
    if importance.sum() <= 0:
        raise EstimationError("Importance nulle pour toutes les parties")

    alpha_vec = importance / importance.sum()
    if (alpha_vec == 0).any():
        alpha_vec = np.where(alpha_vec == 0, ZERO_IMPORTANCE_NUDGE, alpha_vec)
        alpha_vec = alpha_vec / alpha_vec.sum()

    sigma = dirichlet_mean_variance(alpha_vec)
    symmetric = symmetric_alpha_from_variance(sigma, K)

    dispersion = max(float(np.mean((alpha_vec - 1.0 / K) ** 2)), 1e-12)
    dispersion_alpha = max(((K - 1) / (K**2 * dispersion) - 1.0) / K, ZERO_IMPORTANCE_NUDGE)

    return AlphaEstimate(
        alpha_vec=alpha_vec,
        symmetric_alpha=float(symmetric),
        dispersion_alpha=float(dispersion_alpha),
        sigma=sigma,
    )


# ============================================================================
# β: position de l'Icor réel entre les bornes atteignables
# ============================================================================


@dataclass
class BetaEstimate:
    beta: float
    icor_real: float
    icor_min: float
    icor_max: float
    bound_mode: BoundMode


def beta_bounds(
    ds: GlobalDataset,
    part: PartyPartition,
    cfg: Optional[BrkgaConfig] = None,
    opts: Optional[PcorOptions] = None,
    *,
    mode: BoundMode = BoundMode.BRKGA,
    shuffles: int = 1000,
    threads: Optional[int] = None,
) -> BetaEstimate:
    """β̂ = clip((Icor_réel - Icor_min) / (Icor_max - Icor_min), 0, 1) aux tailles de la partition."""
    cfg = cfg or BrkgaConfig()
    opts = opts or PcorOptions()
    part.check_against(ds)
    if part.num_parties < 2:
        raise MetricError(f"Icor requiert K ≥ 2 parties (K = {part.num_parties})")
    part.require_nonempty()

    counts = part.counts().tolist()
    corr = CorrelationMatrix.from_dataset(ds, opts.kind)
    scorer = PermutationScorer(ds, counts, opts, corr=corr)
    icor_real = icor_from_correlation(corr, part, opts, threads)

    mode = BoundMode(mode)
    if mode == BoundMode.SHUFFLE:
        rng = stream_rng(cfg.seed, 0)
        perms = [rng.permutation(ds.m) for _ in range(shuffles)]
        values = ordered_map(scorer, perms, threads)
        icor_min, icor_max = float(min(values)), float(max(values))
    else:
        _, icor_min = optimize_extreme(ds, counts, Direction.MIN, cfg, opts, scorer=scorer, threads=threads)
        _, icor_max = optimize_extreme(ds, counts, Direction.MAX, cfg, opts, scorer=scorer, threads=threads)

    width = icor_max - icor_min
    if width < FLAT_LANDSCAPE:
        raise IndeterminateError(
            f"Paysage Icor plat (Icor_max - Icor_min = {width:.2e}): β indéterminé"
        )
    beta = float(np.clip((icor_real - icor_min) / width, 0.0, 1.0))
    return BetaEstimate(beta=beta, icor_real=icor_real, icor_min=icor_min, icor_max=icor_max, bound_mode=mode)


def estimate_beta(
    ds: GlobalDataset,
    part: PartyPartition,
    cfg: Optional[BrkgaConfig] = None,
    opts: Optional[PcorOptions] = None,
    *,
    threads: Optional[int] = None,
) -> float:
    return beta_bounds(ds, part, cfg, opts, threads=threads).beta
