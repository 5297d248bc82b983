"""Algorithme génétique à clés aléatoires biaisées (BRKGA) sur des permutations.

Un génome est un vecteur de m clés dans [0, 1); le décodage est un tri
stable des clés (égalités départagées par l'index d'origine). Le coût est
minimisé; l'appelant change le signe pour maximiser.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from vertisplit.core.config import BrkgaConfig
from vertisplit.core.workers import ordered_map

logger = logging.getLogger(__name__)

CostFn = Callable[[np.ndarray], float]

# Amélioration minimale pour remettre à zéro le compteur de stagnation
IMPROVEMENT_EPS = 1e-12


def decode(keys: np.ndarray) -> np.ndarray:
    """Permutation des colonnes: argsort stable des clés."""
    return np.argsort(np.asarray(keys), kind="stable")


def keys_from_permutation(perm: Sequence[int]) -> np.ndarray:
    """Génome dont le décodage redonne exactement `perm`."""
    perm = np.asarray(perm, dtype=np.int64)
    m = perm.size
    keys = np.empty(m)
    keys[perm] = (np.arange(m) + 0.5) / m
    return keys


@dataclass
class BrkgaResult:
    keys: np.ndarray
    permutation: np.ndarray
    cost: float
    generations_used: int
    evaluations: int
    # Élites de la dernière génération, du meilleur au moins bon
    elites: list[np.ndarray] = field(default_factory=list)


class BrkgaSolver:
    """Boucle BRKGA: élites conservées, croisement biaisé ρ, mutants injectés."""

    def __init__(
        self,
        cost_fn: CostFn,
        num_keys: int,
        cfg: BrkgaConfig,
        rng: np.random.Generator,
        threads: Optional[int] = None,
        stop_below: Optional[float] = None,
    ):
        self.cost_fn = cost_fn
        self.num_keys = num_keys
        self.cfg = cfg
        self.rng = rng
        self.threads = threads
        self.stop_below = stop_below
        self.evaluations = 0

    def _evaluate(self, population: np.ndarray) -> np.ndarray:
        perms = [decode(keys) for keys in population]
        self.evaluations += len(perms)
        return np.asarray(ordered_map(self.cost_fn, perms, self.threads), dtype=np.float64)

    def _done(self, cost: float) -> bool:
        return self.stop_below is not None and cost < self.stop_below

    def run(self, initial: Sequence[np.ndarray] = ()) -> BrkgaResult:
        cfg = self.cfg
        P, m = cfg.population_size, self.num_keys
        ne, nm, no = cfg.num_elites, cfg.num_mutants, cfg.num_offspring

        population = self.rng.random((P, m))
        for row, keys in enumerate(list(initial)[:P]):
            population[row] = keys
        costs = self._evaluate(population)

        best = np.inf
        stall = 0
        generation = 0
        while True:
            order = np.argsort(costs, kind="stable")
            population, costs = population[order], costs[order]

            if costs[0] < best - IMPROVEMENT_EPS:
                best = costs[0]
                stall = 0
            else:
                stall += 1
            logger.debug(f"génération {generation}: meilleur coût {costs[0]:.6g}, stagnation {stall}")

            if self._done(costs[0]) or generation >= cfg.max_generations or stall >= cfg.stall_generations:
                break
            generation += 1

            elite_parents = self.rng.integers(0, ne, size=no)
            other_parents = self.rng.integers(ne, P, size=no)
            inherit = self.rng.random((no, m)) < cfg.elite_inherit_bias
            offspring = np.where(inherit, population[elite_parents], population[other_parents])
            mutants = self.rng.random((nm, m))

            newcomers = np.vstack([offspring, mutants])
            population = np.vstack([population[:ne], newcomers])
            costs = np.concatenate([costs[:ne], self._evaluate(newcomers)])

        return BrkgaResult(
            keys=population[0].copy(),
            permutation=decode(population[0]),
            cost=float(costs[0]),
            generations_used=generation,
            evaluations=self.evaluations,
            elites=[decode(keys) for keys in population[:ne]],
        )


def swap_local_search(
    perm: np.ndarray,
    block_of_position: np.ndarray,
    cost_fn: CostFn,
    rng: np.random.Generator,
    passes: int,
    max_evals: int,
    stop_below: Optional[float] = None,
) -> tuple[np.ndarray, float, int]:
    """Première amélioration sur les échanges de deux positions de blocs différents.

    Retourne (permutation, coût, évaluations).
    """
    perm = np.array(perm, dtype=np.int64)
    cost = cost_fn(perm)
    evaluations = 0
    if passes <= 0 or max_evals <= 0:
        return perm, cost, evaluations

    first, second = np.triu_indices(perm.size, k=1)
    cross = block_of_position[first] != block_of_position[second]
    first, second = first[cross], second[cross]
    if first.size == 0:
        return perm, cost, evaluations

    for _ in range(passes):
        budget = max_evals - evaluations
        if budget <= 0 or (stop_below is not None and cost < stop_below):
            break
        order = rng.permutation(first.size)[:budget]
        improved = False
        for idx in order:
            a, b = first[idx], second[idx]
            perm[a], perm[b] = perm[b], perm[a]
            candidate = cost_fn(perm)
            evaluations += 1
            if candidate < cost - IMPROVEMENT_EPS:
                cost = candidate
                improved = True
                if stop_below is not None and cost < stop_below:
                    break
            else:
                perm[a], perm[b] = perm[b], perm[a]
        if not improved:
            break
    return perm, cost, evaluations
