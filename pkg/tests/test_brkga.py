import numpy as np
import pytest
from pydantic import ValidationError

from vertisplit.core.brkga import BrkgaSolver, decode, keys_from_permutation, swap_local_search
from vertisplit.core.config import BrkgaConfig


def displaced(perm: np.ndarray) -> float:
    return float(np.sum(perm != np.arange(perm.size)))


def test_decode_breaks_ties_by_index():
    assert decode(np.array([0.5, 0.5, 0.1])).tolist() == [2, 0, 1]


def test_any_genome_decodes_to_a_permutation():
    rng = np.random.default_rng(0)
    for m in (1, 2, 7, 30):
        for levels in (1, 3, 1000):
            keys = rng.integers(0, levels, size=m) / levels
            perm = decode(keys)
            assert sorted(perm.tolist()) == list(range(m))
            # clés égales: ordre des index d'origine
            assert perm.tolist() == np.lexsort((np.arange(m), keys)).tolist()


def test_keys_reproduce_permutation():
    perm = np.random.default_rng(0).permutation(17)
    keys = keys_from_permutation(perm)
    assert decode(keys).tolist() == perm.tolist()
    assert np.all((keys > 0) & (keys < 1))


def test_population_split():
    cfg = BrkgaConfig(population_size=100, elite_fraction=0.2, mutant_fraction=0.15)
    assert (cfg.num_elites, cfg.num_mutants, cfg.num_offspring) == (20, 15, 65)


def test_fractions_must_leave_offspring():
    with pytest.raises(ValidationError):
        BrkgaConfig(elite_fraction=0.6, mutant_fraction=0.5)


def test_seeded_genome_is_kept_as_elite():
    cfg = BrkgaConfig(population_size=20, max_generations=5, stall_generations=3)
    solver = BrkgaSolver(displaced, 8, cfg, np.random.default_rng(0))
    result = solver.run([keys_from_permutation(np.arange(8))])
    assert result.cost == 0.0
    assert result.permutation.tolist() == list(range(8))


def test_search_improves_and_is_deterministic():
    cfg = BrkgaConfig(population_size=40, max_generations=60, stall_generations=20)

    def run():
        return BrkgaSolver(displaced, 6, cfg, np.random.default_rng(42)).run()

    first, second = run(), run()
    assert first.cost == second.cost
    assert first.permutation.tolist() == second.permutation.tolist()
    assert first.cost <= 3.0
    assert first.evaluations >= cfg.population_size


def test_stop_below_ends_early():
    cfg = BrkgaConfig(population_size=20, max_generations=100, stall_generations=100)
    solver = BrkgaSolver(displaced, 5, cfg, np.random.default_rng(1), stop_below=0.5)
    result = solver.run([keys_from_permutation(np.arange(5))])
    assert result.generations_used == 0


def test_thread_count_does_not_change_result():
    cfg = BrkgaConfig(population_size=30, max_generations=10)
    one = BrkgaSolver(displaced, 7, cfg, np.random.default_rng(3), threads=1).run()
    four = BrkgaSolver(displaced, 7, cfg, np.random.default_rng(3), threads=4).run()
    assert one.permutation.tolist() == four.permutation.tolist()


def test_swap_local_search_reaches_block_optimum():
    blocks = np.array([0, 0, 1, 1])

    def first_block_sum(perm):
        return float(perm[:2].sum())

    perm, cost, evals = swap_local_search(
        np.array([3, 2, 1, 0]), blocks, first_block_sum, np.random.default_rng(0), passes=5, max_evals=100
    )
    assert sorted(perm[:2].tolist()) == [0, 1]
    assert cost == 1.0
    assert evals > 0


def test_swap_local_search_disabled():
    perm = np.array([1, 0])
    out, cost, evals = swap_local_search(perm, np.array([0, 1]), lambda p: float(p[0]), np.random.default_rng(0), 0, 10)
    assert out.tolist() == [1, 0]
    assert (cost, evals) == (1.0, 0)


def test_result_lists_elites_best_first():
    cfg = BrkgaConfig(population_size=20, max_generations=5, stall_generations=3)
    result = BrkgaSolver(displaced, 6, cfg, np.random.default_rng(2)).run()
    assert len(result.elites) == cfg.num_elites
    assert result.elites[0].tolist() == result.permutation.tolist()
    costs = [displaced(p) for p in result.elites]
    assert costs == sorted(costs)
