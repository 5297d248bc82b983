import numpy as np
import pytest

from vertisplit.core.config import BrkgaConfig
from vertisplit.core.corr_metrics import CorrelationMatrix
from vertisplit.core.dataset_io import PartyPartition
from vertisplit.core.errors import ConfigError, PartitionError
from vertisplit.core.fixtures import latent_block_dataset, two_block_fixture
from vertisplit.core.split_correlation import (
    Direction,
    cluster_order,
    interleaved_permutation,
    PermutationScorer,
    default_counts,
    icor_of_permutation,
    optimize_extreme,
    split_by_correlation,
    validate_counts,
)


def test_default_counts_front_loads_remainder():
    assert default_counts(7, 3) == [3, 2, 2]
    assert default_counts(6, 2) == [3, 3]


def test_default_counts_too_many_parties():
    with pytest.raises(PartitionError):
        default_counts(2, 3)


@pytest.mark.parametrize("counts", [[2, 1], [3, 0, 1], []])
def test_invalid_counts(counts):
    with pytest.raises(PartitionError):
        validate_counts(counts, 4)


def test_icor_of_permutation_rejects_non_permutation():
    with pytest.raises(PartitionError):
        icor_of_permutation(two_block_fixture(2), [0, 0, 1, 2], [2, 2])


def test_scorer_ignores_order_within_party():
    scorer = PermutationScorer(two_block_fixture(2), [2, 2])
    assert scorer(np.array([0, 1, 2, 3])) == scorer(np.array([1, 0, 3, 2]))
    assert scorer.evaluations == 1


def test_extremes_on_block_fixture(small_brkga):
    ds = two_block_fixture(2)
    _, low = optimize_extreme(ds, [2, 2], Direction.MIN, small_brkga)
    _, high = optimize_extreme(ds, [2, 2], Direction.MAX, small_brkga)
    assert low == pytest.approx(-1.0)
    assert high == pytest.approx(0.0, abs=1e-9)


def test_one_feature_per_party_is_identity():
    ds = two_block_fixture(2)
    perm, _ = optimize_extreme(ds, [1, 1, 1, 1], Direction.MAX)
    assert perm.tolist() == [0, 1, 2, 3]


def test_beta_zero_recovers_blocks(small_brkga):
    ds = two_block_fixture(3)
    result = split_by_correlation(ds, 0.0, [3, 3], small_brkga)
    assert result.icor_achieved == pytest.approx(-1.0)
    groups = sorted(sorted(g.tolist()) for g in result.partition.groups())
    assert groups == [[0, 1, 2], [3, 4, 5]]


def test_beta_one_reaches_maximum(small_brkga):
    ds = two_block_fixture(3)
    result = split_by_correlation(ds, 1.0, [3, 3], small_brkga)
    assert result.icor_achieved == pytest.approx(result.icor_max, abs=small_brkga.target_tolerance)
    assert result.icor_min <= result.icor_target <= result.icor_max


def test_target_interpolates_bounds(small_brkga):
    ds = two_block_fixture(3)
    result = split_by_correlation(ds, 0.25, [3, 3], small_brkga)
    expected = 0.75 * result.icor_min + 0.25 * result.icor_max
    assert result.icor_target == pytest.approx(expected)
    assert result.partition.counts().tolist() == [3, 3]


def test_same_seed_same_split_across_threads(small_brkga):
    ds = latent_block_dataset(num_blocks=2, block_size=4, n=120, seed=1).dataset
    one = split_by_correlation(ds, 0.5, cfg=small_brkga, threads=1)
    four = split_by_correlation(ds, 0.5, cfg=small_brkga, threads=4)
    assert one.partition.assignment.tolist() == four.partition.assignment.tolist()
    assert one.icor_achieved == four.icor_achieved


def test_beta_out_of_range():
    with pytest.raises(ConfigError):
        split_by_correlation(two_block_fixture(2), 1.5)


def test_single_party_rejected():
    with pytest.raises(PartitionError):
        split_by_correlation(two_block_fixture(2), 0.5, counts=[4])


@pytest.mark.slow
def test_beta_zero_reconstructs_independent_blocks():
    hits = 0
    for seed in range(20):
        blocks = latent_block_dataset(num_blocks=3, block_size=10, n=500, seed=seed)
        result = split_by_correlation(blocks.dataset, 0.0, [10, 10, 10], BrkgaConfig(seed=seed))
        hits += all(np.unique(blocks.block_of[g]).size == 1 for g in result.partition.groups())
    assert hits >= 19


def test_cluster_order_groups_blocks():
    ds = two_block_fixture(3)
    order = cluster_order(CorrelationMatrix.from_dataset(ds))
    assert sorted(order.tolist()) == list(range(6))
    assert sorted([sorted(order[:3].tolist()), sorted(order[3:].tolist())]) == [[0, 1, 2], [3, 4, 5]]


def test_interleaved_permutation_spreads_neighbours():
    perm = interleaved_permutation([0, 1, 2, 3, 4, 5], [3, 3])
    part = PartyPartition.from_permutation(perm, [3, 3])
    assert part.assignment.tolist() == [0, 1, 0, 1, 0, 1]


def test_achieved_icor_grows_with_beta():
    ds = two_block_fixture(3)
    cfg = BrkgaConfig(seed=0)
    achieved = [split_by_correlation(ds, beta, [3, 3], cfg).icor_achieved for beta in (0.0, 0.25, 0.5, 0.75, 1.0)]
    for low, high in zip(achieved, achieved[1:]):
        assert low <= high + 2 * cfg.target_tolerance
