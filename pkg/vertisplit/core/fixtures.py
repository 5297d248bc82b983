"""Datasets synthétiques générés à la volée pour les tests et le harnais `validate`."""

from dataclasses import dataclass

import numpy as np
from sklearn.datasets import make_classification

from vertisplit.core.dataset_io import GlobalDataset, PartyPartition
from vertisplit.core.errors import DatasetError


def _balanced_signs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Deux vecteurs ±1 centrés et orthogonaux de longueur n (n multiple de 4)."""
    quarter = n // 4
    a = np.concatenate([np.ones(2 * quarter), -np.ones(2 * quarter)])
    b = np.tile(np.concatenate([np.ones(quarter), -np.ones(quarter)]), 2)
    return a, b


def two_block_fixture(m: int, n: int = 16) -> GlobalDataset:
    """2m colonnes: D1 = m transformations affines croissantes de a, D2 de même pour b, a ⊥ b.

    Corrélations exactement 1 dans un bloc et 0 entre blocs (Spearman et Pearson).
    Colonnes 0..m-1 = D1, m..2m-1 = D2.
    """
    if m < 1:
        raise DatasetError("two_block_fixture requiert m ≥ 1")
    if n < 4 or n % 4:
        raise DatasetError("two_block_fixture requiert n multiple de 4")
    a, b = _balanced_signs(n)
    scales = np.arange(1, m + 1, dtype=np.float64)
    block1 = a[:, np.newaxis] * scales + scales
    block2 = b[:, np.newaxis] * scales - scales
    return GlobalDataset(
        features=np.hstack([block1, block2]),
        column_names=[f"d1_{j}" for j in range(m)] + [f"d2_{j}" for j in range(m)],
    )


def block_partition(m: int) -> PartyPartition:
    """Partition D1 | D2 de two_block_fixture(m)."""
    return PartyPartition(assignment=np.repeat([0, 1], m), num_parties=2)


@dataclass
class LatentBlocks:
    """Dataset de blocs indépendants, colonnes mélangées; `block_of[j]` = bloc de la colonne j."""

    dataset: GlobalDataset
    block_of: np.ndarray


def latent_block_dataset(
    num_blocks: int = 3,
    block_size: int = 10,
    n: int = 500,
    seed: int = 0,
    shuffle: bool = True,
) -> LatentBlocks:
    """Blocs générés par make_classification (2 features informatives, le reste redondant).

    Les labels sont ceux du premier bloc.
    """
    if block_size < 2:
        raise DatasetError("Chaque bloc doit contenir au moins 2 features")
    rng = np.random.default_rng(seed)
    blocks, labels = [], None
    for _ in range(num_blocks):
        X, y = make_classification(
            n_samples=n,
            n_features=block_size,
            n_informative=2,
            n_redundant=block_size - 2,
            n_repeated=0,
            random_state=int(rng.integers(2**31 - 1)),
        )
        blocks.append(X)
        if labels is None:
            labels = y
    features = np.hstack(blocks)
    block_of = np.repeat(np.arange(num_blocks), block_size)
    if shuffle:
        order = rng.permutation(features.shape[1])
        features, block_of = features[:, order], block_of[order]
    return LatentBlocks(dataset=GlobalDataset(features=features, labels=labels), block_of=block_of)


def latent_factor_matrix(n: int, m: int, factors: int = 10, noise: float = 0.5, seed: int = 0) -> np.ndarray:
    """X = F·W + bruit: spectre de corrélation à décroissance rapide (ablation de troncature)."""
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((n, factors))
    W = rng.standard_normal((factors, m))
    return F @ W + noise * rng.standard_normal((n, m))


def uniform_split(m: int, num_parties: int, seed: int = 0) -> PartyPartition:
    """Partition aléatoire à tailles égales (reste aux premières parties)."""
    rng = np.random.default_rng(seed)
    base, rest = divmod(m, num_parties)
    labels = np.repeat(np.arange(num_parties), [base + 1 if k < rest else base for k in range(num_parties)])
    return PartyPartition(assignment=rng.permutation(labels), num_parties=num_parties)
