"""Matrices de corrélation colonne à colonne et métriques Pcor / Icor / mcor.

Pcor(Xi, Xj) est l'écart-type (normalisé par √d) des valeurs singulières de
cor(Xi, Xj): 0 pour des parties indépendantes, 1 pour des colonnes
parfaitement corrélées. Icor moyenne Pcor(Xi, Xj) - Pcor(Xi, Xi) sur les
paires ordonnées de parties distinctes.
"""

import logging
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import ArpackNoConvergence, svds
from scipy.stats import rankdata

from vertisplit.core.config import CorrelationKind, PcorOptions
from vertisplit.core.dataset_io import GlobalDataset, PartyPartition
from vertisplit.core.errors import MetricError
from vertisplit.core.workers import ordered_map

logger = logging.getLogger(__name__)

# Valeurs singulières sous ce seuil traitées comme nulles
SINGULAR_FLOOR = 1e-12
# Écart maximal toléré entre R et R^T avant symétrisation
SYMMETRY_TOLERANCE = 1e-8
# Budget ARPACK: itérations par dimension
_SVDS_ITER_FACTOR = 10


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    """Valeurs singulières décroissantes, de longueur d = min(p, q) (zéros de troncature inclus)."""

    values: np.ndarray
    truncated: bool = False

    @property
    def d(self) -> int:
        return self.values.size


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, np.newaxis]
    if X.ndim != 2:
        raise MetricError(f"Matrice 2D attendue, reçu {X.ndim}D")
    return X


def _normalized_columns(X: np.ndarray, kind: CorrelationKind) -> tuple[np.ndarray, np.ndarray]:
    """Colonnes centrées de norme 1 (rangs moyens pour Spearman); colonnes constantes à zéro."""
    n = X.shape[0]
    if n < 2:
        raise MetricError(f"Corrélation indéfinie avec n = {n} < 2 échantillons")
    if kind == CorrelationKind.SPEARMAN:
        X = rankdata(X, axis=0, method="average")
    constant = np.ptp(X, axis=0) == 0
    centered = X - X.mean(axis=0)
    norms = np.linalg.norm(centered, axis=0)
    Z = np.zeros_like(centered)
    Z[:, ~constant] = centered[:, ~constant] / norms[~constant]
    return Z, constant


def column_correlation(A, B=None, kind: CorrelationKind = CorrelationKind.SPEARMAN) -> np.ndarray:
    """Matrice p×q des corrélations entre colonnes de A et de B.

    Sans B, calcule l'autocorrélation de A: la diagonale vaut 1, y compris
    pour une colonne constante (qui reste à 0 contre toutes les autres).
    """
    A = _as_matrix(A)
    ZA, _ = _normalized_columns(A, kind)
    if B is None:
        C = ZA.T @ ZA
        np.fill_diagonal(C, 1.0)
        return np.clip(C, -1.0, 1.0)

    B = _as_matrix(B)
    if A.shape[0] != B.shape[0]:
        raise MetricError(f"Nombre d'échantillons différent: {A.shape[0]} vs {B.shape[0]}")
    ZB, _ = _normalized_columns(B, kind)
    return np.clip(ZA.T @ ZB, -1.0, 1.0)


def singular_spectrum(C, opts: Optional[PcorOptions] = None) -> SingularSpectrum:
    """Spectre exact si min(p, q) ≤ seuil (ou d_t ≥ d), sinon top-d_t complété par des zéros."""
    opts = opts or PcorOptions()
    C = _as_matrix(C)
    d = min(C.shape)
    if d == 0:
        raise MetricError("Matrice de corrélation vide")
    if not np.all(np.isfinite(C)):
        raise MetricError("Matrice de corrélation non finie")

    if d <= opts.exact_dim_threshold or opts.truncate_rank >= d:
        values = linalg.svdvals(C, check_finite=False)
        truncated = False
    else:
        k = opts.truncate_rank
        maxiter = _SVDS_ITER_FACTOR * d
        v0 = np.full(d, 1.0 / np.sqrt(d))
        try:
            top = svds(C, k=k, v0=v0, maxiter=maxiter, return_singular_vectors=False)
        except ArpackNoConvergence as e:
            raise MetricError(f"SVD tronquée (d_t={k}) sans convergence après {maxiter} itérations: {e}")
        values = np.zeros(d)
        values[:k] = np.sort(np.abs(top))[::-1]
        truncated = True

    values = np.sort(np.asarray(values, dtype=np.float64))[::-1]
    values[values < SINGULAR_FLOOR] = 0.0
    return SingularSpectrum(values=values, truncated=truncated)


def pcor_from_spectrum(spectrum: SingularSpectrum) -> float:
    values = spectrum.values
    d = values.size
    if d == 1:
        # (d - 1) indéfini: on retourne la valeur singulière elle-même
        value = values[0]
    else:
        value = np.std(values, ddof=1) / np.sqrt(d)
    return float(np.clip(value, 0.0, 1.0))


def pcor(Xi, Xj, opts: Optional[PcorOptions] = None) -> float:
    """Corrélation entre deux parties, dans [0, 1]. `pcor(X, X)` utilise l'autocorrélation."""
    opts = opts or PcorOptions()
    if Xj is Xi:
        C = column_correlation(Xi, kind=opts.kind)
    else:
        C = column_correlation(Xi, Xj, kind=opts.kind)
    return pcor_from_spectrum(singular_spectrum(C, opts))


def mcor(X, kind: CorrelationKind = CorrelationKind.SPEARMAN) -> float:
    """Analogue de Pcor sur les valeurs propres de l'autocorrélation de X."""
    X = _as_matrix(X)
    m = X.shape[1]
    if m < 2:
        raise MetricError(f"mcor requiert au moins 2 colonnes (m = {m})")
    R = column_correlation(X, kind=kind)
    residue = np.max(np.abs(R - R.T))
    if residue > SYMMETRY_TOLERANCE:
        raise MetricError(f"Matrice de corrélation non symétrique (écart {residue:.2e})")
    R = (R + R.T) / 2.0

    eigenvalues = np.sort(linalg.eigvalsh(R, check_finite=False))[::-1]
    eigenvalues[eigenvalues < SINGULAR_FLOOR] = 0.0
    value = np.std(eigenvalues, ddof=1) / np.sqrt(m)
    return float(np.clip(value, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Autocorrélation m×m d'un dataset; chaque bloc cor(Xi, Xj) en est une sous-matrice."""

    matrix: np.ndarray
    kind: CorrelationKind

    @classmethod
    def from_dataset(cls, ds: GlobalDataset, kind: CorrelationKind = CorrelationKind.SPEARMAN) -> "CorrelationMatrix":
        matrix = column_correlation(ds.dense(), kind=kind)
        matrix.setflags(write=False)
        return cls(matrix=matrix, kind=kind)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        return self.matrix[np.ix_(rows, cols)]


def check_icor_partition(part: PartyPartition, m: int) -> None:
    if part.m != m:
        raise MetricError(f"Assignation de longueur {part.m} pour {m} features")
    if part.num_parties < 2:
        raise MetricError(f"Icor requiert K ≥ 2 parties (K = {part.num_parties})")
    part.require_nonempty()


def party_pcor_matrix(
    corr: CorrelationMatrix,
    part: PartyPartition,
    opts: Optional[PcorOptions] = None,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Matrice K×K: Pcor(Xi, Xj) hors diagonale, Pcor(Xi, Xi) sur la diagonale."""
    opts = opts or PcorOptions()
    groups = part.groups()
    K = part.num_parties
    pairs = [(i, j) for i in range(K) for j in range(i, K)]

    def _pair(pair: tuple[int, int]) -> float:
        i, j = pair
        return pcor_from_spectrum(singular_spectrum(corr.block(groups[i], groups[j]), opts))

    values = ordered_map(_pair, pairs, threads)
    P = np.zeros((K, K))
    for (i, j), value in zip(pairs, values):
        P[i, j] = P[j, i] = value
    return P


def icor_from_pcor_matrix(P: np.ndarray) -> float:
    K = P.shape[0]
    total = 0.0
    for i in range(K):
        for j in range(K):
            if j != i:
                total += P[i, j] - P[i, i]
    return total / (K * (K - 1))


def icor(
    ds: GlobalDataset,
    part: PartyPartition,
    opts: Optional[PcorOptions] = None,
    *,
    corr: Optional[CorrelationMatrix] = None,
    threads: Optional[int] = None,
) -> float:
    """Corrélation inter-parties globale (≤ 0 en pratique, plus haut = plus corrélé)."""
    opts = opts or PcorOptions()
    check_icor_partition(part, ds.m)
    if corr is None:
        corr = CorrelationMatrix.from_dataset(ds, opts.kind)
    return icor_from_pcor_matrix(party_pcor_matrix(corr, part, opts, threads))


def icor_from_correlation(
    corr: CorrelationMatrix,
    part: PartyPartition,
    opts: Optional[PcorOptions] = None,
    threads: Optional[int] = None,
) -> float:
    check_icor_partition(part, corr.m)
    return icor_from_pcor_matrix(party_pcor_matrix(corr, part, opts, threads))


def pcor_relative_error(exact: float, approx: float) -> float:
    if exact == 0:
        raise MetricError("Erreur relative indéfinie: Pcor exact nul")
    if exact < 0:
        raise MetricError(f"Pcor exact négatif ({exact})")
    return abs(approx - exact) / exact


# ============================================================================
# Expériences de contrôle des métriques
# ============================================================================


@dataclass
class TruncationPoint:
    truncate_rank: int
    pcor: float
    relative_error: float
    seconds: float
    speedup: float
    truncated: bool


def truncation_ablation(
    Xi,
    Xj,
    ranks: Sequence[int],
    kind: CorrelationKind = CorrelationKind.SPEARMAN,
) -> tuple[float, list[TruncationPoint]]:
    """Pcor exact puis tronqué pour chaque d_t: erreur relative et accélération.

    Retourne (pcor exact, points). `Xj is Xi` mesure l'autocorrélation.
    """
    C = column_correlation(Xi, kind=kind) if Xj is Xi else column_correlation(Xi, Xj, kind=kind)
    d = min(C.shape)

    start = time.perf_counter()
    exact = pcor_from_spectrum(singular_spectrum(C, PcorOptions(kind=kind, exact_dim_threshold=d)))
    exact_seconds = time.perf_counter() - start

    points = []
    for rank in ranks:
        opts = PcorOptions(kind=kind, exact_dim_threshold=1, truncate_rank=rank)
        start = time.perf_counter()
        spectrum = singular_spectrum(C, opts)
        approx = pcor_from_spectrum(spectrum)
        seconds = time.perf_counter() - start
        points.append(
            TruncationPoint(
                truncate_rank=rank,
                pcor=approx,
                relative_error=pcor_relative_error(exact, approx),
                seconds=seconds,
                speedup=exact_seconds / seconds if seconds > 0 else float("nan"),
                truncated=spectrum.truncated,
            )
        )
        logger.debug(f"d_t={rank}: Pcor={approx:.6f} erreur={points[-1].relative_error:.3e}")
    return exact, points


@dataclass
class ExchangeStep:
    """Corrélations après `exchanged` échanges de features entre deux parties."""

    exchanged: int
    inter_pcor: float
    inner_pcor_1: float
    inner_pcor_2: float
    mcor_1: float
    mcor_2: float


def feature_exchange_trend(X1, X2, opts: Optional[PcorOptions] = None) -> list[ExchangeStep]:
    """P1 détient X1 et P2 détient X2; à chaque étape une feature de X1 passe chez P2
    contre une feature de X2, jusqu'à ce que tout X1 soit chez P2.
    """
    opts = opts or PcorOptions()
    X1, X2 = _as_matrix(X1), _as_matrix(X2)
    m1, m2 = X1.shape[1], X2.shape[1]
    if m2 < m1:
        raise MetricError(f"X2 doit avoir au moins autant de features que X1 ({m2} < {m1})")

    steps = []
    for s in range(m1 + 1):
        party1 = np.hstack([X1[:, s:], X2[:, :s]])
        party2 = np.hstack([X2[:, s:], X1[:, :s]])
        steps.append(
            ExchangeStep(
                exchanged=s,
                inter_pcor=pcor(party1, party2, opts),
                inner_pcor_1=pcor(party1, party1, opts),
                inner_pcor_2=pcor(party2, party2, opts),
                mcor_1=mcor(party1, opts.kind) if party1.shape[1] > 1 else 1.0,
                mcor_2=mcor(party2, opts.kind) if party2.shape[1] > 1 else 1.0,
            )
        )
    return steps
