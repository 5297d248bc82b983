"""Chargement des datasets globaux et matérialisation des parties.

Formats:
- CSV (RFC-4180, UTF-8, '.' décimal), en-tête détecté ou forcé
- libsvm ("label idx:val ...", indices 1-based strictement croissants)

Les fichiers de parties sont écrits avec la précision décimale complète
(repr des float64): la relecture reproduit les valeurs au bit près.
"""

import hashlib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import sparse
from sklearn.datasets import load_svmlight_file

from vertisplit.core.errors import DatasetError, PartitionError
from vertisplit.core.manifest import MANIFEST_FILE, SourceInfo, SplitManifest

logger = logging.getLogger(__name__)

LABEL_COLUMN = "label"
LABELS_FILE = "labels.csv"

# Au-delà de cette densité de non-zéros, une matrice libsvm est densifiée
DENSIFY_THRESHOLD = 0.5

_NON_FINITE_TOKENS = {"nan", "+nan", "-nan", "inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"}


@dataclass(frozen=True, eq=False)
class GlobalDataset:
    """Matrice n×m (dense ou CSR) et labels optionnels. Immuable après construction."""

    features: Union[np.ndarray, sparse.csr_matrix]
    labels: Optional[np.ndarray] = None
    column_names: Optional[list[str]] = None
    source_path: Optional[str] = None
    source_sha256: Optional[str] = None

    def __post_init__(self) -> None:
        features = self.features
        if sparse.issparse(features):
            features = sparse.csr_matrix(features, dtype=np.float64)
            values = features.data
        else:
            features = np.array(features, dtype=np.float64)
            if features.ndim != 2:
                raise DatasetError(f"Matrice de features attendue en 2D, reçu {features.ndim}D")
            values = features
        n, m = features.shape
        if n < 1 or m < 1:
            raise DatasetError(f"Dataset vide ({n} lignes × {m} colonnes)")
        if not np.all(np.isfinite(values)):
            raise DatasetError("Le dataset contient des valeurs NaN ou infinies")

        labels = self.labels
        if labels is not None:
            labels = np.array(labels, dtype=np.float64).reshape(-1)
            if labels.shape[0] != n:
                raise DatasetError(f"{labels.shape[0]} labels pour {n} lignes")
            labels.setflags(write=False)
        if self.column_names is not None and len(self.column_names) != m:
            raise DatasetError(f"{len(self.column_names)} noms de colonnes pour {m} colonnes")

        if not sparse.issparse(features):
            features.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.features)

    @property
    def names(self) -> list[str]:
        return list(self.column_names) if self.column_names is not None else [f"c{j}" for j in range(self.m)]

    def columns(self, idx: Sequence[int]) -> np.ndarray:
        """Colonnes `idx` en matrice dense n×len(idx)."""
        idx = np.asarray(idx, dtype=np.int64)
        if self.is_sparse:
            return self.features[:, idx].toarray()
        return self.features[:, idx]

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.features.toarray()
        return self.features

    def source_info(self) -> SourceInfo:
        return SourceInfo(path=self.source_path, rows=self.n, columns=self.m, sha256=self.source_sha256)


@dataclass(frozen=True, eq=False)
class PartyPartition:
    """Assignation de chaque feature d'origine à une party dans [0, K)."""

    assignment: np.ndarray
    num_parties: int

    def __post_init__(self) -> None:
        assignment = np.array(self.assignment, dtype=np.int64).reshape(-1)
        if self.num_parties < 1:
            raise PartitionError(f"K = {self.num_parties} parties, au moins 1 attendue")
        if assignment.size and (assignment.min() < 0 or assignment.max() >= self.num_parties):
            raise PartitionError(f"Assignation hors de [0, {self.num_parties})")
        assignment.setflags(write=False)
        object.__setattr__(self, "assignment", assignment)

    @classmethod
    def from_permutation(cls, perm: Sequence[int], counts: Sequence[int]) -> "PartyPartition":
        """Découpe contiguë de la permutation en blocs de tailles `counts`."""
        perm = np.asarray(perm, dtype=np.int64)
        assignment = np.empty(perm.size, dtype=np.int64)
        assignment[perm] = np.repeat(np.arange(len(counts)), counts)
        return cls(assignment=assignment, num_parties=len(counts))

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]]) -> "PartyPartition":
        m = sum(len(g) for g in groups)
        assignment = np.full(m, -1, dtype=np.int64)
        for k, group in enumerate(groups):
            assignment[np.asarray(group, dtype=np.int64)] = k
        if (assignment < 0).any():
            raise PartitionError("Les groupes ne couvrent pas toutes les features")
        return cls(assignment=assignment, num_parties=len(groups))

    @property
    def m(self) -> int:
        return self.assignment.size

    def members(self, party: int) -> np.ndarray:
        """Features de la party, en ordre croissant des colonnes d'origine."""
        return np.flatnonzero(self.assignment == party)

    def groups(self) -> list[np.ndarray]:
        return [self.members(k) for k in range(self.num_parties)]

    def counts(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.num_parties)

    def has_empty_party(self) -> bool:
        return bool((self.counts() == 0).any())

    def require_nonempty(self) -> None:
        empty = np.flatnonzero(self.counts() == 0)
        if empty.size:
            raise PartitionError(f"Party vide: {', '.join(str(k) for k in empty)}")

    def check_against(self, ds: GlobalDataset) -> None:
        if self.m != ds.m:
            raise PartitionError(f"Assignation de longueur {self.m} pour {ds.m} features")


@dataclass(frozen=True)
class ImageLayout:
    """Géométrie d'une image aplatie: canal, puis ligne, puis colonne."""

    height: int
    width: int
    channels: int = 1
    background_value: float = 0.0

    def __post_init__(self) -> None:
        for name in ("height", "width", "channels"):
            if getattr(self, name) < 1:
                raise DatasetError(f"ImageLayout.{name} doit être > 0")

    @property
    def size(self) -> int:
        return self.height * self.width * self.channels

    @classmethod
    def parse(cls, spec: str, background_value: float = 0.0) -> "ImageLayout":
        """Parse "HxWxC" (ou "HxW" pour une image mono-canal)."""
        match = re.fullmatch(r"\s*(\d+)x(\d+)(?:x(\d+))?\s*", spec.lower())
        if not match:
            raise DatasetError(f"Layout image invalide: {spec!r} (attendu HxWxC)")
        height, width, channels = match.groups()
        return cls(int(height), int(width), int(channels or 1), background_value)


# ============================================================================
# Lecture
# ============================================================================


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class _Table:
    names: list[str]
    values: np.ndarray
    has_header: bool = field(default=False)


def _read_table(path: Path, header: Optional[bool]) -> _Table:
    """Lit un CSV numérique avec localisation (ligne, colonne) de la première cellule invalide."""
    try:
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except FileNotFoundError:
        raise DatasetError(f"Fichier introuvable: {path}")
    except pd.errors.EmptyDataError:
        raise DatasetError(f"Fichier CSV vide: {path}")
    except pd.errors.ParserError as e:
        raise DatasetError(f"Lignes de longueurs inégales dans {path}: {e}")
    except (OSError, UnicodeDecodeError) as e:
        raise DatasetError(f"Lecture impossible de {path}: {e}")

    cells = raw.to_numpy(dtype=object)
    first = pd.to_numeric(pd.Series(cells[0]).astype(str).str.strip(), errors="coerce")
    if header is None:
        # En-tête seulement si aucune cellule de la première ligne n'est numérique
        header = bool(first.isna().all())
    names = [str(c).strip() for c in cells[0]] if header else [f"c{j}" for j in range(cells.shape[1])]
    body = cells[1:] if header else cells
    if body.shape[0] == 0:
        raise DatasetError(f"Aucune ligne de données dans {path}")

    present = ~pd.isna(body)
    text = np.where(present, body, "").astype(str)
    text = np.char.strip(text)
    parsed = pd.DataFrame(text).apply(lambda s: pd.to_numeric(s, errors="coerce")).to_numpy(dtype=np.float64)
    invalid = ~np.isfinite(parsed) | ~present

    if invalid.any():
        r, c = np.argwhere(invalid)[0]
        row, line = r + 1, r + 1 + (1 if header else 0)
        where = f"ligne {row} (ligne {line} du fichier), colonne '{names[c]}'"
        if not present[r, c]:
            raise DatasetError(f"{path}: ligne incomplète, {where}")
        if text[r, c].lower() in _NON_FINITE_TOKENS or np.isinf(parsed[r, c]):
            raise DatasetError(f"{path}: valeur non finie {text[r, c]!r}, {where}")
        raise DatasetError(f"{path}: valeur non numérique {text[r, c]!r}, {where}")

    # numpy arrondit correctement les décimaux: relecture exacte des repr float64
    values = text.astype(np.float64)
    return _Table(names=names, values=values, has_header=bool(header))


def _resolve_label_index(label_column: Union[str, int], table: _Table) -> int:
    ncols = len(table.names)
    if isinstance(label_column, str) and table.has_header and label_column in table.names:
        return table.names.index(label_column)
    try:
        idx = int(label_column)
    except (TypeError, ValueError):
        raise DatasetError(f"Colonne de labels introuvable: {label_column!r}")
    if idx < 0:
        idx += ncols
    if not 0 <= idx < ncols:
        raise DatasetError(f"Index de colonne de labels hors limites: {label_column}")
    return idx


def load_csv(
    path: Union[str, Path],
    label_column: Optional[Union[str, int]] = None,
    header: Optional[bool] = None,
) -> GlobalDataset:
    """Charge un CSV numérique. `header=None` détecte une ligne d'en-tête non numérique."""
    path = Path(path)
    table = _read_table(path, header)
    names, values = table.names, table.values
    labels = None

    if label_column is not None:
        idx = _resolve_label_index(label_column, table)
        labels = values[:, idx]
        keep = [j for j in range(values.shape[1]) if j != idx]
        values = values[:, keep]
        names = [names[j] for j in keep]

    logger.debug(f"CSV {path}: {values.shape[0]} lignes, {values.shape[1]} features")
    return GlobalDataset(
        features=values,
        labels=labels,
        column_names=names,
        source_path=str(path),
        source_sha256=_sha256(path),
    )


def _check_libsvm(path: Path, text: str) -> int:
    """Valide la syntaxe ligne par ligne, retourne le nombre d'échantillons."""
    samples = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        tokens = content.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise DatasetError(f"{path}: ligne {lineno}, label illisible {tokens[0]!r}")
        if not np.isfinite(label):
            raise DatasetError(f"{path}: ligne {lineno}, label non fini")

        previous = 0
        for token in tokens[1:]:
            index_text, sep, value_text = token.partition(":")
            if not sep or not index_text.isdigit():
                raise DatasetError(f"{path}: ligne {lineno}, jeton illisible {token!r}")
            index = int(index_text)
            if index < 1:
                raise DatasetError(f"{path}: ligne {lineno}, index {index} (les indices commencent à 1)")
            if index <= previous:
                raise DatasetError(f"{path}: ligne {lineno}, indices non croissants ({previous} puis {index})")
            try:
                value = float(value_text)
            except ValueError:
                raise DatasetError(f"{path}: ligne {lineno}, valeur illisible {token!r}")
            if not np.isfinite(value):
                raise DatasetError(f"{path}: ligne {lineno}, valeur non finie {token!r}")
            previous = index
        samples += 1
    return samples


def load_libsvm(path: Union[str, Path]) -> GlobalDataset:
    """Charge un fichier libsvm; densifié si plus de 50% de non-zéros."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DatasetError(f"Fichier introuvable: {path}")
    except (OSError, UnicodeDecodeError) as e:
        raise DatasetError(f"Lecture impossible de {path}: {e}")

    if _check_libsvm(path, text) == 0:
        raise DatasetError(f"{path}: aucun échantillon (no samples)")

    try:
        features, labels = load_svmlight_file(str(path), zero_based=False, dtype=np.float64)
    except ValueError as e:
        raise DatasetError(f"{path}: {e}")

    n, m = features.shape
    density = features.nnz / float(n * m) if m else 0.0
    if density > DENSIFY_THRESHOLD:
        features = features.toarray()
    logger.debug(f"libsvm {path}: {n}×{m}, densité {density:.3f}, {'dense' if density > DENSIFY_THRESHOLD else 'CSR'}")

    return GlobalDataset(
        features=features,
        labels=labels,
        source_path=str(path),
        source_sha256=_sha256(path),
    )


def load_party_files(
    paths: Sequence[Union[str, Path]],
    labels_path: Optional[Union[str, Path]] = None,
) -> tuple[GlobalDataset, PartyPartition]:
    """Recompose un dataset global depuis des CSV de parties (colonne `label` retirée)."""
    if not paths:
        raise DatasetError("Aucun fichier de party fourni")

    blocks: list[np.ndarray] = []
    names: list[str] = []
    groups: list[list[int]] = []
    labels: Optional[np.ndarray] = None
    offset = 0

    for path in map(Path, paths):
        table = _read_table(path, header=True)
        values, table_names = table.values, table.names
        if LABEL_COLUMN in table_names:
            idx = table_names.index(LABEL_COLUMN)
            if labels is None:
                labels = values[:, idx]
            keep = [j for j in range(values.shape[1]) if j != idx]
            values = values[:, keep]
            table_names = [table_names[j] for j in keep]
        if blocks and values.shape[0] != blocks[0].shape[0]:
            raise DatasetError(f"{path}: {values.shape[0]} lignes, {blocks[0].shape[0]} attendues")
        blocks.append(values)
        names.extend(table_names)
        groups.append(list(range(offset, offset + values.shape[1])))
        offset += values.shape[1]

    if labels_path is not None:
        table = _read_table(Path(labels_path), header=None)
        labels = table.values[:, 0]

    ds = GlobalDataset(features=np.hstack(blocks), labels=labels, column_names=names)
    return ds, PartyPartition.from_groups(groups)


# ============================================================================
# Écriture
# ============================================================================


def _write_frame(frame: pd.DataFrame, path: Path) -> None:
    try:
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise DatasetError(f"Écriture impossible de {path}: {e}")


def materialize_parties(
    ds: GlobalDataset,
    part: PartyPartition,
    out_dir: Union[str, Path],
    manifest: Optional[SplitManifest] = None,
) -> SplitManifest:
    """Écrit party{k}.csv, labels.csv (si labels) et manifest.json dans `out_dir`."""
    part.check_against(ds)
    names = ds.names
    # load_party_files retire toute colonne `label`: une feature de ce nom serait perdue
    if LABEL_COLUMN in names:
        raise DatasetError(
            f"Une feature s'appelle '{LABEL_COLUMN}' (colonne {names.index(LABEL_COLUMN) + 1}), "
            f"nom réservé aux labels dans les fichiers de parties; renommer la colonne"
        )
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DatasetError(f"Répertoire non inscriptible {out_dir}: {e}")

    for k in range(part.num_parties):
        cols = part.members(k)
        frame = pd.DataFrame(ds.columns(cols), columns=[names[c] for c in cols])
        if k == 0 and ds.labels is not None:
            frame[LABEL_COLUMN] = ds.labels
        _write_frame(frame, out_dir / f"party{k}.csv")

    if ds.labels is not None:
        _write_frame(pd.DataFrame({LABEL_COLUMN: ds.labels}), out_dir / LABELS_FILE)

    if manifest is None:
        manifest = SplitManifest(assignment=part.assignment.tolist(), source=ds.source_info())
    manifest.write(out_dir / MANIFEST_FILE)
    logger.info(f"{part.num_parties} parties écrites dans {out_dir}")
    return manifest


def flatten_image_split(
    ds: GlobalDataset,
    part: PartyPartition,
    layout: ImageLayout,
    party: int,
) -> np.ndarray:
    """Images (n, C, H, W) de la party; les pixels non possédés prennent la couleur de fond."""
    if layout.size != ds.m:
        raise DatasetError(f"Layout {layout.height}x{layout.width}x{layout.channels} incompatible avec m = {ds.m}")
    part.check_against(ds)
    if not 0 <= party < part.num_parties:
        raise PartitionError(f"Party {party} hors de [0, {part.num_parties})")

    owned = part.assignment == party
    pixels = np.where(owned[np.newaxis, :], ds.dense(), layout.background_value)
    return pixels.reshape(ds.n, layout.channels, layout.height, layout.width)
