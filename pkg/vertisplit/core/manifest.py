"""Manifeste de split: le contrat de reproductibilité d'un partitionnement."""

import json
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, Field, ValidationError

from vertisplit import __version__
from vertisplit.core.config import MAX_SEED, CorrelationKind, SplitMode
from vertisplit.core.errors import DatasetError

MANIFEST_FILE = "manifest.json"


class AchievedMetrics(BaseModel):
    """Icor atteint par un split par corrélation."""

    icor_achieved: float
    icor_min: float
    icor_max: float
    target: float
    optimizer_gap: float


class SourceInfo(BaseModel):
    """Dataset d'origine (chemin, dimensions, empreinte des octets lus)."""

    path: Optional[str] = None
    rows: int
    columns: int
    sha256: Optional[str] = None


class SplitManifest(BaseModel):
    version: str = Field(default=__version__, description="Version de VertiSplit")
    seed: Optional[int] = Field(default=None, ge=0, le=MAX_SEED, description="Graine du split")
    mode: Optional[SplitMode] = Field(default=None, description="None pour une partition fournie")
    params: dict[str, Any] = Field(default_factory=dict, description="α, β, tailles et options")
    corr_kind: Optional[CorrelationKind] = Field(default=None, description="Mode correlation uniquement")
    assignment: list[int] = Field(..., description="Party de chaque feature d'origine")
    achieved: Optional[AchievedMetrics] = None
    source: SourceInfo

    @property
    def num_parties(self) -> int:
        if self.mode == SplitMode.IMPORTANCE and "alphas" in self.params:
            return len(self.params["alphas"])
        if self.mode == SplitMode.CORRELATION and "counts" in self.params:
            return len(self.params["counts"])
        return max(self.assignment) + 1 if self.assignment else 0

    def to_json(self) -> str:
        """JSON déterministe: mêmes entrées, mêmes octets."""
        return json.dumps(self.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"

    def write(self, path: Path) -> Path:
        try:
            path.write_text(self.to_json(), encoding="utf-8")
        except OSError as e:
            raise DatasetError(f"Impossible d'écrire le manifeste {path}: {e}")
        return path

    @classmethod
    def read(cls, path: Path) -> "SplitManifest":
        try:
            return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise DatasetError(f"Impossible de lire le manifeste {path}: {e}")
        except ValidationError as e:
            raise DatasetError(f"Manifeste invalide {path}: {e.error_count()} erreur(s)")
