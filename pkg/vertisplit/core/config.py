"""Configuration management for VertiSplit.

Modèles d'options (pydantic) partagés par les modules et la CLI, plus le
fichier de configuration utilisateur optionnel ~/.vertisplit/config.yaml.
"""

import os
from enum import Enum
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from vertisplit.core.errors import ConfigError

MAX_SEED = 2**64 - 1


class CorrelationKind(str, Enum):
    """Type de corrélation colonne à colonne."""

    SPEARMAN = "spearman"
    PEARSON = "pearson"


class SplitMode(str, Enum):
    IMPORTANCE = "importance"
    CORRELATION = "correlation"


class Subcommand(str, Enum):
    SPLIT = "split"
    METRICS = "metrics"
    ESTIMATE = "estimate"
    VALIDATE = "validate"


class DataFormat(str, Enum):
    CSV = "csv"
    LIBSVM = "libsvm"


class TaskKind(str, Enum):
    REGRESSION = "reg"
    CLASSIFICATION = "cls"


class BoundMode(str, Enum):
    """Recherche des bornes Icor pour l'estimation de β."""

    BRKGA = "brkga"
    SHUFFLE = "shuffle"


class PcorOptions(BaseModel):
    """Options de calcul de Pcor (type de corrélation, SVD exacte ou tronquée)."""

    model_config = ConfigDict(frozen=True)

    kind: CorrelationKind = Field(default=CorrelationKind.SPEARMAN, description="Type de corrélation")
    exact_dim_threshold: int = Field(default=100, ge=1, description="SVD exacte si min(p, q) ≤ seuil")
    truncate_rank: int = Field(default=400, ge=1, description="Nombre de valeurs singulières calculées (d_t)")


class BrkgaConfig(BaseModel):
    """Paramètres de l'algorithme génétique à clés aléatoires biaisées."""

    model_config = ConfigDict(frozen=True)

    population_size: int = Field(default=100, ge=2, description="Taille de la population")
    elite_fraction: float = Field(default=0.2, gt=0.0, lt=1.0, description="Part d'élites conservées")
    mutant_fraction: float = Field(default=0.15, ge=0.0, lt=1.0, description="Part de mutants injectés")
    elite_inherit_bias: float = Field(default=0.7, ge=0.5, le=1.0, description="Probabilité d'hériter la clé de l'élite (ρ)")
    max_generations: int = Field(default=200, ge=1, description="Nombre maximal de générations")
    stall_generations: int = Field(default=30, ge=1, description="Arrêt après N générations sans amélioration")
    target_tolerance: float = Field(default=1e-3, ge=0.0, description="Écart |f - f*| accepté pour la cible")
    local_search_passes: int = Field(default=10, ge=0, description="Passes de recherche locale par échanges")
    local_search_starts: int = Field(default=4, ge=1, description="Élites distinctes reprises par la recherche locale")
    local_search_max_evals: int = Field(default=5000, ge=0, description="Évaluations max de la recherche locale")
    seed: int = Field(default=0, ge=0, le=MAX_SEED, description="Graine")

    @property
    def num_elites(self) -> int:
        return max(1, round(self.population_size * self.elite_fraction))

    @property
    def num_mutants(self) -> int:
        return round(self.population_size * self.mutant_fraction)

    @property
    def num_offspring(self) -> int:
        return self.population_size - self.num_elites - self.num_mutants

    @model_validator(mode="after")
    def _check_fractions(self) -> "BrkgaConfig":
        if self.elite_fraction + self.mutant_fraction >= 1.0:
            raise ValueError("elite_fraction + mutant_fraction doit être < 1")
        if self.num_offspring < 1:
            raise ValueError("la population ne laisse aucune place aux descendants")
        return self


class DirichletSpec(BaseModel):
    """Paramètres du split par importance (Dirichlet)."""

    model_config = ConfigDict(frozen=True)

    alphas: list[float] = Field(..., min_length=1, description="Concentrations α_1..α_K")
    guard_nonempty: bool = Field(default=True, description="Chaque party reçoit au moins une feature")
    seed: int = Field(default=0, ge=0, le=MAX_SEED, description="Graine")

    @field_validator("alphas")
    @classmethod
    def _positive(cls, alphas: list[float]) -> list[float]:
        for i, a in enumerate(alphas):
            if not a > 0 or a == float("inf"):
                raise ValueError(f"α_{i} = {a} doit être un réel strictement positif")
        return alphas

    @property
    def num_parties(self) -> int:
        return len(self.alphas)

    @classmethod
    def symmetric(cls, alpha: float, num_parties: int, **kwargs) -> "DirichletSpec":
        return cls(alphas=[alpha] * num_parties, **kwargs)


class RunConfig(BaseModel):
    """Configuration complète d'une invocation de la CLI."""

    subcommand: Subcommand
    inputs: list[Path] = Field(default_factory=list, description="Fichier(s) d'entrée")
    output_dir: Optional[Path] = Field(default=None, description="Répertoire de sortie")
    format: DataFormat = Field(default=DataFormat.CSV, description="Format d'entrée")
    label_column: Optional[str] = Field(default=None, description="Colonne de labels (nom ou index)")
    header: Optional[bool] = Field(default=None, description="Ligne d'en-tête (None = détection)")
    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    threads: Optional[int] = Field(default=None, ge=1)

    # split
    mode: Optional[SplitMode] = None
    parties: Optional[int] = Field(default=None, ge=1)
    alphas: Optional[list[float]] = None
    beta: Optional[float] = None
    counts: Optional[list[int]] = None
    guard_nonempty: bool = True
    image: Optional[str] = Field(default=None, description="Layout image HxWxC")
    background: float = 0.0

    # metrics / estimate
    manifest: Optional[Path] = None
    labels: Optional[Path] = None
    task: Optional[TaskKind] = None
    budget: int = Field(default=256, ge=2, description="Permutations Monte-Carlo (Shapley)")
    bound_mode: BoundMode = BoundMode.BRKGA

    # validate
    suites: list[str] = Field(default_factory=lambda: ["all"])
    seeds: int = Field(default=3, ge=1)

    pcor: PcorOptions = Field(default_factory=PcorOptions)
    brkga: BrkgaConfig = Field(default_factory=BrkgaConfig)

    @model_validator(mode="after")
    def _check_mode_flags(self) -> "RunConfig":
        if self.subcommand != Subcommand.SPLIT:
            return self
        if self.mode is None:
            raise ValueError("--mode est requis pour split")
        if self.mode == SplitMode.IMPORTANCE:
            if self.beta is not None or self.counts is not None:
                raise ValueError("--beta/--counts sont réservés au mode correlation")
            if self.alphas is None:
                raise ValueError("le mode importance requiert --alpha ou --alpha-vec")
            if self.parties is not None and len(self.alphas) != self.parties:
                raise ValueError(f"{len(self.alphas)} valeurs α pour {self.parties} parties")
        else:
            if self.alphas is not None:
                raise ValueError("--alpha/--alpha-vec sont réservés au mode importance")
            if self.beta is None:
                raise ValueError("le mode correlation requiert --beta")
            if not 0.0 <= self.beta <= 1.0:
                raise ValueError(f"β = {self.beta} hors de [0, 1]")
            if self.counts is not None and self.parties is not None and len(self.counts) != self.parties:
                raise ValueError(f"{len(self.counts)} tailles pour {self.parties} parties")
        return self


class AppConfig(BaseModel):
    """Configuration globale de l'application."""

    threads: Optional[int] = Field(default=None, ge=1, description="Nombre de threads par défaut")
    log_level: str = Field(default="WARNING", description="Niveau de log par défaut")


CONFIG_DIR = Path.home() / ".vertisplit"
CONFIG_FILE = CONFIG_DIR / "config.yaml"

CONFIG_ENV = "VERTISPLIT_CONFIG"
THREADS_ENV = "VERTISPLIT_THREADS"

# In-memory config cache to avoid repeated YAML reads within a command
_config_cache: Optional[AppConfig] = None


def _clear_config_cache() -> None:
    """Clear the in-memory config cache, forcing next load_config() to read from disk."""
    global _config_cache
    _config_cache = None


def config_path() -> Path:
    override = os.environ.get(CONFIG_ENV)
    return Path(override).expanduser() if override else CONFIG_FILE


def load_config() -> AppConfig:
    """Charge la configuration depuis le fichier YAML (valeurs par défaut si absent).

    Uses an in-memory cache to avoid repeated disk reads within a command.
    """
    global _config_cache
    if _config_cache is not None:
        return _config_cache

    path = config_path()
    if not path.exists():
        _config_cache = AppConfig()
        return _config_cache

    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
        _config_cache = AppConfig(**(data or {}))
        return _config_cache
    except Exception as e:
        raise ConfigError(f"Erreur lors du chargement de la configuration {path}: {e}")


def default_threads() -> int:
    """Threads par défaut: VERTISPLIT_THREADS, puis le fichier de config, puis min(4, CPU)."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}={env!r} n'est pas un entier")
        if value < 1:
            raise ConfigError(f"{THREADS_ENV} doit être ≥ 1")
        return value

    configured = load_config().threads
    if configured is not None:
        return configured
    return min(4, os.cpu_count() or 1)
