"""Hiérarchie d'erreurs de VertiSplit et contrat de codes de sortie."""

from typing import Optional


class VertiSplitError(Exception):
    """Erreur de base. `kind` est le tag court affiché par la CLI."""

    kind = "vertisplit"
    exit_code = 2


class DatasetError(VertiSplitError):
    """Lecture/écriture ou parsing d'un dataset impossible."""

    kind = "dataset"


class PartitionError(VertiSplitError):
    """Assignation incohérente: longueur, party vide, tailles invalides."""

    kind = "partition"


class ConfigError(VertiSplitError):
    """Combinaison d'options invalide."""

    kind = "config"


class MetricError(VertiSplitError):
    """Métrique non définie pour les entrées fournies."""

    kind = "metric"


class EstimationError(VertiSplitError):
    """Estimation de α ou β impossible."""

    kind = "estimation"


class IndeterminateError(EstimationError):
    """Paysage Icor plat: β n'est pas identifiable."""

    kind = "indeterminate"


class ShapleyError(EstimationError):
    """La fonction caractéristique a échoué sur un sous-ensemble de parties."""

    kind = "shapley"

    def __init__(self, subset: frozenset[int], cause: Exception):
        self.subset = subset
        self.cause = cause
        members = ",".join(str(k) for k in sorted(subset)) or "∅"
        super().__init__(f"v({{{members}}}) a échoué: {cause}")


class ValidationFailure(VertiSplitError):
    """Au moins un harnais de validation a échoué."""

    kind = "validation"
    exit_code = 1

    def __init__(self, message: str, failed: Optional[list[str]] = None):
        super().__init__(message)
        self.failed = failed or []
