"""VertiSplit - Synthèse et évaluation de partitions verticales de features."""

__version__ = "0.1.0"
