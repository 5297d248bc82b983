"""Commande metrics: Pcor entre parties et Icor d'un split existant."""

from pathlib import Path
from typing import Optional

import typer

from vertisplit.cli.common import cli_errors, execute
from vertisplit.core.config import CorrelationKind, DataFormat, PcorOptions, RunConfig, Subcommand
from vertisplit.core.errors import ConfigError
from vertisplit.utils.display import display_pcor_table


def metrics_command(
    parties: Optional[list[Path]] = typer.Option(None, "--parties", "-p", help="Fichier CSV d'une party (répéter, ordre = index)"),
    input_path: Optional[Path] = typer.Option(None, "--input", "-i", help="Dataset global (avec --manifest)"),
    manifest: Optional[Path] = typer.Option(None, "--manifest", help="manifest.json produit par split"),
    data_format: DataFormat = typer.Option(DataFormat.CSV, "--format", "-f", help="Format du dataset global"),
    label_column: Optional[str] = typer.Option(None, "--label-column", help="Colonne de labels du dataset global"),
    header: Optional[bool] = typer.Option(None, "--header/--no-header", help="Ligne d'en-tête (détectée si absent)"),
    corr: CorrelationKind = typer.Option(PcorOptions.model_fields["kind"].default, "--corr", help="Type de corrélation"),
    exact_dim_threshold: int = typer.Option(
        PcorOptions.model_fields["exact_dim_threshold"].default, "--exact-dim-threshold",
        help="SVD exacte si la plus petite dimension ≤ seuil",
    ),
    truncate_rank: int = typer.Option(
        PcorOptions.model_fields["truncate_rank"].default, "--truncate-rank",
        help="Valeurs singulières calculées au-delà du seuil (d_t)",
    ),
    threads: Optional[int] = typer.Option(None, "--threads", "-t", help="Threads max"),
):
    """🔗 Calcule la matrice Pcor et l'Icor d'un split."""
    with cli_errors():
        if manifest is not None:
            if parties:
                raise ConfigError("--parties et --manifest sont mutuellement exclusifs")
            if input_path is None:
                raise ConfigError("--manifest requiert --input (dataset global)")
            inputs = [input_path]
        else:
            if not parties:
                raise ConfigError("Fournir --parties (fichiers de parties) ou --input + --manifest")
            inputs = list(parties)

        config = RunConfig(
            subcommand=Subcommand.METRICS,
            inputs=inputs,
            manifest=manifest,
            format=data_format,
            label_column=label_column,
            header=header,
            threads=threads,
            pcor=PcorOptions(kind=corr, exact_dim_threshold=exact_dim_threshold, truncate_rank=truncate_rank),
        )
        outcome = execute(config)

    display_pcor_table(outcome.report["pcor_matrix"], outcome.report["icor"])
