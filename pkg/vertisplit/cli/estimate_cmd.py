"""Commande estimate: α (importance) et β (corrélation) d'un split réel."""

from pathlib import Path
from typing import Optional

import typer
from rich.progress import Progress, SpinnerColumn, TextColumn

from vertisplit.cli.common import cli_errors, execute
from vertisplit.core.config import (
    BoundMode,
    BrkgaConfig,
    CorrelationKind,
    PcorOptions,
    RunConfig,
    Subcommand,
    TaskKind,
)
from vertisplit.utils.display import console, display_estimate_table


def estimate_command(
    parties: list[Path] = typer.Option(..., "--parties", "-p", help="Fichier CSV d'une party (répéter, ordre = index)"),
    labels: Optional[Path] = typer.Option(None, "--labels", "-l", help="labels.csv (sinon colonne 'label' de la party 0)"),
    task: Optional[TaskKind] = typer.Option(None, "--task", help="reg ou cls (déduit des labels si absent)"),
    budget: int = typer.Option(RunConfig.model_fields["budget"].default, "--budget", help="Permutations Monte-Carlo (K > 10)"),
    seed: int = typer.Option(0, "--seed", "-s", help="Graine"),
    bound_mode: BoundMode = typer.Option(BoundMode.BRKGA, "--bound-mode", help="Bornes Icor: brkga ou shuffle"),
    corr: CorrelationKind = typer.Option(PcorOptions.model_fields["kind"].default, "--corr", help="Type de corrélation"),
    pop: int = typer.Option(BrkgaConfig.model_fields["population_size"].default, "--pop", help="Taille de population BRKGA"),
    gens: int = typer.Option(BrkgaConfig.model_fields["max_generations"].default, "--gens", help="Générations BRKGA max"),
    threads: Optional[int] = typer.Option(None, "--threads", "-t", help="Threads max"),
):
    """📊 Estime α et β d'un split existant (Shapley + bornes Icor)."""
    with cli_errors():
        config = RunConfig(
            subcommand=Subcommand.ESTIMATE,
            inputs=list(parties),
            labels=labels,
            task=task,
            budget=budget,
            seed=seed,
            bound_mode=bound_mode,
            threads=threads,
            pcor=PcorOptions(kind=corr),
            brkga=BrkgaConfig(population_size=pop, max_generations=gens),
        )
        with Progress(
            SpinnerColumn(),
            TextColumn("[bold blue]{task.description}"),
            console=console,
            transient=True,
        ) as progress:
            progress.add_task("Estimation de α et β...", total=None)
            outcome = execute(config)

    display_estimate_table(outcome.report)
