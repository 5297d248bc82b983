"""Commande validate: harnais de propriétés sur fixtures générées."""

from typing import Optional

import typer

from vertisplit.cli.common import cli_errors, execute
from vertisplit.core.config import BrkgaConfig, RunConfig, Subcommand
from vertisplit.core.validation import SUITES, CheckResult
from vertisplit.utils.display import display_check_result, display_checks_table, print_info, print_success


def validate_command(
    suite: Optional[list[str]] = typer.Option(
        None, "--suite",
        help=f"Suite à exécuter (répéter). all, quick ou: {', '.join(SUITES)}",
    ),
    seeds: int = typer.Option(RunConfig.model_fields["seeds"].default, "--seeds", help="Graines par suite aléatoire"),
    seed: int = typer.Option(0, "--seed", "-s", help="Graine BRKGA"),
    pop: int = typer.Option(BrkgaConfig.model_fields["population_size"].default, "--pop", help="Taille de population BRKGA"),
    gens: int = typer.Option(BrkgaConfig.model_fields["max_generations"].default, "--gens", help="Générations BRKGA max"),
    threads: Optional[int] = typer.Option(None, "--threads", "-t", help="Threads max"),
):
    """🧪 Vérifie les propriétés des métriques et des splits (code 1 si échec)."""

    def _on_result(result: CheckResult) -> None:
        display_check_result(result.to_dict())

    with cli_errors():
        config = RunConfig(
            subcommand=Subcommand.VALIDATE,
            suites=suite or ["all"],
            seeds=seeds,
            seed=seed,
            threads=threads,
            brkga=BrkgaConfig(population_size=pop, max_generations=gens),
        )
        print_info(f"Suites: {', '.join(config.suites)}")
        outcome = execute(config, _on_result)

    display_checks_table(outcome.report["suites"])
    print_success("Toutes les suites passent")
