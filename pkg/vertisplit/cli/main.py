"""Point d'entrée principal de la CLI VertiSplit."""

from typing import Optional

import typer
from rich.console import Console

from vertisplit import __version__

# Import des commandes
from vertisplit.cli.common import cli_errors
from vertisplit.cli.split_cmd import split_command
from vertisplit.cli.metrics_cmd import metrics_command
from vertisplit.cli.estimate_cmd import estimate_command
from vertisplit.cli.validate_cmd import validate_command
from vertisplit.core.config import load_config
from vertisplit.core.errors import ConfigError
from vertisplit.core.logs import setup_logging

console = Console(stderr=True)

app = typer.Typer(
    name="vertisplit",
    help="🧩 VertiSplit - Découpe de datasets en parties pour l'apprentissage fédéré vertical",
    no_args_is_help=True,
    rich_markup_mode="rich",
)


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Niveau de log (DEBUG, INFO, WARNING, ERROR)"),
):
    """Options globales."""
    with cli_errors():
        level = log_level or load_config().log_level
        try:
            setup_logging(level)
        except ValueError:
            raise ConfigError(f"Niveau de log inconnu: {level}")


@app.command("version")
def version():
    """Affiche la version de VertiSplit."""
    console.print(f"[bold cyan]VertiSplit[/bold cyan] version [green]{__version__}[/green]")


# Génération des splits
app.command("split")(split_command)

# Mesures sur un split existant
app.command("metrics")(metrics_command)
app.command("estimate")(estimate_command)

# Harnais de propriétés
app.command("validate")(validate_command)


if __name__ == "__main__":
    app()
