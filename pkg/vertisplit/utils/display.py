"""Utilitaires d'affichage avec Rich.

Tout l'affichage humain va sur stderr: stdout est réservé au rapport JSON.
"""

from typing import Sequence

import numpy as np
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from vertisplit.core.dataset_io import PartyPartition


console = Console(stderr=True)


def print_success(message: str) -> None:
    """Affiche un message de succès."""
    console.print(f"[green]✅ {message}[/green]")


def print_error(message: str) -> None:
    """Affiche un message d'erreur."""
    console.print(f"[red]❌ {message}[/red]")


def print_warning(message: str) -> None:
    """Affiche un message d'avertissement."""
    console.print(f"[yellow]⚠️  {message}[/yellow]")


def print_info(message: str) -> None:
    """Affiche un message d'information."""
    console.print(f"[blue]ℹ️  {message}[/blue]")


def print_failure_reason(kind: str, message: str) -> None:
    """Ligne machine-parsable `error[kind]: message`."""
    line = " ".join(str(message).split())
    console.print(f"error[{kind}]: {line}", markup=False, highlight=False, soft_wrap=True)


def format_status(passed: bool) -> str:
    return "[green]🟢 OK[/green]" if passed else "[red]🔴 ÉCHEC[/red]"


def format_value(value: float) -> str:
    """Formate un réel avec une précision lisible."""
    if value == 0:
        return "0"
    if abs(value) < 1e-3 or abs(value) >= 1e4:
        return f"{value:.3e}"
    return f"{value:.4f}"


def display_partition_table(part: PartyPartition, names: Sequence[str], max_names: int = 6) -> None:
    """Affiche la taille et les premières features de chaque party."""
    table = Table(title="🧩 Parties", show_header=True, header_style="bold cyan")
    table.add_column("Party", style="bold", width=6)
    table.add_column("Features", justify="right")
    table.add_column("Colonnes", style="dim")

    for k, members in enumerate(part.groups()):
        shown = [names[j] for j in members[:max_names]]
        if len(members) > max_names:
            shown.append(f"… (+{len(members) - max_names})")
        table.add_row(str(k), str(len(members)), escape(", ".join(shown)))

    console.print(table)


def display_pcor_table(pcor_matrix: Sequence[Sequence[float]], icor_value: float) -> None:
    """Affiche la matrice Pcor K×K (diagonale = Pcor interne)."""
    P = np.asarray(pcor_matrix)
    table = Table(title=f"🔗 Pcor entre parties (Icor = {format_value(icor_value)})", header_style="bold cyan")
    table.add_column("", style="bold")
    for k in range(P.shape[0]):
        table.add_column(f"P{k}", justify="right")

    for i in range(P.shape[0]):
        cells = []
        for j in range(P.shape[1]):
            cell = format_value(P[i, j])
            cells.append(f"[bold]{cell}[/bold]" if i == j else cell)
        table.add_row(f"P{i}", *cells)

    console.print(table)


def display_estimate_table(report: dict) -> None:
    """Affiche les valeurs de Shapley par party et les paramètres estimés."""
    table = Table(title="📊 Importance des parties", header_style="bold cyan")
    table.add_column("Party", style="bold", width=6)
    table.add_column("Shapley", justify="right")
    table.add_column("α̂", justify="right")

    shapley = report["shapley"]
    stderr = shapley.get("stderr")
    for k, (phi, alpha) in enumerate(zip(shapley["per_party"], report["alpha_vec"])):
        phi_str = format_value(phi)
        if stderr is not None:
            phi_str += f" ± {format_value(stderr[k])}"
        table.add_row(str(k), phi_str, format_value(alpha))

    console.print(table)
    console.print(
        f"  α symétrique: [cyan]{format_value(report['symmetric_alpha'])}[/cyan]"
        f"   α dispersion: [cyan]{format_value(report['dispersion_alpha'])}[/cyan]"
    )
    console.print(
        f"  β̂ = [bold green]{format_value(report['beta'])}[/bold green]"
        f"  (Icor {format_value(report['icor_real'])} dans "
        f"[{format_value(report['icor_min'])}, {format_value(report['icor_max'])}], "
        f"bornes {report['bound_mode']})",
        highlight=False,
    )


def display_check_result(result: dict) -> None:
    """Affiche une ligne par suite de validation terminée."""
    console.print(f"  {format_status(result['passed'])}  [bold]{result['name']}[/bold] [dim]({result['seconds']:.1f}s)[/dim]")


def display_checks_table(results: list[dict]) -> None:
    if not results:
        print_warning("Aucune suite exécutée.")
        return

    table = Table(title="🧪 Validation", show_header=True, header_style="bold cyan")
    table.add_column("Suite", style="bold")
    table.add_column("Statut", width=12)
    table.add_column("Durée", justify="right")

    for r in results:
        table.add_row(r["name"], format_status(r["passed"]), f"{r['seconds']:.1f}s")

    console.print(table)
