"""Commande split: découpe verticale d'un dataset global en parties."""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console

from vertisplit.cli.common import cli_errors, execute, parse_float_list, parse_int_list
from vertisplit.core.config import (
    BrkgaConfig,
    CorrelationKind,
    DataFormat,
    PcorOptions,
    RunConfig,
    SplitMode,
    Subcommand,
)
from vertisplit.core.errors import ConfigError
from vertisplit.utils.display import display_partition_table, print_success

console = Console(stderr=True)


def _default(model, name: str):
    return model.model_fields[name].default


def _resolve_alphas(alpha: Optional[float], alpha_vec: Optional[str], parties: Optional[int]) -> Optional[list[float]]:
    """--alpha (symétrique, requiert --parties) ou --alpha-vec (une valeur par party)."""
    if alpha is not None and alpha_vec is not None:
        raise ConfigError("--alpha et --alpha-vec sont mutuellement exclusifs")
    if alpha is not None:
        if parties is None:
            raise ConfigError("--alpha requiert --parties")
        return [alpha] * parties
    return parse_float_list(alpha_vec, "--alpha-vec")


def split_command(
    input_path: Path = typer.Option(..., "--input", "-i", help="Dataset global (CSV ou libsvm)"),
    output: Path = typer.Option(..., "--output", "-o", help="Répertoire des fichiers de parties"),
    mode: SplitMode = typer.Option(..., "--mode", "-m", help="importance (Dirichlet) ou correlation (BRKGA)"),
    parties: Optional[int] = typer.Option(None, "--parties", "-k", help="Nombre de parties K (2 par défaut en mode correlation)"),
    alpha: Optional[float] = typer.Option(None, "--alpha", help="α symétrique (répété K fois)"),
    alpha_vec: Optional[str] = typer.Option(None, "--alpha-vec", help="α_1,…,α_K séparés par des virgules"),
    beta: Optional[float] = typer.Option(None, "--beta", help="Niveau de corrélation β ∈ [0, 1]"),
    counts: Optional[str] = typer.Option(None, "--counts", help="Tailles des parties m_1,…,m_K (égales par défaut)"),
    corr: CorrelationKind = typer.Option(_default(PcorOptions, "kind"), "--corr", help="Type de corrélation"),
    seed: int = typer.Option(0, "--seed", "-s", help="Graine (enregistrée dans le manifeste)"),
    data_format: DataFormat = typer.Option(DataFormat.CSV, "--format", "-f", help="Format d'entrée"),
    label_column: Optional[str] = typer.Option(None, "--label-column", help="Colonne de labels (nom ou index) du CSV"),
    header: Optional[bool] = typer.Option(None, "--header/--no-header", help="Ligne d'en-tête (détectée si absent)"),
    pop: int = typer.Option(_default(BrkgaConfig, "population_size"), "--pop", help="Taille de population BRKGA"),
    gens: int = typer.Option(_default(BrkgaConfig, "max_generations"), "--gens", help="Générations BRKGA max"),
    image: Optional[str] = typer.Option(None, "--image", help="Layout image HxWxC: écrit aussi party{k}_images.npy"),
    background: float = typer.Option(0.0, "--background", help="Valeur des pixels hors party"),
    threads: Optional[int] = typer.Option(None, "--threads", "-t", help="Threads max (VERTISPLIT_THREADS sinon)"),
    no_guard: bool = typer.Option(False, "--no-guard", help="Autorise des parties vides (mode importance)"),
    exact_dim_threshold: int = typer.Option(
        _default(PcorOptions, "exact_dim_threshold"), "--exact-dim-threshold",
        help="SVD exacte si la plus petite dimension ≤ seuil",
    ),
    truncate_rank: int = typer.Option(
        _default(PcorOptions, "truncate_rank"), "--truncate-rank",
        help="Valeurs singulières calculées au-delà du seuil (d_t)",
    ),
):
    """✂️  Découpe les features d'un dataset en K parties (importance ou corrélation)."""
    with cli_errors():
        config = RunConfig(
            subcommand=Subcommand.SPLIT,
            inputs=[input_path],
            output_dir=output,
            format=data_format,
            label_column=label_column,
            header=header,
            seed=seed,
            threads=threads,
            mode=mode,
            parties=parties,
            alphas=_resolve_alphas(alpha, alpha_vec, parties),
            beta=beta,
            counts=parse_int_list(counts, "--counts"),
            guard_nonempty=not no_guard,
            image=image,
            background=background,
            pcor=PcorOptions(kind=corr, exact_dim_threshold=exact_dim_threshold, truncate_rank=truncate_rank),
            brkga=BrkgaConfig(population_size=pop, max_generations=gens),
        )
        outcome = execute(config)

    display_partition_table(outcome.partition, outcome.column_names)
    achieved = outcome.report.get("achieved")
    if achieved:
        console.print(
            f"  Icor atteint [cyan]{achieved['icor_achieved']:.4f}[/cyan] "
            f"(cible {achieved['target']:.4f}, écart {achieved['optimizer_gap']:.2e})",
            highlight=False,
        )
    print_success(f"{outcome.partition.num_parties} parties écrites dans {output}")
