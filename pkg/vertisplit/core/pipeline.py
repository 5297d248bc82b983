"""Exécution d'une RunConfig: split, metrics, estimate, validate.

Chaque sous-commande produit un rapport JSON-sérialisable; les artefacts
(fichiers de parties, manifeste) sont écrits sur disque par `split`.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from vertisplit.core.config import DataFormat, DirichletSpec, RunConfig, SplitMode, Subcommand
from vertisplit.core.corr_metrics import (
    CorrelationMatrix,
    check_icor_partition,
    icor_from_pcor_matrix,
    party_pcor_matrix,
)
from vertisplit.core.dataset_io import (
    GlobalDataset,
    ImageLayout,
    PartyPartition,
    flatten_image_split,
    load_csv,
    load_libsvm,
    load_party_files,
    materialize_parties,
)
from vertisplit.core.errors import ConfigError, DatasetError
from vertisplit.core.manifest import AchievedMetrics, SplitManifest
from vertisplit.core.party_eval import beta_bounds, estimate_alpha, party_shapley
from vertisplit.core.split_correlation import default_counts, split_by_correlation
from vertisplit.core.split_importance import split_by_importance
from vertisplit.core.validation import CheckResult, run_suites

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    report: dict
    exit_code: int = 0
    failed: list[str] = field(default_factory=list)
    partition: Optional[PartyPartition] = None
    column_names: list[str] = field(default_factory=list)


def load_dataset(config: RunConfig) -> GlobalDataset:
    if len(config.inputs) != 1:
        raise ConfigError(f"Un seul fichier d'entrée attendu, reçu {len(config.inputs)}")
    path = config.inputs[0]
    if config.format == DataFormat.LIBSVM:
        return load_libsvm(path)
    return load_csv(path, label_column=config.label_column, header=config.header)


def _write_images(ds: GlobalDataset, part: PartyPartition, layout: ImageLayout, out_dir: Path) -> None:
    for k in range(part.num_parties):
        path = out_dir / f"party{k}_images.npy"
        try:
            np.save(path, flatten_image_split(ds, part, layout, k))
        except OSError as e:
            raise DatasetError(f"Écriture impossible de {path}: {e}")


def run_split(config: RunConfig) -> RunOutcome:
    if config.output_dir is None:
        raise ConfigError("--output est requis pour split")
    ds = load_dataset(config)

    layout = None
    if config.image:
        layout = ImageLayout.parse(config.image, config.background)
        if layout.size != ds.m:
            raise DatasetError(f"Layout {config.image} ({layout.size} pixels) incompatible avec m = {ds.m}")

    if config.mode == SplitMode.IMPORTANCE:
        spec = DirichletSpec(alphas=config.alphas, guard_nonempty=config.guard_nonempty, seed=config.seed)
        part = split_by_importance(ds, spec)
        manifest = SplitManifest(
            seed=config.seed,
            mode=SplitMode.IMPORTANCE,
            params={"alphas": list(spec.alphas), "guard_nonempty": spec.guard_nonempty},
            assignment=part.assignment.tolist(),
            source=ds.source_info(),
        )
    else:
        counts = config.counts or default_counts(ds.m, config.parties or 2)
        cfg = config.brkga.model_copy(update={"seed": config.seed})
        result = split_by_correlation(ds, config.beta, counts, cfg, config.pcor, threads=config.threads)
        part = result.partition
        manifest = SplitManifest(
            seed=config.seed,
            mode=SplitMode.CORRELATION,
            params={
                "beta": config.beta,
                "counts": list(counts),
                "brkga": cfg.model_dump(mode="json", exclude={"seed"}),
                "exact_dim_threshold": config.pcor.exact_dim_threshold,
                "truncate_rank": config.pcor.truncate_rank,
            },
            corr_kind=config.pcor.kind,
            assignment=part.assignment.tolist(),
            achieved=AchievedMetrics(
                icor_achieved=result.icor_achieved,
                icor_min=result.icor_min,
                icor_max=result.icor_max,
                target=result.icor_target,
                optimizer_gap=result.gap,
            ),
            source=ds.source_info(),
        )

    materialize_parties(ds, part, config.output_dir, manifest)
    if layout is not None:
        _write_images(ds, part, layout, config.output_dir)
    return RunOutcome(report=manifest.model_dump(mode="json"), partition=part, column_names=ds.names)


def run_metrics(config: RunConfig) -> RunOutcome:
    if config.manifest is not None:
        ds = load_dataset(config)
        manifest = SplitManifest.read(config.manifest)
        part = PartyPartition(assignment=manifest.assignment, num_parties=manifest.num_parties)
    else:
        ds, part = load_party_files(config.inputs)

    opts = config.pcor
    check_icor_partition(part, ds.m)
    corr = CorrelationMatrix.from_dataset(ds, opts.kind)
    P = party_pcor_matrix(corr, part, opts, config.threads)
    report = {
        "pcor_matrix": P.tolist(),
        "inner_pcor": np.diag(P).tolist(),
        "icor": icor_from_pcor_matrix(P),
        "options": opts.model_dump(mode="json"),
    }
    return RunOutcome(report=report, partition=part, column_names=ds.names)


def run_estimate(config: RunConfig) -> RunOutcome:
    ds, part = load_party_files(config.inputs, config.labels)
    shapley = party_shapley(ds, part, budget=config.budget, seed=config.seed, task=config.task, threads=config.threads)
    alpha = estimate_alpha(shapley)
    cfg = config.brkga.model_copy(update={"seed": config.seed})
    beta = beta_bounds(ds, part, cfg, config.pcor, mode=config.bound_mode, threads=config.threads)
    report = {
        "alpha_vec": alpha.alpha_vec.tolist(),
        "symmetric_alpha": alpha.symmetric_alpha,
        "dispersion_alpha": alpha.dispersion_alpha,
        "beta": beta.beta,
        "icor_real": beta.icor_real,
        "icor_min": beta.icor_min,
        "icor_max": beta.icor_max,
        "bound_mode": beta.bound_mode.value,
        "shapley": shapley.to_dict(),
    }
    return RunOutcome(report=report, partition=part, column_names=ds.names)


def run_validate(config: RunConfig, on_result: Optional[Callable[[CheckResult], None]] = None) -> RunOutcome:
    cfg = config.brkga.model_copy(update={"seed": config.seed})
    results = run_suites(config.suites, seeds=config.seeds, threads=config.threads, cfg=cfg, on_result=on_result)
    failed = [r.name for r in results if not r.passed]
    report = {"passed": not failed, "suites": [r.to_dict() for r in results]}
    return RunOutcome(report=report, exit_code=1 if failed else 0, failed=failed)


def run(config: RunConfig, on_result: Optional[Callable[[CheckResult], None]] = None) -> RunOutcome:
    """Exécute la sous-commande décrite par `config`."""
    logger.debug(f"run {config.subcommand.value}: {config.model_dump(mode='json', exclude_defaults=True)}")
    if config.subcommand == Subcommand.SPLIT:
        return run_split(config)
    if config.subcommand == Subcommand.METRICS:
        return run_metrics(config)
    if config.subcommand == Subcommand.ESTIMATE:
        return run_estimate(config)
    return run_validate(config, on_result)
