"""Plomberie partagée par les commandes: erreurs → codes de sortie, rapport JSON."""

import json
from contextlib import contextmanager
from typing import Iterator, Optional

import typer
from pydantic import ValidationError

from vertisplit.core.config import RunConfig
from vertisplit.core.errors import ValidationFailure, VertiSplitError
from vertisplit.core.pipeline import RunOutcome, run
from vertisplit.utils.display import print_failure_reason


def _pydantic_message(error: ValidationError) -> str:
    parts = []
    for err in error.errors():
        loc = ".".join(str(p) for p in err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        parts.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(parts)


@contextmanager
def cli_errors() -> Iterator[None]:
    """Convertit les erreurs du domaine en `error[kind]: ...` + code de sortie.

    1 = validation échouée, 2 = erreur d'entrée/sortie, de parsing ou d'options.
    """
    try:
        yield
    except ValidationFailure as e:
        print_failure_reason(e.kind, str(e))
        raise typer.Exit(1)
    except VertiSplitError as e:
        print_failure_reason(e.kind, str(e))
        raise typer.Exit(e.exit_code)
    except ValidationError as e:
        print_failure_reason("config", _pydantic_message(e))
        raise typer.Exit(2)
    except OSError as e:
        print_failure_reason("io", str(e))
        raise typer.Exit(2)


def emit_json(report: dict) -> None:
    """Écrit le rapport sur stdout (seule sortie stdout de la CLI)."""
    typer.echo(json.dumps(report, indent=2, ensure_ascii=False))


def parse_float_list(value: Optional[str], option: str) -> Optional[list[float]]:
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise typer.BadParameter(f"{option} attend une liste de réels séparés par des virgules: {value!r}")


def parse_int_list(value: Optional[str], option: str) -> Optional[list[int]]:
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise typer.BadParameter(f"{option} attend une liste d'entiers séparés par des virgules: {value!r}")


def execute(config: RunConfig, on_result=None) -> RunOutcome:
    """Exécute la config, émet le JSON et lève ValidationFailure si des suites ont échoué."""
    outcome = run(config, on_result)
    emit_json(outcome.report)
    if outcome.exit_code == 1:
        raise ValidationFailure(f"{len(outcome.failed)} suite(s) en échec: {', '.join(outcome.failed)}", outcome.failed)
    return outcome
