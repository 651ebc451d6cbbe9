"""
This file is part of decolab.
Copyright 2024-present decolab contributors.

decolab is free software: you can redistribute it and/or modify it under the terms of the
Affero GNU General Public License as published by the Free Software Foundation, either
version 3 of the License, or (at your option) any later version.

decolab is distributed in the hope that it will be useful, but WITHOUT ANY WARRANTY;
without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the Affero GNU General Public License for more details.

You should have received a copy of the Affero GNU General Public License along with decolab.
If not, see <https://www.gnu.org/licenses/>.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Optional

import click
import typer
from rich.console import Console
from rich.markup import escape
from typer.core import TyperGroup

from decolab._metadata import __version__
from decolab.errors import ConfigError, DecolabError, NumericalContractError
from decolab.experiments import RunOptions, Subcommand, run
from decolab.models.config import OutputFormat
from decolab.tooling import get_logger, get_runtime_settings, setup_logger

__all__ = (
    "app",
    "main",
    "EXIT_CONFIG",
    "EXIT_CONTRACT",
    "EXIT_USAGE",
)
logger = get_logger("Decolab.CLI")

EXIT_CONFIG = 2
EXIT_CONTRACT = 3
EXIT_USAGE = 64

_stderr = Console(stderr=True)


class _DecolabGroup(TyperGroup):
    """Reports every usage error (unknown subcommand included) with exit code 64."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.exit_code = EXIT_USAGE
            raise

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent, **extra)
        except click.UsageError as exc:
            exc.exit_code = EXIT_USAGE
            raise


app = typer.Typer(
    cls=_DecolabGroup,
    add_completion=False,
    no_args_is_help=True,
    help="Configuration-driven experiments on exact decoherence with momentum-limited probes.",
)

ConfigOption = Annotated[Path, typer.Option("--config", "-c", help="Experiment configuration (JSON).")]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Write the artifact here instead of stdout.")]
FormatOption = Annotated[Optional[OutputFormat], typer.Option("--format", "-f", case_sensitive=False)]
SeedOption = Annotated[
    Optional[int],
    typer.Option(
        "--seed", min=0, max=2**64 - 1, help="Provenance only: recorded in JSON reports, nothing is randomized."
    ),
]
JobsOption = Annotated[Optional[int], typer.Option("--jobs", "-j", min=1, help="Workers for sweeps.")]
NoOracleOption = Annotated[bool, typer.Option("--no-oracle", help="Skip the dense oracle in sweeps.")]
NoLogFileOption = Annotated[bool, typer.Option("--no-log-file", help="Console logging only.")]

_HELP = {
    Subcommand.THRESHOLDS: "Print the decoherence and orthogonality thresholds.",
    Subcommand.COHERENCE_SWEEP: "Sweep the system-probe coupling and tabulate coherences and pointer overlaps.",
    Subcommand.ORTHOGONALITY: "Pointer Gram matrices and projection valued measure checks.",
    Subcommand.DENSE_CHECK: "Compare the analytic reduced state against the dense oracle.",
    Subcommand.LEMMA: "Verify the vanishing transform beyond the type for the probe and the pointer.",
    Subcommand.BASELINE: "Von Neumann premeasurement and the Gaussian suppression table.",
}


def _version_callback(value: bool):
    if value:
        typer.echo(f"decolab {__version__}")
        raise typer.Exit()


@app.callback()
def _root(
    version: Annotated[
        Optional[bool], typer.Option("--version", callback=_version_callback, is_eager=True, help="Show the version.")
    ] = None,
):
    """Exact decoherence lab."""


def _execute(subcommand: Subcommand, config_path: Path, options: RunOptions, no_log_file: bool) -> None:
    settings = get_runtime_settings()
    setup_logger(None if no_log_file else settings.log_dir / "decolab.log", level=settings.log_level)
    try:
        result = run(subcommand, config_path, options)
    except ConfigError as exc:
        for message in exc.messages:
            _stderr.print(f"[red]config error[/red]: {escape(message)}")
        raise typer.Exit(EXIT_CONFIG) from exc
    except NumericalContractError as exc:
        _stderr.print(f"[red]contract violation[/red]: {escape(str(exc))}")
        raise typer.Exit(EXIT_CONTRACT) from exc
    except DecolabError as exc:
        logger.exception(f"{subcommand.value} failed")
        _stderr.print(f"[red]error[/red]: {escape(str(exc))}")
        raise typer.Exit(EXIT_CONTRACT) from exc

    if subcommand is Subcommand.THRESHOLDS:
        for line in result.summary:
            typer.echo(line)
        return
    for line in result.summary:
        _stderr.print(escape(line))
    if result.path is None:
        typer.echo(result.content, nl=False)


def _register(subcommand: Subcommand) -> None:
    def command(
        config: ConfigOption,
        out: OutOption = None,
        fmt: FormatOption = None,
        seed: SeedOption = None,
        jobs: JobsOption = None,
        no_oracle: NoOracleOption = False,
        no_log_file: NoLogFileOption = False,
    ):
        n_jobs = jobs if jobs is not None else get_runtime_settings().n_jobs
        options = RunOptions(out=out, format=fmt, seed=seed, n_jobs=n_jobs, with_oracle=not no_oracle)
        _execute(subcommand, config, options, no_log_file)

    command.__doc__ = _HELP[subcommand]
    app.command(subcommand.value)(command)


for _subcommand in Subcommand:
    _register(_subcommand)


def main() -> None:
    app(prog_name="decolab")
