"""
csvto.cli_app
=============

Command-line interface for the csvto package.

Provides commands for:
- A single warm-start solve that writes the particle set
- One receding-horizon trial that writes its execution trace
- A multi-seed benchmark with an aggregate summary

Notes
-----
This module is the entry point for the ``csvto`` command-line tool,
powered by Typer.

Examples
--------
Solve the toy problem:

    csvto solve --problem toy2d --out results

Run one quadrotor trial:

    csvto mpc --problem quadrotor-dynamic --seed 3 --out results

Benchmark MPPI on the configured seeds:

    csvto bench --config experiment.yaml --solver mppi --out results

Functions
---------
cli_info
    Display version and platform diagnostics.
cli_solve
    Run one warm-start solve.
cli_mpc
    Run one receding-horizon trial.
cli_bench
    Run every configured seed and summarize.
"""

import logging
from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console
from rich.table import Table as RichTable

from csvto import __version__, info
from csvto.benchmarks.experiment import ExperimentResult, run_experiment, run_solve, run_trial
from csvto.configuration.loader import ConfigProvider, load_config
from csvto.core.errors import CsvtoError
from csvto.logging import LogLevel, configure_logging
from csvto.monitoring.progress import RunProgress, StepStatus

logger = logging.getLogger("csvto.cli")

app = typer.Typer(
    name="csvto",
    add_completion=False,
    no_args_is_help=True,
    help="Constrained Stein variational trajectory optimization.",
)

CONFIG_OPTION = typer.Option(None, "--config", "-c", help="Experiment configuration file (YAML or JSON)")
SEED_OPTION = typer.Option(None, "--seed", "-s", help="Run this seed only (overrides experiment.seeds)")
OUT_OPTION = typer.Option(None, "--out", "-o", help="Output directory")
PROBLEM_OPTION = typer.Option(
    None, "--problem", help="toy2d | quadrotor-none | quadrotor-static | quadrotor-dynamic"
)
SOLVER_OPTION = typer.Option(None, "--solver", help="csvto | mppi")
VERBOSE_OPTION = typer.Option(False, "--verbose", "-v", help="Enable debug logging")


def _overrides(seed: Optional[int], problem: Optional[str], solver: Optional[str]) -> List[str]:
    overrides = []
    if seed is not None:
        overrides.append(f"experiment.seeds=[{seed}]")
    if problem is not None:
        overrides.append(f"problem.name={problem}")
    if solver is not None:
        overrides.append(f"experiment.solver={solver}")
    return overrides


def _load(
    config: Optional[Path],
    seed: Optional[int],
    problem: Optional[str],
    solver: Optional[str],
    verbose: bool,
) -> ConfigProvider:
    configure_logging(LogLevel.DEBUG if verbose else LogLevel.INFO)
    try:
        return load_config(config, _overrides(seed, problem, solver))
    except CsvtoError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=2)


def _progress(run_id: str, total_steps: int) -> RunProgress:
    tracker = RunProgress(run_id, total_steps)
    tracker.add_callback(_log_progress)
    return tracker


def _log_progress(tracker: RunProgress) -> None:
    if not tracker.steps or tracker.end_time is not None:
        return
    latest = tracker.steps[max(tracker.steps)]
    if latest.status == StepStatus.COMPLETED and latest.step % 10 == 0:
        logger.info(tracker.summary())


def _print_summary(result: ExperimentResult) -> None:
    summary = result.summary
    console = Console()
    table = RichTable(title=f"{summary['problem']} / {summary['solver']}")
    if "success_rate" in summary:
        names = sorted(summary["violations"])
        for column in ["seed", "status", "success", "distance", "collision"] + [f"{n} (mean)" for n in names]:
            table.add_column(column)
        for trial in summary["trials"]:
            table.add_row(
                str(trial["seed"]),
                trial["status"],
                "yes" if trial["success"] else "no",
                f"{trial['final_distance']:.3f}",
                "yes" if trial["collision"] else "no",
                *[f"{trial['violations'][n]['mean']:.2e}" for n in names],
            )
        console.print(table)
        console.print(f"success rate: {summary['success_rate']:.0%}")
    else:
        for column in ["seed", "best", "max |h|", "max g+"]:
            table.add_column(column)
        for trial in summary["trials"]:
            table.add_row(
                str(trial["seed"]),
                str(trial["best_index"]),
                f"{trial['max_equality_violation']:.2e}",
                f"{trial['max_inequality_violation']:.2e}",
            )
        console.print(table)


@app.command("info")
def cli_info() -> None:
    """Display version and platform diagnostics."""
    typer.echo(info())


@app.command("solve")
def cli_solve(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    problem: Optional[str] = PROBLEM_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Run one warm-start solve and write ``particles.csv``.

    Examples
    --------
    ::

        csvto solve --problem toy2d --seed 0 --out results
    """
    provider = _load(config, seed, problem, None, verbose)
    trial_seed = provider.get("experiment.seeds")[0]
    try:
        _, metrics = run_solve(provider, trial_seed, out)
    except CsvtoError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=1)
    typer.echo(
        f"best particle {metrics.best_index}: penalty {metrics.best_penalty:.6g}, "
        f"max |h| {metrics.max_equality_violation:.3e}, max g+ {metrics.max_inequality_violation:.3e}"
    )


@app.command("mpc")
def cli_mpc(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    problem: Optional[str] = PROBLEM_OPTION,
    solver: Optional[str] = SOLVER_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Run one receding-horizon trial and write ``trace.csv``.

    Exits with code 1 when the solver or the environment fails.

    Examples
    --------
    ::

        csvto mpc --problem quadrotor-none --seed 0 --out results
    """
    provider = _load(config, seed, problem, solver, verbose)
    trial_seed = provider.get("experiment.seeds")[0]
    run_id = f"{provider.get('problem.name')}/{provider.get('experiment.solver')}/seed_{trial_seed}"
    try:
        metrics = run_trial(provider, trial_seed, out, _progress(run_id, provider.get("experiment.steps")))
    except CsvtoError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=1)
    typer.echo(
        f"{metrics.status}: success={metrics.success} distance={metrics.final_distance:.3f} "
        f"collision={metrics.collision}"
    )
    if metrics.status != "completed":
        raise typer.Exit(code=1)


@app.command("bench")
def cli_bench(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    problem: Optional[str] = PROBLEM_OPTION,
    solver: Optional[str] = SOLVER_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Run every configured seed and write ``summary.json``.

    Examples
    --------
    ::

        csvto bench --config experiment.yaml --out results
    """
    provider = _load(config, seed, problem, solver, verbose)
    try:
        result = run_experiment(provider, out, _progress)
    except CsvtoError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=1)
    _print_summary(result)
    if result.failed:
        raise typer.Exit(code=1)


@app.callback()
def main_callback(
    version: bool = typer.Option(
        False,
        "--version",
        "-V",
        help="Show the package version and exit.",
    ),
) -> None:
    """
    Constrained Stein variational trajectory optimization.

    Parameters
    ----------
    version : bool
        Show the package version and exit.
    """
    if version:
        typer.echo(f"csvto {__version__}")
        raise typer.Exit()


if __name__ == "__main__":
    app()
