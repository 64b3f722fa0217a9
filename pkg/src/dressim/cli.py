"""Command-line entry point.

Exit codes: 0 ok, 1 replay divergence, 2 I/O or config error.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import __version__
from .harness import replay_golden, run_batch
from .scenario import ScenarioError, load_plan
from .telemetry import export_summary_csv, import_jsonl, summarize

DEFAULT_OUT_ENV = "DRESSIM_OUT"


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Robot-assisted dressing simulator and hazard-control trial runner."""


@main.command()
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Override the seed of every repetition.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help=f"Artifact directory (default ${DEFAULT_OUT_ENV} or ./out).")
@click.option("--dialect", type=click.Choice(["human", "auto"]), default=None)
def run(plan_path: str, seed: int | None, out_dir: str | None, dialect: str | None) -> None:
    """Run every trial of a plan and write logs, text renders, and a summary."""
    from dataclasses import replace

    try:
        plan = load_plan(plan_path)
        if seed is not None:
            plan = replace(plan, seeds=tuple(seed + i for i in range(plan.repetitions)))
        if dialect is not None:
            plan = replace(plan, dialect=dialect)
        out = Path(out_dir or os.environ.get(DEFAULT_OUT_ENV, "out"))
        merged, results = run_batch(plan, out)
    except (ScenarioError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for i, res in enumerate(results):
        click.echo(f"trial {i}: {res.status}, {len(res.log.events)} events")
    click.echo(
        f"batch: trials={merged.trials} snags={merged.snags} "
        f"potential={merged.potential_snags} escalated={merged.escalated_snags} "
        f"resolved={merged.resolved} aborts={merged.aborts}"
    )
    click.echo(f"artifacts in {out}")


@main.command("replay-golden")
@click.option("--dt", type=float, default=None, help="Override the tick length.")
@click.option("--timeout", type=float, default=None, help="Override the recovery timeout.")
def replay_golden_cmd(dt: float | None, timeout: float | None) -> None:
    """Re-run the bundled autonomous trace and verify order and durations."""
    try:
        verdict = replay_golden(dt=dt, timeout=timeout)
    except (ScenarioError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(("PASS: " if verdict.passed else "FAIL: ") + verdict.message)
    if not verdict.passed:
        sys.exit(1)


@main.command("summarize")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--csv", "as_csv", is_flag=True, help="Emit CSV instead of a one-line summary.")
def summarize_cmd(in_dir: str, as_csv: bool) -> None:
    """Summarize every .jsonl trial log in a directory."""
    paths = sorted(Path(in_dir).glob("*.jsonl"))
    if not paths:
        click.echo(f"error: no .jsonl logs in {in_dir}", err=True)
        sys.exit(2)
    try:
        logs = [import_jsonl(p.read_bytes()) for p in paths]
        summary = summarize(logs)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if as_csv:
        click.echo(export_summary_csv(summary).decode(), nl=False)
    else:
        click.echo(
            f"trials={summary.trials} snags={summary.snags} "
            f"potential={summary.potential_snags} escalated={summary.escalated_snags} "
            f"resolved={summary.resolved} aborts={summary.aborts} attempts={summary.attempts}"
        )


@main.command()
@click.option("--port", type=int, default=8732)
@click.option("--host", default="127.0.0.1")
def serve(port: int, host: str) -> None:
    """Start the live-session bridge service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
