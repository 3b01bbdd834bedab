"""Command-line interface.

Subcommands compose the pipeline stages over a shared run configuration:
build-taxonomy, ingest, mine, analyze, evaluate and report. Exit codes:
0 success, 1 error, 2 completed with pending-curation warnings.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .config import ConfigError, build_config
from .runs import (EXIT_ERROR, RunResult, analyze_run, build_taxonomy_run,
                   evaluate_disambig_run, evaluate_sentiment_run, ingest_run,
                   mine_run)


def _parse_overrides(pairs: tuple[str, ...]) -> dict[str, str]:
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


@click.group()
@click.option("--config", "config_path", type=click.Path(path_type=Path),
              help="Run configuration file (key = value lines).")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override a configuration key; repeatable.")
@click.option("--deterministic", is_flag=True,
              help="Suppress timestamps so identical inputs give identical bytes.")
@click.option("--verbose", is_flag=True, help="Verbose logging.")
@click.pass_context
def main(ctx: click.Context, config_path: Path | None, overrides: tuple[str, ...],
         deterministic: bool, verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        ctx.obj = build_config(config_path, _parse_overrides(overrides),
                               deterministic=deterministic)
    except (ConfigError, OSError) as err:
        click.echo(f"error: {err}", err=True)
        ctx.exit(EXIT_ERROR)


def _finish(result: RunResult) -> None:
    click.echo(json.dumps(result.summary, indent=2, sort_keys=True, default=str))
    for path in result.outputs:
        click.echo(f"wrote {path}", err=True)
    sys.exit(result.exit_code)


def _run(ctx: click.Context, fn, *args) -> None:
    try:
        _finish(fn(ctx.obj, *args))
    except Exception as err:  # pipeline errors map to exit code 1 with a message
        if isinstance(err, SystemExit):
            raise
        click.echo(f"error: {err}", err=True)
        sys.exit(EXIT_ERROR)


@main.command("build-taxonomy")
@click.pass_context
def cmd_build_taxonomy(ctx: click.Context) -> None:
    """Expand the SOC taxonomy against WordNet and map SOC major groups."""
    _run(ctx, build_taxonomy_run)


@main.command("ingest")
@click.pass_context
def cmd_ingest(ctx: click.Context) -> None:
    """Parse subtitles and metadata into the corpus snapshot."""
    _run(ctx, ingest_run)


@main.command("mine")
@click.pass_context
def cmd_mine(ctx: click.Context) -> None:
    """Search, prune and sentiment-tag job-title mentions."""
    _run(ctx, mine_run)


@main.command("analyze")
@click.pass_context
def cmd_analyze(ctx: click.Context) -> None:
    """Compute frequency/sentiment series, trends, GLM and employment reports."""
    _run(ctx, analyze_run)


@main.command("evaluate")
@click.option("--kind", type=click.Choice(["disambig", "sentiment"]), required=True)
@click.option("--labeled", type=click.Path(exists=True, path_type=Path),
              help="Labeled mentions TSV (disambig harness).")
@click.option("--dataset", type=click.Path(exists=True, path_type=Path),
              help="Sentiment dataset TSV.")
@click.option("--split", default="test", show_default=True)
@click.pass_context
def cmd_evaluate(ctx: click.Context, kind: str, labeled: Path | None,
                 dataset: Path | None, split: str) -> None:
    """Run the WSD/sentiment evaluation harnesses."""
    if kind == "disambig":
        if labeled is None:
            click.echo("error: --labeled is required for --kind disambig", err=True)
            sys.exit(EXIT_ERROR)
        _run(ctx, evaluate_disambig_run, labeled)
    else:
        if dataset is None:
            click.echo("error: --dataset is required for --kind sentiment", err=True)
            sys.exit(EXIT_ERROR)
        _run(ctx, evaluate_sentiment_run, dataset, split)


@main.command("report")
@click.pass_context
def cmd_report(ctx: click.Context) -> None:
    """Render figures for the analyze outputs."""
    from .report import report_run

    def run(config):
        written = report_run(config)
        return RunResult(0, {"figures": [str(p) for p in written]}, written)

    _run(ctx, run)


if __name__ == "__main__":
    main()
