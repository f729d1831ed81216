import json
import sys
from pathlib import Path
from typing import Annotated, Optional

import click
import typer
from omegaconf import OmegaConf
from pprintpp import pformat
from rich.table import Table

from dwlab.cli.utils import RunConfig, RunOutcome, build_runner, execute_run, load_run_config
from dwlab.common.log import get_console_logger, get_logger, print_dwlab_text_art
from dwlab.common.utils import ConfigError, NumericalError, format_float, load_json
from dwlab.normbench.report import ProbeReport
from dwlab.normbench.runners import RUNNERS

logger = get_logger(__name__)
console = get_console_logger()

app = typer.Typer(no_args_is_help=True, pretty_exceptions_show_locals=False)


def _status(passed: bool) -> str:
    return "[green]PASS[/green]" if passed else "[bold red]FAIL[/bold red]"


def print_summary(outcome: RunOutcome):
    if outcome.verdicts:
        table = Table(title="Estimates")
        for column in ("probe", "statistic", "fitted", "target", "slack", "status"):
            table.add_column(column)
        for v in outcome.verdicts:
            table.add_row(
                v.probe, v.statistic, format_float(v.fitted), format_float(v.target),
                format_float(v.slack), _status(v.passed),
            )
        console.print(table)
    if outcome.solves:
        table = Table(title="Solves")
        for column in ("name", "system", "iterations", "converged", "residual"):
            table.add_column(column)
        for s in outcome.solves:
            table.add_row(s.name, s.system, str(s.iterations), str(s.converged), format_float(s.residual))
        console.print(table)


@app.command()
def run(
    config: Annotated[Path, typer.Argument(help="YAML run configuration.")],
    output_dir: Annotated[Optional[Path], typer.Option(help="Overrides output_dir of the config.")] = None,
    quiet: bool = False,
):
    """
    Run the probes and solves selected in CONFIG.

    Exits with 0 when every estimate passes, 1 on a configuration error and 2
    when any estimate fails.
    """
    if not quiet:
        print_dwlab_text_art()
    try:
        cfg = load_run_config(config)
        outcome = execute_run(cfg, output_dir)
    except (ConfigError, NumericalError) as e:
        console.print(f"[bold red]error:[/bold red] {e}", markup=True, highlight=False)
        raise typer.Exit(1)
    if not quiet:
        print_summary(outcome)
    console.print(f"Artifacts written to {outcome.output_dir}")
    raise typer.Exit(outcome.exit_code)


@app.command("list-probes")
def list_probes(
    as_json: Annotated[bool, typer.Option("--json", help="Machine-readable listing with the RunConfig schema.")] = False,
):
    """List the probes, their parameters and defaults and the estimate each exercises."""
    descriptions = [build_runner(name).describe() for name in sorted(RUNNERS)]
    if as_json:
        schema = OmegaConf.to_container(OmegaConf.structured(RunConfig))
        typer.echo(json.dumps({"run_config": schema, "probes": descriptions}, indent=2))
        return
    table = Table(title="Probes")
    table.add_column("probe")
    table.add_column("estimate")
    table.add_column("parameters")
    for description in descriptions:
        parameters = {k: v for k, v in description["parameters"].items() if k != "progress"}
        table.add_row(description["name"], description["estimate"], pformat(parameters))
    console.print(table)


@app.command("show-report")
def show_report(path: Annotated[Path, typer.Argument(help="A probe report, solve report or summary JSON.")]):
    """Pretty-print a report written by ``run``."""
    if not path.is_file():
        console.print(f"[bold red]error:[/bold red] {path} does not exist")
        raise typer.Exit(1)
    document = load_json(path)
    if "samples" in document:
        report = ProbeReport.from_dict(document)
        table = Table(title=f"{report.name}: {report.estimate}")
        keys = sorted({k for s in report.samples for k in s.params})
        for column in (*keys, "value"):
            table.add_column(column)
        for sample in report.samples:
            table.add_row(*(str(sample.params.get(k, "")) for k in keys), format_float(sample.value))
        console.print(table)
        for parameter, fit in report.fits.items():
            console.print(f"fit {parameter}: slope {fit.slope:.4f}, residual {fit.residual:.2e}, n={fit.count}")
        for warning in report.warnings:
            console.print(f"[yellow]warning:[/yellow] {warning}")
    elif "verdicts" in document:
        table = Table(title=str(path))
        for column in ("probe", "statistic", "fitted", "target", "slack", "status"):
            table.add_column(column)
        for v in document["verdicts"]:
            table.add_row(
                v["probe"], v["statistic"], format_float(v["fitted"]), format_float(v["target"]),
                format_float(v["slack"]), _status(v["status"] == "PASS"),
            )
        console.print(table)
    elif "iterations" in document:
        console.print(pformat({k: v for k, v in document.items() if k != "config"}))
    else:
        console.print(f"[bold red]error:[/bold red] {path} is not a dwlab report")
        raise typer.Exit(1)


def main():
    """Console entry point; usage errors exit with 1 instead of click's 2."""
    try:
        code = app(standalone_mode=False)
    except click.ClickException as e:
        e.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
