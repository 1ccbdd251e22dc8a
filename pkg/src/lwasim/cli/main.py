"""Main CLI entry point using Typer."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from lwasim.config.presets import list_presets, resolve_scenario
from lwasim.config.settings import ConfigError, Scenario
from lwasim.harness.experiments import ooo_sweep, write_sweep_csv
from lwasim.harness.metrics import MetricsReport, write_csv
from lwasim.harness.simulator import run as run_scenario

app = typer.Typer(
    name="lwasim",
    help="LTE-WiFi aggregation protocol engine and dual-link simulator",
    no_args_is_help=True,
)
console = Console(highlight=False)


def _version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        from lwasim import __version__

        console.print(f"lwasim {__version__}")
        raise typer.Exit()


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@app.callback()
def main(
    version: bool = typer.Option(
        None,
        "--version",
        "-V",
        callback=_version_callback,
        is_eager=True,
        help="Show version and exit.",
    ),
    verbose: bool = typer.Option(
        False,
        "--verbose",
        "-v",
        help="Log controller decisions and link events (DEBUG).",
    ),
) -> None:
    """LTE-WiFi aggregation protocol engine and dual-link simulator."""
    _setup_logging(verbose)


def _load(ref: str) -> Scenario:
    """Resolve a scenario reference or exit 1 with the field path."""
    try:
        return resolve_scenario(ref)
    except ConfigError as exc:
        console.print(f"[red]Invalid scenario {ref}: {exc}[/red]")
        raise typer.Exit(1) from exc


def _print_summary(report: MetricsReport) -> None:
    s = report.summary
    table = Table(title="Run summary", show_header=False)
    table.add_column("metric", style="cyan")
    table.add_column("value", justify="right")
    table.add_row("SDUs sourced", str(s.sourced))
    table.add_row("SDUs delivered", str(s.delivered))
    table.add_row("Late dropped", str(s.late_dropped))
    table.add_row("Reorder skipped SNs", str(s.skipped_lost))
    table.add_row("WiFi lost", str(s.wifi_lost))
    table.add_row("LTE TB lost SDUs", str(s.lte_tb_lost))
    table.add_row("Framing discarded", str(s.framing_discarded))
    table.add_row("In flight at end", str(s.in_flight_at_end))
    table.add_row("Integrity failures", str(s.integrity_failures))
    table.add_row("Mean offered", f"{s.mean_offered_bps / 1e6:.2f} Mbps")
    table.add_row("Mean goodput", f"{s.mean_goodput_bps / 1e6:.2f} Mbps")
    table.add_row("Out-of-order (merge)", f"{s.ooo_raw_fraction:.4f}")
    table.add_row("Out-of-order (sink)", f"{s.ooo_sink_fraction:.4f}")
    table.add_row("Mode changes", str(s.mode_changes))
    console.print(table)
    if s.unaccounted:
        console.print(f"[yellow]Accounting ledger off by {s.unaccounted} SDUs[/yellow]")


@app.command()
def run(
    scenario: str = typer.Option(
        ...,
        "--scenario",
        "-s",
        help="Scenario file, or presets:<name>",
    ),
    out: Path = typer.Option(
        ...,
        "--out",
        "-o",
        help="Metrics CSV to write",
    ),
    seed: int = typer.Option(
        None,
        "--seed",
        help="Override the scenario seed (wins over LWASIM_SEED)",
    ),
    duration: float = typer.Option(
        None,
        "--duration",
        help="Override the simulated duration in seconds",
    ),
    no_reorder: bool = typer.Option(
        False,
        "--no-reorder",
        help="Disable the UE reorder stage",
    ),
    summary_json: Path = typer.Option(
        None,
        "--summary-json",
        help="Also write the run summary as JSON",
    ),
    quiet: bool = typer.Option(
        False,
        "--quiet",
        "-q",
        help="Do not print the summary table",
    ),
) -> None:
    """Simulate a scenario and write per-interval metrics."""
    config = _load(scenario)
    try:
        config = config.with_overrides(
            seed=seed,
            duration_s=duration,
            reorder_enabled=False if no_reorder else None,
        )
    except ConfigError as exc:
        console.print(f"[red]Invalid override: {exc}[/red]")
        raise typer.Exit(1) from exc

    try:
        report = run_scenario(config)
        write_csv(report, out)
        if summary_json:
            summary_json.write_text(json.dumps(report.summary.as_dict(), indent=2) + "\n")
    except Exception as exc:
        console.print(f"[red]Run failed: {exc}[/red]")
        raise typer.Exit(2) from exc

    if not quiet:
        _print_summary(report)
    console.print(f"[green]Wrote {len(report.records)} intervals to {out}[/green]")


@app.command()
def presets() -> None:
    """List built-in scenarios."""
    table = Table(title="Presets")
    table.add_column("name", style="cyan", no_wrap=True)
    table.add_column("description")
    for name, description in list_presets():
        table.add_row(name, description)
    console.print(table)


@app.command()
def validate(
    scenario: str = typer.Option(
        ...,
        "--scenario",
        "-s",
        help="Scenario file, or presets:<name>",
    ),
) -> None:
    """Check a scenario file without running it."""
    config = _load(scenario)
    console.print(
        f"[green]OK[/green] {config.name}: {config.duration_s:g} s, "
        f"traffic {config.traffic.kind}, split {config.controller.split}, "
        f"reorder {'on' if config.reorder.enabled else 'off'}"
    )


def _parse_rates(text: str) -> list[float]:
    try:
        rates = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise typer.BadParameter(f"rates must be comma-separated numbers: {text}") from exc
    if not rates or any(r < 0 for r in rates):
        raise typer.BadParameter("rates must be non-negative")
    return rates


@app.command()
def sweep(
    scenario: str = typer.Option(
        "presets:table3_3_sweep",
        "--scenario",
        "-s",
        help="Scenario file, or presets:<name>",
    ),
    rates: str = typer.Option(
        "10e6,12e6,14e6,16e6",
        "--rates",
        "-r",
        help="Comma-separated offered rates in bit/s",
    ),
    duration: float = typer.Option(
        5.0,
        "--duration",
        help="Simulated seconds per run",
    ),
    seed: int = typer.Option(
        None,
        "--seed",
        help="Override the scenario seed",
    ),
    out: Path = typer.Option(
        None,
        "--out",
        "-o",
        help="Optional CSV for the sweep table",
    ),
) -> None:
    """Out-of-order fraction per offered rate, with and without reordering."""
    rate_list = _parse_rates(rates)
    config = _load(scenario)
    if seed is not None:
        try:
            config = config.with_overrides(seed=seed)
        except ConfigError as exc:
            console.print(f"[red]Invalid override: {exc}[/red]")
            raise typer.Exit(1) from exc

    try:
        rows = ooo_sweep(config, rate_list, duration_s=duration)
        if out:
            write_sweep_csv(rows, out)
    except ConfigError as exc:
        console.print(f"[red]Invalid sweep: {exc}[/red]")
        raise typer.Exit(1) from exc
    except Exception as exc:
        console.print(f"[red]Sweep failed: {exc}[/red]")
        raise typer.Exit(2) from exc

    table = Table(title="Out-of-order fraction")
    table.add_column("offered", justify="right")
    table.add_column("without reordering", justify="right")
    table.add_column("with reordering", justify="right")
    table.add_column("late dropped", justify="right")
    for row in rows:
        table.add_row(
            f"{row.rate_bps / 1e6:g} Mbps",
            f"{row.ooo_without_reorder:.2f}",
            f"{row.ooo_with_reorder:.2f}",
            str(row.late_dropped),
        )
    console.print(table)


def cli(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code.

    Usage errors (unknown flags, missing options) exit 1, like config errors.
    """
    command = typer.main.get_command(app)
    try:
        result = command.main(
            args=list(sys.argv[1:] if argv is None else argv),
            prog_name="lwasim",
            standalone_mode=False,
        )
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    return result if isinstance(result, int) else 0


def run_cli() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    run_cli()
