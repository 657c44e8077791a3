"""
Command-line interface for fpequiv.

Exit codes: 0 all assertions proven, 1 an assertion failed (or a fault went
undetected), 2 only vacuous assertions remain, 3 usage, configuration or file
errors, 4 property parse or elaboration errors.
"""
import json
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence

import click
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .checker import (
    CheckMode,
    CheckerSettings,
    DriveMode,
    Status,
    VerificationReport,
    check,
    fault_matrix,
    render_text,
    report_to_json,
)
from .config_manager import ConfigManager
from .coverage import CoverageReport, coverage_to_json, measure
from .exceptions import FpEquivError, PropertyError
from .faults import FaultConfig, fault_by_id, list_faults
from .float_core import DESK, SINGLE, FloatFormat
from .impl_adder import NAMESPACES
from .oracle import sweep
from .properties import Program, corpus, corpus_names, format_program, load_corpora, parse

console = Console()
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_VACUOUS = 2
EXIT_USAGE = 3
EXIT_PARSE = 4

DEFAULT_CORPUS = "theorem-split3"

_STATUS_STYLE = {
    Status.PROVEN: "green",
    Status.COVERED: "green",
    Status.ASSUMED: "cyan",
    Status.FAILED: "bold red",
    Status.VACUOUS: "yellow",
    Status.UNREACHABLE: "yellow",
    Status.UNKNOWN: "dim",
}


def set_warnings_mode(show: bool):
    """Route library logging through rich; DEBUG when warnings are requested"""
    logging.basicConfig(
        level=logging.DEBUG if show else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


class PropertySourceError(FpEquivError):
    """Property file could not be read."""


class RunConfig(BaseModel):
    """Resolved options of one verify/coverage/faults run."""

    model_config = ConfigDict(frozen=True)

    format: FloatFormat
    faults: List[str] = Field(default_factory=list)
    props: Optional[Path] = None
    corpora: List[str] = Field(default_factory=list)
    check_mode: CheckMode = Field(default_factory=CheckMode.exhaustive)
    drive_mode: DriveMode = DriveMode.LOCKSTEP
    out: Optional[Path] = None
    json_output: bool = False

    def fault_config(self) -> FaultConfig:
        return FaultConfig.from_ids(self.faults)

    def program(self) -> Program:
        if self.props is None:
            return load_corpora(self.corpora)
        try:
            text = self.props.read_text()
        except OSError as e:
            raise PropertySourceError(f"cannot read property file {self.props}: {e.strerror or e}") from None
        try:
            return parse(text)
        except PropertyError as e:
            e.source = str(self.props)
            raise


def _resolve_format(text: Optional[str], mode: str) -> FloatFormat:
    if text is None:
        return DESK if mode == "exhaustive" else SINGLE
    return FloatFormat.parse(text)


def _check_mode(mode: str, samples: int, seed: int) -> CheckMode:
    return CheckMode.exhaustive() if mode == "exhaustive" else CheckMode.random(samples, seed)


def _run_config(
    fmt: Optional[str],
    mode: str,
    samples: int,
    seed: int,
    drive: str = "lockstep",
    faults: Sequence[str] = (),
    props: Optional[str] = None,
    corpora: Sequence[str] = (),
    out: Optional[str] = None,
    json_output: bool = False,
    default_corpora: Sequence[str] = (DEFAULT_CORPUS,),
) -> RunConfig:
    if props and corpora:
        raise click.UsageError("--props and --corpus are mutually exclusive")
    for fault in faults:
        fault_by_id(fault)
    return RunConfig(
        format=_resolve_format(fmt, mode),
        faults=list(faults),
        props=Path(props) if props else None,
        corpora=list(corpora) if corpora or props else list(default_corpora),
        check_mode=_check_mode(mode, samples, seed),
        drive_mode=DriveMode(drive),
        out=Path(out) if out else None,
        json_output=json_output,
    )


def _settings(ctx: click.Context, **overrides: Any) -> CheckerSettings:
    return ConfigManager(ctx.obj.get("settings_file")).load_settings(**overrides)


def _emit(text: str, out: Optional[Path], json_output: bool, render=None) -> None:
    """Write the artifact to ``out`` or stdout; rich rendering only for text on a console."""
    if out is not None:
        try:
            out.write_text(text)
        except OSError as e:
            raise PropertySourceError(f"cannot write {out}: {e.strerror or e}") from None
        console.print(f"[green]Report written to {out}[/green]")
        if render is not None and not json_output:
            render()
    elif json_output or render is None:
        click.echo(text, nl=False)
    else:
        render()


# Shared options
def _format_options(f):
    options = [
        click.option("--format", "fmt", metavar="E,M", help="Float format; default 4,3 exhaustive, 8,23 random"),
        click.option("--mode", type=click.Choice(["exhaustive", "random"]), default="exhaustive", show_default=True),
        click.option("--samples", type=click.IntRange(min=1), default=1_000_000, show_default=True),
        click.option("--seed", type=click.IntRange(0, (1 << 64) - 1), default=0, show_default=True),
        click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes"),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here"),
        click.option("--json", "json_output", is_flag=True, help="JSON report instead of text"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _property_options(f):
    options = [
        click.option("--props", type=click.Path(), default=None, help="Property file"),
        click.option("--corpus", "corpora", multiple=True, help="Built-in corpus name (repeatable)"),
        click.option("--fault", "faults", multiple=True, help="Fault identifier to enable (repeatable)"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


class FpEquivGroup(click.Group):
    """Maps library and usage errors onto the documented exit codes"""

    def main(self, *args, **kwargs):
        kwargs.pop("standalone_mode", None)
        try:
            code = super().main(*args, standalone_mode=False, **kwargs)
        except click.ClickException as e:
            e.show()
            code = EXIT_USAGE
        except click.Abort:
            console.print("\n[bold yellow]Aborted.[/bold yellow]")
            code = EXIT_USAGE
        except PropertyError as e:
            location = f"{e.source}:" if e.source else ""
            console.print(f"[bold red]❌ {escape(location + str(e))}[/bold red]")
            code = EXIT_PARSE
        except (FpEquivError, ValidationError) as e:
            console.print(f"[bold red]❌ Error: {escape(str(e))}[/bold red]")
            console.print("[dim]For help, run: fpequiv --help[/dim]")
            code = EXIT_USAGE
        sys.exit(code or EXIT_OK)


@click.group(cls=FpEquivGroup)
@click.version_option(__version__, prog_name="fpequiv")
@click.option("--warnings", is_flag=True, help="Show technical warnings and debug information")
@click.option("--settings", "settings_file", type=click.Path(dir_okay=False), default=None,
              help="Checker settings file (default ~/.fpequiv/settings.json)")
@click.pass_context
def cli(ctx: click.Context, warnings: bool, settings_file: Optional[str]):
    """Equivalence checking for floating-point adder datapaths."""
    set_warnings_mode(warnings)
    if warnings:
        console.print("[dim]🔧 Debug mode enabled - showing technical details[/dim]")
    ctx.ensure_object(dict)
    ctx.obj["settings_file"] = Path(settings_file) if settings_file else None


def _verdict_table(report: VerificationReport) -> Table:
    completeness = "exhaustive" if report.exhaustive else "sampled"
    table = Table(
        title=f"Format ({report.config['format']}) · {completeness} · {report.drive.value}",
        box=box.ROUNDED,
    )
    table.add_column("Role", style="bold cyan", no_wrap=True)
    table.add_column("Directive", style="white")
    table.add_column("Status", no_wrap=True)
    table.add_column("Pass", justify="right")
    table.add_column("Fail", justify="right")
    table.add_column("Vacuous", justify="right")
    table.add_column("Stage", style="dim")
    for v in report.verdicts:
        status = v.status.value
        if v.status is Status.PROVEN and not report.exhaustive:
            status = "proven (sampled)"
        style = _STATUS_STYLE[v.status]
        table.add_row(
            v.role.value, v.name, f"[{style}]{status}[/{style}]",
            str(v.pass_count), str(v.fail_count), str(v.vacuous_count),
            report.attribution[v.name].value if v.name in report.attribution else v.stage,
        )
    return table


def _render_report(report: VerificationReport):
    console.print(_verdict_table(report))
    for cex in report.counterexamples:
        body = "  ".join(f"{name}={value}" for name, value in cex.signals().items())
        console.print(Panel(
            body,
            title=f"[bold red]CEX {cex.failed_property}[/bold red] [{cex.stage.value}]",
            box=box.ROUNDED,
        ))
    console.print(
        f"[dim]{report.stimuli_admitted}/{report.stimuli_total} stimuli admitted · "
        f"{report.elapsed_seconds}s[/dim]"
    )


@cli.command()
@_format_options
@_property_options
@click.option("--drive", type=click.Choice(["lockstep", "free"]), default="lockstep", show_default=True)
@click.option("--shrink/--no-shrink", default=None, help="Minimize counterexamples (default on)")
@click.option("--free-override", is_flag=True, help="Allow free drive mode without assume directives")
@click.option("--cex-limit", type=click.IntRange(min=0), default=None, help="Counterexamples kept per assertion")
@click.pass_context
def verify(ctx, fmt, mode, samples, seed, workers, out, json_output, props, corpora, faults,
           drive, shrink, free_override, cex_limit):
    """Check assertions of a property file or corpus against the implementation."""
    config = _run_config(fmt, mode, samples, seed, drive, faults, props, corpora, out, json_output)
    settings = _settings(
        ctx, workers=workers, shrink=shrink, cex_limit=cex_limit,
        allow_unconstrained_free=True if free_override else None,
    )
    report = check(
        config.format, config.fault_config(), config.program(),
        config.check_mode, config.drive_mode, settings,
    )
    text = report_to_json(report) if config.json_output else render_text(report)
    _emit(text, config.out, config.json_output, lambda: _render_report(report))
    return report.exit_code()


@cli.command()
@_format_options
@click.option("--fault", "faults", multiple=True, help="Restrict the matrix to these faults (repeatable)")
@click.pass_context
def faults(ctx, fmt, mode, samples, seed, workers, out, json_output, faults):
    """Run the lemma and theorem corpora once per catalogued fault."""
    fmt_obj = _resolve_format(fmt, mode)
    kinds = [fault_by_id(f) for f in faults] if faults else None
    settings = _settings(ctx, workers=workers)
    rows = fault_matrix(fmt_obj, settings, kinds, _check_mode(mode, samples, seed))

    def render():
        table = Table(title=f"Fault matrix · format {fmt_obj}", box=box.ROUNDED)
        table.add_column("Fault", style="bold cyan", no_wrap=True)
        table.add_column("Code", no_wrap=True)
        table.add_column("Detected")
        table.add_column("Stage")
        table.add_column("Expected", style="dim")
        table.add_column("#CEX", justify="right")
        table.add_column("Format", style="dim")
        for row in rows:
            detected = "[red]yes[/red]" if row.detected else "[green]no[/green]"
            if row.fault != "none":
                detected = "[green]yes[/green]" if row.detected else "[bold red]no[/bold red]"
            table.add_row(
                row.fault, row.code, detected, row.stage.value, row.expected_stage.value,
                str(row.cex_count), row.format + (" (escalated)" if row.escalated else ""),
            )
        console.print(table)

    if json_output:
        text = json.dumps([row.model_dump(mode="json") for row in rows], indent=2) + "\n"
    else:
        text = "\n".join(
            f"{r.fault:<16} {r.code:<3} detected={str(r.detected).lower():<5} stage={r.stage.value:<13} "
            f"cex={r.cex_count} format={r.format}{' escalated' if r.escalated else ''}"
            for r in rows
        ) + "\n"
    _emit(text, Path(out) if out else None, json_output, render)

    clean = all(not r.detected for r in rows if r.fault == "none")
    caught = all(r.detected for r in rows if r.fault != "none")
    return EXIT_OK if clean and caught else EXIT_FAILED


def _render_coverage(report: CoverageReport):
    table = Table(title="Cover items", box=box.ROUNDED)
    table.add_column("Item", style="bold cyan", no_wrap=True)
    table.add_column("Stage", style="dim")
    table.add_column("Status")
    table.add_column("Checked")
    for item in report.items:
        style = "green" if item.status.value == "covered" else "yellow"
        table.add_row(item.id, item.stage.value, f"[{style}]{item.status.value}[/{style}]",
                      "yes" if item.checked else "no")
    console.print(table)
    console.print(Panel(
        f"formal {report.formal_pct}% · stimuli {report.stimuli_pct}% · checker {report.checker_pct}%\n"
        f"{report.covered}/{report.total} covered · {report.unreachable} unreachable · "
        f"{report.unknown} unknown · {report.checked} checked",
        title="[bold blue]Coverage[/bold blue]",
        box=box.ROUNDED,
    ))


@cli.command()
@_format_options
@_property_options
@click.option("--drive", type=click.Choice(["lockstep", "free"]), default="lockstep", show_default=True)
@click.option("--standalone", is_flag=True, help="Implementation only; properties may use impl.* alone")
@click.pass_context
def coverage(ctx, fmt, mode, samples, seed, workers, out, json_output, props, corpora, faults,
             drive, standalone):
    """Measure cover-item reachability and the three coverage ratios."""
    if standalone and drive == "free":
        raise click.UsageError("--standalone runs in lockstep drive mode only")
    config = _run_config(
        fmt, mode, samples, seed, drive, faults, props, corpora, out, json_output,
        default_corpora=() if standalone else (DEFAULT_CORPUS,),
    )
    report = measure(
        config.format, config.fault_config(), config.program(), config.check_mode,
        config.drive_mode, _settings(ctx, workers=workers),
        namespaces=("impl",) if standalone else NAMESPACES,
    )
    text = coverage_to_json(report) if json_output else (
        f"total={report.total} covered={report.covered} unreachable={report.unreachable} "
        f"unknown={report.unknown} checked={report.checked} formal_pct={report.formal_pct} "
        f"stimuli_pct={report.stimuli_pct} checker_pct={report.checker_pct}\n"
    )
    _emit(text, config.out, json_output, lambda: _render_coverage(report))
    return EXIT_OK


@cli.command("corpus")
@click.argument("name", required=False)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the corpus here")
@click.option("--normalize", is_flag=True, help="Print through the pretty-printer")
def corpus_cmd(name, out, normalize):
    """List built-in corpora, or print one."""
    if name is None:
        for known in corpus_names():
            click.echo(known)
        return EXIT_OK
    text = corpus(name)
    if normalize:
        text = format_program(parse(text))
    _emit(text, Path(out) if out else None, False)
    return EXIT_OK


@cli.command("oracle-check")
@click.option("--format", "fmt", metavar="E,M", help="Float format; default 4,3 exhaustive, 8,23 random")
@click.option("--mode", type=click.Choice(["exhaustive", "random"]), default="exhaustive", show_default=True)
@click.option("--samples", type=click.IntRange(min=1), default=1_000_000, show_default=True)
@click.option("--seed", type=click.IntRange(0, (1 << 64) - 1), default=0, show_default=True)
@click.option("--json", "json_output", is_flag=True)
def oracle_check(fmt, mode, samples, seed, json_output):
    """Compare the reference adder against the exact oracle."""
    fmt_obj = _resolve_format(fmt, mode)
    report = sweep(fmt_obj, exhaustive=mode == "exhaustive", samples=samples, seed=seed)
    if json_output:
        click.echo(report.model_dump_json(indent=2))
    else:
        style = "green" if report.passed else "bold red"
        console.print(Panel(
            f"[{style}]{report.mismatches} mismatches[/{style}] · {report.pairs_checked} pairs compared · "
            f"{report.rejected} rejected · {report.elapsed_seconds}s",
            title=f"[bold blue]Oracle check · format {fmt_obj}[/bold blue]",
            box=box.ROUNDED,
        ))
        if report.first_mismatch is not None:
            console.print(f"[red]First mismatch: {report.first_mismatch.model_dump()}[/red]")
    return EXIT_OK if report.passed else EXIT_FAILED


@cli.command("list-faults")
@click.option("--json", "json_output", is_flag=True)
def list_faults_cmd(json_output):
    """Show the fault catalog."""
    specs = list_faults()
    if json_output:
        click.echo(json.dumps([s.model_dump(mode="json") for s in specs], indent=2))
        return EXIT_OK
    table = Table(title="Fault catalog", box=box.ROUNDED)
    table.add_column("Id", style="bold cyan", no_wrap=True)
    table.add_column("Code", no_wrap=True)
    table.add_column("Stage")
    table.add_column("Description", style="white")
    for s in specs:
        table.add_row(s.kind.value, s.code, s.stage.value, s.description)
    console.print(table)
    return EXIT_OK


@cli.command("settings")
@click.option("--exhaustive-ceiling", type=click.IntRange(min=1), default=None,
              help="Largest stimulus count enumerated exhaustively")
@click.option("--cex-limit", type=click.IntRange(min=0), default=None, help="Counterexamples kept per assertion")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes")
@click.option("--escalation-samples", type=click.IntRange(min=1), default=None,
              help="Samples used when a fault escalates width")
@click.option("--allow-unconstrained-free/--no-allow-unconstrained-free", default=None,
              help="Permit free drive mode without assume directives")
@click.option("--shrink/--no-shrink", default=None, help="Minimize counterexamples")
@click.option("--reset", is_flag=True, help="Remove the settings file before applying any new values")
@click.option("--json", "json_output", is_flag=True)
@click.pass_context
def settings_cmd(ctx, reset, json_output, **values):
    """Show, update or reset the stored checker defaults."""
    manager = ConfigManager(ctx.obj.get("settings_file"))
    if reset:
        manager.clear_config()
    changes = {k: v for k, v in values.items() if v is not None}
    settings = manager.load_settings(**changes)
    if changes:
        manager.save_settings(settings)

    if json_output:
        click.echo(settings.model_dump_json(indent=2))
        return EXIT_OK
    if reset:
        console.print(f"[yellow]Settings reset: {manager.config_file}[/yellow]", highlight=False)
    if changes:
        console.print(f"[green]✅ Settings saved to {manager.config_file}[/green]", highlight=False)
    source = str(manager.config_file) if manager.has_settings() else "built-in defaults"
    table = Table(title=f"Checker settings · {source}", box=box.ROUNDED)
    table.add_column("Setting", style="bold cyan", no_wrap=True)
    table.add_column("Value", justify="right")
    for name, value in settings.model_dump().items():
        table.add_row(name, str(value))
    console.print(table)
    return EXIT_OK


def main():
    """Main entry point for the fpequiv CLI"""
    cli(prog_name="fpequiv")


if __name__ == "__main__":
    main()
