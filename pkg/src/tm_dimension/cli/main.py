"""The ``tmdim`` command line.

This is the only module that depends on Rich. Subcommands:

    tmdim mine --spec 3,2 --inputs 1..21 --budget 10000000 --out DIR [--ids LIST] [--no-twin-reduction]
    tmdim mine --spec 3,2 --sample 10000 --seed 7 --out DIR
    tmdim census DIR
    tmdim render --spec n,k --id ID --inputs A..B
    tmdim symmetric --spec 3,2 --even-inputs 2..12
    tmdim rho [--spec 2,2 --id 1600 --inputs 1..256]
    tmdim verify DIR [--no-rho]

Defaults come from ``TMDIM_`` environment variables (see config.py). Errors
exit with code 2, failed verification with code 1.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import structlog
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from tm_dimension import __version__
from tm_dimension.config import Settings, get_settings
from tm_dimension.errors import TMDimensionError
from tm_dimension.machines.numbering import Space, decode, parse_ids
from tm_dimension.machines.tapes import parse_range, unary_input
from tm_dimension.models import CensusTable, MiningJob
from tm_dimension.pipeline.census import census_rows, format_census, run_census
from tm_dimension.pipeline.mining import MiningSummary, mine
from tm_dimension.pipeline.rho import IDENTITY_MACHINE, RHO_BUDGET, RhoReport, rho_experiment
from tm_dimension.pipeline.symmetric import (
    SEARCH_BUDGET,
    Prune,
    even_inputs,
    find_symmetric_performers,
    identity_candidates,
)
from tm_dimension.pipeline.verify import VerifyReport, run_verify
from tm_dimension.protocol.loader import load_protocol
from tm_dimension.simulation.diagram import SpaceTimeDiagram, composite_sheet, render_diagram, write_pbm
from tm_dimension.simulation.simulator import run
from tm_dimension.store.results import load_results

console = Console()
logger = structlog.get_logger()

EXIT_VIOLATION = 1
EXIT_ERROR = 2
VERDICTS = ("holds", "fails", "indeterminate", "not_applicable", "novel_value")


def configure_logging(settings: Settings) -> None:
    """Route structlog through stdlib logging at the configured level."""
    logging.basicConfig(level=settings.log_level, format="%(message)s", stream=sys.stderr)
    renderer = (
        structlog.dev.ConsoleRenderer() if settings.log_format == "console" else structlog.processors.JSONRenderer()
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
    )


# -----------------------------------------------------------------------------
# Rendering
# -----------------------------------------------------------------------------


def render_census(table: CensusTable, plain: bool) -> None:
    if plain:
        sys.stdout.write(format_census(table))
        return
    title = f"Census of ({table.space}) space" + (f" - PARTIAL, {table.coverage:.1%} covered" if table.partial else "")
    rich_table = Table(title=title)
    rich_table.add_column("Section", style="cyan")
    rich_table.add_column("Value")
    rich_table.add_column("Machines", justify="right", style="bold")
    for section, label, count in census_rows(table):
        rich_table.add_row(section, label, str(count))
    console.print(rich_table)
    for note in table.footnotes:
        console.print(f"[dim]* {note}[/dim]")


def render_summary(summary: MiningSummary) -> None:
    table = Table(title="Mining summary")
    table.add_column("Tally", style="cyan")
    table.add_column("Count", justify="right")
    table.add_row("scheduled", str(summary.scheduled))
    table.add_row("processed", str(summary.processed))
    table.add_row("already complete", str(summary.skipped))
    table.add_row("undefined (no input halted)", str(summary.undefined))
    table.add_row("unclassified", str(summary.unclassified))
    for status, count in sorted(summary.dropped.items()):
        table.add_row(f"dropped inputs: {status}", str(count))
    console.print(table)


def rho_line(report: RhoReport) -> str:
    status = "OK" if report.ok else "FAILED"
    first, last = report.inputs.start, report.inputs.stop - 1
    return (
        f"rho machine={report.machine} ({report.space}) a={first}..{last} injective={report.injective} "
        f"identity={report.identity} c={report.constant} exceeding={len(report.exceeding)} {status}"
    )


def render_verify(report: VerifyReport, plain: bool) -> None:
    if plain:
        if report.rho is not None:
            sys.stdout.write(rho_line(report.rho) + "\n")
        for finding, counts in sorted(report.tallies.items()):
            sys.stdout.write(f"{finding}: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())) + "\n")
        for v in report.violations:
            sys.stdout.write(f"VIOLATION {v.assertion} machine={v.machine} {v.detail}\n")
        sys.stdout.write(f"{'OK' if report.ok else 'FAILED'}: {report.checked} machines checked\n")
        return

    table = Table(title="Findings")
    table.add_column("Finding", style="cyan")
    for verdict in VERDICTS:
        table.add_column(verdict, justify="right")
    for finding, counts in sorted(report.tallies.items()):
        table.add_row(finding, *(str(counts.get(v, 0)) for v in VERDICTS))
    console.print(table)
    if report.rho is not None:
        console.print(rho_line(report.rho))

    if report.violations:
        violations = Table(title="Violations of universal assertions")
        violations.add_column("Machine", justify="right")
        violations.add_column("Assertion", style="bold red")
        violations.add_column("Detail", style="dim")
        for v in report.violations:
            violations.add_row(str(v.machine), v.assertion, v.detail)
        console.print(violations)
        console.print(Panel(f"[bold red]{len(report.violations)} violations[/bold red]", border_style="red"))
    else:
        console.print(Panel(f"[green]No violations over {report.checked} machines.[/green]", border_style="green"))
    if report.partial:
        console.print("[yellow]Results are partial; verdicts cover the completed machines only.[/yellow]")


# -----------------------------------------------------------------------------
# Subcommands
# -----------------------------------------------------------------------------


def cmd_mine(args: argparse.Namespace, settings: Settings) -> int:
    job = MiningJob(
        space=args.spec,
        inputs=args.inputs or settings.inputs,
        budget=args.budget or settings.budget,
        twin_reduction=not args.no_twin_reduction,
        escape_check=settings.escape_check and not args.no_escape_check,
        extended_inputs=settings.extended_inputs if args.extended_inputs is None else args.extended_inputs,
        ids=parse_ids(args.ids) if args.ids else None,
        sample=args.sample,
        seed=args.seed,
        protocol=load_protocol(args.protocol or settings.protocol_path),
    )
    summary = mine(job, args.out, args.workers if args.workers is not None else settings.workers)
    render_summary(summary)
    render_census(run_census(args.out), args.plain)
    return 0


def cmd_census(args: argparse.Namespace, settings: Settings) -> int:
    render_census(run_census(args.dir), args.plain)
    return 0


def cmd_render(args: argparse.Namespace, settings: Settings) -> int:
    space = Space.parse(args.spec)
    table = decode(args.id, space)
    budget = args.budget or settings.budget
    out: Path = args.out
    diagrams: list[SpaceTimeDiagram] = []
    for x in parse_range(args.inputs):
        metrics = run(table, unary_input(x), budget, escape_check=True)
        diagram = render_diagram(table, unary_input(x), budget) if metrics.halted else metrics
        if not isinstance(diagram, SpaceTimeDiagram):
            console.print(f"[yellow]Input {x}: {metrics.status.value} after {metrics.t} steps, skipped.[/yellow]")
            continue
        path = write_pbm(out / f"tm{args.id}_x{x}.pbm", diagram.drawn())
        diagrams.append(diagram)
        console.print(f"Input {x}: t={diagram.metrics.t} s={diagram.metrics.s} N={diagram.metrics.N} -> {path}")
    if args.sheet and diagrams:
        path = write_pbm(out / f"tm{args.id}_sheet.pbm", composite_sheet(diagrams))
        console.print(f"Composite sheet -> {path}")
    return 0


def cmd_symmetric(args: argparse.Namespace, settings: Settings) -> int:
    space = Space.parse(args.spec)
    inputs = even_inputs(args.even_inputs)
    candidates = identity_candidates(load_results(args.results), inputs) if args.results else None
    pairs = find_symmetric_performers(
        space,
        inputs,
        budget=args.budget,
        workers=args.workers if args.workers is not None else settings.workers,
        prune=Prune(args.prune),
        candidates=candidates,
    )
    if args.plain:
        for p in pairs:
            sys.stdout.write(f"{p.machine} {p.mirror} steps={','.join(map(str, p.steps))} reversal={p.by_reversal}\n")
        return 0
    table = Table(title=f"Symmetric performers in ({space.states},{space.colors}) on inputs {inputs}")
    table.add_column("Machine", justify="right", style="cyan")
    table.add_column("Mirror", justify="right", style="cyan")
    table.add_column("Steps")
    table.add_column("Canonical reversal", justify="center")
    for p in pairs:
        table.add_row(str(p.machine), str(p.mirror), ", ".join(map(str, p.steps)), "yes" if p.by_reversal else "no")
    console.print(table)
    if not pairs:
        console.print("[dim]No pairs found.[/dim]")
    return 0


def cmd_rho(args: argparse.Namespace, settings: Settings) -> int:
    report = rho_experiment(Space.parse(args.spec), args.id, parse_range(args.inputs), args.budget)
    if args.plain:
        sys.stdout.write(rho_line(report) + "\n")
        return 0 if report.ok else EXIT_VIOLATION
    table = Table(title=f"Machine {report.machine} under the binary coding")
    table.add_column("a", justify="right", style="cyan")
    table.add_column("output value", justify="right")
    table.add_column("value / a^2", justify="right")
    for a, value in zip(report.inputs, report.values, strict=True):
        if a & (a - 1) == 0 or a == report.inputs.stop - 1:
            table.add_row(str(a), str(value), f"{value / (a * a):.3f}")
    console.print(table)
    style = "green" if report.ok else "bold red"
    console.print(Panel(f"[{style}]{rho_line(report)}[/{style}]", border_style=style.split()[-1]))
    return 0 if report.ok else EXIT_VIOLATION


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    report = run_verify(args.dir, rho=not args.no_rho)
    render_verify(report, args.plain)
    return 0 if report.ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmdim", description="Box dimension of small Turing machines.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    mine_p = sub.add_parser("mine", help="Simulate, fit and report every machine of a space.")
    mine_p.add_argument("--spec", required=True, help="Machine space, n,k.")
    mine_p.add_argument("--inputs", help="Input range a..b (default: TMDIM_INPUTS).")
    mine_p.add_argument("--budget", type=int, help="Step budget per input (default: TMDIM_BUDGET).")
    mine_p.add_argument("--out", type=Path, required=True, help="Results directory.")
    mine_p.add_argument("--ids", help="Comma-separated machine ids instead of the whole space.")
    mine_p.add_argument("--sample", type=int, help="Mine a seeded sample of this many machines.")
    mine_p.add_argument("--seed", type=int, default=0, help="Seed of the sample.")
    mine_p.add_argument("--no-twin-reduction", action="store_true", help="Analyze every twin separately.")
    mine_p.add_argument("--no-escape-check", action="store_true", help="Let drifting runs exhaust the budget.")
    mine_p.add_argument("--extended-inputs", type=int, help="Last input of the extended pass (0 disables).")
    mine_p.add_argument("--workers", type=int, help="Worker processes (0 = one per CPU).")
    mine_p.add_argument("--protocol", type=Path, help="Fit protocol YAML.")
    mine_p.add_argument("--plain", action="store_true", help="Plain-text census.")
    mine_p.set_defaults(handler=cmd_mine)

    census_p = sub.add_parser("census", help="Bucket, dimension and function counts of a results directory.")
    census_p.add_argument("dir", type=Path)
    census_p.add_argument("--plain", action="store_true", help="Aligned plain-text table.")
    census_p.set_defaults(handler=cmd_census)

    render_p = sub.add_parser("render", help="Write space-time diagrams as PBM files.")
    render_p.add_argument("--spec", required=True, help="Machine space, n,k.")
    render_p.add_argument("--id", type=int, required=True, help="Machine number.")
    render_p.add_argument("--inputs", required=True, help="Input range a..b.")
    render_p.add_argument("--budget", type=int, help="Step budget per input (default: TMDIM_BUDGET).")
    render_p.add_argument("--out", type=Path, default=Path("diagrams"), help="Output directory.")
    render_p.add_argument("--sheet", action="store_true", help="Also write a side-by-side composite sheet.")
    render_p.set_defaults(handler=cmd_render)

    sym_p = sub.add_parser("symmetric", help="Find machine pairs with mirrored even-input diagrams.")
    sym_p.add_argument("--spec", required=True, help="Machine space, n,k.")
    sym_p.add_argument("--even-inputs", required=True, help="Input range a..b; its even inputs are compared.")
    sym_p.add_argument("--budget", type=int, default=SEARCH_BUDGET, help="Step budget per run.")
    sym_p.add_argument("--workers", type=int, help="Worker processes (0 = one per CPU).")
    sym_p.add_argument("--prune", choices=[p.value for p in Prune], default=Prune.IDENTITY.value)
    sym_p.add_argument("--results", type=Path, help="Mined results to take identity candidates from.")
    sym_p.add_argument("--plain", action="store_true")
    sym_p.set_defaults(handler=cmd_symmetric)

    rho_p = sub.add_parser("rho", help="Run a machine on binary-coded inputs and bound its output by c*a^2.")
    rho_p.add_argument("--spec", default="2,2", help="Machine space, n,k.")
    rho_p.add_argument("--id", type=int, default=IDENTITY_MACHINE, help="Machine number.")
    rho_p.add_argument("--inputs", default="1..256", help="Range of a.")
    rho_p.add_argument("--budget", type=int, default=RHO_BUDGET, help="Step budget per run.")
    rho_p.add_argument("--plain", action="store_true")
    rho_p.set_defaults(handler=cmd_rho)

    verify_p = sub.add_parser("verify", help="Check theorems and tally findings over a results directory.")
    verify_p.add_argument("dir", type=Path)
    verify_p.add_argument("--no-rho", action="store_true", help="Skip the binary-coding check.")
    verify_p.add_argument("--plain", action="store_true")
    verify_p.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """CLI entrypoint for the `tmdim` console script."""
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
    except ValueError as e:
        console.print(f"[bold red]Invalid configuration:[/bold red] {e}")
        return EXIT_ERROR
    configure_logging(settings)
    try:
        return int(args.handler(args, settings))
    except TMDimensionError as e:
        logger.error(
            "command_failed",
            command=args.command,
            error=type(e).__name__,
            detail=getattr(e, "internal_detail", ""),
        )
        console.print(f"[bold red]Error:[/bold red] {e}")
        return EXIT_ERROR
    except ValidationError as e:
        console.print(f"[bold red]Invalid arguments:[/bold red] {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
