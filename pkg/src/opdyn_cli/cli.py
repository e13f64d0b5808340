#!/usr/bin/env python3
"""
OPDYN CLI - operator dynamics for spin chains

Command-line front end for TEBD simulations, exact references, hybrid
TEBD + MLP extrapolation runs and cost-scaling benchmarks.
"""

import argparse
import sys
import uuid
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from dotenv import dotenv_values
from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from .engine.common import (
    HybridConfig,
    ModelSpec,
    OpdynError,
    RunReport,
    UsageError,
    get_logger,
    get_settings,
    resolve_defaults,
)
from .engine.common.logging import set_level
from .engine.common.models import BenchRow
from .engine.numerics.regressor import save_checkpoint
from .engine.pipeline import Pipeline
from .engine.pipeline.storage import write_bench_csv, write_report, write_series_csv

console = Console()
err_console = Console(stderr=True)
logger = get_logger(__name__)

DEFAULT_BENCH_SIZES = [8, 10, 12]


def int_list(text: str) -> List[int]:
    """Parse '8,10,12' into [8, 10, 12]."""
    try:
        values = [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


# dest -> (flag, type, choices)
OPTIONS: Dict[str, tuple] = {
    "model": ("--model", str, ("ising", "xxz")),
    "n": ("--n", int, None),
    "j": ("--j", float, None),
    "h": ("--h", float, None),
    "delta_aniso": ("--delta-aniso", float, None),
    "delta": ("--delta", float, None),
    "steps": ("--steps", int, None),
    "max_bond": ("--max-bond", int, None),
    "cutoff": ("--cutoff", float, None),
    "window": ("--window", int, None),
    "hidden": ("--hidden", int, None),
    "train_pairs": ("--train-pairs", int_list, None),
    "lr": ("--lr", float, None),
    "max_epochs": ("--max-epochs", int, None),
    "target_mae": ("--target-mae", float, None),
    "reference": ("--reference", str, ("tebd", "exact", "none")),
    "observable": ("--observable", str, ("sz", "sx", "sy")),
    "seed_init": ("--seed-init", int, None),
    "seed_shuffle": ("--seed-shuffle", int, None),
    "sizes": ("--sizes", int_list, None),
}


@dataclass
class CliCommand:
    """A parsed and fully resolved command."""

    verb: str
    options: Dict[str, Any] = field(default_factory=dict)
    output_dir: Path = Path("runs")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of printing usage and exiting."""

    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, allow_abbrev=False)
    for dest, (flag, kind, choices) in OPTIONS.items():
        common.add_argument(flag, dest=dest, type=kind, choices=choices, default=None)
    common.add_argument("--out", dest="out", default=None, help="Output directory")
    common.add_argument("--config", dest="config", default=None, help="KEY=value file with the same options")
    common.add_argument("--log-level", dest="log_level", default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    parser = _Parser(
        prog="opdyn",
        description="OPDYN - operator dynamics with TEBD and MLP extrapolation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        allow_abbrev=False,
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands", parser_class=_Parser)
    subparsers.add_parser("simulate", parents=[common], allow_abbrev=False,
                          help="TEBD evolution over the full interval")
    subparsers.add_parser("exact", parents=[common], allow_abbrev=False,
                          help="Exact state-vector evolution (N <= 14)")
    subparsers.add_parser("hybrid", parents=[common], allow_abbrev=False,
                          help="TEBD short-time data + MLP extrapolation")
    subparsers.add_parser("bench", parents=[common], allow_abbrev=False,
                          help="Cost scaling with system size")
    subparsers.add_parser("help", help="Show detailed command help and examples")
    return parser


def _convert(dest: str, raw: str) -> Any:
    _, kind, choices = OPTIONS[dest]
    try:
        value = kind(raw)
    except (ValueError, argparse.ArgumentTypeError) as e:
        raise UsageError(f"config key {dest.upper()}: {e}")
    if choices and value not in choices:
        raise UsageError(f"config key {dest.upper()}: {value!r} not in {list(choices)}")
    return value


def load_config_file(path: str) -> Dict[str, Any]:
    """Read KEY=value options; keys accept dashes or underscores in any case."""
    if not Path(path).is_file():
        raise UsageError(f"config file {path} does not exist")
    loaded: Dict[str, Any] = {}
    for key, raw in dotenv_values(path).items():
        dest = key.strip().lower().replace("-", "_")
        if dest not in OPTIONS:
            raise UsageError(f"unknown config key {key!r}")
        if raw is None:
            raise UsageError(f"config key {key!r} has no value")
        loaded[dest] = _convert(dest, raw)
    return loaded


def resolve_options(verb: str, flags: Dict[str, Any], file_options: Dict[str, Any]) -> Dict[str, Any]:
    """Model presets < config file < flags, with every default materialized."""
    model = flags.get("model") or file_options.get("model") or "ising"
    options = resolve_defaults(model)
    options["train_pairs"] = [options["train_pairs"]]
    if verb == "bench":
        options["sizes"] = list(DEFAULT_BENCH_SIZES)
    options.update({k: v for k, v in file_options.items() if v is not None})
    options.update({k: v for k, v in flags.items() if v is not None})
    options["model"] = model

    if verb != "bench":
        if "sizes" in options:
            raise UsageError("--sizes is only valid for bench")
        if len(options["train_pairs"]) != 1:
            raise UsageError("--train-pairs takes a single value outside bench")
    elif len(options["train_pairs"]) not in (1, len(options["sizes"])):
        raise UsageError("--train-pairs needs one value or one per size")

    if verb != "bench" or len(options["train_pairs"]) == 1:
        pairs = options["train_pairs"][0]
        options["train_pairs"] = pairs if verb != "bench" else [pairs] * len(options["sizes"])
    return options


def build_config(
    options: Dict[str, Any],
    n_sites: Optional[int] = None,
    train_pairs: Optional[int] = None,
    training: bool = True,
) -> HybridConfig:
    """
    Map resolved options onto the validated run configuration.

    With ``training=False`` (simulate, exact) the window and pair settings
    are echoed but not checked against the interval length.
    """
    pairs = options["train_pairs"]
    if train_pairs is None:
        train_pairs = pairs[0] if isinstance(pairs, list) else pairs
    window = options["window"]
    if not training:
        train_pairs, window = 1, 1
    try:
        spec = ModelSpec(
            model=options["model"],
            n_sites=n_sites if n_sites is not None else options["n"],
            j=options["j"],
            h=options["h"],
            delta_aniso=options["delta_aniso"],
        )
        return HybridConfig(
            model_spec=spec,
            delta=options["delta"],
            total_steps=options["steps"],
            train_pairs=train_pairs,
            window=window,
            hidden=options["hidden"],
            max_bond=options["max_bond"],
            cutoff=options["cutoff"],
            observable=options["observable"],
            seed_init=options["seed_init"],
            seed_shuffle=options["seed_shuffle"],
            reference=options["reference"],
            learning_rate=options["lr"],
            max_epochs=options["max_epochs"],
            target_mae=options["target_mae"],
        )
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ())) or "config"
        raise UsageError(f"invalid {where}: {first.get('msg')}")


def parse_command(argv: Optional[Sequence[str]] = None) -> Optional[CliCommand]:
    """
    Parse and validate a command line.

    Returns:
        CliCommand, or None when only help was requested

    Raises:
        UsageError: On unknown flags, bad values or invalid combinations
    """
    args = build_parser().parse_args(argv)
    if args.command in (None, "help"):
        return None

    flags = {dest: getattr(args, dest) for dest in OPTIONS}
    file_options = load_config_file(args.config) if args.config else {}
    options = resolve_options(args.command, flags, file_options)

    settings = get_settings()
    if args.command == "bench":
        for n_sites, pairs in zip(options["sizes"], options["train_pairs"]):
            build_config(options, n_sites=n_sites, train_pairs=pairs)
    else:
        cfg = build_config(options, training=args.command == "hybrid")
        needs_exact = args.command == "exact" or (args.command == "hybrid" and options["reference"] == "exact")
        if needs_exact and cfg.model_spec.n_sites > settings.exact_max_sites:
            raise UsageError(f"exact evolution is limited to {settings.exact_max_sites} sites")

    if args.log_level:
        set_level(args.log_level)
    out = Path(args.out) if args.out else Path(settings.output_dir) / args.command
    return CliCommand(verb=args.command, options=options, output_dir=out)


def _print_report(report: RunReport) -> None:
    table = Table(title=f"{report.verb} run {report.run_id[:8]}", box=box.ROUNDED)
    table.add_column("Stage", style="cyan", no_wrap=True)
    table.add_column("State", style="green")
    table.add_column("Seconds", justify="right")
    for stage in report.stages:
        state = stage.state.value if stage.state.value != "error" else f"[red]{stage.state.value}[/red]"
        table.add_row(stage.name, state, f"{stage.seconds:.2f}")
    console.print(table)

    if report.train is not None:
        console.print(f"Training: {report.train.epochs_run} epochs, MAE {report.train.final_train_mae:.3e}")
    if report.mean_epsilon is not None:
        console.print(f"Mean deviation (full range): [bold]{report.mean_epsilon:.3e}[/bold]")
    if report.mean_epsilon_prediction is not None:
        console.print(f"Mean deviation (prediction only): [bold]{report.mean_epsilon_prediction:.3e}[/bold]")
    for error in report.errors:
        console.print(f"[red]Error: {escape(error)}[/red]")


def _print_bench(rows: Sequence[BenchRow]) -> None:
    table = Table(title="Computational time vs system size", box=box.ROUNDED)
    table.add_column("N", justify="right", style="cyan")
    table.add_column("Train pairs", justify="right")
    table.add_column("Generation (s)", justify="right")
    table.add_column("Train+predict (s)", justify="right")
    table.add_column("Full TEBD (s)", justify="right")
    table.add_column("Epochs", justify="right", style="dim")
    table.add_column("Status")
    for row in rows:
        status = "[green]success[/green]" if row.status == "success" else f"[red]{row.status}[/red]"
        table.add_row(
            str(row.n_sites), str(row.train_pairs), f"{row.generation_s:.2f}",
            f"{row.train_predict_s:.2f}", f"{row.full_tebd_s:.2f}", str(row.epochs_run), status,
        )
    console.print(table)


def cmd_simulate(cmd: CliCommand, pipeline: Pipeline) -> RunReport:
    """Run TEBD over the full interval."""
    result = pipeline.simulate(build_config(cmd.options, training=False))
    if result.series is not None:
        write_series_csv(result.series, cmd.output_dir / "series_ref.csv")
    return result.report


def cmd_exact(cmd: CliCommand, pipeline: Pipeline) -> RunReport:
    """Run the exact state-vector evolution."""
    result = pipeline.exact(build_config(cmd.options, training=False))
    if result.series is not None:
        write_series_csv(result.series, cmd.output_dir / "series_ref.csv")
    return result.report


def cmd_hybrid(cmd: CliCommand, pipeline: Pipeline) -> RunReport:
    """Run the hybrid TEBD + MLP workflow."""
    result = pipeline.hybrid_run(build_config(cmd.options))
    out = cmd.output_dir
    if result.reference is not None:
        write_series_csv(result.reference, out / "series_ref.csv")
    if result.predicted is not None:
        write_series_csv(result.predicted, out / "series_pred.csv")
    if result.epsilon is not None:
        write_series_csv(result.epsilon, out / "epsilon.csv")
    if result.epsilon_prediction is not None:
        write_series_csv(result.epsilon_prediction, out / "epsilon_prediction.csv")
    if result.mlp is not None:
        save_checkpoint(result.mlp, out / "model.txt")
    return result.report


def cmd_bench(cmd: CliCommand, pipeline: Pipeline) -> RunReport:
    """Benchmark cost scaling over --sizes."""
    options = cmd.options
    report = RunReport(run_id=str(uuid.uuid4()), verb="bench", start_time=datetime.now())
    base = build_config(options, n_sites=options["sizes"][0], train_pairs=options["train_pairs"][0])
    report.config = base.model_dump(mode="json")

    rows = pipeline.bench_scaling(options["sizes"], base, options["train_pairs"])
    write_bench_csv(rows, cmd.output_dir / "bench.csv")
    _print_bench(rows)

    report.errors = [f"N={row.n_sites}: {row.error}" for row in rows if row.status != "success"]
    report.overall_status = "failed" if report.errors else "success"
    report.end_time = datetime.now()
    return report


COMMANDS: Dict[str, Callable[[CliCommand, Pipeline], RunReport]] = {
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "hybrid": cmd_hybrid,
    "bench": cmd_bench,
}


def _fail(kind: str, message: str) -> None:
    err_console.print(f"error: {kind}: {' '.join(str(message).split())}", markup=False, highlight=False, soft_wrap=True)


def run_command(cmd: CliCommand) -> int:
    """
    Execute a validated command and write its outputs.

    Returns:
        0 on success, 1 on a runtime failure (a report stub is still written)
    """
    pipeline = Pipeline()
    try:
        report = COMMANDS[cmd.verb](cmd, pipeline)
    except Exception as e:
        logger.error(f"{cmd.verb} failed: {e}")
        stub = RunReport(
            run_id=str(uuid.uuid4()), verb=cmd.verb, start_time=datetime.now(),
            end_time=datetime.now(), overall_status="failed", errors=[f"{type(e).__name__}: {e}"],
        )
        try:
            write_report(stub, cmd.options, cmd.output_dir)
        except OSError as write_error:
            logger.warning(f"Could not write report stub to {cmd.output_dir}: {write_error}")
        _fail(getattr(e, "kind", "runtime"), f"{type(e).__name__}: {e}")
        return 1

    write_report(report, cmd.options, cmd.output_dir)
    if cmd.verb != "bench":
        _print_report(report)
    console.print(f"\n[dim]Outputs written to {cmd.output_dir}[/dim]")

    if report.overall_status != "success":
        _fail("runtime", report.errors[0] if report.errors else "run failed")
        return 1
    return 0


def show_help():
    """Display detailed help with examples and quick reference."""
    console.print("\n[bold cyan]OPDYN - Operator Dynamics Engine[/bold cyan]\n")
    console.print("Short-time TEBD data, long-time extrapolation with a linear MLP regressor.\n")

    help_table = Table(title="Command Reference", box=box.ROUNDED, show_header=True)
    help_table.add_column("Command", style="cyan", no_wrap=True)
    help_table.add_column("Description", style="white")
    help_table.add_column("Example", style="dim")
    help_table.add_row(
        "simulate",
        "TEBD evolution of <O>(t) over the full interval",
        "opdyn simulate --model ising --n 12 --h 1 --delta 0.05 --steps 500 --max-bond 200",
    )
    help_table.add_row(
        "exact",
        "Exact state-vector evolution (N <= 14)",
        "opdyn exact --model ising --n 8 --steps 100",
    )
    help_table.add_row(
        "hybrid",
        "Train on short-time TEBD data, predict the rest, compare",
        "opdyn hybrid --model ising --n 12 --h 1",
    )
    help_table.add_row(
        "bench",
        "Generation vs train+predict cost per system size",
        "opdyn bench --sizes 8,10,12",
    )
    console.print(help_table)

    console.print(Panel(
        "Model defaults: ising (h=J, delta=0.05, 500 steps, 32 neurons, "
        "110 pairs) and xxz (Delta=h=J/2, delta=0.01, 2000 steps, 64 neurons, 100 pairs).\n"
        "Every run writes resolved_config.env; pass it back with --config to reproduce the run.",
        title="Quick Tips",
        box=box.ROUNDED,
    ))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point."""
    try:
        cmd = parse_command(argv)
    except UsageError as e:
        _fail("usage", str(e))
        return 2
    except OpdynError as e:
        _fail(e.kind, str(e))
        return 2

    if cmd is None:
        show_help()
        return 0
    return run_command(cmd)


if __name__ == "__main__":
    sys.exit(main())
