"""Main entry point for hybridloc."""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from core.config import Config, load_mapping
from core.errors import HybridLocError, InvalidInput
from core.experiment.runner import ExperimentConfig, IndividualMethod, MethodContext, evaluate, run_experiment
from core.fusion.hybrid import HybridModel, fit_hybrid
from core.fusion.sections import SectionedModel, SectioningMode, SectionPartition, fit_sectioned
from core.fusion.serialize import load_model, save_model
from core.logger import setup_logger, verbosity_to_level
from core.model.dataset import AXES, FingerprintDataset, dataset_summary, read_fingerprint_csv, write_fingerprint_csv
from core.penalty.loader import parse_penalty
from core.report.writer import EvalReport, repetitions_path, write_report
from core.solver.gpm import SolverConfig, write_trace_csv
from engines.rfsim.corridor import CorridorConfig, generate_corridor_dataset

console = Console()
logger = logging.getLogger("hybridloc")

FIT_MODES = ("global", SectioningMode.TWO_LEVEL.value, SectioningMode.RFID_ORACLE.value)


def _fmt_alpha(alpha) -> str:
    return "(" + ", ".join(f"{a:.4f}" for a in alpha) + ")"


def cmd_simulate(args: argparse.Namespace, config: Config) -> int:
    values = config.section("simulation")
    if args.config:
        values = Config.deep_merge(values, load_mapping(args.config))
    if args.seed is not None:
        values["rng_seed"] = args.seed
    corridor = CorridorConfig.from_mapping(values)

    dataset = generate_corridor_dataset(corridor)
    write_fingerprint_csv(dataset, args.out)
    summary = dataset_summary(dataset)
    console.print(
        f"[green]✓[/green] Simulated {summary['records']} fingerprints for "
        f"{', '.join(summary['technologies'])} (seed {corridor.rng_seed}): {args.out}"
    )
    return 0


def _write_traces(model, trace_dir: str) -> None:
    out = Path(trace_dir)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(model, SectionedModel):
        named = [("global", model.global_model)] + [
            (f"section{s}", m) for s, m in enumerate(model.per_section_models)
        ]
    else:
        named = [("global", model)]
    for prefix, hybrid in named:
        for axis, trace in hybrid.traces.items():
            write_trace_csv(trace, str(out / f"{prefix}_{axis}.csv"))


def cmd_fit(args: argparse.Namespace, config: Config) -> int:
    dataset = read_fingerprint_csv(args.input)
    penalty = parse_penalty(args.penalty or config.get("penalty", "p2"))
    solver = SolverConfig.from_mapping(config.section("solver"), record_trace=bool(args.trace_dir))

    if args.mode == "global" and args.sections != 1:
        raise InvalidInput("--sections needs --mode two_level or rfid_oracle")
    if args.mode == "global":
        model = fit_hybrid(dataset, penalty, solver)
        hybrid = model
    else:
        length = args.length or float(config.get("simulation.length", 60.0))
        partition = SectionPartition.uniform(length, args.sections)
        model = fit_sectioned(dataset, partition, penalty, solver, SectioningMode(args.mode))
        hybrid = model.global_model

    save_model(model, args.out)
    if args.trace_dir:
        _write_traces(model, args.trace_dir)

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Model", style="cyan")
    for axis in AXES:
        table.add_column(f"α_{axis}", style="green")
    table.add_row("global", *(_fmt_alpha(hybrid.alpha(a).weights) for a in AXES))
    if isinstance(model, SectionedModel):
        for s, section_model in enumerate(model.per_section_models):
            table.add_row(
                f"section {s} ({model.section_sizes[s]} fp)",
                *(_fmt_alpha(section_model.alpha(a).weights) for a in AXES),
            )
    console.print(f"[green]✓[/green] Fitted {args.mode} model ({penalty.spec}) on {len(dataset)} fingerprints: {args.out}")
    console.print(table)
    flags = model.flags if isinstance(model, HybridModel) else model.flags + model.global_model.flags
    if flags:
        console.print(f"[yellow]⚠[/yellow] Flags: {', '.join(flags)}")
    return 0


def _check_technologies(model, dataset: FingerprintDataset) -> None:
    if tuple(model.technologies) != tuple(dataset.technologies):
        raise InvalidInput(
            f"Model technologies {list(model.technologies)} do not match dataset {list(dataset.technologies)}"
        )


def cmd_eval(args: argparse.Namespace, config: Config) -> int:
    model = load_model(args.model)
    dataset = read_fingerprint_csv(args.input)
    _check_technologies(model, dataset)

    value = evaluate(model, dataset, args.metric)
    hybrid = model if isinstance(model, HybridModel) else model.global_model
    ctx = MethodContext(hybrid.penalty, SolverConfig(), SectionPartition.uniform(1.0, 1))

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Method", style="cyan")
    table.add_column(args.metric.upper(), style="green", justify="right")
    table.add_row(Path(args.model).name, f"{value:.6g}")
    for tech in dataset.technologies:
        baseline = IndividualMethod(tech).fit(dataset, ctx)
        table.add_row(f"individual:{tech}", f"{evaluate(baseline, dataset, args.metric):.6g}")
    console.print(table)
    # Plain value last for scripting
    print(repr(value))
    return 0


def _report_table(report: EvalReport) -> Table:
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Method", style="cyan")
    table.add_column("S", justify="right")
    table.add_column(report.metric.upper(), style="green", justify="right")
    table.add_column("α_x (last repetition)")
    table.add_column("Flags", style="yellow")
    for row in report.rows:
        alpha = " ".join(_fmt_alpha(a) for a in row.alpha)
        table.add_row(row.method, str(row.sections), f"{row.value:.6g}", alpha, ", ".join(row.flags))
    return table


def _experiment_mapping(args: argparse.Namespace, config: Config) -> Dict[str, Any]:
    values = config.section("experiment")
    values["penalty"] = config.get("penalty", "p2")
    values["solver"] = config.section("solver")
    if args.config:
        values = Config.deep_merge(values, load_mapping(args.config))
    if "dataset_path" not in values and "corridor" not in values:
        values["corridor"] = config.section("simulation")
    return values


def cmd_experiment(args: argparse.Namespace, config: Config) -> int:
    cfg = ExperimentConfig.from_mapping(
        _experiment_mapping(args, config),
        seed=args.seed,
        workers=args.workers,
        repetitions=args.repetitions,
    )
    with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console) as progress:
        task = progress.add_task(f"Running {cfg.repetitions} repetition(s)...", total=None)
        report = run_experiment(cfg)
        progress.update(task, completed=True)

    write_report(report, args.out)
    console.print(f"[green]✓[/green] Report: {args.out} (per repetition: {repetitions_path(args.out)})")
    console.print(_report_table(report))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "eval": cmd_eval,
    "experiment": cmd_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="hybridloc - fuse per-technology position estimates over the probability simplex",
        prog="hybridloc",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Random seed (non-negative integer); fit and eval are deterministic and ignore it",
    )
    common.add_argument("--config-file", default=None, help="hybridloc.yaml to use instead of the one in the cwd")
    common.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable)")
    common.add_argument("-q", "--quiet", action="store_true", help="Only warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="Simulate a corridor fingerprint CSV")
    p.add_argument("--config", help="Corridor config (JSON or YAML)")
    p.add_argument("--out", required=True, help="Fingerprint CSV to write")

    p = sub.add_parser("fit", parents=[common], help="Fit a hybrid or section-based model")
    p.add_argument("--input", required=True, help="Fingerprint CSV")
    p.add_argument("--penalty", default=None, help="p2 (MSE), mae or p1+eps:<eps>")
    p.add_argument("--sections", type=int, default=1, help="Number of equal sections")
    p.add_argument("--mode", choices=FIT_MODES, default="global")
    p.add_argument("--length", type=float, default=None, help="Corridor length the sections cover (meters)")
    p.add_argument("--trace-dir", default=None, help="Write solver traces as CSV into this directory")
    p.add_argument("--out", required=True, help="Model JSON to write")

    p = sub.add_parser("eval", parents=[common], help="Evaluate a model on a fingerprint CSV")
    p.add_argument("--model", required=True, help="Model JSON")
    p.add_argument("--input", required=True, help="Fingerprint CSV")
    p.add_argument("--metric", choices=("mse", "mae"), default="mse")

    p = sub.add_parser("experiment", parents=[common], help="Run a repeated train/test experiment")
    p.add_argument("--config", help="Experiment config (JSON or YAML)")
    p.add_argument("--out", required=True, help="Report CSV to write")
    p.add_argument("--workers", type=int, default=None, help="Processes for repetitions")
    p.add_argument("--repetitions", type=int, default=None, help="Override the number of repetitions")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand.

    Returns:
        Exit code: 0 on success, 2 on invalid input, 3 on numerical failure,
        1 on unexpected errors, 130 when interrupted
    """
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and args.seed < 0:
            raise InvalidInput(f"--seed must be non-negative, got {args.seed}")
        config = Config(args.config_file)
        level = verbosity_to_level(args.verbose, args.quiet, config.get("logging.level", "INFO"))
        setup_logger("hybridloc", level, config.get("logging.format", "rich") == "rich")
        logger.debug(f"Running {args.command} with {vars(args)}")
        return COMMANDS[args.command](args, config)
    except HybridLocError as e:
        logger.error(str(e))
        console.print(f"[red]✗[/red] {e}")
        return e.exit_code
    except (FileNotFoundError, IsADirectoryError) as e:
        logger.error(str(e))
        console.print(f"[red]✗[/red] {e}")
        return InvalidInput.exit_code
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted by user[/yellow]")
        return 130
    except Exception as e:
        logger.exception("Unexpected error occurred")
        console.print(f"[red]Unexpected error: {e}[/red]")
        return 1


def cli():
    """CLI entry point for setuptools."""
    sys.exit(main())


if __name__ == "__main__":
    cli()
