"""Project entrypoint.

Parses the subcommand line, builds the run configuration and maps errors to exit codes.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from lapa import commands, paths
from lapa.config import RunConfig, StageBoundary, load_run_config
from lapa.errors import EXIT_OK, ConfigError, LapaError, exit_code_for
from lapa.synth import SynthConfig

logger = logging.getLogger(__name__)

COMMANDS = ["ingest", "annotate", "metrics", "analyze", "report", "run"]


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors raise ConfigError so they share the exit-code policy."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(f"{self.prog}: {message}")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "synth":
            _run_synth(args)
        else:
            _run_stage(args)
    except LapaError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    return EXIT_OK


def run() -> None:
    sys.exit(main())


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="lapa", description="Loss-aversion persistence analysis of red-team OPNOTES.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = _ArgumentParser(add_help=False)
    _add_run_config_arguments(common)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=f"run the {command} stage")

    synth = subparsers.add_parser("synth", help="generate a synthetic corpus")
    defaults = SynthConfig()
    synth.add_argument("--output-dir", type=Path, required=True, help="directory for notes/, psychometrics.csv ...")
    synth.add_argument("--catalog", type=Path, default=paths.BUNDLED_CATALOG, help="catalog JSON (default: bundled)")
    synth.add_argument("--n-participants", type=int, default=defaults.n_participants, help="(default: %(default)s)")
    synth.add_argument("--seed", type=int, default=defaults.seed, help="(default: %(default)s)")
    synth.add_argument("--grips-slope", type=float, default=defaults.grips_slope, help="(default: %(default)s)")
    synth.add_argument("--division-effect", type=float, default=defaults.division_effect, help="(default: %(default)s)")
    synth.add_argument("--noise-sd", type=float, default=defaults.noise_sd, help="(default: %(default)s)")
    synth.add_argument("--intercept", type=float, default=defaults.intercept, help="(default: %(default)s)")
    synth.add_argument(
        "--technique",
        action="append",
        dest="techniques",
        default=None,
        help="catalog technique name to sample; repeatable (default: every catalog technique)",
    )
    synth.add_argument("--entries-min", type=int, default=defaults.entries_per_participant[0])
    synth.add_argument("--entries-max", type=int, default=defaults.entries_per_participant[1])
    synth.add_argument(
        "--open-probability", type=float, default=defaults.open_probability, help="(default: %(default)s)"
    )
    return parser


def _add_run_config_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags default to SUPPRESS so only explicitly given ones override env and config file values."""
    fields = RunConfig.model_fields

    def default_of(name: str) -> Any:
        field = fields[name]
        return field.default if field.default_factory is None else field.default_factory()  # type: ignore[call-arg]

    def add(flag: str, name: str, help_: str, **kwargs: Any) -> None:
        parser.add_argument(
            flag, dest=name, default=argparse.SUPPRESS, help=f"{help_} (default: {default_of(name)})", **kwargs
        )

    add("--config", "config_file", "TOML config file", type=Path)
    add("--notes-dir", "notes_dir", "directory of <participant_id>.txt OPNOTE files", type=Path)
    add("--psychometrics", "psychometrics", "psychometrics CSV", type=Path)
    add("--catalog", "catalog", "persistence catalog JSON", type=Path)
    add("--cache-dir", "cache_dir", "response cache directory", type=Path)
    add("--output-dir", "output_dir", "stage output directory", type=Path)
    add("--backend", "backend", "model backend", choices=["api", "rules", "replay"])
    add("--max-inflight", "max_inflight", "concurrent backend requests", type=int)
    add("--context-window", "context_window", "neighboring actions per side in prompts", type=int)
    add("--fuzzy-threshold", "fuzzy_threshold", "label similarity threshold", type=float)
    add("--alpha", "alpha", "significance level", type=float)
    add("--strict", "strict", "exit nonzero when any participant fails annotation", action="store_true")
    add("--allow-partial", "allow_partial", "drop participants missing on one side of a join", action="store_true")
    add(
        "--stage", "stages", "stage boundary LABEL=ISO-TIMESTAMP; repeatable", action="append", type=StageBoundary.parse
    )
    add("--exercise-start", "exercise_start", "earliest allowed note timestamp")
    add("--exercise-end", "exercise_end", "latest allowed note timestamp")


def _run_stage(args: argparse.Namespace) -> None:
    overrides = {key: value for key, value in vars(args).items() if key != "command"}
    config = load_run_config(**overrides)
    logger.info(f"Executing: command={args.command} output_dir={config.output_dir.as_posix()}")
    if args.command == "ingest":
        commands.cmd_ingest(config)
    elif args.command == "annotate":
        commands.cmd_annotate(config)
    elif args.command == "metrics":
        commands.cmd_metrics(config)
    elif args.command == "analyze":
        commands.cmd_analyze(config)
    elif args.command == "report":
        commands.cmd_report(config)
    else:
        summary = commands.cmd_run(config)
        print(summary.render(), end="")
    logger.info(f"Execution finished for: command={args.command}")


def _run_synth(args: argparse.Namespace) -> None:
    synth_config = SynthConfig(
        n_participants=args.n_participants,
        seed=args.seed,
        grips_slope=args.grips_slope,
        division_effect=args.division_effect,
        noise_sd=args.noise_sd,
        intercept=args.intercept,
        techniques=args.techniques or [],
        entries_per_participant=(args.entries_min, args.entries_max),
        open_probability=args.open_probability,
    )
    output = commands.cmd_synth(synth_config, args.catalog, args.output_dir)
    print(f"wrote {len(output.participants)} participants to {args.output_dir.as_posix()}")


if __name__ == "__main__":
    run()
