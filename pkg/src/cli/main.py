"""Command-line entry point: prepare, train, extract, evaluate, visualize, defaults."""
import argparse
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from src.config.logging import LogContext, configure_logging, get_logger
from src.config.settings import RunConfig
from src.errors import ConfigError, KaceError
from src.pipeline.coordinator import PipelineCoordinator

logger = get_logger(__name__)

COMMANDS = {
    "prepare": "Build per-species train/independent window datasets",
    "train": "Train the LSTM feature extractor(s), then extract features",
    "extract": "Extract features with the saved model(s)",
    "evaluate": "Fit the ensembles and write report tables and ROC points",
    "visualize": "Write 2-D t-SNE embeddings of the features",
    "defaults": "Print the default configuration as TOML",
}
EXIT_OK = 0


class UsageErrorParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigError instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration")
    common.add_argument("--species", help="Comma-separated species names (default: all)")
    common.add_argument("--seed", type=int, help="Global seed")
    common.add_argument("--out", type=Path, help="Output directory")
    common.add_argument(
        "--log-level",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="Logging level (default from config)",
    )

    parser = UsageErrorParser(prog="kace", description="Lysine acetylation site prediction toolkit")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=UsageErrorParser)
    commands.required = True
    for name, help_text in COMMANDS.items():
        commands.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, Any] = {
        "seed": args.seed,
        "species": args.species,
        "paths.output_dir": str(args.out) if args.out is not None else None,
        "log_level": args.log_level,
    }
    return RunConfig.load(args.config, **overrides)


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    configure_logging(config.log_level, config.log_json)
    if args.command == "defaults":
        sys.stdout.write(RunConfig.load(None).to_toml())
        return EXIT_OK

    coordinator = PipelineCoordinator(config)
    with LogContext(command=args.command, seed=config.seed):
        logger.info("command_start", out=str(config.paths.output_dir))
        getattr(coordinator, args.command)()
        logger.info("command_complete")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code.

    0 success, 1 usage or configuration error, 2 data error, 3 numerical failure.
    """
    try:
        args = build_parser().parse_args(argv)
        return run(args)
    except KaceError as e:
        configure_logging("ERROR")
        logger.error("command_failed", error=str(e), error_type=type(e).__name__, exit_code=e.exit_code)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
