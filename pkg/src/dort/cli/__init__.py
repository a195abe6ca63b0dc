"""Command-line interface for DorT experiments.

Usage:
    dort generate --out data/ --spec suite.txt
    dort train --data data/ --out models/scheduler.bin --holdout 0.3
    dort run --data data/ --mode dort --sigma 10 --model models/scheduler.bin
        --out runs/dort
    dort eval --pred runs/dort --gt data/ --out reports/dort
    dort eval --gt data/ --sweep 1,2,5,10 --model models/scheduler.bin
        --out reports/sweep
    dort replay --manifest runs/dort/manifest.json --out runs/dort-again
    dort list-presets

Exit codes: 0 success, 2 usage or spec error, 3 training failure, 4 runtime
failure, 5 evaluation input error.
"""

from __future__ import annotations

import argparse
import importlib
import sys
from collections.abc import Sequence

from ..config import PIPELINE_MODES, PRESETS, TRACKER_MODES
from ..utils.logger import get_logger
from .common import (
    EXIT_EVAL,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_TRAIN,
    EXIT_USAGE,
    apply_thread_limit,
    config_parent,
    configure_logging,
    logging_parent,
)

logger = get_logger(__name__)

# command -> (module, handler); imported on dispatch so --help stays light
_COMMANDS = {
    "generate": ("generate", "cmd_generate"),
    "train": ("train", "cmd_train"),
    "run": ("run", "cmd_run"),
    "eval": ("evaluate", "cmd_eval"),
    "replay": ("replay", "cmd_replay"),
}


def list_presets() -> None:
    """List available configuration presets."""
    print("Available configuration presets:\n")
    for name, config in PRESETS.items():
        suite = config.suite
        pipeline = config.pipeline
        print(
            f"  {name:12} - {suite.num_sequences:3} sequences x "
            f"{suite.num_frames:3} frames, {suite.frame_width}x{suite.frame_height}, "
            f"sigma={pipeline.sigma}, delta={pipeline.delta}"
        )
    print("\nUsage: dort <command> --preset <name>")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dort",
        description="Detect or Track - scheduled detection and tracking for video",
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")
    common = [logging_parent(), config_parent()]

    gen = subparsers.add_parser(
        "generate", parents=common, help="Generate the synthetic benchmark suite"
    )
    gen.add_argument("--spec", type=str, help="Suite spec file (key = value lines)")
    gen.add_argument("--out", type=str, required=True, help="Output dataset directory")
    gen.add_argument("--seed", type=int, help="Suite seed (overrides the spec file)")

    train = subparsers.add_parser("train", parents=common, help="Train the scheduler")
    train.add_argument("--data", type=str, required=True, help="Dataset directory")
    train.add_argument("--out", type=str, required=True, help="Checkpoint path")
    train.add_argument("--epochs", type=int, help="Override number of epochs")
    train.add_argument("--seed", type=int, help="Training and initialization seed")
    train.add_argument(
        "--holdout",
        type=float,
        help="Fraction of sequences held out and scored after training",
    )

    run = subparsers.add_parser(
        "run", parents=common, help="Run the detect-or-track pipeline on a dataset"
    )
    run.add_argument("--data", type=str, required=True, help="Dataset directory")
    run.add_argument(
        "--mode", choices=PIPELINE_MODES, default="dort", help="Decision source"
    )
    run.add_argument("--sigma", type=int, help="Consultation/detection stride")
    run.add_argument("--delta", type=float, help="Track-probability threshold")
    run.add_argument(
        "--model", type=str, help="Scheduler checkpoint (required for dort)"
    )
    run.add_argument("--out", type=str, required=True, help="Output directory")
    run.add_argument(
        "--tracker", choices=TRACKER_MODES, help="Multi-box tracker variant"
    )
    run.add_argument("--seed", type=int, help="Detector noise seed")

    ev = subparsers.add_parser(
        "eval", parents=common, help="Evaluate runs or sweep modes and strides"
    )
    ev.add_argument("--pred", type=str, help="Output directory of a run")
    ev.add_argument("--gt", type=str, required=True, help="Dataset directory")
    ev.add_argument(
        "--sweep", type=str, help='Comma-separated strides, e.g. "1,2,5,10"'
    )
    ev.add_argument(
        "--modes",
        type=str,
        default="fixed,oracle,dort",
        help="Comma-separated sweep modes from fixed, oracle, dort, fixed-crop",
    )
    ev.add_argument("--model", type=str, help="Scheduler checkpoint for the dort mode")
    ev.add_argument("--out", type=str, required=True, help="Output directory")

    replay = subparsers.add_parser(
        "replay", parents=[logging_parent()], help="Re-run a command from its manifest"
    )
    replay.add_argument(
        "--manifest", type=str, required=True, help="Manifest JSON file"
    )
    replay.add_argument("--out", type=str, required=True, help="New output location")

    subparsers.add_parser("list-presets", help="List configuration presets")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main CLI entry point."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    if args.command == "list-presets":
        list_presets()
        return EXIT_OK
    if args.command not in _COMMANDS:
        parser.print_help()
        return EXIT_USAGE

    configure_logging(args)
    apply_thread_limit()
    # subcommand arguments as given, for the run manifest
    args.argv = argv[argv.index(args.command) + 1 :]
    module_name, handler = _COMMANDS[args.command]
    module = importlib.import_module(f"{__name__}.{module_name}")
    return getattr(module, handler)(args)


__all__ = [
    "main",
    "build_parser",
    "list_presets",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_TRAIN",
    "EXIT_RUNTIME",
    "EXIT_EVAL",
]


if __name__ == "__main__":
    sys.exit(main())
