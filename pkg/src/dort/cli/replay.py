"""``dort replay``: re-run a recorded command into a new output location."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from ..utils.logger import get_logger
from .common import EXIT_USAGE, error
from .manifest import RunManifest, load_manifest

logger = get_logger(__name__)

# the recorded config already carries what these flags applied
_CONFIG_FLAGS = ("--preset", "--config", "--spec")


def _strip_flags(argv: list[str], flags: tuple[str, ...]) -> list[str]:
    """Drop ``flag value`` and ``flag=value`` pairs for every flag in ``flags``."""
    out: list[str] = []
    skip = False
    for token in argv:
        if skip:
            skip = False
            continue
        if token in flags:
            skip = True
            continue
        if any(token.startswith(f"{flag}=") for flag in flags):
            continue
        out.append(token)
    return out


def replay_argv(manifest: RunManifest, out: Path, config_path: Path) -> list[str]:
    """Full argument list reproducing ``manifest`` with outputs in ``out``.

    The recorded configuration replaces ``--preset``, ``--config`` and
    ``--spec``, so the replay does not depend on presets or files that may
    have changed since.
    """
    argv = _strip_flags(list(manifest.argv), (*_CONFIG_FLAGS, manifest.output_arg))
    return [
        manifest.command,
        *argv,
        manifest.output_arg,
        str(out),
        "--config",
        str(config_path),
    ]


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
    except (FileNotFoundError, ValueError) as e:
        return error(str(e), EXIT_USAGE)
    if manifest.command == "replay":
        return error("refusing to replay a replay manifest", EXIT_USAGE)

    out = Path(args.out)
    config_path = out.with_name(out.name + ".config.json")
    config_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, "w") as f:
        json.dump(manifest.config, f, indent=2)

    argv = replay_argv(manifest, out, config_path)
    logger.info(
        f"Replaying {manifest.command} (recorded by dort {manifest.version}) "
        f"into {out}"
    )
    print(f"Replaying: dort {' '.join(argv)}")

    from . import main

    return main(argv)


__all__ = ["cmd_replay", "replay_argv"]
