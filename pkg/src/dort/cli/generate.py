"""``dort generate``: render the synthetic suite and its detection cache.

Spec files are plain text, one ``key = value`` per line; ``#`` starts a
comment. Bare keys (or ``suite.<key>``) set :class:`~dort.config.SuiteConfig`
fields, ``noise.<key>`` sets :class:`~dort.config.NoiseConfig` fields.
Tuples are comma-separated and ``none`` clears an optional value::

    num_sequences = 20
    num_frames = 100
    noise.drop_prob = 0.1
    noise.true_score_beta = 8, 2
"""

from __future__ import annotations

import argparse
from dataclasses import fields, replace
from pathlib import Path
from typing import Any

from ..config import ExperimentConfig
from ..errors import ParseError, SpecOverflow
from ..synthdata.detector import detect_all, detector_for_sequence
from ..synthdata.io import detections_file, save_boxes, write_sequence
from ..synthdata.scene import generate, standard_suite, validate_spec
from ..utils.logger import get_logger
from .common import EXIT_OK, EXIT_USAGE, error, load_config
from .manifest import MANIFEST_NAME, RunManifest

logger = get_logger(__name__)

SPEC_SECTIONS = ("suite", "noise")
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _convert(text: str, current: Any) -> Any:
    if text.lower() == "none":
        return None
    if isinstance(current, bool):
        lowered = text.lower()
        if lowered not in _TRUE | _FALSE:
            raise ValueError(f"expected a boolean, got {text!r}")
        return lowered in _TRUE
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    if current is None or isinstance(current, tuple):
        kind = type(current[0]) if current else float
        return tuple(kind(part.strip()) for part in text.split(","))
    return text


def parse_spec_file(path: str | Path, cfg: ExperimentConfig) -> ExperimentConfig:
    """Apply the overrides in ``path`` to a copy of ``cfg``.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        ParseError: A line is not ``key = value``, names an unknown key, or
            holds a value of the wrong type.
        ValueError: The overrides fail config validation.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Spec file not found: {path}")
    cfg = cfg.copy()
    overrides: dict[str, dict[str, Any]] = {name: {} for name in SPEC_SECTIONS}

    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(
                f"expected 'key = value', got {raw.strip()!r}", line_no, str(path)
            )
        key, value = (part.strip() for part in line.split("=", 1))
        section, _, name = key.rpartition(".")
        section = section or "suite"
        if section not in SPEC_SECTIONS:
            raise ParseError(f"unknown section {section!r}", line_no, str(path))
        target = getattr(cfg, section)
        if name not in {f.name for f in fields(target)}:
            raise ParseError(f"unknown key {key!r}", line_no, str(path))
        try:
            overrides[section][name] = _convert(value, getattr(target, name))
        except ValueError as e:
            raise ParseError(f"bad value for {key}: {e}", line_no, str(path)) from e

    cfg.suite = replace(cfg.suite, **overrides["suite"])
    cfg.noise = replace(cfg.noise, **overrides["noise"])
    n_overrides = sum(len(v) for v in overrides.values())
    logger.info(f"Applied {n_overrides} overrides from {path}")
    return cfg


def cmd_generate(args: argparse.Namespace) -> int:
    """Write the suite's sequences, ground truth and detection cache to ``--out``."""
    try:
        cfg = load_config(args)
        if args.spec:
            cfg = parse_spec_file(args.spec, cfg)
        if args.seed is not None:
            cfg.suite = replace(cfg.suite, seed=args.seed)
        specs = standard_suite(cfg.suite)
        for spec in specs:
            validate_spec(spec)
    except ParseError as e:
        return error(f"Invalid spec file: {e}", EXIT_USAGE)
    except (FileNotFoundError, KeyError, ValueError, SpecOverflow) as e:
        return error(str(e), EXIT_USAGE)

    out = Path(args.out)
    manifest = RunManifest.start(
        "generate",
        args.argv,
        cfg,
        seeds={"suite": cfg.suite.seed, "noise": cfg.noise.seed},
    )
    manifest_path = manifest.write(out / MANIFEST_NAME)

    print(
        f"Generating {len(specs)} sequences of {cfg.suite.num_frames} frames "
        f"into {out}"
    )
    artifacts: list[Path] = []
    for index, spec in enumerate(specs):
        seq = generate(spec)
        seq_dir = write_sequence(out, seq)
        detector = detector_for_sequence(
            seq.boxes_by_frame(),
            index,
            cfg.noise,
            spec.height,
            spec.width,
            cfg.suite.num_classes,
        )
        cache = save_boxes(
            seq_dir / detections_file(cfg.noise.seed),
            detect_all(detector, seq.num_frames),
        )
        artifacts.extend([seq_dir, cache])
        logger.info(f"{seq.name}: {len(seq.groundtruth)} ground-truth boxes")

    manifest.finish(manifest_path, artifacts)
    print(f"Wrote {len(specs)} sequences to {out}")
    return EXIT_OK


__all__ = ["parse_spec_file", "cmd_generate"]
