"""``dort train``: fit the scheduler network on a generated dataset."""

from __future__ import annotations

import argparse
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd

from ..core.featmap import FeatureExtractor
from ..core.tracker import CorrelationTracker
from ..errors import DegenerateDataset, DortError
from ..scheduler.checkpoint import save_checkpoint
from ..scheduler.labeling import LabeledState
from ..scheduler.network import SchedulerNetwork
from ..scheduler.training import predict_track_probabilities, train
from ..synthdata.dataset import build_scheduler_dataset
from ..synthdata.io import list_sequences, read_sequence
from ..synthdata.scene import split_suite
from ..types import Action
from ..utils.logger import get_logger
from .common import EXIT_OK, EXIT_TRAIN, EXIT_USAGE, error, fit_frame_size, load_config
from .manifest import RunManifest

logger = get_logger(__name__)


def loss_curve_path(model_path: Path) -> Path:
    return model_path.with_name(model_path.name + ".loss.csv")


def manifest_path_for(model_path: Path) -> Path:
    return model_path.with_name(model_path.name + ".manifest.json")


def held_out_fp_rate(
    model: SchedulerNetwork, samples: Sequence[LabeledState], delta: float
) -> tuple[float, int]:
    """Share of detect-labelled pairs the model would track at ``delta``."""
    if not samples:
        return 0.0, 0
    probs = predict_track_probabilities(model, samples)
    labels = np.array([int(s.label) for s in samples])
    detect = labels == int(Action.DETECT)
    n_detect = int(detect.sum())
    if n_detect == 0:
        return 0.0, 0
    return float(np.mean(probs[detect] >= delta)), n_detect


def cmd_train(args: argparse.Namespace) -> int:
    """Build labelled pairs from ``--data`` and write a checkpoint to ``--out``."""
    try:
        cfg = load_config(args)
        if args.epochs is not None:
            cfg.train = replace(cfg.train, epochs=args.epochs)
        if args.seed is not None:
            cfg.train = replace(cfg.train, seed=args.seed)
            cfg.scheduler = replace(cfg.scheduler, seed=args.seed)
        if args.holdout is not None:
            cfg.suite = replace(cfg.suite, holdout_fraction=args.holdout)
    except (FileNotFoundError, KeyError, ValueError) as e:
        return error(str(e), EXIT_USAGE)

    data = Path(args.data)
    names = list_sequences(data)
    if not names:
        return error(f"No sequences found in data directory: {data}", EXIT_TRAIN)

    try:
        sequences = [read_sequence(data / name) for name in names]
    except (FileNotFoundError, DortError) as e:
        return error(f"Could not read dataset: {e}", EXIT_TRAIN)

    fit_frame_size(cfg, sequences[0].frames[0])
    holdout = args.holdout if args.holdout is not None else 0.0
    train_seqs, held_seqs = split_suite(sequences, holdout)

    out = Path(args.out)
    manifest = RunManifest.start(
        "train",
        args.argv,
        cfg,
        seeds={"train": cfg.train.seed, "scheduler": cfg.scheduler.seed},
        output_is_dir=False,
    )
    manifest_path = manifest.write(manifest_path_for(out))

    extractor = FeatureExtractor.from_config(cfg.features)
    tracker = CorrelationTracker(extractor, cfg.tracker)
    feat_h, feat_w, _ = tracker.featdims
    model = SchedulerNetwork.from_config(cfg.scheduler, feat_h, feat_w)
    logger.info(
        f"Training on {len(train_seqs)} sequences, holding out {len(held_seqs)}; "
        f"feature maps {feat_h}x{feat_w}"
    )

    try:
        dataset = build_scheduler_dataset(train_seqs, extractor, tracker, cfg.train)
        result = train(model, dataset, cfg.train)
    except DegenerateDataset as e:
        return error(f"Cannot train: {e}", EXIT_TRAIN)
    except DortError as e:
        return error(f"Training failed: {e}", EXIT_TRAIN)

    save_checkpoint(model, out)
    curve = pd.DataFrame(
        {"epoch": range(1, len(result.losses) + 1), "loss": result.losses},
        columns=["epoch", "loss"],
    )
    curve_path = loss_curve_path(out)
    curve.to_csv(curve_path, index=False, float_format="%.10g")
    artifacts: list[Path] = [out, curve_path]

    print(f"Trained on {len(dataset)} pairs {result.class_counts}")
    print(f"Final training accuracy: {result.accuracy:.4f}")
    if held_seqs:
        held = build_scheduler_dataset(held_seqs, extractor, tracker, cfg.train)
        fp_rate, n_detect = held_out_fp_rate(model, held, cfg.pipeline.delta)
        print(
            f"Held-out false-positive rate at delta={cfg.pipeline.delta}: "
            f"{fp_rate:.4f} over {n_detect} detect-labelled pairs"
        )
    manifest.finish(manifest_path, artifacts)
    print(f"Saved checkpoint to {out}")
    return EXIT_OK


__all__ = ["cmd_train", "held_out_fp_rate", "loss_curve_path"]
