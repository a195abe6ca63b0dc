"""On-disk dataset layout and CSV/PPM I/O.

Layout of one dataset root::

    <root>/<seq>/frames/000001.ppm ...   grayscale frames stored as binary PPM
    <root>/<seq>/gt.csv                  ground truth
    <root>/<seq>/scene.json              scene script the sequence came from
    <root>/<seq>/det_<seed>.csv          cached detections for a detector seed

Box tables share one header, ``frame_id,object_id,class_id,x,y,w,h,score``,
and are sorted by ``(frame_id, object_id)``. Floats are written with
``repr`` so a save/load cycle is lossless. An empty ``object_id`` marks a
detection that has not been associated.
"""

from __future__ import annotations

import re
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from PIL import Image

from ..errors import MissingFrame, ParseError
from ..geometry import BoundingBox, Rect
from ..types import Action, DecisionRecord, DecisionSource
from ..utils.logger import get_logger
from .scene import SceneSpec, SyntheticSequence

logger = get_logger(__name__)

BOX_COLUMNS = ["frame_id", "object_id", "class_id", "x", "y", "w", "h", "score"]
DECISION_COLUMNS = [
    "frame_id",
    "source",
    "p_track",
    "action",
    "keyframe",
    "n_boxes",
    "oracle_action",
]
FRAME_PATTERN = "{:06d}.ppm"
GT_FILE = "gt.csv"
SCENE_FILE = "scene.json"
FRAMES_DIR = "frames"


def detections_file(seed: int) -> str:
    return f"det_{seed}.csv"


def _sort_key(box: BoundingBox) -> tuple[int, int]:
    return (box.fid, -1 if box.id is None else box.id)


def boxes_to_frame(boxes: Sequence[BoundingBox]) -> pd.DataFrame:
    """Box list as a string-valued DataFrame ready for ``to_csv``."""
    rows = [
        {
            "frame_id": str(b.fid),
            "object_id": "" if b.id is None else str(b.id),
            "class_id": str(b.class_id),
            "x": repr(b.rect.x),
            "y": repr(b.rect.y),
            "w": repr(b.rect.w),
            "h": repr(b.rect.h),
            "score": repr(b.score),
        }
        for b in sorted(boxes, key=_sort_key)
    ]
    return pd.DataFrame(rows, columns=BOX_COLUMNS)


def _read_table(path: Path, columns: list[str]) -> pd.DataFrame:
    if not path.exists():
        raise FileNotFoundError(f"table not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise ParseError("missing header row", line=1, path=str(path)) from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise ParseError(str(e), line=line, path=str(path)) from e
    if list(df.columns) != columns:
        raise ParseError(
            f"expected header {','.join(columns)}, "
            f"got {','.join(map(str, df.columns))}",
            line=1,
            path=str(path),
        )
    return df


def _field(
    row: dict[str, Any],
    name: str,
    conv: Callable[[str], Any],
    line: int,
    path: Path,
) -> Any:
    value = row[name]
    if not isinstance(value, str) or value == "":
        raise ParseError(f"missing value for {name}", line=line, path=str(path))
    try:
        return conv(value)
    except ValueError as e:
        message = f"bad {name} {value!r}: {e}"
        raise ParseError(message, line=line, path=str(path)) from e


def _optional(
    row: dict[str, Any],
    name: str,
    conv: Callable[[str], Any],
    line: int,
    path: Path,
) -> Any:
    return None if row[name] == "" else _field(row, name, conv, line, path)


def frame_to_boxes(
    df: pd.DataFrame, path: Path = Path("<table>")
) -> list[BoundingBox]:
    boxes = []
    # header is line 1
    for line, row in enumerate(df.to_dict("records"), start=2):
        try:
            boxes.append(
                BoundingBox(
                    rect=Rect(
                        _field(row, "x", float, line, path),
                        _field(row, "y", float, line, path),
                        _field(row, "w", float, line, path),
                        _field(row, "h", float, line, path),
                    ),
                    fid=_field(row, "frame_id", int, line, path),
                    score=_field(row, "score", float, line, path),
                    id=_optional(row, "object_id", int, line, path),
                    class_id=_field(row, "class_id", int, line, path),
                )
            )
        except ParseError:
            raise
        except ValueError as e:
            raise ParseError(str(e), line=line, path=str(path)) from e
    return boxes


def save_boxes(path: str | Path, boxes: Sequence[BoundingBox]) -> Path:
    """Write a box table; an empty list gives a header-only file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    boxes_to_frame(boxes).to_csv(path, index=False)
    return path


def load_boxes(path: str | Path) -> list[BoundingBox]:
    """Read a box table.

    Raises:
        ParseError: Bad header or a malformed row (``line`` is 1-based).
        FileNotFoundError: ``path`` does not exist.
    """
    path = Path(path)
    return frame_to_boxes(_read_table(path, BOX_COLUMNS), path)


def save_decisions(path: str | Path, decisions: Sequence[DecisionRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame([d.to_row() for d in decisions], columns=DECISION_COLUMNS)
    df.to_csv(path, index=False)
    return path


def load_decisions(path: str | Path) -> list[DecisionRecord]:
    path = Path(path)
    df = _read_table(path, DECISION_COLUMNS)
    records = []
    for line, row in enumerate(df.to_dict("records"), start=2):
        try:
            records.append(
                DecisionRecord(
                    frame_id=_field(row, "frame_id", int, line, path),
                    source=_field(row, "source", DecisionSource, line, path),
                    action=_field(row, "action", Action.parse, line, path),
                    p_track=_optional(row, "p_track", float, line, path),
                    keyframe=_field(row, "keyframe", int, line, path),
                    n_boxes=_field(row, "n_boxes", int, line, path),
                    oracle_action=_optional(
                        row, "oracle_action", Action.parse, line, path
                    ),
                )
            )
        except ParseError:
            raise
        except ValueError as e:
            raise ParseError(str(e), line=line, path=str(path)) from e
    return records


def save_frames(frame_dir: str | Path, frames: Sequence[np.ndarray]) -> Path:
    """Write uint8 grayscale frames as ``000001.ppm``, ``000002.ppm``, ...

    Each gray value is repeated in R, G and B so the files are real P6
    pixmaps; :func:`load_frames` folds them back to one channel losslessly.
    """
    frame_dir = Path(frame_dir)
    frame_dir.mkdir(parents=True, exist_ok=True)
    for fid, frame in enumerate(frames, start=1):
        arr = np.asarray(frame)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        image = Image.fromarray(arr.astype(np.uint8)).convert("RGB")
        image.save(frame_dir / FRAME_PATTERN.format(fid))
    return frame_dir


def load_frames(
    frame_dir: str | Path, num_frames: int | None = None
) -> list[np.ndarray]:
    """Read frames ``1..N`` in order.

    Raises:
        MissingFrame: The directory is absent or empty, or a frame number in
            ``1..N`` has no file (N is ``num_frames`` or the highest index
            found).
    """
    frame_dir = Path(frame_dir)
    if not frame_dir.is_dir():
        raise MissingFrame(f"frame directory not found: {frame_dir}")
    found = {}
    for p in frame_dir.glob("*.ppm"):
        if p.stem.isdigit():
            found[int(p.stem)] = p
    if not found:
        raise MissingFrame(f"no frames in {frame_dir}")
    last = num_frames if num_frames is not None else max(found)
    frames = []
    for fid in range(1, last + 1):
        if fid not in found:
            raise MissingFrame(f"frame {fid} missing from {frame_dir}")
        with Image.open(found[fid]) as image:
            frames.append(np.asarray(image.convert("L"), dtype=np.uint8))
    return frames


def write_sequence(root: str | Path, sequence: SyntheticSequence) -> Path:
    seq_dir = Path(root) / sequence.name
    save_frames(seq_dir / FRAMES_DIR, sequence.frames)
    save_boxes(seq_dir / GT_FILE, sequence.groundtruth)
    if sequence.spec is not None:
        (seq_dir / SCENE_FILE).write_text(sequence.spec.model_dump_json(indent=2))
    logger.debug(f"Wrote {sequence.name} ({sequence.num_frames} frames) to {seq_dir}")
    return seq_dir


def read_sequence(seq_dir: str | Path, require_gt: bool = True) -> SyntheticSequence:
    """Load one sequence directory; ground truth may be absent when not required."""
    seq_dir = Path(seq_dir)
    frames = load_frames(seq_dir / FRAMES_DIR)
    gt_path = seq_dir / GT_FILE
    if gt_path.exists():
        groundtruth = load_boxes(gt_path)
    elif require_gt:
        raise FileNotFoundError(f"ground truth not found: {gt_path}")
    else:
        groundtruth = []
    spec_path = seq_dir / SCENE_FILE
    spec = None
    if spec_path.exists():
        spec = SceneSpec.model_validate_json(spec_path.read_text())
    return SyntheticSequence(
        name=seq_dir.name, frames=frames, groundtruth=groundtruth, spec=spec
    )


def list_sequences(root: str | Path) -> list[str]:
    """Names of the sequence directories under ``root``, sorted."""
    root = Path(root)
    if not root.is_dir():
        return []
    return sorted(p.name for p in root.iterdir() if (p / FRAMES_DIR).is_dir())


def list_result_sequences(root: str | Path) -> list[str]:
    """Names of per-sequence result directories (those holding ``results.csv``)."""
    root = Path(root)
    if not root.is_dir():
        return []
    return sorted(p.name for p in root.iterdir() if (p / "results.csv").is_file())


__all__ = [
    "BOX_COLUMNS",
    "DECISION_COLUMNS",
    "detections_file",
    "boxes_to_frame",
    "save_boxes",
    "load_boxes",
    "save_decisions",
    "load_decisions",
    "save_frames",
    "load_frames",
    "write_sequence",
    "read_sequence",
    "list_sequences",
    "list_result_sequences",
]
