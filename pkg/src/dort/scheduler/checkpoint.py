"""Binary scheduler checkpoints with a JSON sidecar.

Layout of ``<path>``: the 8-byte magic ``DORTSCHD``, a little-endian u32
format version, then every parameter tensor as little-endian float64 in
``state_dict`` order. ``<path>.json`` holds the architecture
hyperparameters needed to rebuild the network before reading the weights.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from ..errors import CheckpointError
from ..utils.logger import get_logger
from .network import SchedulerNetwork

logger = get_logger(__name__)

MAGIC = b"DORTSCHD"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sI")


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def save_checkpoint(model: SchedulerNetwork, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, FORMAT_VERSION))
        for tensor in model.state_dict().values():
            f.write(tensor.detach().cpu().numpy().astype("<f8").tobytes())

    meta = model.hyperparameters()
    meta["format_version"] = FORMAT_VERSION
    meta["parameters"] = {k: list(v.shape) for k, v in model.state_dict().items()}
    with open(sidecar_path(path), "w") as f:
        json.dump(meta, f, indent=2)
    logger.info(
        f"Saved scheduler checkpoint ({model.num_parameters()} params) to {path}"
    )
    return path


def load_checkpoint(path: str | Path) -> SchedulerNetwork:
    """Rebuild a network from ``path`` and its sidecar.

    Raises:
        CheckpointError: Missing sidecar, bad magic or version, or a payload
            whose size disagrees with the architecture.
    """
    path = Path(path)
    meta_path = sidecar_path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    if not meta_path.exists():
        raise CheckpointError(f"checkpoint sidecar not found: {meta_path}")

    try:
        with open(meta_path) as f:
            meta = json.load(f)
        model = SchedulerNetwork(
            in_height=meta["in_height"],
            in_width=meta["in_width"],
            displacement=meta["displacement"],
            conv_channels=tuple(meta["conv_channels"]),
            kernel_size=meta["kernel_size"],
            stride=meta["stride"],
            delta=meta["delta"],
            seed=meta.get("seed", 0),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"invalid checkpoint sidecar {meta_path}: {e}") from e

    payload = path.read_bytes()
    if len(payload) < _HEADER.size:
        raise CheckpointError(f"{path} is too short to be a checkpoint")
    magic, version = _HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")

    if (len(payload) - _HEADER.size) % 8:
        raise CheckpointError(
            f"{path}: payload is not a whole number of float64 values"
        )
    values = np.frombuffer(payload, dtype="<f8", offset=_HEADER.size)
    state = model.state_dict()
    expected = sum(t.numel() for t in state.values())
    if values.size != expected:
        raise CheckpointError(
            f"{path}: holds {values.size} values, architecture needs {expected}"
        )

    offset = 0
    loaded = {}
    for name, tensor in state.items():
        n = tensor.numel()
        chunk = values[offset : offset + n].astype(np.float64).reshape(tensor.shape)
        loaded[name] = torch.from_numpy(chunk.copy())
        offset += n
    model.load_state_dict(loaded)
    return model


__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "save_checkpoint",
    "load_checkpoint",
    "sidecar_path",
]
