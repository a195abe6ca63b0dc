"""Unit tests for scheduler checkpoints."""

import json

import pytest
import torch

from dort.errors import CheckpointError
from dort.scheduler.checkpoint import (
    MAGIC,
    load_checkpoint,
    save_checkpoint,
    sidecar_path,
)
from dort.scheduler.network import SchedulerNetwork


@pytest.fixture
def model():
    return SchedulerNetwork(
        7, 9, displacement=1, conv_channels=(2, 3), seed=5, delta=0.9
    )


class TestCheckpointRoundTrip:
    def test_weights_and_architecture_survive(self, tmp_path, model):
        path = save_checkpoint(model, tmp_path / "ckpt" / "scheduler.bin")
        assert path.read_bytes().startswith(MAGIC)
        loaded = load_checkpoint(path)
        assert loaded.hyperparameters() == model.hyperparameters()
        for (name, a), b in zip(
            model.state_dict().items(), loaded.state_dict().values(), strict=True
        ):
            assert torch.equal(a, b), name

    def test_sidecar_lists_parameters(self, tmp_path, model):
        path = save_checkpoint(model, tmp_path / "s.bin")
        meta = json.loads(sidecar_path(path).read_text())
        assert meta["format_version"] == 1
        assert meta["parameters"]["fc.bias"] == [2]
        assert sidecar_path(path).name == "s.bin.json"


class TestCorruptCheckpoints:
    """Test that damaged checkpoints raise CheckpointError."""

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError, match="not found"):
            load_checkpoint(tmp_path / "absent.bin")

    def test_missing_sidecar(self, tmp_path, model):
        path = save_checkpoint(model, tmp_path / "s.bin")
        sidecar_path(path).unlink()
        with pytest.raises(CheckpointError, match="sidecar"):
            load_checkpoint(path)

    def test_bad_magic(self, tmp_path, model):
        path = save_checkpoint(model, tmp_path / "s.bin")
        data = path.read_bytes()
        path.write_bytes(b"NOTDORT!" + data[8:])
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(path)

    def test_truncated_payload(self, tmp_path, model):
        path = save_checkpoint(model, tmp_path / "s.bin")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(CheckpointError, match="architecture needs"):
            load_checkpoint(path)

    def test_partial_value(self, tmp_path, model):
        path = save_checkpoint(model, tmp_path / "s.bin")
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_sidecar_for_other_architecture(self, tmp_path, model):
        path = save_checkpoint(model, tmp_path / "s.bin")
        meta = json.loads(sidecar_path(path).read_text())
        meta["conv_channels"] = [4, 4]
        sidecar_path(path).write_text(json.dumps(meta))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_unreadable_sidecar(self, tmp_path, model):
        path = save_checkpoint(model, tmp_path / "s.bin")
        sidecar_path(path).write_text("{not json")
        with pytest.raises(CheckpointError, match="invalid checkpoint sidecar"):
            load_checkpoint(path)
