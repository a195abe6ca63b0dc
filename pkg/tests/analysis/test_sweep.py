"""Tests for the mode/stride sweep."""

from unittest.mock import patch

import pandas as pd
import pytest

from dort.analysis.sweep import (
    RESULT_COLUMNS,
    oracle_violations,
    run_sweep,
    sequence_row,
    split_mode,
    worker_count,
)
from dort.scheduler.network import SchedulerNetwork
from dort.synthdata.scene import generate
from dort.types import Action


@pytest.fixture
def sequences(static_scene, exit_scene):
    return [generate(static_scene), generate(exit_scene)]


class TestWorkerCount:
    def test_explicit_request(self):
        assert worker_count(3) == 3
        assert worker_count(0) == 1

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("DORT_THREADS", "2")
        assert worker_count() == 2

    def test_bad_environment_falls_back(self, monkeypatch):
        monkeypatch.setenv("DORT_THREADS", "lots")
        assert worker_count() >= 1


def test_split_mode():
    assert split_mode("fixed-crop") == ("fixed", "crop")
    assert split_mode("dort") == ("dort", "roi")
    with pytest.raises(ValueError):
        split_mode("random")


def test_oracle_violations():
    table = pd.DataFrame(
        [
            {"mode": "fixed", "sigma": 1, "tracklet_map": 0.8},
            {"mode": "fixed", "sigma": 5, "tracklet_map": 0.6},
            {"mode": "oracle", "sigma": 1, "tracklet_map": 0.9},
            {"mode": "oracle", "sigma": 5, "tracklet_map": 0.5},
        ]
    )
    assert oracle_violations(table) == [5]
    assert oracle_violations(table[table["mode"] == "fixed"]) == []
    assert oracle_violations(pd.DataFrame()) == []


class TestRunSweep:
    """End-to-end sweeps on two short sequences."""

    def test_rows_in_mode_then_sigma_order(self, sequences, quick_config):
        result = run_sweep(sequences, [1, 3], ["fixed", "oracle"], quick_config)
        table = result.table
        assert list(table.columns) == RESULT_COLUMNS
        assert list(zip(table["mode"], table["sigma"], strict=True)) == [
            ("fixed", 1),
            ("fixed", 3),
            ("oracle", 1),
            ("oracle", 3),
        ]
        # 6 + 8 frames in every configuration
        assert ((table["n_detect"] + table["n_track"]) == 14).all()
        assert len(result.runs) == 4

    def test_all_detect_throughput(self, sequences, quick_config):
        table = run_sweep(sequences, [1], ["fixed"], quick_config).table
        assert table.loc[0, "fps"] == pytest.approx(8.23, abs=0.005)
        assert table.loc[0, "n_track"] == 0

    def test_configurations_see_identical_detections(self, sequences, quick_config):
        result = run_sweep(sequences, [1], ["fixed", "fixed-crop"], quick_config)
        a = result.runs[("fixed", 1)]
        b = result.runs[("fixed-crop", 1)]
        # all-detect runs never track, so the tracker variant cannot matter
        for ra, rb in zip(a, b, strict=True):
            assert ra.boxes == rb.boxes

    def test_dort_needs_scheduler(self, sequences, quick_config):
        with pytest.raises(ValueError, match="scheduler"):
            run_sweep(sequences, [1], ["dort"], quick_config)

    def test_unknown_mode(self, sequences, quick_config):
        with pytest.raises(ValueError):
            run_sweep(sequences, [1], ["sometimes"], quick_config)

    def test_empty_grid(self, sequences, quick_config):
        result = run_sweep(sequences, [], ["fixed"], quick_config)
        assert result.table.empty
        assert list(result.table.columns) == RESULT_COLUMNS

    def test_dort_confusion_counts_consultations(self, sequences, quick_config):
        scheduler = SchedulerNetwork(14, 22, seed=0)
        with patch("dort.core.pipeline.schedule", return_value=(0.99, Action.TRACK)):
            result = run_sweep(
                sequences, [2], ["dort"], quick_config, scheduler=scheduler
            )
        consulted = sum(r.n_consulted for r in result.runs[("dort", 2)])
        matrix = result.confusions[("dort", 2)]
        assert matrix.total == consulted
        # every prediction is track
        assert matrix.matrix[int(Action.DETECT)].sum() == 0


def test_sequence_row(sequences, quick_config):
    result = run_sweep(sequences[:1], [1], ["fixed"], quick_config)
    seq_result = result.runs[("fixed", 1)][0]
    row = sequence_row(sequences[0], seq_result, "fixed")
    assert row["sequence"] == "static"
    assert row["n_detect"] == 6
    assert row["fps"] == pytest.approx(8.23, abs=0.005)
    assert 0.0 <= row["box_map"] <= 1.0
