"""Unit tests for the scheduler network and its decision rule."""

import math

import numpy as np
import pytest
import torch

from dort.core.featmap import conv2d_valid
from dort.errors import ShapeMismatch
from dort.scheduler.correlation import correlation_layer
from dort.scheduler.network import (
    SchedulerNetwork,
    SchedulerState,
    correlation_batch,
    reward,
    schedule,
    state_transition,
    track_probability,
)
from dort.scheduler.training import compute_loss
from dort.types import Action


def _tiny(seed=0, delta=0.97):
    return SchedulerNetwork(
        7, 7, displacement=1, conv_channels=(2, 3), seed=seed, delta=delta
    )


def _pin_probability(model, p_track):
    """Zero the classifier weights so the output is ``p_track`` for any input."""
    with torch.no_grad():
        model.fc.weight.zero_()
        model.fc.bias.copy_(torch.tensor([0.0, math.log(p_track / (1.0 - p_track))]))


class TestArchitecture:
    """Test construction and shapes."""

    def test_default_parameter_count(self):
        model = SchedulerNetwork(14, 22)
        conv1 = 49 * 32 * 9 + 32
        conv2 = 32 * 32 * 9 + 32
        fc = 32 * 2 * 4 * 2 + 2
        assert model.num_parameters() == conv1 + conv2 + fc
        assert model.in_channels == 49

    def test_forward_shape_and_dtype(self, rng):
        model = _tiny()
        x = torch.from_numpy(rng.standard_normal((5, 9, 7, 7)))
        out = model(x)
        assert out.shape == (5, 2)
        assert out.dtype == torch.float64

    def test_too_small_input(self):
        with pytest.raises(ShapeMismatch):
            SchedulerNetwork(4, 4)

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            SchedulerNetwork(14, 22, delta=1.0)

    def test_seeded_init(self):
        a, b, c = _tiny(seed=1), _tiny(seed=1), _tiny(seed=2)
        for pa, pb in zip(a.parameters(), b.parameters(), strict=True):
            assert torch.equal(pa, pb)
        assert not torch.equal(a.conv1.weight, c.conv1.weight)

    def test_init_leaves_global_rng_alone(self):
        torch.manual_seed(123)
        expected = torch.rand(3)
        torch.manual_seed(123)
        _tiny(seed=9)
        assert torch.equal(torch.rand(3), expected)

    def test_hyperparameters(self):
        hp = _tiny(delta=0.9).hyperparameters()
        assert hp["in_height"] == 7
        assert hp["conv_channels"] == [2, 3]
        assert hp["delta"] == 0.9

    def test_numpy_convolutions_match_torch(self, rng):
        model = _tiny()
        corr = correlation_layer(rng.random((7, 7, 4)), rng.random((7, 7, 4)), 1)
        conv1, conv2 = model.as_conv_layers()
        expected = conv2d_valid(conv2d_valid(corr.data, conv1), conv2)
        with torch.no_grad():
            x = correlation_batch([corr])
            got = torch.relu(model.conv2(torch.relu(model.conv1(x))))[0]
        np.testing.assert_allclose(got.numpy().transpose(1, 2, 0), expected, atol=1e-12)


class TestGradients:
    """Test backprop against central differences."""

    def test_central_differences(self, rng):
        model = _tiny(seed=3)
        x = torch.from_numpy(rng.standard_normal((4, 9, 7, 7)))
        y = torch.tensor([0, 1, 1, 0])
        weights = torch.tensor([0.7, 1.6], dtype=torch.float64)

        model.zero_grad()
        compute_loss(model, x, y, weights).backward()
        h = 1e-6
        for name, param in model.named_parameters():
            analytic = param.grad.detach().clone().numpy().ravel()
            numeric = np.zeros_like(analytic)
            flat = param.data.view(-1)
            for k in range(flat.numel()):
                original = flat[k].item()
                with torch.no_grad():
                    flat[k] = original + h
                    plus = compute_loss(model, x, y, weights).item()
                    flat[k] = original - h
                    minus = compute_loss(model, x, y, weights).item()
                    flat[k] = original
                numeric[k] = (plus - minus) / (2.0 * h)
            np.testing.assert_allclose(
                analytic, numeric, rtol=1e-4, atol=1e-7, err_msg=name
            )


class TestSchedule:
    """Test the threshold decision rule."""

    def _state(self, rng):
        a = rng.random((7, 7, 3))
        return SchedulerState(keyframe_feature=a, current_feature=a.copy())

    def test_track_above_delta(self, rng):
        model = _tiny()
        _pin_probability(model, 0.98)
        p, action = schedule(model, self._state(rng), 0.97)
        assert p == pytest.approx(0.98)
        assert action == Action.TRACK

    def test_detect_below_delta(self, rng):
        model = _tiny()
        _pin_probability(model, 0.96)
        assert schedule(model, self._state(rng), 0.97)[1] == Action.DETECT

    def test_tie_goes_to_track(self, rng):
        model = _tiny()
        _pin_probability(model, 0.5)
        p, action = schedule(model, self._state(rng), 0.5)
        assert p == 0.5
        assert action == Action.TRACK

    def test_raising_delta_never_adds_tracks(self, rng):
        model = _tiny()
        deltas = [0.05, 0.3, 0.5, 0.7, 0.9, 0.97, 0.99]
        for _ in range(20):
            a = rng.random((7, 7, 3))
            state = SchedulerState(a, rng.random((7, 7, 3)))
            tracks = [schedule(model, state, d)[1] == Action.TRACK for d in deltas]
            assert tracks == sorted(tracks, reverse=True)

    def test_model_delta_is_default(self, rng):
        model = _tiny(delta=0.99)
        _pin_probability(model, 0.98)
        assert schedule(model, self._state(rng))[1] == Action.DETECT

    def test_probability_in_unit_interval(self, rng):
        model = _tiny()
        corr = correlation_layer(rng.random((7, 7, 3)), rng.random((7, 7, 3)), 1)
        assert 0.0 <= track_probability(model, corr) <= 1.0

    def test_wrong_displacement(self, rng):
        model = _tiny()
        corr = correlation_layer(rng.random((7, 7, 3)), rng.random((7, 7, 3)), 2)
        with pytest.raises(ShapeMismatch):
            track_probability(model, corr)

    def test_wrong_size(self, rng):
        model = _tiny()
        corr = correlation_layer(rng.random((8, 7, 3)), rng.random((8, 7, 3)), 1)
        with pytest.raises(ShapeMismatch):
            track_probability(model, corr)


class TestStateTransition:
    def test_detect_promotes_current_to_keyframe(self, rng):
        f1, f2, f3 = (rng.random((3, 3, 2)) for _ in range(3))
        s = SchedulerState(f1, f2, keyframe_index=1, current_index=2)
        nxt = state_transition(s, Action.DETECT, f3)
        assert nxt.keyframe_feature is f2
        assert nxt.current_feature is f3
        assert (nxt.keyframe_index, nxt.current_index) == (2, 3)

    def test_track_keeps_keyframe(self, rng):
        f1, f2, f3 = (rng.random((3, 3, 2)) for _ in range(3))
        s = SchedulerState(f1, f2, keyframe_index=1, current_index=2)
        nxt = state_transition(s, Action.TRACK, f3)
        assert nxt.keyframe_feature is f1
        assert (nxt.keyframe_index, nxt.current_index) == (1, 3)

    def test_shapes_must_agree(self, rng):
        with pytest.raises(ShapeMismatch):
            SchedulerState(rng.random((3, 3, 2)), rng.random((3, 4, 2)))


def test_reward():
    assert reward(Action.TRACK, Action.TRACK) == 1
    assert reward(Action.DETECT, Action.TRACK) == 0
