import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsc.core import (StreamState, WrapEventError, bsc_direct, bsc_pyramid, compensate, oplus,
                      stream, stream_push)
from bsc.fringe import FringeConfig, NoiseConfig, ramp_phase, render_sequence
from bsc.kinematics import MotionProfile, sample_offsets
from bsc.phase import TWO_PI, PhaseFrame, circular_distance, wrapped_phase

angles = st.floats(0.0, TWO_PI, exclude_max=True)


def _unit_vector_mean(a, b):
    return np.mod(np.arctan2(np.sin(a) + np.sin(b), np.cos(a) + np.cos(b)), TWO_PI)


def _grid_frames(values, start=0):
    return [PhaseFrame(np.asarray(v, dtype=float), np.ones(np.shape(v), bool), start + k, 0)
            for k, v in enumerate(values)]


def test_oplus_examples():
    assert oplus(1.0, 1.2) == pytest.approx(1.1)
    assert oplus(2.5, 2.5) == 2.5
    expected = _unit_vector_mean(0.1, 6.2)
    assert oplus(0.1, 6.2) == pytest.approx(expected, abs=1e-12)
    assert oplus(0.1, 6.2) == pytest.approx(0.0084, abs=1e-4)


@settings(max_examples=300, deadline=None)
@given(angles, angles)
def test_oplus_properties(a, b):
    m = oplus(a, b)
    assert m == oplus(b, a)
    assert 0.0 <= m < TWO_PI
    if abs(abs(a - b) - np.pi) > 1e-6:
        assert circular_distance(m, _unit_vector_mean(a, b)) < 1e-9
    # equidistant from both operands on the circle
    assert circular_distance(m, a) == pytest.approx(circular_distance(m, b), abs=1e-9)


def test_pyramid_identity_and_static():
    rng = np.random.default_rng(0)
    g = rng.uniform(0, TWO_PI, (5, 6))
    out = bsc_pyramid(_grid_frames([g]), 0)
    assert np.array_equal(out.phase, g)
    out2 = bsc_pyramid(_grid_frames([g, g, g]), 2)
    assert np.array_equal(out2.phase, g)
    assert out2.order_K == 2


@pytest.mark.parametrize("K", [1, 2, 3, 4, 5, 6])
def test_pyramid_matches_direct_on_wrap_free_inputs(K):
    rng = np.random.default_rng(K)
    vals = [rng.uniform(np.pi / 2, 3 * np.pi / 2, (7, 9)) for _ in range(K + 1)]
    a = bsc_pyramid(_grid_frames(vals), K)
    b = bsc_direct(_grid_frames(vals), K)
    assert np.abs(a.phase - b.phase).max() <= 1e-12
    if K == 3:
        manual = (vals[0] + 3 * vals[1] + 3 * vals[2] + vals[3]) / 8
        assert np.abs(a.phase - manual).max() <= 1e-12


def test_direct_examples():
    assert bsc_direct(_grid_frames([[[1.0]], [[1.2]]]), 1).phase[0, 0] == pytest.approx(1.1)
    assert bsc_direct(_grid_frames([[[0.4]]] * 3), 2).phase[0, 0] == pytest.approx(0.4)


def test_direct_names_wrap_pixel():
    a = np.full((3, 4), 1.0)
    b = a.copy()
    b[2, 1] = 5.0
    with pytest.raises(WrapEventError, match=r"row=2, col=1"):
        bsc_direct(_grid_frames([a, b]), 1)


def test_pyramid_handles_wraps():
    a = np.full((1, 1), 0.05)
    b = np.full((1, 1), TWO_PI - 0.05)
    out = bsc_pyramid(_grid_frames([a, b]), 1)
    assert circular_distance(out.phase[0, 0], 0.0) < 1e-12


def test_invalid_pixels_propagate():
    a = PhaseFrame(np.ones((2, 2)), np.array([[True, False], [True, True]]), 0, 0)
    b = PhaseFrame(np.ones((2, 2)), np.array([[True, True], [False, True]]), 1, 0)
    out = bsc_pyramid([a, b], 1)
    assert out.valid_mask.tolist() == [[True, False], [False, True]]
    assert out.phase[0, 1] == 0.0


def test_pyramid_input_errors():
    g = np.zeros((2, 2))
    with pytest.raises(ValueError):
        bsc_pyramid(_grid_frames([g]), 1)
    with pytest.raises(ValueError):
        bsc_pyramid([PhaseFrame(g, g == 0, 0, 0), PhaseFrame(g, g == 0, 1, 1)], 1)
    with pytest.raises(ValueError):
        bsc_pyramid([PhaseFrame(g, g == 0, 0, 0), PhaseFrame(g, g == 0, 2, 0)], 1)
    with pytest.raises(ValueError):
        bsc_pyramid(_grid_frames([g]), -1)


def _sequence(count, velocity=0.03, N=4, noise=None):
    phi = ramp_phase(24, 6, 24.0)
    offs = sample_offsets(MotionProfile.linear(velocity), count)
    return render_sequence(FringeConfig(steps_N=N), phi, offs, count, noise)


def test_stream_warmup_n4_k4():
    state = StreamState(4, 4)
    outs = [stream_push(state, f) for f in _sequence(12)]
    assert state.warmup == 8
    assert all(o is None for o in outs[:7])
    assert all(o is not None for o in outs[7:])
    assert outs[7].start_index == 0 and outs[-1].start_index == 4


def test_stream_k0_is_raw_phase():
    frames = _sequence(6)
    outs = stream(frames, 4, 0)
    assert len(outs) == 3
    raw = wrapped_phase(frames[:4], 4)
    assert np.array_equal(outs[0].phase, raw.phase)


def test_stream_rejects_out_of_order():
    frames = _sequence(5)
    state = StreamState(4, 1)
    stream_push(state, frames[0])
    with pytest.raises(ValueError, match="out-of-order"):
        stream_push(state, frames[2])


def test_stream_reset():
    frames = _sequence(10)
    state = StreamState(3, 2)
    first = [state.push(f) for f in frames]
    state.reset()
    second = [state.push(f) for f in frames]
    assert all((a is None) == (b is None) for a, b in zip(first, second))
    assert all(np.array_equal(a.phase, b.phase) for a, b in zip(first, second) if a is not None)


@pytest.mark.parametrize("N,K", [(3, 0), (3, 3), (4, 2), (4, 6)])
def test_stream_matches_batch(N, K):
    frames = _sequence(40, 0.07, N, NoiseConfig(1.0, 8, 4))
    s, b = stream(frames, N, K), compensate(frames, N, K)
    assert len(s) == len(b) == 40 - K - N + 1
    for x, y in zip(s, b):
        assert np.array_equal(x.phase, y.phase) and np.array_equal(x.valid_mask, y.valid_mask)


def test_compensate_needs_enough_frames():
    with pytest.raises(ValueError):
        compensate(_sequence(6), 4, 3)


def test_state_validation():
    with pytest.raises(ValueError):
        StreamState(5, 1)
    with pytest.raises(ValueError):
        StreamState(4, -1)
