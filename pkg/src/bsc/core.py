"""Binomial self-compensation of motion error.

Successive datum-corrected phase frames carry the motion ripple with
alternating sign, so averaging neighbours layer by layer (Pascal's triangle)
turns the ripple amplitude into ever higher finite differences of the
motion. Averaging is done with a wrap-aware circular midpoint so phase jumps
never leak into the result.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .fringe import ImageFrame
from .kinematics import binomial_weights
from .phase import (DEFAULT_MODULATION_THRESHOLD, TWO_PI, PhaseFrame, datum_correct,
                    wrapped_phase)


class WrapEventError(ValueError):
    """The K+1 inputs of a pixel straddle a phase wrap, so a linear weighted sum is meaningless."""


def oplus(phi_a, phi_b):
    """Circular midpoint of two wrapped phases in [0, 2*pi).

    Plain average when the operands are at most pi apart, otherwise the
    average moved by half a turn. ``|a - b| == pi`` takes the plain average.
    """
    a = np.asarray(phi_a, dtype=float)
    b = np.asarray(phi_b, dtype=float)
    mid = 0.5 * (a + b)
    far = np.abs(a - b) > np.pi
    if mid.ndim == 0:
        if far:
            mid = mid + np.pi
            return float(mid - TWO_PI) if mid >= TWO_PI else float(mid)
        return float(mid)
    np.add(mid, np.pi, out=mid, where=far)
    np.subtract(mid, TWO_PI, out=mid, where=mid >= TWO_PI)
    return mid


def _check_inputs(frames: Sequence[PhaseFrame], count: int):
    if len(frames) < count:
        raise ValueError(f"need {count} phase frames, got {len(frames)}")
    frames = frames[:count]
    datum = frames[0].datum_index
    for k, f in enumerate(frames):
        if f.order_K != 0:
            raise ValueError("inputs must be raw (order 0) phase frames")
        if f.datum_index != datum:
            raise ValueError(f"mismatched datums: {datum} vs {f.datum_index}")
        if f.phase.shape != frames[0].phase.shape:
            raise ValueError("phase frames differ in size")
        if f.start_index != frames[0].start_index + k:
            raise ValueError("phase frames must be consecutive")
    return frames


def bsc_pyramid(frames: Sequence[PhaseFrame], K: int | None = None) -> PhaseFrame:
    """Order-K compensated phase from K+1 consecutive datum-corrected frames."""
    if K is None:
        K = len(frames) - 1
    if K < 0:
        raise ValueError("K must be >= 0")
    frames = _check_inputs(frames, K + 1)
    level = [(f.phase, f.valid_mask) for f in frames]
    for _ in range(K):
        level = [_midpoint(a, b) for a, b in zip(level[:-1], level[1:])]
    phase, mask = level[0]
    first = frames[0]
    return PhaseFrame(phase, mask, first.start_index, first.datum_index, K, first.steps_N)


def _midpoint(a, b):
    """(phase, mask) pair of the circular midpoint; invalid pixels come out as 0."""
    out = np.empty_like(a[0])
    mask = np.empty_like(a[1])
    _kernels.oplus_grid(a[0], b[0], a[1], b[1], out, mask)
    return out, mask


def bsc_direct(frames: Sequence[PhaseFrame], K: int) -> PhaseFrame:
    """Binomially weighted sum of K+1 phase frames; valid only away from phase wraps.

    Serves as an independent check on :func:`bsc_pyramid`.
    """
    frames = _check_inputs(frames, K + 1)
    stack = np.stack([f.phase for f in frames])
    mask = np.logical_and.reduce([f.valid_mask for f in frames])
    spread = stack.max(axis=0) - stack.min(axis=0)
    bad = (spread > np.pi) & mask
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise WrapEventError(f"phase values at pixel (row={r}, col={c}) span {spread[r, c]:.4f} rad > pi")
    w = binomial_weights(K)
    # weight C(K,k) belongs to frame i+K-k; the row is symmetric
    phase = np.tensordot(w[::-1], stack, axes=1)
    phase[~mask] = 0.0
    first = frames[0]
    return PhaseFrame(phase, mask, first.start_index, first.datum_index, K, first.steps_N)


def compensate_phases(raw: Sequence[PhaseFrame], K: int) -> list[PhaseFrame]:
    """Run the pyramid over every run of K+1 consecutive raw phases."""
    return [bsc_pyramid(raw[i:i + K + 1], K) for i in range(len(raw) - K)]


def compensate(frames: Sequence[ImageFrame], steps_N: int, K: int,
               threshold: float = DEFAULT_MODULATION_THRESHOLD) -> list[PhaseFrame]:
    """Batch pipeline: images -> datum-corrected raw phases -> order-K phases.

    ``len(frames) - K - N + 1`` outputs; output ``j`` uses images ``j .. j+K+N-1``.
    """
    if len(frames) < K + steps_N:
        raise ValueError(f"need at least K+N={K + steps_N} frames, got {len(frames)}")
    raw = [datum_correct(p, p.start_index) for p in
           (wrapped_phase(frames[t:t + steps_N], steps_N, threshold)
            for t in range(len(frames) - steps_N + 1))]
    return compensate_phases(raw, K)


@dataclass
class StreamState:
    """Ring buffers for frame-by-frame compensation.

    Holds the last N images and, for every pyramid level, the newest
    one or two phase grids needed to extend that level by one entry.
    Single owner: push frames from one thread only.
    """

    steps_N: int = 4
    K: int = 4
    threshold: float = DEFAULT_MODULATION_THRESHOLD
    images: deque = field(init=False)
    levels: list = field(init=False)
    last_index: int | None = field(default=None, init=False)

    def __post_init__(self):
        if self.steps_N not in (3, 4):
            raise ValueError("steps_N must be 3 or 4")
        if self.K < 0:
            raise ValueError("K must be >= 0")
        self.images = deque(maxlen=self.steps_N)
        # levels[k] holds (phase, mask, start_index) tuples of order k
        self.levels = [deque(maxlen=2) for _ in range(self.K + 1)]

    @property
    def warmup(self) -> int:
        """Number of pushes before the first output."""
        return self.K + self.steps_N

    def reset(self):
        self.images.clear()
        for lv in self.levels:
            lv.clear()
        self.last_index = None

    def push(self, frame: ImageFrame) -> PhaseFrame | None:
        return stream_push(self, frame)


def stream_push(state: StreamState, frame: ImageFrame) -> PhaseFrame | None:
    """Feed one image; returns an order-K phase once K+N images have been seen."""
    if state.last_index is not None and frame.frame_index != state.last_index + 1:
        raise ValueError(f"out-of-order frame: expected {state.last_index + 1}, got {frame.frame_index}")
    state.last_index = frame.frame_index
    state.images.append(frame)
    if len(state.images) < state.steps_N:
        return None

    raw = wrapped_phase(list(state.images), state.steps_N, state.threshold)
    raw = datum_correct(raw, raw.start_index)
    state.levels[0].append(((raw.phase, raw.valid_mask), raw.start_index))
    for k in range(state.K):
        lower = state.levels[k]
        if len(lower) < 2:
            return None
        (pa, sa), (pb, _) = lower
        state.levels[k + 1].append((_midpoint(pa, pb), sa))

    (phase, mask), start = state.levels[state.K][-1]
    # level grids are read-only once wrapped in a PhaseFrame, so sharing them is safe
    return PhaseFrame(phase, mask, start, raw.datum_index, state.K, state.steps_N)


def stream(frames: Iterable[ImageFrame], steps_N: int, K: int,
           threshold: float = DEFAULT_MODULATION_THRESHOLD) -> list[PhaseFrame]:
    """Convenience wrapper: push every frame and collect the outputs."""
    state = StreamState(steps_N, K, threshold)
    outputs = []
    for f in frames:
        p = stream_push(state, f)
        if p is not None:
            outputs.append(p)
    return outputs
