"""Wrapped phase from three or four successive pi/2-shifted frames."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .fringe import ImageFrame

TWO_PI = 2 * np.pi
HALF_PI = np.pi / 2
DEFAULT_MODULATION_THRESHOLD = 5.0


def wrap_2pi(phase, out=None):
    """Map angles into [0, 2*pi). ``np.mod`` can round tiny negatives up to 2*pi; those become 0."""
    r = np.mod(phase, TWO_PI, out=out)
    if np.ndim(r) == 0:
        return 0.0 if r >= TWO_PI else float(r)
    r[r >= TWO_PI] = 0.0
    return r


def wrap_pi(phase):
    """Map angles into (-pi, pi]."""
    r = np.pi - np.mod(np.pi - np.asarray(phase, dtype=float), TWO_PI)
    return r if np.ndim(r) else float(r)


def circular_distance(a, b):
    """Absolute angular distance in [0, pi]."""
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b), TWO_PI))
    return np.minimum(d, TWO_PI - d)


@dataclass(frozen=True, eq=False)
class PhaseFrame:
    """Wrapped phase grid in [0, 2*pi).

    ``start_index`` is the capture index of the first image of the window.
    ``datum_index`` is the frame whose pattern phase the values refer to: a
    raw window phase refers to its own first frame, and datum correction
    moves every window onto frame 0.
    """

    phase: np.ndarray
    valid_mask: np.ndarray
    start_index: int
    datum_index: int
    order_K: int = 0
    steps_N: int = 4

    def __post_init__(self):
        if self.phase.shape != self.valid_mask.shape or self.phase.ndim != 2:
            raise ValueError("phase and valid_mask must be 2-D grids of equal shape")
        self.phase.setflags(write=False)
        self.valid_mask.setflags(write=False)

    @property
    def height(self) -> int:
        return self.phase.shape[0]

    @property
    def width(self) -> int:
        return self.phase.shape[1]

    @property
    def last_index(self) -> int:
        """Capture index of the last image this frame depends on."""
        return self.start_index + self.order_K + self.steps_N - 1


def _check_window(frames: Sequence[ImageFrame], steps_N: int):
    if steps_N not in (3, 4):
        raise ValueError(f"steps_N must be 3 or 4, got {steps_N}")
    if len(frames) != steps_N:
        raise ValueError(f"need exactly {steps_N} frames, got {len(frames)}")
    first = frames[0].frame_index
    for k, f in enumerate(frames):
        if f.frame_index != first + k:
            raise ValueError(f"frame indices must be consecutive, got {[f.frame_index for f in frames]}")
        if f.intensity.shape != frames[0].intensity.shape:
            raise ValueError("frame dimensions differ")


def _sin_cos(images: Sequence[np.ndarray], steps_N: int):
    if steps_N == 4:
        return images[1] - images[3], images[0] - images[2]
    return 2 * images[1] - images[0] - images[2], images[0] - images[2]


def modulation_from_sc(S, C):
    """Modulation estimate 0.5*sqrt(S^2 + C^2); equals B for both the 3- and 4-step sums."""
    return 0.5 * np.hypot(S, C)


def modulation_map(frames: Sequence[ImageFrame], steps_N: int) -> np.ndarray:
    _check_window(frames, steps_N)
    S, C = _sin_cos([f.intensity for f in frames], steps_N)
    return modulation_from_sc(S, C)


def wrapped_phase(frames: Sequence[ImageFrame], steps_N: int,
                  threshold: float = DEFAULT_MODULATION_THRESHOLD) -> PhaseFrame:
    """Raw wrapped phase of the window starting at ``frames[0]``.

    Pixels whose modulation estimate is below ``threshold`` are marked
    invalid and their phase is set to 0.
    """
    _check_window(frames, steps_N)
    imgs = [_kernels.as_grid(f.intensity) for f in frames]
    if steps_N == 3:
        imgs.append(imgs[0])
    shape = imgs[0].shape
    S, C = np.empty(shape), np.empty(shape)
    valid = np.empty(shape, dtype=bool)
    # compare squares: 0.5*hypot(S, C) >= t  <=>  S^2 + C^2 >= 4 t^2
    _kernels.sin_cos_valid(*imgs, steps_N, 4.0 * threshold * threshold, S, C, valid)
    phase = np.arctan2(S, C, out=S)
    _kernels.wrap_shift(phase, 0.0, valid, phase)
    start = frames[0].frame_index
    return PhaseFrame(phase, valid, start, start, 0, steps_N)


def datum_correct(frame: PhaseFrame, t: int) -> PhaseFrame:
    """Undo the constant ``t*pi/2`` pattern shift of the window starting at capture index ``t``."""
    if frame.order_K != 0:
        raise ValueError("datum correction applies to raw (order 0) phase frames")
    if t != frame.datum_index:
        raise ValueError(f"frame is referenced to index {frame.datum_index}, not {t}")
    # t mod 4 keeps the added constant exact for long sequences
    phase = np.empty_like(frame.phase)
    _kernels.wrap_shift(frame.phase, (t % 4) * HALF_PI, frame.valid_mask, phase)
    return replace(frame, phase=phase, valid_mask=frame.valid_mask.copy(), datum_index=frame.datum_index - t)


def raw_phase_sequence(frames: Sequence[ImageFrame], steps_N: int,
                       threshold: float = DEFAULT_MODULATION_THRESHOLD) -> list[PhaseFrame]:
    """Datum-corrected raw phase for every window of ``steps_N`` consecutive frames."""
    out = []
    for t in range(len(frames) - steps_N + 1):
        raw = wrapped_phase(frames[t:t + steps_N], steps_N, threshold)
        out.append(datum_correct(raw, raw.start_index))
    return out
