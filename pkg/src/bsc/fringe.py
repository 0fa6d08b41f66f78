"""Synthetic capture of cyclic pi/2 phase-shifted fringes on a moving scene.

Frame ``i`` is ``A + B*cos(phi0 - i*pi/2 + x_i)`` per pixel, followed by
optional Gaussian sensor noise and optional quantisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import CameraModel, GeometryError, ProjectorModel

PHASE_STEP = np.pi / 2


@dataclass(frozen=True)
class FringeConfig:
    wavelength_px: float = 24.0
    amplitude_A: float = 127.5
    modulation_B: float = 100.0
    steps_N: int = 4

    def __post_init__(self):
        if self.wavelength_px <= 0:
            raise ValueError("wavelength_px must be positive")
        if self.amplitude_A < 0 or self.modulation_B < 0:
            raise ValueError("amplitude and modulation must be non-negative")
        if self.steps_N not in (3, 4):
            raise ValueError(f"steps_N must be 3 or 4, got {self.steps_N}")

    @property
    def phase_shift(self) -> float:
        return PHASE_STEP


@dataclass(frozen=True)
class NoiseConfig:
    gaussian_sigma: float = 0.0
    quantize_bits: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.gaussian_sigma < 0:
            raise ValueError("gaussian_sigma must be >= 0")
        if self.quantize_bits not in (None, 8, 16):
            raise ValueError("quantize_bits must be None, 8 or 16")


@dataclass(frozen=True, eq=False)
class ImageFrame:
    intensity: np.ndarray
    frame_index: int
    timestamp: float | None = None

    def __post_init__(self):
        if self.intensity.ndim != 2:
            raise ValueError("intensity must be a 2-D grid")
        if self.frame_index < 0:
            raise ValueError("frame_index must be >= 0")
        self.intensity.setflags(write=False)

    @property
    def height(self) -> int:
        return self.intensity.shape[0]

    @property
    def width(self) -> int:
        return self.intensity.shape[1]


def render_sequence(config: FringeConfig, phase0, offsets: Sequence, count: int,
                    noise: NoiseConfig | None = None, shape: tuple[int, int] | None = None,
                    fps: float | None = None) -> list[ImageFrame]:
    """Render ``count`` frames of the cyclic fringe sequence.

    ``phase0`` is a 2-D grid or a scalar (then ``shape`` is required);
    each offset is a scalar (whole-frame motion) or a grid matching ``phase0``.
    The noise stream is drawn frame by frame from one generator seeded with
    ``noise.seed``, so a given seed always yields the same frames.
    """
    noise = noise or NoiseConfig()
    if count < config.steps_N:
        raise ValueError(f"need at least N={config.steps_N} frames, got {count}")
    if len(offsets) < count:
        raise ValueError(f"{len(offsets)} offsets for {count} frames")

    phi0 = np.asarray(phase0, dtype=float)
    if phi0.ndim == 0:
        if shape is None:
            raise ValueError("scalar phase0 needs an explicit shape")
        phi0 = np.full(shape, float(phi0))
    if phi0.ndim != 2:
        raise ValueError("phase0 must be a scalar or a 2-D grid")
    if not np.all(np.isfinite(phi0)):
        raise ValueError("phase0 must be finite")

    rng = np.random.default_rng(noise.seed)
    top = None if noise.quantize_bits is None else float(2**noise.quantize_bits - 1)
    frames = []
    for i in range(count):
        x = np.asarray(offsets[i], dtype=float)
        if x.ndim and x.shape != phi0.shape:
            raise ValueError(f"offset grid {x.shape} does not match phase0 {phi0.shape}")
        img = config.amplitude_A + config.modulation_B * np.cos(phi0 - (i % 4) * PHASE_STEP + x)
        if noise.gaussian_sigma > 0:
            img = img + rng.normal(0.0, noise.gaussian_sigma, size=img.shape)
        if top is not None:
            img = np.clip(np.rint(img), 0.0, top)
        frames.append(ImageFrame(img, i, None if fps is None else i / fps))
    return frames


def ramp_phase(width: int, height: int, wavelength_px: float) -> np.ndarray:
    """Projector phase for a camera looking at the projector pixel grid 1:1 (unit magnification)."""
    u = np.arange(width, dtype=float)
    return np.broadcast_to(2 * np.pi * u / wavelength_px, (height, width)).copy()


@dataclass(frozen=True)
class PlaneScene:
    """Fronto-parallel plane at depth ``z`` (mm)."""

    z: float

    def depth(self, origin_x: float, slope_x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(slope_x), float(self.z))


@dataclass(frozen=True)
class StepScene:
    """Two fronto-parallel planes: ``z_near`` for X < ``edge_x``, ``z_far`` elsewhere."""

    z_near: float
    z_far: float
    edge_x: float = 0.0

    def __post_init__(self):
        if not self.z_near < self.z_far:
            raise ValueError("z_near must be smaller than z_far")

    def depth(self, origin_x: float, slope_x: np.ndarray) -> np.ndarray:
        x_at_near = origin_x + slope_x * self.z_near
        return np.where(x_at_near < self.edge_x, self.z_near, self.z_far)


def scene_points(scene, camera: CameraModel):
    """World coordinates (X, Y, Z) of the surface point seen by each camera pixel."""
    sx, sy = camera.rays()
    z = scene.depth(camera.tx, sx)
    return camera.tx + sx * z, sy * z, z


def phase0_from_scene(scene, camera: CameraModel, projector: ProjectorModel, config: FringeConfig,
                      z_range: tuple[float, float] | None = None) -> np.ndarray:
    """Absolute projector phase ``2*pi*x^p / wavelength`` seen by each camera pixel."""
    X, _, Z = scene_points(scene, camera)
    if z_range is not None and (Z.min() < z_range[0] or Z.max() > z_range[1]):
        raise GeometryError(f"scene depth [{Z.min()}, {Z.max()}] outside {z_range}")
    xp = projector.project_x(X, Z)
    if xp.min() < 0 or xp.max() >= projector.width:
        raise GeometryError(
            f"scene projects to projector columns [{xp.min():.1f}, {xp.max():.1f}], outside [0, {projector.width})")
    return 2 * np.pi * xp / config.wavelength_px


def scene_offsets(scenes: Sequence, camera: CameraModel, projector: ProjectorModel,
                  config: FringeConfig, z_range=None) -> tuple[np.ndarray, list[np.ndarray]]:
    """Per-pixel offsets for a scene that changes from frame to frame.

    Returns the datum phase (frame 0) and ``x_i = phi_i - phi_0`` grids.
    """
    phases = [phase0_from_scene(s, camera, projector, config, z_range) for s in scenes]
    return phases[0], [p - phases[0] for p in phases]
