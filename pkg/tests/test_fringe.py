from dataclasses import replace

import numpy as np
import pytest

from bsc.fringe import (FringeConfig, NoiseConfig, PlaneScene, StepScene, phase0_from_scene,
                        ramp_phase, render_sequence, scene_offsets)
from bsc.geometry import CameraModel, GeometryError, desk_rig


def test_intensity_example():
    cfg = FringeConfig(amplitude_A=100, modulation_B=50)
    frames = render_sequence(cfg, np.pi / 3, [0.0] * 4, 4, shape=(2, 3))
    values = [float(f.intensity[0, 0]) for f in frames]
    assert values == pytest.approx([125.00, 143.30, 75.00, 56.70], abs=5e-3)
    assert all(np.all(f.intensity == f.intensity[0, 0]) for f in frames)


def test_zero_modulation_is_constant():
    cfg = FringeConfig(amplitude_A=80, modulation_B=0)
    phi = np.random.default_rng(0).uniform(0, 6, (4, 5))
    for f in render_sequence(cfg, phi, [0.3 * i for i in range(6)], 6):
        assert np.all(f.intensity == 80.0)


def test_full_turn_offset_is_invisible():
    cfg = FringeConfig()
    phi = ramp_phase(30, 4, 24.0)
    a = render_sequence(cfg, phi, [0.0] * 5, 5)
    b = render_sequence(cfg, phi, [2 * np.pi] * 5, 5)
    for fa, fb in zip(a, b):
        np.testing.assert_allclose(fa.intensity, fb.intensity, atol=1e-12)


def test_noise_is_seed_deterministic_and_quantized():
    cfg = FringeConfig()
    phi = ramp_phase(16, 4, 24.0)
    a = render_sequence(cfg, phi, [0.0] * 4, 4, NoiseConfig(2.0, 8, 9))
    b = render_sequence(cfg, phi, [0.0] * 4, 4, NoiseConfig(2.0, 8, 9))
    c = render_sequence(cfg, phi, [0.0] * 4, 4, NoiseConfig(2.0, 8, 10))
    assert all(np.array_equal(x.intensity, y.intensity) for x, y in zip(a, b))
    assert not all(np.array_equal(x.intensity, y.intensity) for x, y in zip(a, c))
    for f in a:
        assert np.all(f.intensity == np.rint(f.intensity))
        assert f.intensity.min() >= 0 and f.intensity.max() <= 255


def test_render_errors():
    cfg = FringeConfig()
    with pytest.raises(ValueError):
        render_sequence(cfg, 0.0, [0.0] * 4, 4)
    with pytest.raises(ValueError):
        render_sequence(cfg, np.zeros((2, 2)), [0.0] * 3, 3)
    with pytest.raises(ValueError):
        render_sequence(cfg, np.zeros((2, 2)), [0.0] * 2, 4)
    with pytest.raises(ValueError):
        render_sequence(cfg, np.zeros((2, 2)), [np.zeros((3, 3))] * 4, 4)
    with pytest.raises(ValueError):
        FringeConfig(steps_N=5)
    with pytest.raises(ValueError):
        NoiseConfig(quantize_bits=12)


def test_frames_are_read_only():
    f = render_sequence(FringeConfig(), 0.0, [0.0] * 4, 4, shape=(2, 2))[0]
    with pytest.raises(ValueError):
        f.intensity[0, 0] = 1.0


def test_plane_phase_is_affine_along_rows():
    rig = desk_rig(80, 20)
    phi = phase0_from_scene(PlaneScene(450.0), rig.main, rig.projector, FringeConfig())
    d2 = np.diff(phi, n=2, axis=1)
    assert np.abs(d2).max() < 1e-9
    assert np.abs(np.diff(phi, axis=0)).max() < 1e-12


def test_one_period_of_projector_is_two_pi():
    # narrow camera so every pixel stays inside the projector
    cam = CameraModel(fx=1e5, fy=1e5, cx=1.0, cy=1.0, width=3, height=3)
    proj = desk_rig().projector
    # aim the centre pixel's ray at projector column 24 on the plane z=450
    proj = replace(proj, cx=24.0 + proj.fx * proj.tx / (450.0 - proj.tz))
    phi = phase0_from_scene(PlaneScene(450.0), cam, proj, FringeConfig(wavelength_px=24.0))
    assert phi[1, 1] == pytest.approx(2 * np.pi, abs=1e-12)


def test_step_scene_has_one_jump_column():
    rig = desk_rig(80, 10)
    phi = phase0_from_scene(StepScene(430.0, 480.0), rig.main, rig.projector, FringeConfig())
    slope = np.median(np.diff(phi[0]))
    jumps = np.nonzero(np.abs(np.diff(phi[0]) - slope) > 1e-6)[0]
    assert len(jumps) == 1


def test_scene_outside_projector_raises():
    rig = desk_rig(80, 10)
    shifted = replace(rig.projector, cx=rig.projector.cx + 600.0)
    with pytest.raises(GeometryError):
        phase0_from_scene(PlaneScene(450.0), rig.main, shifted, FringeConfig())


def test_scene_offsets_reference_frame_zero():
    rig = desk_rig(40, 8)
    phi0, offs = scene_offsets([PlaneScene(450.0), PlaneScene(451.0)], rig.main, rig.projector, FringeConfig())
    assert np.all(offs[0] == 0.0)
    assert np.abs(offs[1]).max() > 0


def test_shift_equivariance():
    """A constant offset c rendered at frame 0 equals the same scene with phase0 + c."""
    cfg = FringeConfig()
    phi = ramp_phase(24, 3, 24.0)
    a = render_sequence(cfg, phi, [0.4] * 4, 4)
    b = render_sequence(cfg, phi + 0.4, [0.0] * 4, 4)
    for fa, fb in zip(a, b):
        np.testing.assert_allclose(fa.intensity, fb.intensity, atol=1e-12)
