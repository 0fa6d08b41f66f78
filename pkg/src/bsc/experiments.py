"""Synthetic experiments behind the acceptance suite.

Each function runs one self-contained simulation and returns plain numbers
so tests, the CLI and notebooks can share them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.ndimage import distance_transform_edt

from .core import compensate, compensate_phases
from .fringe import (FringeConfig, NoiseConfig, PlaneScene, StepScene, phase0_from_scene,
                     ramp_phase, render_sequence, scene_offsets)
from .geometry import Rig, desk_rig, max_fringe_frequency
from .kinematics import MotionProfile, sample_offsets
from .oracle import circular_error, error_coefficients, fit_ripple
from .phase import TWO_PI, raw_phase_sequence, wrap_2pi, wrap_pi, wrapped_phase
from .stereo import match_candidates, stereo_depth, triangulate_depth, unwrap_with_reference


def _ripple_basis_phase(phi0: np.ndarray, window_start: int) -> np.ndarray:
    """True pattern phase of a window's first frame; the ripple coefficients refer to it.

    ``phi0`` should already include the offset of that frame.
    """
    return phi0 - window_start * (np.pi / 2)


def plane_fit_residual(depth: np.ndarray, mask: np.ndarray, fit_mask: np.ndarray | None = None) -> np.ndarray:
    """Residual ``depth - (a + b*u + c*v)`` on ``mask``; the plane is fitted on ``fit_mask`` (default ``mask``)."""
    fit_mask = mask if fit_mask is None else fit_mask
    if fit_mask.sum() < 3:
        raise ValueError("need at least 3 pixels for a plane fit")
    v, u = np.nonzero(fit_mask)
    uc, vc = u.mean(), v.mean()
    # centred coordinates keep the 3x3 normal equations well conditioned
    A = np.column_stack([np.ones(u.size), u - uc, v - vc])
    coef = np.linalg.solve(A.T @ A, A.T @ depth[fit_mask])
    v2, u2 = np.nonzero(mask)
    return depth[mask] - (coef[0] + coef[1] * (u2 - uc) + coef[2] * (v2 - vc))


# ------------------------------------------------------------ static

def static_exactness(Ks: Sequence[int] = range(7), Ns: Sequence[int] = (3, 4), width: int = 160,
                     height: int = 120, wavelength_px: float = 24.0) -> dict:
    """Worst circular error (rad) of every compensated output of a noiseless static scene, per (N, K)."""
    phi0 = ramp_phase(width, height, wavelength_px) + 0.3
    truth = wrap_2pi(phi0.copy())
    worst = {}
    for N in Ns:
        count = max(Ks) + N + 3
        frames = render_sequence(FringeConfig(wavelength_px, steps_N=N), phi0, [0.0] * count, count)
        for K in Ks:
            outs = compensate(frames, N, K)
            worst[(N, K)] = max(float(np.abs(circular_error(o.phase, truth)[o.valid_mask]).max())
                                for o in outs)
    return worst


# ------------------------------------------------------------ oracle

@dataclass
class WindowCheck:
    steps_N: int
    offsets: list
    predicted: tuple
    fitted: tuple

    @property
    def mismatch(self) -> tuple[float, float, float]:
        """|fitted - predicted| for (dc, cos2, sin2)."""
        return tuple(abs(f - p) for f, p in zip(self.fitted, self.predicted))


def oracle_agreement(n_windows: int = 24, max_offset: float = 0.05, seed: int = 0,
                     width: int = 240, height: int = 4, wavelength_px: float = 24.0) -> list[WindowCheck]:
    """Fit the raw-phase error of random motion windows and compare with the linearised prediction.

    Windows alternate between four and three steps; ``x_0 = 0`` and the other
    offsets are uniform in ``[-max_offset, max_offset]``.
    """
    rng = np.random.default_rng(seed)
    phi0 = ramp_phase(width, height, wavelength_px)
    checks = []
    for w in range(n_windows):
        N = 4 if w % 2 == 0 else 3
        x = [0.0] + rng.uniform(-max_offset, max_offset, N - 1).tolist()
        frames = render_sequence(FringeConfig(wavelength_px, steps_N=N), phi0, x, N)
        raw = wrapped_phase(frames, N)
        fit = fit_ripple(circular_error(raw.phase, phi0), phi0, raw.valid_mask)
        checks.append(WindowCheck(N, x, error_coefficients(N, x), (fit.dc, fit.cos2_amp, fit.sin2_amp)))
    return checks


def linearisation_mismatch(scale: float, steps_N: int = 4, width: int = 240,
                           wavelength_px: float = 24.0) -> float:
    """Largest |measured - predicted| raw-phase error for a fixed motion shape scaled to ``max|x| = scale``."""
    shape = np.array([0.0, 0.6, -0.3, 1.0][:steps_N])
    x = (scale * shape / np.abs(shape).max()).tolist()
    phi0 = ramp_phase(width, 4, wavelength_px)
    frames = render_sequence(FringeConfig(wavelength_px, steps_N=steps_N), phi0, x, steps_N)
    raw = wrapped_phase(frames, steps_N)
    dc, c2, s2 = error_coefficients(steps_N, x)
    pred = dc + c2 * np.cos(2 * phi0) + s2 * np.sin(2 * phi0)
    return float(np.abs(circular_error(raw.phase, phi0) - pred).max())


# ------------------------------------------------------- harmonic decay

def _harmonic_stats(outs, phi0, x_series, stride: int = 1):
    amps, mean_abs, total = [], [], []
    for i in range(0, len(outs), stride):
        o = outs[i]
        xi = x_series[o.start_index]
        basis = _ripple_basis_phase(phi0 + xi, o.start_index)
        err = circular_error(o.phase, phi0 + xi)
        fit = fit_ripple(err, basis, o.valid_mask)
        amps.append(fit.harmonic_amp)
        harmonic = fit.cos2_amp * np.cos(2 * basis) + fit.sin2_amp * np.sin(2 * basis)
        mean_abs.append(float(np.abs(harmonic[o.valid_mask]).mean()))
        total.append(float(np.abs(err - fit.dc)[o.valid_mask].mean()))
    return amps, mean_abs, total


def harmonic_annihilation(velocity: float = 1e-3, Ks: Sequence[int] = range(1, 7), steps_N: int = 4,
                          outputs: int = 8, width: int = 240, wavelength_px: float = 24.0) -> dict[int, float]:
    """Largest fitted 2*phi amplitude over the first ``outputs`` compensated frames of linear motion."""
    phi0 = ramp_phase(width, 4, wavelength_px)
    count = max(Ks) + steps_N + outputs - 1
    x = sample_offsets(MotionProfile.linear(velocity), count)
    frames = render_sequence(FringeConfig(wavelength_px, steps_N=steps_N), phi0, x, count)
    result = {}
    for K in Ks:
        amps, _, _ = _harmonic_stats(compensate(frames, steps_N, K)[:outputs], phi0, x)
        result[K] = max(amps)
    return result


@dataclass
class DecayResult:
    Ks: list
    ripple_mean_abs: list  # mean |fitted 2*phi component|
    total_mean_abs: list  # mean |error - dc|, includes the 4*phi second-order floor
    harmonic_amp: list

    @property
    def decay_factors(self) -> list[float]:
        r = self.ripple_mean_abs
        return [r[k] / r[k + 1] for k in range(len(r) - 1)]

    @property
    def average_decay_factor(self) -> float:
        """Geometric mean of the per-increment factors."""
        r = self.ripple_mean_abs
        return float((r[0] / r[-1]) ** (1.0 / (len(r) - 1)))


def ripple_decay(amplitude: float = 0.1, period: float = 20.0, Ks: Sequence[int] = range(7),
                 steps_N: int = 4, outputs: int = 100, width: int = 240,
                 wavelength_px: float = 24.0) -> DecayResult:
    """Ripple size against K for sinusoidal motion ``x_i = a*sin(2*pi*i/P)``."""
    phi0 = ramp_phase(width, 4, wavelength_px)
    Ks = list(Ks)
    count = max(Ks) + steps_N + outputs - 1
    x = sample_offsets(MotionProfile.sinusoid(amplitude, period), count)
    frames = render_sequence(FringeConfig(wavelength_px, steps_N=steps_N), phi0, x, count)
    raw = raw_phase_sequence(frames, steps_N)
    res = DecayResult(Ks, [], [], [])
    for K in Ks:
        amps, mean_abs, total = _harmonic_stats(compensate_phases(raw, K)[:outputs], phi0, x)
        res.ripple_mean_abs.append(float(np.mean(mean_abs)))
        res.total_mean_abs.append(float(np.mean(total)))
        res.harmonic_amp.append(float(np.mean(amps)))
    return res


# ------------------------------------------------------------ speed

@dataclass
class SpeedSweepResult:
    speeds: list
    Ks: tuple
    rmse_mm: dict  # K -> list of plane-fit RMSE per speed
    stereo_order_agreement: float
    seconds: float

    def ratio_at(self, index: int, k_raw: int = 0, k_bsc: int = 4) -> float:
        return self.rmse_mm[k_raw][index] / self.rmse_mm[k_bsc][index]


def speed_sweep(speeds: Sequence[float] | None = None, frames: int = 800, Ks: Sequence[int] = (0, 4),
                sigma: float = 0.5, seed: int = 0, width: int = 160, height: int = 120,
                wavelength_px: float = 24.0, eval_stride: int = 1, stereo_frames: int = 3,
                rig: Rig | None = None) -> SpeedSweepResult:
    """Depth ripple of a fronto-parallel plane under a sweep of constant offset rates.

    Offsets are whole-frame (``x_i = v*i``). Every ``eval_stride``-th output is
    unwrapped against the plane's known projector column shifted by the
    offset at the window centre (mod 2*pi), triangulated, and scored by the RMSE of a
    plane fit (the fit absorbs the uniform motion lag). At the fastest speed
    the first ``stereo_frames`` outputs also run the stereo chain and the
    fraction of fringe orders agreeing with the reference is reported.
    """
    t0 = time.perf_counter()
    speeds = list(np.linspace(-0.1, 0.1, 11) if speeds is None else speeds)
    rig = rig or desk_rig(width, height)
    cfg = FringeConfig(wavelength_px)
    scene = PlaneScene(rig.z_nominal)
    phi0 = phase0_from_scene(scene, rig.main, rig.projector, cfg)
    rmse = {K: [] for K in Ks}
    agreement = float("nan")
    fastest = int(np.argmax(np.abs(speeds)))
    for s, v in enumerate(speeds):
        x = sample_offsets(MotionProfile.linear(v), frames)
        noise = NoiseConfig(sigma, None, seed + s)
        raw = raw_phase_sequence(render_sequence(cfg, phi0, x, frames, noise), cfg.steps_N)
        for K in Ks:
            outs = compensate_phases(raw, K)
            centre = (K + cfg.steps_N - 1) / 2
            sq = []
            for j in range(0, len(outs), eval_stride):
                o = outs[j]
                # images only see x mod 2*pi, so keep the reference inside the projector
                shift = wrap_pi(float(np.interp(j + centre, np.arange(frames), x)))
                ref_xp = (phi0 + shift) * wavelength_px / TWO_PI
                depth = triangulate_depth(unwrap_with_reference(o, ref_xp, wavelength_px), rig, wavelength_px)
                sq.append(np.mean(plane_fit_residual(depth.depth, depth.valid_mask) ** 2))
            rmse[K].append(float(np.sqrt(np.mean(sq))))
        if s == fastest and stereo_frames > 0:
            agreement = _stereo_order_agreement(rig, cfg, phi0, x, noise, max(Ks), stereo_frames, seed)
    return SpeedSweepResult(speeds, tuple(Ks), rmse, agreement, time.perf_counter() - t0)


def _stereo_order_agreement(rig, cfg, phi0_main, x, noise, K, n_out, seed) -> float:
    """Share of stereo-valid pixels whose SAD-derived order equals the reference order."""
    count = K + cfg.steps_N - 1 + n_out
    phi0_aux = phase0_from_scene(PlaneScene(rig.z_nominal), rig.aux, rig.projector, cfg)
    main = compensate(render_sequence(cfg, phi0_main, x, count, noise), cfg.steps_N, K)
    aux_noise = NoiseConfig(noise.gaussian_sigma, noise.quantize_bits, seed + 10_000)
    aux = compensate(render_sequence(cfg, phi0_aux, x, count, aux_noise), cfg.steps_N, K)
    hits = total = 0
    centre = (K + cfg.steps_N - 1) / 2
    for j, (m, a) in enumerate(zip(main, aux)):
        _, unwrapped, _ = stereo_depth(m, a, rig, cfg.wavelength_px)
        shift = wrap_pi(float(np.interp(j + centre, np.arange(len(x)), x)))
        ref = unwrap_with_reference(m, (phi0_main + shift) * cfg.wavelength_px / TWO_PI, cfg.wavelength_px)
        both = unwrapped.valid_mask & ref.valid_mask
        hits += int((unwrapped.order[both] == ref.order[both]).sum())
        total += int(both.sum())
    return hits / total if total else float("nan")


# ------------------------------------------------- frequency limit

@dataclass
class CandidateCheck:
    periods: float
    f_limit: float
    valid_pixels: int
    unique_fraction: float
    ambiguous_pixels: int


def frequency_limit_check(periods: float, rig: Rig | None = None) -> CandidateCheck:
    """Count stereo match candidates on a noiseless plane at fringe frequency ``periods``."""
    rig = rig or desk_rig()
    wavelength = rig.projector.width / periods
    cfg = FringeConfig(wavelength)
    phases = []
    for cam in (rig.main, rig.aux):
        phi0 = phase0_from_scene(PlaneScene(rig.z_nominal), cam, rig.projector, cfg)
        phases.append(wrapped_phase(render_sequence(cfg, phi0, [0.0] * 4, 4), 4))
    counts = match_candidates(phases[0], phases[1], rig.disparity_range())
    valid = counts >= 0
    n = int(valid.sum())
    return CandidateCheck(periods, max_fringe_frequency(rig.system_geometry(periods)), n,
                          float((counts[valid] == 1).mean()) if n else float("nan"),
                          int((counts[valid] >= 2).sum()))


# ------------------------------------------------------- unwrapping

@dataclass
class RoundTrip:
    valid_pixels: int
    order_accuracy: float
    max_depth_error_mm: float


def plane_round_trip(z: float | None = None, rig: Rig | None = None, wavelength_px: float = 24.0) -> RoundTrip:
    """Noiseless static plane through the full stereo chain."""
    rig = rig or desk_rig()
    z = rig.z_nominal if z is None else z
    cfg = FringeConfig(wavelength_px)
    phis = [phase0_from_scene(PlaneScene(z), cam, rig.projector, cfg) for cam in (rig.main, rig.aux)]
    main, aux = (wrapped_phase(render_sequence(cfg, p, [0.0] * 4, 4), 4) for p in phis)
    depth, unwrapped, _ = stereo_depth(main, aux, rig, wavelength_px)
    true_order = np.floor(phis[0] / TWO_PI).astype(int)
    m = unwrapped.valid_mask
    return RoundTrip(int(m.sum()), float((unwrapped.order[m] == true_order[m]).mean()),
                     float(np.abs(depth.depth[depth.valid_mask] - z).max()))


@dataclass
class StepResult:
    edge_rms_mm: float
    interior_rms_mm: float
    edge_pixels: int
    interior_pixels: int
    edge_valid_fraction: float
    outputs: int
    per_surface: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.edge_rms_mm / self.interior_rms_mm


def step_scene_robustness(K: int = 4, outputs: int = 12, sigma: float = 0.5, seed: int = 0,
                          z_centre: float = 455.0, z_amplitude: float = 5.0, period: float = 60.0,
                          z_far: float = 490.0, edge_band: int = 3, interior_gap: int = 10,
                          rig: Rig | None = None, wavelength_px: float = 24.0) -> StepResult:
    """Depth error near a depth edge versus far from it, for a moving plate in front of a static wall.

    The plate covers X < 0 and oscillates in depth; the wall stays put. Both
    views go through BSC and the stereo chain. Each surface gets a plane fit
    on its interior pixels; residuals are pooled over pixels within
    ``edge_band`` px of the other surface and over pixels at least
    ``interior_gap`` px away.
    """
    rig = rig or desk_rig()
    cfg = FringeConfig(wavelength_px)
    N = cfg.steps_N
    count = outputs + K + N - 1
    t = np.arange(count)
    scenes = [StepScene(z_centre + z_amplitude * math.sin(2 * math.pi * i / period), z_far) for i in t]
    z_range = (rig.z_min, rig.z_max)
    seqs = []
    for k, cam in enumerate((rig.main, rig.aux)):
        phi0, offs = scene_offsets(scenes, cam, rig.projector, cfg, z_range)
        frames = render_sequence(cfg, phi0, offs, count, NoiseConfig(sigma, None, seed + k))
        seqs.append(compensate(frames, N, K))

    near = scenes[0].depth(0.0, rig.main.rays()[0]) < z_far
    surfaces = {"near": near, "far": ~near}
    dist = {name: distance_transform_edt(m) for name, m in surfaces.items()}
    edge_sq, inner_sq = [], []
    n_edge_total = n_edge_valid = 0
    per_surface = {name: {"edge": [], "interior": []} for name in surfaces}
    for m, a in zip(*seqs):
        depth, _, _ = stereo_depth(m, a, rig, wavelength_px)
        for name, surf in surfaces.items():
            band = surf & (dist[name] <= edge_band)
            inner = surf & (dist[name] >= interior_gap)
            ok = depth.valid_mask
            n_edge_total += int(band.sum())
            n_edge_valid += int((band & ok).sum())
            r_band = plane_fit_residual(depth.depth, band & ok, inner & ok)
            r_inner = plane_fit_residual(depth.depth, inner & ok)
            edge_sq.append(r_band ** 2)
            inner_sq.append(r_inner ** 2)
            per_surface[name]["edge"].append(r_band ** 2)
            per_surface[name]["interior"].append(r_inner ** 2)
    edge = np.concatenate(edge_sq)
    inner = np.concatenate(inner_sq)
    summary = {name: {k: float(np.sqrt(np.concatenate(v).mean())) for k, v in d.items()}
               for name, d in per_surface.items()}
    return StepResult(float(np.sqrt(edge.mean())), float(np.sqrt(inner.mean())), edge.size, inner.size,
                      n_edge_valid / n_edge_total if n_edge_total else float("nan"), len(seqs[0]), summary)
