"""Stereo phase unwrapping with a paraxial auxiliary camera.

Wrapped phases of the rectified main/aux views are block matched (SAD with a
circular difference), the binocular point is re-projected into the projector
to get the fringe order, and depth comes from the main camera + projector
pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import minimum_filter, uniform_filter

from .geometry import Rig
from .phase import TWO_PI, PhaseFrame, circular_distance, wrap_pi

DEFAULT_WINDOW = 5


@dataclass(frozen=True, eq=False)
class DisparityMap:
    disparity: np.ndarray
    valid_mask: np.ndarray
    d_min: float
    d_max: float


@dataclass(frozen=True, eq=False)
class UnwrappedPhaseMap:
    phase: np.ndarray
    order: np.ndarray
    valid_mask: np.ndarray


@dataclass(frozen=True, eq=False)
class DepthMap:
    depth: np.ndarray
    valid_mask: np.ndarray
    X: np.ndarray | None = None
    Y: np.ndarray | None = None

    def points(self) -> np.ndarray:
        """(n, 3) array of valid XYZ points in mm."""
        m = self.valid_mask
        return np.column_stack([self.X[m], self.Y[m], self.depth[m]])


def _box_sum(a: np.ndarray, window: int) -> np.ndarray:
    return uniform_filter(a, size=window, mode="constant", cval=0.0) * (window * window)


def sad_match(main: PhaseFrame, aux: PhaseFrame, d_range: tuple[float, float],
              window: int = DEFAULT_WINDOW, subpixel: bool = True,
              shiftable: bool = True, step: float = 0.25) -> DisparityMap:
    """Disparity (main -> aux, ``u_aux = u_main - d``) minimising the windowed circular SAD.

    Candidates are spaced ``step`` px apart; fractional shifts interpolate the
    aux phase along the row. Ties go to the smallest disparity. Pixels whose
    window leaves the image, whose search range is truncated, or whose window
    touches an invalid pixel in either view are invalid. ``shiftable`` lets
    each pixel use the cheapest of all windows that contain it, which keeps
    windows from straddling a depth edge.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    if step <= 0:
        raise ValueError("step must be positive")
    if main.phase.shape != aux.phase.shape:
        raise ValueError("main and aux phase maps differ in shape")
    if main.datum_index != aux.datum_index:
        raise ValueError("main and aux phases must share a datum")
    d_lo = math.ceil(d_range[0] / step) * step
    d_hi = math.floor(d_range[1] / step) * step
    if d_hi < d_lo:
        raise ValueError(f"empty disparity range {d_range}")

    ds = d_lo + step * np.arange(int(round((d_hi - d_lo) / step)) + 1)
    h, w = main.phase.shape
    u = np.arange(w, dtype=float)[None, :]
    costs = np.empty((len(ds), h, w))
    for k, d in enumerate(ds):
        pos = np.broadcast_to(u - d, (h, w))
        inside = (pos >= 0) & (pos <= w - 1)
        lo = np.clip(np.floor(pos).astype(int), 0, w - 1)
        hi = np.clip(np.ceil(pos).astype(int), 0, w - 1)
        rows = np.arange(h)[:, None]
        ok = main.valid_mask & inside & aux.valid_mask[rows, lo] & aux.valid_mask[rows, hi]
        aux_s = _sample_wrapped(aux.phase, pos)
        diff = np.where(ok, circular_distance(main.phase, aux_s), 0.0)
        bad = _box_sum((~ok).astype(float), window) > 0.5
        c = _box_sum(diff, window)
        c[bad] = np.inf
        if shiftable:
            c = minimum_filter(c, size=window, mode="constant", cval=np.inf)
        costs[k] = c

    best = np.argmin(costs, axis=0)
    rows, cols = np.indices((h, w))
    c0 = costs[best, rows, cols]
    valid = np.isfinite(c0)
    r = window // 2
    valid[:r] = valid[h - r:] = False
    valid[:, :r] = valid[:, w - r:] = False
    # a truncated search range could hide the true match
    valid[:, :max(math.ceil(d_hi), 0) + r] = False
    if d_lo < 0:
        valid[:, w - r - math.ceil(-d_lo):] = False
    disp = ds[best].astype(float)

    if subpixel and len(ds) >= 3:
        inner = (best > 0) & (best < len(ds) - 1)
        cm = costs[np.clip(best - 1, 0, None), rows, cols]
        cp = costs[np.clip(best + 1, None, len(ds) - 1), rows, cols]
        with np.errstate(invalid="ignore", divide="ignore"):
            denom = cm - 2 * c0 + cp
            use = inner & valid & np.isfinite(cm) & np.isfinite(cp) & (denom > 0)
            delta = np.where(use, 0.5 * (cm - cp) / np.where(use, denom, 1.0), 0.0)
        disp += step * np.clip(delta, -0.5, 0.5)

    disp[~valid] = np.nan
    return DisparityMap(disp, valid, float(d_range[0]), float(d_range[1]))


def _sample_wrapped(row_phase: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Circular linear interpolation of a wrapped phase grid along columns."""
    h, w = row_phase.shape
    pos = np.clip(pos, 0, w - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, w - 1)
    t = pos - lo
    rows = np.arange(h)[:, None]
    a, b = row_phase[rows, lo], row_phase[rows, hi]
    return a + t * wrap_pi(b - a)


def _difference_profile(main: PhaseFrame, aux: PhaseFrame, d_range: tuple[float, float]):
    """Circular phase difference aux(u - d) - main(u) sampled along the search segment.

    Samples sit at both range ends and every integer disparity in between.
    Returns the sample disparities, the (n, h, w) difference stack and the
    crossing indicator for each of the n - 1 intervals.
    """
    h, w = main.phase.shape
    d0, d1 = float(d_range[0]), float(d_range[1])
    inner = np.arange(math.floor(d0) + 1, math.ceil(d1))
    ds = np.concatenate([[d0], inner[(inner > d0) & (inner < d1)], [d1]])
    u = np.arange(w, dtype=float)[None, :]
    g = np.stack([wrap_pi(_sample_wrapped(aux.phase, np.broadcast_to(u - d, (h, w))) - main.phase)
                  for d in ds])
    cont = np.abs(np.diff(g, axis=0)) < np.pi
    crossing = cont & (((g[:-1] <= 0) & (g[1:] > 0)) | ((g[:-1] >= 0) & (g[1:] < 0)))
    return ds, g, crossing


def match_candidates(main: PhaseFrame, aux: PhaseFrame, d_range: tuple[float, float]) -> np.ndarray:
    """Number of aux positions inside the disparity range whose phase equals the main pixel's.

    Counts sign changes of the circular phase difference along the search
    segment, ignoring the 2*pi jumps of the wrap. Pixels whose segment leaves
    the aux image get -1.
    """
    h, w = main.phase.shape
    ds, g, crossing = _difference_profile(main, aux, d_range)
    count = crossing.sum(axis=0)
    # a segment ending exactly on a match is counted by the interval before it
    count += (g[-1] == 0) & ~crossing[-1]
    u = np.arange(w, dtype=float)[None, :]
    inside = (u - ds[-1] >= 0) & (u - ds[0] <= w - 1)
    ok = np.broadcast_to(inside, (h, w)) & main.valid_mask
    return np.where(ok, count, -1)


def order_from_projector_x(xp, wrapped, wavelength_px: float):
    """Fringe order of a pixel from its (approximate) projector column and wrapped phase.

    ``floor(xp / wavelength)`` corrected by one period when the fractional
    position and the wrapped phase disagree by more than half a period.
    """
    q = np.asarray(xp, dtype=float) / wavelength_px
    n0 = np.floor(q)
    frac = q - n0
    w = np.asarray(wrapped, dtype=float) / TWO_PI
    order = n0 - (w - frac > 0.5) + (frac - w > 0.5)
    return order.astype(int) if order.ndim else int(order)


def phase_order(u: float, v: float, disparity: float, wrapped: float, rig: Rig,
                wavelength_px: float) -> tuple[int, float]:
    """Order and absolute phase of a single main-camera pixel."""
    if not np.isfinite(disparity) or disparity <= 0:
        raise ValueError("invalid disparity")
    z = rig.main.fx * rig.baseline / disparity
    x = (u - rig.main.cx) * z / rig.main.fx
    xp = float(rig.projector.project_x(x, z))
    if not 0 <= xp < rig.projector.width:
        raise ValueError(f"re-projected column {xp:.2f} outside the projector")
    n = order_from_projector_x(xp, wrapped, wavelength_px)
    return n, wrapped + TWO_PI * n


def unwrap_phase(main: PhaseFrame, disparity: DisparityMap, rig: Rig, wavelength_px: float) -> UnwrappedPhaseMap:
    """Absolute phase of every pixel with a valid disparity."""
    u, _ = rig.main.pixel_grid()
    valid = disparity.valid_mask & main.valid_mask
    d = np.where(valid, disparity.disparity, 1.0)
    z = rig.main.fx * rig.baseline / d
    x = (u - rig.main.cx) * z / rig.main.fx
    xp = rig.projector.project_x(x, z)
    valid &= (xp >= 0) & (xp < rig.projector.width)
    order = order_from_projector_x(xp, main.phase, wavelength_px)
    max_order = math.ceil(rig.projector.width / wavelength_px)
    valid &= (order >= 0) & (order < max_order)
    order = np.where(valid, order, 0)
    phase = np.where(valid, main.phase + TWO_PI * order, np.nan)
    return UnwrappedPhaseMap(phase, order, valid)


def unwrap_with_reference(main: PhaseFrame, reference_xp: np.ndarray, wavelength_px: float) -> UnwrappedPhaseMap:
    """Absolute phase using a known approximate projector column per pixel (e.g. a depth prior)."""
    valid = main.valid_mask & np.isfinite(reference_xp)
    order = np.where(valid, order_from_projector_x(np.nan_to_num(reference_xp), main.phase, wavelength_px), 0)
    valid &= order >= 0
    phase = np.where(valid, main.phase + TWO_PI * order, np.nan)
    return UnwrappedPhaseMap(phase, order, valid)


def triangulate_depth(unwrapped: UnwrappedPhaseMap, rig: Rig, wavelength_px: float,
                      min_conditioning: float = 1e-6) -> DepthMap:
    """Intersect each main-camera ray with the projector column plane of its absolute phase."""
    proj = rig.projector
    a, b = rig.main.rays()
    valid = unwrapped.valid_mask.copy()
    xp = np.where(valid, unwrapped.phase, 0.0) * wavelength_px / TWO_PI
    dx = xp - proj.cx
    denom = dx - proj.fx * a
    valid &= np.abs(denom) > min_conditioning * proj.fx
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (dx * proj.tz - proj.fx * proj.tx) / denom
    valid &= np.isfinite(z) & (z > 0)
    z = np.where(valid, z, np.nan)
    return DepthMap(z, valid, a * z, b * z)


def stereo_depth(main: PhaseFrame, aux: PhaseFrame, rig: Rig, wavelength_px: float,
                 window: int = DEFAULT_WINDOW, shiftable: bool = True, step: float = 0.25,
                 ) -> tuple[DepthMap, UnwrappedPhaseMap, DisparityMap]:
    """Full chain: SAD disparity -> fringe order -> depth."""
    disp = sad_match(main, aux, rig.disparity_range(), window, shiftable=shiftable, step=step)
    unwrapped = unwrap_phase(main, disp, rig, wavelength_px)
    return triangulate_depth(unwrapped, rig, wavelength_px), unwrapped, disp
