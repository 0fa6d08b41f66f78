"""Fused per-pixel loops for the hot path (phase sums, wrapping, circular midpoint).

Batch and streaming code both call these, so their outputs stay bit-identical.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2 * math.pi
PI = math.pi


@njit(cache=True, nogil=True)
def sin_cos_valid(i0, i1, i2, i3, steps_N, min_sq, S, C, valid):
    """S and C sums plus the modulation test ``S^2 + C^2 >= min_sq``.

    ``i3`` is ignored for three steps. Inputs are 2-D C-contiguous grids.
    """
    h, w = S.shape
    for r in range(h):
        for c in range(w):
            a0 = float(i0[r, c])
            a2 = float(i2[r, c])
            if steps_N == 4:
                s = float(i1[r, c]) - float(i3[r, c])
            else:
                s = 2.0 * float(i1[r, c]) - a0 - a2
            k = a0 - a2
            S[r, c] = s
            C[r, c] = k
            valid[r, c] = s * s + k * k >= min_sq


@njit(cache=True, nogil=True)
def wrap_shift(phase, shift, valid, out):
    """``out = wrap(wrap(phase) + shift)`` into [0, 2*pi), zero where invalid.

    ``phase`` must lie in [-2*pi, 2*pi) and ``shift`` in [0, 2*pi); both
    wraps then need a single add or subtract, which matches ``np.mod``
    exactly for these ranges.
    """
    h, w = phase.shape
    for r in range(h):
        for c in range(w):
            if not valid[r, c]:
                out[r, c] = 0.0
                continue
            p = phase[r, c]
            if p < 0.0:
                p += TWO_PI
            if p >= TWO_PI:
                p = 0.0
            if shift != 0.0:
                p += shift
                if p >= TWO_PI:
                    p -= TWO_PI
            out[r, c] = p


@njit(cache=True, nogil=True)
def oplus_grid(a, b, ma, mb, out, mask_out):
    """Circular midpoint of two phase grids; AND of their masks; 0 where invalid."""
    h, w = a.shape
    for r in range(h):
        for c in range(w):
            m = ma[r, c] and mb[r, c]
            mask_out[r, c] = m
            if not m:
                out[r, c] = 0.0
                continue
            x = a[r, c]
            y = b[r, c]
            mid = 0.5 * (x + y)
            if abs(x - y) > PI:
                mid += PI
                if mid >= TWO_PI:
                    mid -= TWO_PI
            out[r, c] = mid


def as_grid(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a)
