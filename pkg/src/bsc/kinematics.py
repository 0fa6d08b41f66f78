"""Motion profiles and finite differences of the per-frame phase offsets.

The offset ``x_i`` is the phase shift a pixel accumulates between the datum
frame and frame ``i``. Its finite differences play the role of velocity,
acceleration and so on, and they are what controls how fast binomial
compensation converges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

MAX_BINOMIAL_ORDER = 30

_KINDS = ("uniform_series", "linear", "sinusoid", "geometric")


def binomial_row(order: int) -> list[int]:
    """Exact binomial coefficients C(order, k), k = 0..order, via Pascal's triangle."""
    if order < 0:
        raise ValueError(f"binomial order must be >= 0, got {order}")
    if order > MAX_BINOMIAL_ORDER:
        raise ValueError(f"binomial order capped at {MAX_BINOMIAL_ORDER}, got {order}")
    row = [1]
    for _ in range(order):
        row = [a + b for a, b in zip([0] + row, row + [0])]
    return row


def binomial_weights(order: int) -> np.ndarray:
    """Normalised weights 2**-K * C(K, k); they sum to exactly 1."""
    row = binomial_row(order)
    return np.array(row, dtype=float) / float(2**order)


@dataclass(frozen=True)
class MotionProfile:
    """Per-frame phase offsets x_i in radians.

    Use the constructors (:meth:`linear`, :meth:`sinusoid`, :meth:`series`,
    :meth:`geometric`) rather than filling ``params`` by hand.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown motion kind {self.kind!r}; expected one of {_KINDS}")

    @classmethod
    def linear(cls, velocity: float) -> "MotionProfile":
        return cls("linear", {"velocity": float(velocity)})

    @classmethod
    def sinusoid(cls, amplitude: float, period: float, phase: float = 0.0) -> "MotionProfile":
        return cls("sinusoid", {"amplitude": float(amplitude), "period": float(period), "phase": float(phase)})

    @classmethod
    def series(cls, values: Sequence[float]) -> "MotionProfile":
        return cls("uniform_series", {"values": [float(v) for v in values]})

    @classmethod
    def geometric(cls, depths: Sequence[float], rig, wavelength_px: float) -> "MotionProfile":
        """Offsets induced by a fronto-parallel surface following the depth trajectory ``depths``.

        ``rig`` is a :class:`bsc.geometry.Rig`; offsets are evaluated on the
        main camera's principal ray.
        """
        return cls("geometric", {"depths": [float(z) for z in depths], "rig": rig,
                                 "wavelength_px": float(wavelength_px)})

    @classmethod
    def from_dict(cls, spec: dict, rig=None, wavelength_px: float | None = None) -> "MotionProfile":
        kind = spec["kind"]
        if kind == "linear":
            return cls.linear(spec["velocity"])
        if kind == "sinusoid":
            return cls.sinusoid(spec["amplitude"], spec.get("period", math.inf), spec.get("phase", 0.0))
        if kind == "uniform_series":
            return cls.series(spec["values"])
        if kind == "geometric":
            if rig is None or wavelength_px is None:
                raise ValueError("geometric motion needs a rig and a fringe wavelength")
            if "depths" in spec:
                depths = spec["depths"]
            else:
                count = int(spec["count"])
                t = np.arange(count)
                depths = spec["z_center"] + spec["z_amplitude"] * np.sin(2 * np.pi * t / spec["period"])
            return cls.geometric(depths, rig, wavelength_px)
        raise ValueError(f"unknown motion kind {kind!r}")


def sample_offsets(profile: MotionProfile, count: int) -> list[float]:
    """Evaluate ``x_0 .. x_{count-1}`` for a motion profile.

    Every kind except ``uniform_series`` is shifted so that ``x_0 == 0``
    (frame 0 is the datum).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    p = profile.params
    i = np.arange(count, dtype=float)

    if profile.kind == "uniform_series":
        values = p["values"]
        if len(values) < count:
            raise ValueError(f"series has {len(values)} values, {count} requested")
        return list(values[:count])

    if profile.kind == "linear":
        # i * v keeps x_{i+1} - x_i == v up to one rounding of the product
        return [k * p["velocity"] for k in range(count)]

    if profile.kind == "sinusoid":
        period = p["period"]
        if not math.isfinite(period) or p["amplitude"] == 0.0:
            return [0.0] * count
        x = p["amplitude"] * (np.sin(2 * np.pi * i / period + p["phase"]) - math.sin(p["phase"]))
        return x.tolist()

    # geometric
    depths = p["depths"]
    if len(depths) < count:
        raise ValueError(f"trajectory has {len(depths)} depths, {count} requested")
    rig = p["rig"]
    zs = np.asarray(depths[:count], dtype=float)
    if np.any(zs < rig.z_min) or np.any(zs > rig.z_max):
        raise ValueError(f"depth trajectory leaves [{rig.z_min}, {rig.z_max}] mm")
    xp = rig.principal_ray_projector_x(zs)
    phase = 2 * np.pi * xp / p["wavelength_px"]
    return (phase - phase[0]).tolist()


def finite_difference(series: Sequence[float], order: int, index: int) -> float:
    """K-th forward difference of ``series`` at ``index`` via the binomial closed form.

    >>> finite_difference([0.0, 1.0, 4.0], 2, 0)
    2.0
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    if index < 0 or index + order >= len(series):
        raise IndexError(f"window [{index}, {index + order}] exceeds series of length {len(series)}")
    coeffs = binomial_row(order)
    total = 0.0
    for k, c in enumerate(coeffs):
        sign = -1.0 if k % 2 else 1.0
        total += sign * c * series[index + order - k]
    return float(total)


def recursive_difference(series: Sequence[float], order: int, index: int) -> float:
    """Same quantity as :func:`finite_difference`, by nesting first differences."""
    if index < 0 or index + order >= len(series):
        raise IndexError(f"window [{index}, {index + order}] exceeds series of length {len(series)}")
    window = [float(v) for v in series[index:index + order + 1]]
    for _ in range(order):
        window = [b - a for a, b in zip(window[:-1], window[1:])]
    return window[0]


class DifferenceTable:
    """All forward differences of a series up to ``max_order``.

    Row ``K`` holds ``Δ^K x_i`` for every ``i`` where the window fits; rows are
    built by the recursive definition and can be cross-checked against
    :func:`finite_difference`.
    """

    def __init__(self, base_series: Sequence[float], max_order: int):
        if max_order < 0:
            raise ValueError("max_order must be >= 0")
        if max_order >= len(base_series):
            raise ValueError("max_order must be smaller than the series length")
        self.base_series = [float(v) for v in base_series]
        self.max_order = max_order
        rows = [np.asarray(self.base_series)]
        for _ in range(max_order):
            rows.append(np.diff(rows[-1]))
        self._rows = rows

    def __getitem__(self, key: tuple[int, int]) -> float:
        order, index = key
        if not 0 <= order <= self.max_order:
            raise IndexError(f"order {order} outside 0..{self.max_order}")
        return float(self._rows[order][index])

    def row(self, order: int) -> np.ndarray:
        return self._rows[order].copy()
