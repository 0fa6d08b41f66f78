"""Paraxial binocular rig: camera/projector models and the fringe-frequency limit.

World frame == main camera frame. All optical axes are parallel to +Z and the
auxiliary camera is a pure +X translation of the main camera, so the image
pairs are rectified by construction. Lengths are in millimetres, focal
lengths and widths in pixels.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np


class GeometryError(ValueError):
    """Raised for layouts the paraxial model cannot handle."""


@dataclass(frozen=True)
class SystemGeometry:
    z_min: float
    z_max: float
    z_nominal: float
    cam_cam_baseline_L: float
    projector_z: float
    projector_focal_px: float
    projector_width_px: int
    fringe_periods_f: float = 38.0

    def __post_init__(self):
        if not 0 < self.z_min <= self.z_nominal <= self.z_max:
            raise GeometryError(
                f"need 0 < z_min <= z_nominal <= z_max, got {self.z_min}, {self.z_nominal}, {self.z_max}")
        if self.cam_cam_baseline_L <= 0:
            raise GeometryError("camera-camera baseline must be positive")
        if self.projector_width_px <= 0 or self.projector_focal_px <= 0:
            raise GeometryError("projector width and focal length must be positive")

    @property
    def wavelength_px(self) -> float:
        return self.projector_width_px / self.fringe_periods_f

    def with_frequency(self, periods: float) -> "SystemGeometry":
        return SystemGeometry(**{**asdict(self), "fringe_periods_f": float(periods)})


def virtual_segment_length(geom: SystemGeometry) -> float:
    """Lateral extent (mm) at the nominal depth that one main-camera pixel can match in the aux view."""
    return ((geom.z_max - geom.z_min) * geom.z_nominal * geom.cam_cam_baseline_L
            / (geom.z_max * geom.z_min))


def max_fringe_frequency(geom: SystemGeometry, candidate: float | None = None):
    """Largest fringe frequency (periods across the projector) keeping stereo matches unique.

    Returns ``f_limit``, or ``(f_limit, candidate < f_limit)`` when a candidate
    frequency is given.
    """
    scale = 1.0 - geom.projector_z / geom.z_nominal
    if scale <= 0:
        raise GeometryError(
            f"1 - Z^p/Z = {scale:.4g} <= 0; projector must sit behind the measurement depth")
    if geom.z_max == geom.z_min:
        f_limit = float("inf")
    else:
        f_limit = (scale * geom.z_min * geom.z_max * geom.projector_width_px
                   / ((geom.z_max - geom.z_min) * geom.cam_cam_baseline_L * geom.projector_focal_px))
    if candidate is None:
        return f_limit
    return f_limit, bool(candidate < f_limit)


@dataclass(frozen=True)
class CameraModel:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    tx: float = 0.0  # optical centre X in the main-camera frame (mm)

    def pixel_grid(self) -> tuple[np.ndarray, np.ndarray]:
        v, u = np.mgrid[0:self.height, 0:self.width].astype(float)
        return u, v

    def rays(self) -> tuple[np.ndarray, np.ndarray]:
        """Ray slopes (dX/dZ, dY/dZ) for every pixel."""
        u, v = self.pixel_grid()
        return (u - self.cx) / self.fx, (v - self.cy) / self.fy

    def project(self, X, Y, Z):
        Z = np.asarray(Z, dtype=float)
        return self.fx * (np.asarray(X) - self.tx) / Z + self.cx, self.fy * np.asarray(Y) / Z + self.cy


@dataclass(frozen=True)
class ProjectorModel:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    tx: float = 0.0
    tz: float = 0.0  # Z^p

    def project_x(self, X, Z):
        return self.fx * (np.asarray(X) - self.tx) / (np.asarray(Z, dtype=float) - self.tz) + self.cx


@dataclass(frozen=True)
class Rig:
    """Main camera, auxiliary camera and projector plus the working depth range."""

    main: CameraModel
    aux: CameraModel
    projector: ProjectorModel
    z_min: float = 400.0
    z_max: float = 500.0
    z_nominal: float = 450.0
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.main.tx != 0.0:
            raise GeometryError("main camera defines the world frame and must sit at the origin")
        if self.aux.tx <= 0.0:
            raise GeometryError("auxiliary camera must be translated along +X")
        if self.aux.fx != self.main.fx or self.aux.cx != self.main.cx or self.aux.cy != self.main.cy:
            raise GeometryError("cameras must share intrinsics (rectified pair)")

    @property
    def baseline(self) -> float:
        return self.aux.tx

    def system_geometry(self, fringe_periods: float) -> SystemGeometry:
        return SystemGeometry(self.z_min, self.z_max, self.z_nominal, self.baseline,
                              self.projector.tz, self.projector.fx, self.projector.width,
                              float(fringe_periods))

    def disparity(self, z):
        return self.main.fx * self.baseline / np.asarray(z, dtype=float)

    def disparity_range(self) -> tuple[float, float]:
        return float(self.disparity(self.z_max)), float(self.disparity(self.z_min))

    def principal_ray_projector_x(self, z):
        return self.projector.project_x(0.0, z)

    def to_dict(self) -> dict:
        return {
            "z_min": self.z_min, "z_max": self.z_max, "z_nominal": self.z_nominal,
            "camera": {k: v for k, v in asdict(self.main).items() if k != "tx"},
            "baseline_L": self.baseline,
            "projector": asdict(self.projector),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Rig":
        cam = {k: d["camera"][k] for k in ("fx", "fy", "cx", "cy", "width", "height")}
        return cls(
            main=CameraModel(**cam),
            aux=CameraModel(**cam, tx=float(d["baseline_L"])),
            projector=ProjectorModel(**d["projector"]),
            z_min=float(d["z_min"]), z_max=float(d["z_max"]),
            z_nominal=float(d.get("z_nominal", 0.5 * (d["z_min"] + d["z_max"]))),
        )


def desk_rig(width: int = 160, height: int = 120, baseline: float = 35.0,
             projector_baseline: float = 100.0, projector_z: float = 0.0) -> Rig:
    """Synthetic desk-scale rig: 912 px wide projector, cameras tight together.

    The camera focal length scales with ``width`` so that every resolution
    sees the same field of view; the projector principal point is shifted so
    the camera field of view lands inside the projector over [400, 500] mm.
    """
    f_cam = 1.875 * width
    cam = dict(fx=f_cam, fy=f_cam, cx=(width - 1) / 2, cy=(height - 1) / 2, width=width, height=height)
    f_proj = 1000.0
    z_mid = 450.0
    proj = ProjectorModel(fx=f_proj, fy=f_proj,
                          cx=456.0 + f_proj * projector_baseline / (z_mid - projector_z),
                          cy=570.0, width=912, height=1140, tx=projector_baseline, tz=projector_z)
    return Rig(CameraModel(**cam), CameraModel(**cam, tx=baseline), proj)


def load_rig(path: str | Path) -> tuple[Rig, float]:
    """Read a geometry JSON file; returns the rig and the fringe frequency (periods)."""
    d = json.loads(Path(path).read_text())
    rig = Rig.from_dict(d)
    if "fringe_periods_f" in d:
        periods = float(d["fringe_periods_f"])
    elif "wavelength_px" in d:
        periods = rig.projector.width / float(d["wavelength_px"])
    else:
        periods = 38.0
    return rig, periods


def save_rig(rig: Rig, path: str | Path, fringe_periods: float) -> None:
    d = rig.to_dict()
    d["fringe_periods_f"] = fringe_periods
    Path(path).write_text(json.dumps(d, indent=2))
