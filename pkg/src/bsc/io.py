"""File formats: binary PGM frames, float32 grids with JSON sidecars, CSV and XYZ text."""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .fringe import ImageFrame

FRAME_PATTERN = "frame_{:05d}"
_FRAME_RE = re.compile(r"frame_(\d+)\.(pgm|f32)$")


class FormatError(ValueError):
    """Malformed or inconsistent file contents."""


# ---------------------------------------------------------------- PGM (P5)

def write_pgm(path, image: np.ndarray, bits: int = 8) -> Path:
    """Write a binary PGM; values are rounded and clamped to ``[0, 2**bits - 1]``.

    16-bit samples are big-endian as the format requires.
    """
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    top = 2**bits - 1
    data = np.clip(np.rint(img), 0, top).astype(">u2" if bits == 16 else "u1")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n{top}\n".encode("ascii"))
        fh.write(data.tobytes())
    return path


def _pgm_tokens(buf: bytes, count: int):
    """First ``count`` header tokens and the offset just past the single whitespace that ends the header."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            pos = buf.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(buf[start:pos])
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM into a uint8 or uint16 array."""
    buf = Path(path).read_bytes()
    tokens, offset = _pgm_tokens(buf, 4)
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        w, h, top = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: bad PGM header") from exc
    if not 0 < top < 65536 or w <= 0 or h <= 0:
        raise FormatError(f"{path}: bad PGM header values")
    dtype = np.dtype(">u2") if top > 255 else np.dtype("u1")
    need = w * h * dtype.itemsize
    if len(buf) - offset < need:
        raise FormatError(f"{path}: expected {need} data bytes, found {len(buf) - offset}")
    data = np.frombuffer(buf, dtype=dtype, count=w * h, offset=offset).reshape(h, w)
    return data.astype(np.uint16 if top > 255 else np.uint8)


# ------------------------------------------------- float32 grid + sidecar

def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_grid(path, grid: np.ndarray, **meta) -> Path:
    """Raw little-endian float32 grid plus ``<name>.json`` with width, height, dtype and ``meta``."""
    g = np.asarray(grid)
    if g.ndim != 2:
        raise ValueError("grid must be 2-D")
    path = Path(path)
    g.astype("<f4").tofile(path)
    side = {"width": int(g.shape[1]), "height": int(g.shape[0]), "dtype": "float32", **meta}
    sidecar_path(path).write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
    return path


def read_grid(path) -> tuple[np.ndarray, dict]:
    """Load a float32 grid (as float64) and its sidecar metadata."""
    path = Path(path)
    try:
        meta = json.loads(sidecar_path(path).read_text())
    except FileNotFoundError as exc:
        raise FormatError(f"missing sidecar {sidecar_path(path)}") from exc
    if meta.get("dtype") != "float32":
        raise FormatError(f"{path}: unsupported dtype {meta.get('dtype')!r}")
    w, h = int(meta["width"]), int(meta["height"])
    data = np.fromfile(path, dtype="<f4")
    if data.size != w * h:
        raise FormatError(f"{path}: {data.size} samples, sidecar says {w}x{h}")
    return data.reshape(h, w).astype(float), meta


def write_phase(path, frame, **extra) -> Path:
    """Phase grid with validity folded in as NaN."""
    phase = np.where(frame.valid_mask, frame.phase, np.nan)
    return write_grid(path, phase, datum_index=frame.datum_index, order_K=frame.order_K,
                      steps_N=frame.steps_N, start_index=frame.start_index, **extra)


def read_phase(path):
    """Inverse of :func:`write_phase`; NaN pixels come back invalid with phase 0."""
    from .phase import PhaseFrame

    grid, meta = read_grid(path)
    valid = np.isfinite(grid)
    phase = np.where(valid, grid, 0.0)
    return PhaseFrame(phase, valid, int(meta.get("start_index", meta.get("datum_index", 0))),
                      int(meta.get("datum_index", 0)), int(meta.get("order_K", 0)),
                      int(meta.get("steps_N", 4)))


# ------------------------------------------------------------ frame dirs

def write_frames(directory, frames: Sequence[ImageFrame], fmt: str = "pgm", bits: int = 8) -> list[Path]:
    """Store frames as ``frame_00000.pgm`` (or ``.f32`` + sidecar)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for f in frames:
        stem = directory / FRAME_PATTERN.format(f.frame_index)
        if fmt == "pgm":
            out.append(write_pgm(stem.with_suffix(".pgm"), f.intensity, bits))
        elif fmt == "f32":
            extra = {} if f.timestamp is None else {"timestamp": f.timestamp}
            out.append(write_grid(stem.with_suffix(".f32"), f.intensity, frame_index=f.frame_index, **extra))
        else:
            raise ValueError(f"unknown frame format {fmt!r}")
    return out


def read_frames(directory) -> list[ImageFrame]:
    """Load every ``frame_*.pgm`` / ``frame_*.f32`` in index order."""
    found = []
    for p in Path(directory).iterdir():
        m = _FRAME_RE.match(p.name)
        if m:
            found.append((int(m.group(1)), p))
    if not found:
        raise FormatError(f"no frame_*.pgm or frame_*.f32 files in {directory}")
    found.sort()
    frames = []
    for idx, p in found:
        if p.suffix == ".pgm":
            frames.append(ImageFrame(read_pgm(p).astype(float), idx))
        else:
            grid, meta = read_grid(p)
            frames.append(ImageFrame(grid, int(meta.get("frame_index", idx)), meta.get("timestamp")))
    return frames


# -------------------------------------------------------------- text out

def write_offsets_csv(path, offsets: Iterable[float]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "x_i"])
        for i, x in enumerate(offsets):
            w.writerow([i, repr(float(x))])
    return path


def read_offsets_csv(path) -> list[float]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and [int(r["i"]) for r in rows] != list(range(len(rows))):
        raise FormatError(f"{path}: offset indices must run 0..n-1")
    return [float(r["x_i"]) for r in rows]


def write_rows_csv(path, rows: Sequence[dict], columns: Sequence[str]) -> Path:
    """CSV with a fixed column order; floats use ``repr`` so values round-trip exactly."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in (r[c] for c in columns)])
    return path


def write_xyz(path, points: np.ndarray, precision: int = 6) -> Path:
    """ASCII point cloud, one ``X Y Z`` line per point (mm)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must have shape (n, 3)")
    np.savetxt(path, pts, fmt=f"%.{precision}f", delimiter=" ")
    return Path(path)


def read_xyz(path) -> np.ndarray:
    return np.loadtxt(path, ndmin=2).reshape(-1, 3)
