"""Scenario documents, K sweeps and the streaming benchmark.

A scenario is a JSON document with a ``schema_version``; it is validated
with JSON Schema and every diagnostic carries the line it points at. One
global ``seed`` drives all randomness.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema import Draft202012Validator

from .core import StreamState, compensate, stream, stream_push
from .fringe import (FringeConfig, ImageFrame, NoiseConfig, PlaneScene, StepScene, phase0_from_scene,
                     ramp_phase, render_sequence, scene_offsets)
from .geometry import GeometryError, Rig, desk_rig
from .kinematics import MotionProfile, sample_offsets
from .oracle import circular_error, fit_ripple, predict_bsc_dc, predict_bsc_harmonic
from .phase import DEFAULT_MODULATION_THRESHOLD, wrap_pi

SCHEMA_VERSION = 1

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

SCENARIO_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "BSC scenario",
    "type": "object",
    "required": ["schema_version", "name", "seed", "frames", "steps_N", "k_range", "motion"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "minLength": 1},
        "seed": {"type": "integer", "minimum": 0},
        "frames": {"type": "integer", "minimum": 1},
        "steps_N": {"enum": [3, 4]},
        "k_range": {"type": "array", "minItems": 2, "maxItems": 2,
                    "items": {"type": "integer", "minimum": 0, "maximum": 30}},
        "threshold": {"type": "number", "minimum": 0},
        "oracle_tolerance": _POSITIVE,
        "fit_stride": {"type": "integer", "minimum": 1},
        "fringe": {
            "type": "object", "additionalProperties": False,
            "properties": {"wavelength_px": _POSITIVE,
                           "amplitude_A": {"type": "number", "minimum": 0},
                           "modulation_B": {"type": "number", "minimum": 0}},
        },
        "noise": {
            "type": "object", "additionalProperties": False,
            "properties": {"gaussian_sigma": {"type": "number", "minimum": 0},
                           "quantize_bits": {"enum": [None, 8, 16]}},
        },
        "motion": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": ["uniform_series", "linear", "sinusoid", "geometric"]}},
            "allOf": [
                {"if": {"properties": {"kind": {"const": "linear"}}},
                 "then": {"required": ["velocity"], "additionalProperties": False,
                          "properties": {"kind": True, "velocity": _NUMBER}}},
                {"if": {"properties": {"kind": {"const": "sinusoid"}}},
                 "then": {"required": ["amplitude"], "additionalProperties": False,
                          "properties": {"kind": True, "amplitude": _NUMBER,
                                         "period": {"anyOf": [_POSITIVE, {"const": "inf"}]},
                                         "phase": _NUMBER}}},
                {"if": {"properties": {"kind": {"const": "uniform_series"}}},
                 "then": {"required": ["values"], "additionalProperties": False,
                          "properties": {"kind": True, "values": {"type": "array", "items": _NUMBER}}}},
                {"if": {"properties": {"kind": {"const": "geometric"}}},
                 "then": {"additionalProperties": False,
                          "properties": {"kind": True, "depths": {"type": "array", "items": _POSITIVE},
                                         "z_center": _POSITIVE, "z_amplitude": _NUMBER, "period": _POSITIVE},
                          "oneOf": [{"required": ["depths"]},
                                    {"required": ["z_center", "z_amplitude", "period"]}]}},
            ],
        },
        "scene": {
            "type": "object", "additionalProperties": False,
            "properties": {"kind": {"enum": ["ramp", "plane", "step"]},
                           "width": {"type": "integer", "minimum": 8},
                           "height": {"type": "integer", "minimum": 1},
                           "z": _POSITIVE, "z_near": _POSITIVE, "z_far": _POSITIVE},
        },
        "geometry": {
            "type": "object",
            "required": ["z_min", "z_max", "camera", "baseline_L", "projector"],
            "properties": {
                "z_min": _POSITIVE, "z_max": _POSITIVE, "z_nominal": _POSITIVE, "baseline_L": _POSITIVE,
                "fringe_periods_f": _POSITIVE, "wavelength_px": _POSITIVE,
                "camera": {"type": "object", "required": ["fx", "fy", "cx", "cy", "width", "height"]},
                "projector": {"type": "object", "required": ["fx", "fy", "cx", "cy", "width", "height"]},
            },
        },
    },
}

DEFAULT_SCENE = {"kind": "ramp", "width": 240, "height": 32}

REPORT_COLUMNS = ("scenario", "seed", "K", "outputs", "dc", "cos2_amp", "sin2_amp", "harmonic_amp",
                  "ripple_mean_abs", "residual_rms", "rmse", "predicted_dc", "predicted_cos2",
                  "predicted_sin2", "max_oracle_mismatch", "batch_stream_identical")

REPORT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "BSC run report",
    "type": "object",
    "required": ["schema_version", "scenario", "seed", "steps_N", "frames", "rows", "timing"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "scenario": {"type": "string"},
        "seed": {"type": "integer"},
        "steps_N": {"enum": [3, 4]},
        "frames": {"type": "integer", "minimum": 1},
        "rows": {"type": "array", "items": {
            "type": "object", "required": list(REPORT_COLUMNS), "additionalProperties": False,
            "properties": {**{c: {"type": ["number", "null"]} for c in REPORT_COLUMNS},
                           "scenario": {"type": "string"}, "seed": {"type": "integer"},
                           "K": {"type": "integer", "minimum": 0}, "outputs": {"type": "integer", "minimum": 0},
                           "batch_stream_identical": {"type": "boolean"}}}},
        "timing": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["batch_ms_per_frame", "stream_ms_per_frame"],
            "properties": {"batch_ms_per_frame": {"type": "number"},
                           "stream_ms_per_frame": {"type": "number"}}}},
    },
}


# ------------------------------------------------------------ diagnostics

@dataclass
class Diagnostic:
    line: int
    path: str
    message: str

    def __str__(self):
        return f"line {self.line}: {self.path or '<root>'}: {self.message}"


class ScenarioError(ValueError):
    """Invalid scenario; ``diagnostics`` lists every problem with its source line."""

    def __init__(self, diagnostics: list[Diagnostic], source: str | None = None):
        self.diagnostics = diagnostics
        self.source = source
        prefix = f"{source}: " if source else ""
        super().__init__("\n".join(prefix + str(d) for d in diagnostics))


_WS = re.compile(r"[ \t\n\r]*")


def _value_offsets(text: str) -> dict[tuple, int]:
    """Character offset of every value in a (valid) JSON document, keyed by its path."""
    dec = json.JSONDecoder()
    where: dict[tuple, int] = {}

    def skip(i):
        return _WS.match(text, i).end()

    def value(i, path):
        i = skip(i)
        where[path] = i
        ch = text[i]
        if ch not in "{[":
            return dec.raw_decode(text, i)[1]
        close = "}" if ch == "{" else "]"
        i = skip(i + 1)
        if text[i] == close:
            return i + 1
        k = 0
        while True:
            if ch == "{":
                key, i = dec.raw_decode(text, skip(i))
                i = value(skip(i) + 1, path + (key,))  # +1 steps over ':'
            else:
                i = value(i, path + (k,))
            k += 1
            i = skip(i)
            if text[i] == ",":
                i += 1
                continue
            return i + 1

    value(0, ())
    return where


def _line_of(text: str | None, offsets: dict, path: tuple) -> int:
    if text is None:
        return 0
    path = tuple(path)
    while path not in offsets and path:
        path = path[:-1]
    return text.count("\n", 0, offsets.get(path, 0)) + 1


def _dotted(path) -> str:
    return "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path).lstrip(".")


# ------------------------------------------------------------ scenario

@dataclass
class ScenarioSpec:
    name: str
    seed: int
    frames: int
    steps_N: int
    k_range: tuple[int, int]
    motion: dict
    fringe: FringeConfig = field(default_factory=FringeConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    # a whole number of fringe periods keeps the 2*phi fit orthogonal to higher harmonics
    scene: dict = field(default_factory=lambda: dict(DEFAULT_SCENE))
    geometry: dict | None = None
    threshold: float = DEFAULT_MODULATION_THRESHOLD
    oracle_tolerance: float = 5e-3
    fit_stride: int = 1

    @property
    def Ks(self) -> list[int]:
        return list(range(self.k_range[0], self.k_range[1] + 1))

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.scene["height"]), int(self.scene["width"])

    # ---------------------------------------------------------- parsing

    @classmethod
    def loads(cls, text: str, source: str | None = None) -> "ScenarioSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError([Diagnostic(exc.lineno, "", f"invalid JSON: {exc.msg}")], source) from exc
        return cls.from_dict(doc, text, source)

    @classmethod
    def load(cls, path) -> "ScenarioSpec":
        return cls.loads(Path(path).read_text(), str(path))

    @classmethod
    def from_dict(cls, doc: Any, text: str | None = None, source: str | None = None) -> "ScenarioSpec":
        offsets = _value_offsets(text) if text is not None else {}
        validator = Draft202012Validator(SCENARIO_SCHEMA)
        errors = list(validator.iter_errors(doc))
        if errors:
            diags = [Diagnostic(_line_of(text, offsets, e.absolute_path), _dotted(e.absolute_path), e.message)
                     for e in errors]
            raise ScenarioError(sorted(diags, key=lambda d: (d.line, d.path)), source)

        def fail(path, message):
            raise ScenarioError([Diagnostic(_line_of(text, offsets, path), _dotted(path), message)], source)

        N = doc["steps_N"]
        k0, k1 = doc["k_range"]
        if k1 < k0:
            fail(("k_range",), f"k_range upper bound {k1} below lower bound {k0}")
        if doc["frames"] < k1 + N:
            fail(("frames",), f"{doc['frames']} frames cannot feed K={k1} with N={N}; need at least {k1 + N}")
        try:
            fringe = FringeConfig(steps_N=N, **doc.get("fringe", {}))
        except ValueError as exc:
            fail(("fringe",), str(exc))
        noise_doc = doc.get("noise", {})
        noise = NoiseConfig(noise_doc.get("gaussian_sigma", 0.0), noise_doc.get("quantize_bits"), doc["seed"])
        if noise.quantize_bits is not None:
            top = 2**noise.quantize_bits - 1
            if fringe.amplitude_A - fringe.modulation_B < 0 or fringe.amplitude_A + fringe.modulation_B > top:
                fail(("fringe",), f"A +/- B must stay inside [0, {top}] when quantising to {noise.quantize_bits} bits")
        scene = {**DEFAULT_SCENE, **doc.get("scene", {})}
        if scene["kind"] == "step" and not scene.get("z_near", 430.0) < scene.get("z_far", 480.0):
            fail(("scene",), "z_near must be smaller than z_far")
        spec = cls(doc["name"], doc["seed"], doc["frames"], N, (k0, k1), dict(doc["motion"]), fringe, noise,
                   scene, doc.get("geometry"), float(doc.get("threshold", DEFAULT_MODULATION_THRESHOLD)),
                   float(doc.get("oracle_tolerance", 5e-3)), int(doc.get("fit_stride", 1)))
        try:
            spec.rig()
            # sampling catches short series and depth trajectories leaving the working range
            spec.offset_series()
        except (GeometryError, ValueError, KeyError, TypeError) as exc:
            path = ("geometry",) if isinstance(exc, GeometryError) else ("motion",)
            fail(path, str(exc))
        return spec

    def to_dict(self) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION, "name": self.name, "seed": self.seed, "frames": self.frames,
            "steps_N": self.steps_N, "k_range": list(self.k_range), "threshold": self.threshold,
            "oracle_tolerance": self.oracle_tolerance, "fit_stride": self.fit_stride,
            "fringe": {"wavelength_px": self.fringe.wavelength_px, "amplitude_A": self.fringe.amplitude_A,
                       "modulation_B": self.fringe.modulation_B},
            "noise": {"gaussian_sigma": self.noise.gaussian_sigma, "quantize_bits": self.noise.quantize_bits},
            "motion": self.motion, "scene": self.scene,
        }
        if self.geometry is not None:
            d["geometry"] = self.geometry
        return d

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return ScenarioSpec.from_dict({**self.to_dict(), "seed": int(seed)})

    # ---------------------------------------------------------- building

    def rig(self) -> Rig:
        h, w = self.shape
        rig = Rig.from_dict(self.geometry) if self.geometry else desk_rig(w, h)
        if (rig.main.height, rig.main.width) != (h, w):
            raise GeometryError(f"geometry camera is {rig.main.width}x{rig.main.height}, scene asks for {w}x{h}")
        return rig

    def profile(self) -> MotionProfile:
        m = dict(self.motion)
        if m["kind"] == "sinusoid" and m.get("period") == "inf":
            m["period"] = math.inf
        if m["kind"] == "geometric" and "depths" not in m:
            m["count"] = self.frames
        return MotionProfile.from_dict(m, self.rig(), self.fringe.wavelength_px)

    def offset_series(self) -> list[float]:
        """Whole-frame offsets (for geometric motion: those of the principal ray)."""
        return sample_offsets(self.profile(), self.frames)

    def simulate(self, count: int | None = None, camera: str = "main") -> "Simulation":
        """Render the sequence seen by the main (or aux) camera; deterministic in ``seed``.

        The aux view draws its noise from ``seed + 1``.
        """
        count = self.frames if count is None else count
        kind = self.scene["kind"]
        if camera not in ("main", "aux"):
            raise ValueError(f"camera must be 'main' or 'aux', got {camera!r}")
        if camera == "aux" and kind == "ramp":
            raise ValueError("a ramp scene has no geometry, so there is no aux view")
        series = sample_offsets(self.profile(), count)
        noise = self.noise
        if kind == "ramp":
            h, w = self.shape
            phi0 = ramp_phase(w, h, self.fringe.wavelength_px)
            offsets = series
        else:
            rig = self.rig()
            cam = rig.main if camera == "main" else rig.aux
            if camera == "aux":
                noise = NoiseConfig(noise.gaussian_sigma, noise.quantize_bits, noise.seed + 1)
            if kind == "plane":
                make = PlaneScene
                base = PlaneScene(self.scene.get("z", rig.z_nominal))
            else:
                z_far = self.scene.get("z_far", 480.0)
                make = lambda z: StepScene(z, z_far)  # noqa: E731
                base = StepScene(self.scene.get("z_near", 430.0), z_far)
            if self.motion["kind"] == "geometric":
                depths = self.profile().params["depths"][:count]
                phi0, offsets = scene_offsets([make(z) for z in depths], cam, rig.projector,
                                              self.fringe, (rig.z_min, rig.z_max))
            else:
                phi0 = phase0_from_scene(base, cam, rig.projector, self.fringe, (rig.z_min, rig.z_max))
                offsets = series
        frames = render_sequence(self.fringe, phi0, offsets, count, noise)
        return Simulation(frames, phi0, series)


@dataclass
class Simulation:
    frames: list
    phase0: np.ndarray
    offset_series: list


# ------------------------------------------------------------ reports

@dataclass
class RunReport:
    scenario: str
    seed: int
    steps_N: int
    frames: int
    rows: list[dict]
    timing: dict  # str(K) -> {"batch_ms_per_frame", "stream_ms_per_frame"}

    def csv_text(self) -> str:
        """Deterministic CSV (no timing); floats in shortest round-trip form."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            w.writerow([_csv_cell(r[c]) for c in REPORT_COLUMNS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "scenario": self.scenario, "seed": self.seed,
                "steps_N": self.steps_N, "frames": self.frames, "rows": self.rows, "timing": self.timing}

    def write(self, csv_path=None, json_path=None):
        if csv_path is not None:
            Path(csv_path).write_text(self.csv_text())
        if json_path is not None:
            doc = self.to_dict()
            Draft202012Validator(REPORT_SCHEMA).validate(doc)
            Path(json_path).write_text(json.dumps(doc, indent=2) + "\n")

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        doc = json.loads(text)
        Draft202012Validator(REPORT_SCHEMA).validate(doc)
        return cls(doc["scenario"], doc["seed"], doc["steps_N"], doc["frames"], doc["rows"], doc["timing"])


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return v


def read_report_csv(text: str) -> list[dict]:
    """Parse :meth:`RunReport.csv_text` back into typed rows."""
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        if tuple(r) != REPORT_COLUMNS:
            raise ValueError(f"unexpected report columns {tuple(r)}")
        row = {}
        for c, v in r.items():
            if c == "scenario":
                row[c] = v
            elif c in ("seed", "K", "outputs"):
                row[c] = int(v)
            elif c == "batch_stream_identical":
                row[c] = v == "true"
            else:
                row[c] = float(v)
        rows.append(row)
    return rows


def _identical(a, b) -> bool:
    return len(a) == len(b) and all(
        x.start_index == y.start_index and x.datum_index == y.datum_index
        and np.array_equal(x.phase, y.phase) and np.array_equal(x.valid_mask, y.valid_mask)
        for x, y in zip(a, b))


def _k_row(spec: ScenarioSpec, sim: Simulation, K: int, outs) -> dict:
    """Ripple statistics of one K, averaged over every ``fit_stride``-th output.

    ``dc`` is the lag relative to the offset of each output's first frame.
    """
    acc = {k: [] for k in ("dc", "cos2", "sin2", "amp", "mean_abs", "resid", "sq", "pdc", "pc", "ps", "mis")}
    for o in outs[::spec.fit_stride]:
        i = o.start_index
        # re-datum on the output's first frame: only the offset spread inside the window is small
        xi = sim.offset_series[i]
        local = [x - xi for x in sim.offset_series[i:i + K + spec.steps_N]]
        basis = sim.phase0 + xi - i * (np.pi / 2)
        err = circular_error(o.phase, sim.phase0 + xi)
        fit = fit_ripple(err, basis, o.valid_mask)
        pc, ps = predict_bsc_harmonic(spec.steps_N, local, K, 0)
        pdc = predict_bsc_dc(spec.steps_N, local, K, 0)
        harmonic = fit.cos2_amp * np.cos(2 * basis) + fit.sin2_amp * np.sin(2 * basis)
        m = o.valid_mask
        acc["dc"].append(fit.dc)
        acc["cos2"].append(fit.cos2_amp)
        acc["sin2"].append(fit.sin2_amp)
        acc["amp"].append(fit.harmonic_amp)
        acc["mean_abs"].append(np.abs(harmonic[m]).mean())
        acc["resid"].append(fit.residual_rms)
        acc["sq"].append(np.mean((err[m] - fit.dc) ** 2))
        acc["pdc"].append(pdc)
        acc["pc"].append(pc)
        acc["ps"].append(ps)
        acc["mis"].append(max(abs(float(wrap_pi(fit.dc - pdc))), abs(fit.cos2_amp - pc), abs(fit.sin2_amp - ps)))
    mean = lambda k: float(np.mean(acc[k]))  # noqa: E731
    return {"scenario": spec.name, "seed": spec.seed, "K": K, "outputs": len(outs),
            "dc": mean("dc"), "cos2_amp": mean("cos2"), "sin2_amp": mean("sin2"), "harmonic_amp": mean("amp"),
            "ripple_mean_abs": mean("mean_abs"), "residual_rms": mean("resid"),
            "rmse": float(np.sqrt(np.mean(acc["sq"]))), "predicted_dc": mean("pdc"),
            "predicted_cos2": mean("pc"), "predicted_sin2": mean("ps"),
            "max_oracle_mismatch": float(np.max(acc["mis"]))}


def run_sweep(spec: ScenarioSpec) -> RunReport:
    """Simulate once, then for every K run batch and stream, check they agree bit for bit and fit the ripple."""
    if spec.frames < spec.k_range[1] + spec.steps_N:
        raise ScenarioError([Diagnostic(0, "frames", f"need at least K+N={spec.k_range[1] + spec.steps_N} frames")])
    sim = spec.simulate()
    rows, timing = [], {}
    for K in spec.Ks:
        t0 = time.perf_counter()
        batch = compensate(sim.frames, spec.steps_N, K, spec.threshold)
        t1 = time.perf_counter()
        streamed = stream(sim.frames, spec.steps_N, K, spec.threshold)
        t2 = time.perf_counter()
        row = _k_row(spec, sim, K, batch)
        row["batch_stream_identical"] = _identical(batch, streamed)
        rows.append(row)
        timing[str(K)] = {"batch_ms_per_frame": 1e3 * (t1 - t0) / spec.frames,
                          "stream_ms_per_frame": 1e3 * (t2 - t1) / spec.frames}
    return RunReport(spec.name, spec.seed, spec.steps_N, spec.frames, rows, timing)


# ------------------------------------------------------------ benchmark

@dataclass
class BenchReport:
    steps_N: int
    K: int
    width: int
    height: int
    frames: int
    mean_ms: float
    median_ms: float
    p99_ms: float

    @property
    def fps(self) -> float:
        return 1e3 / self.mean_ms

    def to_dict(self) -> dict:
        return {"steps_N": self.steps_N, "K": self.K, "width": self.width, "height": self.height,
                "frames": self.frames, "mean_ms": self.mean_ms, "median_ms": self.median_ms,
                "p99_ms": self.p99_ms, "fps": self.fps}


def bench_stream(spec: ScenarioSpec, frames: int = 800, K: int | None = None, width: int = 640,
                 height: int = 480, cycle: int = 16) -> BenchReport:
    """Per-push latency of :func:`stream_push` on ``width x height`` frames.

    ``cycle`` distinct images (a multiple of 4) are rendered from the scenario's
    fringe and whole-frame motion and replayed with increasing indices, so
    memory stays flat for long runs. Latency is measured only once the
    pipeline produces output.
    """
    if cycle % 4 or cycle < spec.steps_N:
        raise ValueError("cycle must be a multiple of 4 and at least N")
    K = spec.k_range[1] if K is None else K
    phi0 = ramp_phase(width, height, spec.fringe.wavelength_px)
    x = sample_offsets(spec.profile(), cycle)
    images = [f.intensity for f in render_sequence(spec.fringe, phi0, x, cycle, spec.noise)]

    warm = StreamState(spec.steps_N, K, spec.threshold)
    for i in range(K + spec.steps_N + 1):  # triggers JIT compilation outside the timed loop
        stream_push(warm, ImageFrame(images[i % cycle], i))

    state = StreamState(spec.steps_N, K, spec.threshold)
    lat = []
    for i in range(frames):
        f = ImageFrame(images[i % cycle], i)
        t0 = time.perf_counter()
        out = stream_push(state, f)
        dt = time.perf_counter() - t0
        if out is not None:
            lat.append(dt)
    if not lat:
        raise ValueError(f"{frames} frames never fill the K+N={K + spec.steps_N} warm-up")
    ms = 1e3 * np.asarray(lat)
    return BenchReport(spec.steps_N, K, width, height, frames, float(ms.mean()), float(np.median(ms)),
                       float(np.percentile(ms, 99)))


def default_spec(**overrides) -> ScenarioSpec:
    """800-frame linear-motion scenario on the default ramp, K = 0..6."""
    doc = {"schema_version": SCHEMA_VERSION, "name": "linear-default", "seed": 0, "frames": 800,
           "steps_N": 4, "k_range": [0, 6], "motion": {"kind": "linear", "velocity": 0.01}}
    doc.update(overrides)
    return ScenarioSpec.from_dict(doc)
