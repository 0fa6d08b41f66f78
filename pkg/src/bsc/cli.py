"""Command-line entry point: ``bsc <subcommand> ...``.

Exit codes: 0 ok, 2 bad input (scenario, geometry, files), 3 numerical
failure under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as bio
from .core import compensate, stream
from .geometry import GeometryError, Rig, SystemGeometry, max_fringe_frequency, virtual_segment_length
from .kinematics import MotionProfile, sample_offsets
from .phase import DEFAULT_MODULATION_THRESHOLD, datum_correct, wrapped_phase
from .scenario import ScenarioError, ScenarioSpec, bench_stream, default_spec, run_sweep
from .stereo import DEFAULT_WINDOW, stereo_depth

EXIT_OK, EXIT_SPEC, EXIT_NUMERIC = 0, 2, 3


class NumericalFailure(RuntimeError):
    pass


def _out(args, path) -> Path:
    """Resolve an output path against the global ``--out`` directory."""
    p = Path(path)
    if args.out_root and not p.is_absolute():
        p = Path(args.out_root) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _load_spec(args) -> ScenarioSpec:
    spec = ScenarioSpec.load(args.scenario) if getattr(args, "scenario", None) else default_spec()
    return spec.with_seed(args.seed) if args.seed is not None else spec


def _k_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        return (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K or K0..K1, got {text!r}") from None


# ------------------------------------------------------------ commands

def cmd_simulate(args):
    spec = ScenarioSpec.load(args.config)
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    count = args.frames or spec.frames
    out = _out(args, args.out)
    out.mkdir(parents=True, exist_ok=True)
    sim = spec.simulate(count, camera=args.camera)
    fmt, bits = args.format, args.bits or spec.noise.quantize_bits or 8
    if fmt == "auto":
        fmt = "f32" if spec.noise.quantize_bits is None else "pgm"
    bio.write_frames(out, sim.frames, fmt, bits)
    bio.write_grid(out / "phase0.f32", sim.phase0, kind="ground_truth_phase", datum_index=0)
    bio.write_offsets_csv(out / "offsets.csv", sim.offset_series)
    (out / "scenario.json").write_text(json.dumps(spec.to_dict(), indent=2) + "\n")
    print(f"wrote {count} {fmt} frames to {out}")


def cmd_offsets(args):
    text = args.profile
    if Path(text).is_file():
        text = Path(text).read_text()
    try:
        doc = json.loads(text)
        profile = MotionProfile.from_dict(doc)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ValueError(f"bad motion profile: {exc}") from exc
    xs = sample_offsets(profile, args.count)
    if args.csv:
        bio.write_offsets_csv(_out(args, args.csv), xs)
    else:
        for i, x in enumerate(xs):
            print(f"{i},{x!r}")


def cmd_phase(args):
    frames = {f.frame_index: f for f in bio.read_frames(args.inp)}
    window = [frames.get(args.t + k) for k in range(args.n)]
    if any(f is None for f in window):
        raise bio.FormatError(f"frames {args.t}..{args.t + args.n - 1} not all present in {args.inp}")
    ph = wrapped_phase(window, args.n, args.threshold)
    if not args.raw:
        ph = datum_correct(ph, args.t)
    bio.write_phase(_out(args, args.out), ph)
    print(f"phase of frames {args.t}..{args.t + args.n - 1}: {int(ph.valid_mask.sum())} valid pixels")


def cmd_compensate(args):
    frames = bio.read_frames(args.inp)
    run = compensate if args.mode == "batch" else stream
    outs = run(frames, args.n, args.k, args.threshold)
    out = _out(args, args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for o in outs:
        name = f"phase_{o.start_index:05d}.f32"
        bio.write_phase(out / name, o)
        entries.append({"file": name, "start_index": o.start_index, "last_index": o.last_index,
                        "datum_index": o.datum_index})
    manifest = {"steps_N": args.n, "K": args.k, "mode": args.mode, "datum_index": 0,
                "frame_count": len(frames), "outputs": entries}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"{len(outs)} order-{args.k} phase frames written to {out}")


def _check_strict(args, report, tolerance):
    bad = [r for r in report.rows if not r["batch_stream_identical"] or r["max_oracle_mismatch"] > tolerance]
    if bad and args.strict:
        raise NumericalFailure("; ".join(
            f"K={r['K']}: oracle mismatch {r['max_oracle_mismatch']:.3g} (tol {tolerance:g}), "
            f"batch/stream identical={r['batch_stream_identical']}" for r in bad))


def cmd_oracle_check(args):
    spec = _load_spec(args)
    if args.k_range:
        spec = ScenarioSpec.from_dict({**spec.to_dict(), "k_range": list(args.k_range)})
    report = run_sweep(spec)
    cols = ("K", "predicted_cos2", "measured_cos2", "predicted_dc", "measured_dc", "residual_rms")
    rows = [{"K": r["K"], "predicted_cos2": r["predicted_cos2"], "measured_cos2": r["cos2_amp"],
             "predicted_dc": r["predicted_dc"], "measured_dc": r["dc"], "residual_rms": r["residual_rms"]}
            for r in report.rows]
    if args.csv:
        bio.write_rows_csv(_out(args, args.csv), rows, cols)
    for r in report.rows:
        print(f"K={r['K']}: cos2 {r['cos2_amp']:+.3e} (pred {r['predicted_cos2']:+.3e})  "
              f"dc {r['dc']:+.3e} (pred {r['predicted_dc']:+.3e})  mismatch {r['max_oracle_mismatch']:.2e}")
    _check_strict(args, report, spec.oracle_tolerance)


def cmd_sweep_k(args):
    spec = _load_spec(args)
    report = run_sweep(spec)
    report.write(_out(args, args.csv) if args.csv else None, _out(args, args.json) if args.json else None)
    if not args.csv:
        sys.stdout.write(report.csv_text())
    _check_strict(args, report, spec.oracle_tolerance)


def _load_geometry(path) -> tuple[SystemGeometry, Rig | None]:
    doc = json.loads(Path(path).read_text())
    if "cam_cam_baseline_L" in doc:
        return SystemGeometry(**doc), None
    rig = Rig.from_dict(doc)
    if "fringe_periods_f" in doc:
        periods = float(doc["fringe_periods_f"])
    elif "wavelength_px" in doc:
        periods = rig.projector.width / float(doc["wavelength_px"])
    else:
        raise GeometryError("geometry needs fringe_periods_f or wavelength_px")
    return rig.system_geometry(periods), rig


def cmd_freq_limit(args):
    geom, _ = _load_geometry(args.geometry)
    f = geom.fringe_periods_f if args.f is None else args.f
    f_limit, ok = max_fringe_frequency(geom, f)
    print(f"virtual segment length d = {virtual_segment_length(geom):.6g} mm")
    print(f"f_limit = {f_limit:.6g} periods")
    print(f"candidate f = {f:g}: {'PASS' if ok else 'FAIL'} (unique stereo match {'guaranteed' if ok else 'not guaranteed'})")
    if args.strict and not ok:
        raise NumericalFailure(f"f = {f:g} violates the uniqueness limit {f_limit:.6g}")


def cmd_unwrap(args):
    geom, rig = _load_geometry(args.geometry)
    if rig is None:
        raise GeometryError("unwrap needs a full rig geometry (camera, baseline_L, projector)")
    main, aux = bio.read_phase(args.phase), bio.read_phase(args.aux)
    depth, unwrapped, _ = stereo_depth(main, aux, rig, geom.wavelength_px, args.window)
    out = _out(args, args.out)
    bio.write_grid(out, np.where(depth.valid_mask, depth.depth, np.nan), kind="depth_mm",
                   datum_index=main.datum_index, order_K=main.order_K)
    if args.xyz:
        bio.write_xyz(_out(args, args.xyz), depth.points())
    print(f"depth for {int(depth.valid_mask.sum())} of {depth.valid_mask.size} pixels written to {out}")


def cmd_bench(args):
    spec = _load_spec(args)
    if args.n is not None:
        spec = ScenarioSpec.from_dict({**spec.to_dict(), "steps_N": args.n})
    rep = bench_stream(spec, args.frames, args.k, args.width, args.height)
    d = rep.to_dict()
    print(f"N={rep.steps_N} K={rep.K} {rep.width}x{rep.height}, {rep.frames} frames: "
          f"mean {rep.mean_ms:.3f} ms, median {rep.median_ms:.3f} ms, p99 {rep.p99_ms:.3f} ms, "
          f"{rep.fps:.1f} frames/s")
    if args.json:
        _out(args, args.json).write_text(json.dumps(d, indent=2) + "\n")


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bsc", description="Binomial self-compensation toolkit for phase-shifting profilometry.")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--threads", type=int, default=None, help="cap native (BLAS) thread pools")
    p.add_argument("--out", dest="out_root", default=None, help="base directory for relative output paths")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="render a fringe sequence from a scenario")
    s.add_argument("--config", required=True)
    s.add_argument("--frames", type=int, default=None)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("auto", "pgm", "f32"), default="auto")
    s.add_argument("--bits", type=int, choices=(8, 16), default=None)
    s.add_argument("--camera", choices=("main", "aux"), default="main")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("offsets", help="sample a motion profile")
    s.add_argument("--profile", required=True, help="JSON object or file, e.g. '{\"kind\": \"linear\", \"velocity\": 0.01}'")
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--csv", default=None)
    s.set_defaults(func=cmd_offsets)

    s = sub.add_parser("phase", help="wrapped phase of one window")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--n", type=int, choices=(3, 4), required=True)
    s.add_argument("--t", type=int, required=True, help="index of the window's first frame")
    s.add_argument("--out", required=True)
    s.add_argument("--threshold", type=float, default=DEFAULT_MODULATION_THRESHOLD)
    s.add_argument("--raw", action="store_true", help="skip datum correction")
    s.set_defaults(func=cmd_phase)

    s = sub.add_parser("compensate", help="order-K compensated phases of a frame directory")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--n", type=int, choices=(3, 4), required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--mode", choices=("batch", "stream"), default="batch")
    s.add_argument("--out", required=True)
    s.add_argument("--threshold", type=float, default=DEFAULT_MODULATION_THRESHOLD)
    s.set_defaults(func=cmd_compensate)

    for name, func, help_ in (("oracle-check", cmd_oracle_check, "fitted ripple against the closed-form prediction"),
                              ("sweep-k", cmd_sweep_k, "run a scenario for every K in its range")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--scenario", default=None, help="scenario JSON (default: built-in linear scenario)")
        s.add_argument("--csv", default=None)
        s.add_argument("--strict", action="store_true", help="exit 3 on oracle mismatch or batch/stream drift")
        if name == "oracle-check":
            s.add_argument("--k-range", type=_k_range, default=None, help="K or K0..K1")
        else:
            s.add_argument("--json", default=None)
        s.set_defaults(func=func)

    s = sub.add_parser("freq-limit", help="uniqueness limit of the fringe frequency")
    s.add_argument("--geometry", required=True)
    s.add_argument("--f", type=float, default=None, help="candidate frequency (default: the geometry's)")
    s.add_argument("--strict", action="store_true", help="exit 3 when the candidate fails")
    s.set_defaults(func=cmd_freq_limit)

    s = sub.add_parser("unwrap", help="stereo unwrapping and depth")
    s.add_argument("--phase", required=True)
    s.add_argument("--aux", required=True)
    s.add_argument("--geometry", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--xyz", default=None, help="also write an ASCII point cloud")
    s.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    s.set_defaults(func=cmd_unwrap)

    s = sub.add_parser("bench", help="stream_push latency")
    s.add_argument("--scenario", default=None)
    s.add_argument("--frames", type=int, default=800)
    s.add_argument("--n", type=int, choices=(3, 4), default=None)
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--width", type=int, default=640)
    s.add_argument("--height", type=int, default=480)
    s.add_argument("--json", default=None)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=args.threads):
                args.func(args)
        else:
            args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ScenarioError, GeometryError, bio.FormatError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
