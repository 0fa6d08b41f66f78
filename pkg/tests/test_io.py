import numpy as np
import pytest

from bsc import io as bio
from bsc.fringe import FringeConfig, ImageFrame, NoiseConfig, ramp_phase, render_sequence
from bsc.phase import PhaseFrame


@pytest.mark.parametrize("bits", [8, 16])
def test_pgm_round_trip(tmp_path, bits):
    top = 2**bits - 1
    img = np.random.default_rng(bits).integers(0, top + 1, (7, 11))
    bio.write_pgm(tmp_path / "a.pgm", img, bits)
    back = bio.read_pgm(tmp_path / "a.pgm")
    assert back.dtype == (np.uint16 if bits == 16 else np.uint8)
    assert np.array_equal(back, img)


def test_pgm_sixteen_bit_is_big_endian(tmp_path):
    bio.write_pgm(tmp_path / "b.pgm", np.array([[258]]), 16)
    assert (tmp_path / "b.pgm").read_bytes().endswith(b"\x01\x02")


def test_pgm_clamps_and_rounds(tmp_path):
    bio.write_pgm(tmp_path / "c.pgm", np.array([[-3.0, 12.6, 300.0]]), 8)
    assert bio.read_pgm(tmp_path / "c.pgm").tolist() == [[0, 13, 255]]


def test_pgm_header_comments(tmp_path):
    p = tmp_path / "d.pgm"
    p.write_bytes(b"P5\n# made by hand\n2 1\n# depth\n255\n\x05\x06")
    assert bio.read_pgm(p).tolist() == [[5, 6]]


def test_pgm_errors(tmp_path):
    p = tmp_path / "e.pgm"
    p.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(bio.FormatError, match="data bytes"):
        bio.read_pgm(p)
    p.write_bytes(b"P2\n1 1\n255\n0")
    with pytest.raises(bio.FormatError, match="not a binary PGM"):
        bio.read_pgm(p)
    p.write_bytes(b"P5\n1")
    with pytest.raises(bio.FormatError):
        bio.read_pgm(p)
    with pytest.raises(ValueError):
        bio.write_pgm(p, np.zeros((2, 2)), bits=12)


def test_grid_round_trip(tmp_path):
    g = np.arange(12, dtype=float).reshape(3, 4) / 7
    bio.write_grid(tmp_path / "g.f32", g, kind="test")
    back, meta = bio.read_grid(tmp_path / "g.f32")
    assert np.array_equal(back, g.astype(np.float32))
    assert meta == {"width": 4, "height": 3, "dtype": "float32", "kind": "test"}
    assert (tmp_path / "g.f32").stat().st_size == 12 * 4


def test_grid_errors(tmp_path):
    bio.write_grid(tmp_path / "g.f32", np.zeros((3, 4)))
    (tmp_path / "g.f32").write_bytes(b"\x00" * 20)
    with pytest.raises(bio.FormatError, match="sidecar says"):
        bio.read_grid(tmp_path / "g.f32")
    (tmp_path / "h.f32").write_bytes(b"\x00" * 4)
    with pytest.raises(bio.FormatError, match="missing sidecar"):
        bio.read_grid(tmp_path / "h.f32")


def test_phase_round_trip_keeps_mask(tmp_path):
    phase = np.full((2, 3), 1.25)
    mask = np.array([[True, False, True], [True, True, False]])
    frame = PhaseFrame(np.where(mask, phase, 0.0), mask, 7, 0, 2, 3)
    bio.write_phase(tmp_path / "p.f32", frame)
    back = bio.read_phase(tmp_path / "p.f32")
    assert np.array_equal(back.valid_mask, mask)
    assert np.array_equal(back.phase, frame.phase)
    assert (back.start_index, back.datum_index, back.order_K, back.steps_N) == (7, 0, 2, 3)


@pytest.mark.parametrize("fmt", ["pgm", "f32"])
def test_frame_directory(tmp_path, fmt):
    frames = render_sequence(FringeConfig(), ramp_phase(16, 4, 24.0), [0.0] * 6, 6, NoiseConfig(0, 8, 0))
    bio.write_frames(tmp_path, frames, fmt)
    (tmp_path / "notes.txt").write_text("ignored")
    back = bio.read_frames(tmp_path)
    assert [f.frame_index for f in back] == list(range(6))
    assert all(np.array_equal(a.intensity, b.intensity) for a, b in zip(frames, back))


def test_frame_directory_errors(tmp_path):
    with pytest.raises(bio.FormatError):
        bio.read_frames(tmp_path)
    with pytest.raises(ValueError):
        bio.write_frames(tmp_path, [ImageFrame(np.zeros((2, 2)), 0)], "png")


def test_offsets_csv_round_trip(tmp_path):
    xs = [0.0, 0.1, 1 / 3, -2e-17]
    bio.write_offsets_csv(tmp_path / "o.csv", xs)
    assert bio.read_offsets_csv(tmp_path / "o.csv") == xs
    (tmp_path / "bad.csv").write_text("i,x_i\n0,0.0\n2,0.1\n")
    with pytest.raises(bio.FormatError):
        bio.read_offsets_csv(tmp_path / "bad.csv")


def test_rows_csv_uses_exact_floats(tmp_path):
    bio.write_rows_csv(tmp_path / "r.csv", [{"a": 0.1 + 0.2, "b": 3}], ["b", "a"])
    assert (tmp_path / "r.csv").read_text() == "b,a\n3,0.30000000000000004\n"


def test_xyz_round_trip(tmp_path):
    pts = np.array([[1.0, -2.5, 450.125], [0.0, 0.0, 400.0]])
    bio.write_xyz(tmp_path / "p.xyz", pts)
    assert np.allclose(bio.read_xyz(tmp_path / "p.xyz"), pts)
    bio.write_xyz(tmp_path / "one.xyz", pts[:1])
    assert bio.read_xyz(tmp_path / "one.xyz").shape == (1, 3)
    with pytest.raises(ValueError):
        bio.write_xyz(tmp_path / "q.xyz", np.zeros((2, 2)))
