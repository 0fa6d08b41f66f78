from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsc.geometry import (GeometryError, Rig, SystemGeometry, desk_rig, load_rig,
                          max_fringe_frequency, save_rig, virtual_segment_length)


def _geom(**kw):
    base = dict(z_min=400.0, z_max=500.0, z_nominal=450.0, cam_cam_baseline_L=35.0,
                projector_z=0.0, projector_focal_px=1000.0, projector_width_px=912)
    return SystemGeometry(**{**base, **kw})


def test_segment_length_example():
    assert virtual_segment_length(_geom()) == pytest.approx(7.875)
    assert virtual_segment_length(_geom(z_min=450.0, z_max=450.0)) == 0.0


def test_segment_length_linear_in_baseline():
    assert virtual_segment_length(_geom(cam_cam_baseline_L=70.0)) == pytest.approx(2 * 7.875)


def test_frequency_limit_for_desk_rig():
    geom = desk_rig().system_geometry(38.0)
    assert geom.wavelength_px == pytest.approx(24.0)
    f_limit, ok = max_fringe_frequency(geom, 38.0)
    # W / (d * f_proj / Z): one period per virtual segment at the nominal depth
    assert f_limit == pytest.approx(912 / (7.875 * 1000 / 450))
    assert ok
    assert max_fringe_frequency(geom, 105.0)[1] is False


def test_degenerate_depth_range_has_no_limit():
    assert max_fringe_frequency(_geom(z_min=450.0, z_max=450.0)) == float("inf")


def test_halving_baseline_doubles_limit():
    assert max_fringe_frequency(_geom(cam_cam_baseline_L=17.5)) == pytest.approx(2 * max_fringe_frequency(_geom()))


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0, 90.0), st.floats(1.0, 90.0))
def test_wider_range_lowers_limit(extra_a, extra_b):
    lo, hi = sorted((extra_a, extra_b))
    narrow = max_fringe_frequency(_geom(z_min=450.0 - lo, z_max=450.0 + lo))
    wide = max_fringe_frequency(_geom(z_min=450.0 - hi, z_max=450.0 + hi))
    assert wide <= narrow * (1 + 1e-12)


def test_projector_in_front_of_depth_is_rejected():
    with pytest.raises(GeometryError):
        max_fringe_frequency(_geom(projector_z=450.0))


def test_projector_behind_camera_raises_limit():
    assert max_fringe_frequency(_geom(projector_z=-100.0)) > max_fringe_frequency(_geom())


@pytest.mark.parametrize("kw", [dict(z_min=0.0), dict(z_nominal=520.0), dict(cam_cam_baseline_L=0.0),
                                dict(projector_width_px=0)])
def test_invalid_geometry(kw):
    with pytest.raises(GeometryError):
        _geom(**kw)


def test_nominal_may_equal_range_end():
    assert _geom(z_nominal=400.0).z_nominal == 400.0


def test_rig_round_trip(tmp_path):
    rig = desk_rig(64, 48)
    save_rig(rig, tmp_path / "g.json", 30.0)
    back, periods = load_rig(tmp_path / "g.json")
    assert periods == 30.0
    assert back == rig
    assert Rig.from_dict(rig.to_dict()) == rig


def test_rig_validation():
    rig = desk_rig()
    with pytest.raises(GeometryError):
        Rig(rig.main, replace(rig.aux, tx=-5.0), rig.projector)
    with pytest.raises(GeometryError):
        Rig(rig.main, replace(rig.aux, fx=rig.aux.fx + 1), rig.projector)


def test_camera_projection_inverts_rays():
    cam = desk_rig(32, 24).main
    sx, sy = cam.rays()
    u, v = cam.project(sx * 450.0, sy * 450.0, 450.0)
    uu, vv = cam.pixel_grid()
    np.testing.assert_allclose(u, uu, atol=1e-9)
    np.testing.assert_allclose(v, vv, atol=1e-9)


def test_disparity_range():
    rig = desk_rig()
    lo, hi = rig.disparity_range()
    assert lo == pytest.approx(rig.main.fx * 35.0 / 500.0)
    assert hi == pytest.approx(rig.main.fx * 35.0 / 400.0)
