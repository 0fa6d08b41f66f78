import numpy as np
import pytest

from bsc.fringe import FringeConfig, NoiseConfig, PlaneScene, StepScene, phase0_from_scene, render_sequence
from bsc.geometry import desk_rig
from bsc.phase import TWO_PI, PhaseFrame, wrapped_phase
from bsc.stereo import (DisparityMap, UnwrappedPhaseMap, order_from_projector_x, phase_order, sad_match,
                        stereo_depth, triangulate_depth, unwrap_phase)
from bsc.experiments import plane_fit_residual


def _views(scene, rig, sigma=0.0, seed=0, wavelength=24.0):
    cfg = FringeConfig(wavelength)
    out = []
    for k, cam in enumerate((rig.main, rig.aux)):
        phi0 = phase0_from_scene(scene, cam, rig.projector, cfg)
        noise = NoiseConfig(sigma, None, seed + k) if sigma else None
        out.append(wrapped_phase(render_sequence(cfg, phi0, [0.0] * 4, 4, noise), 4))
    return out


@pytest.fixture(scope="module")
def rig():
    return desk_rig(96, 40)


def test_self_match_is_zero(rig):
    main, _ = _views(PlaneScene(450.0), rig)
    coarse = sad_match(main, main, (-2.0, 2.0), subpixel=False)
    assert coarse.valid_mask.any()
    assert np.all(coarse.disparity[coarse.valid_mask] == 0.0)
    fine = sad_match(main, main, (-2.0, 2.0))
    assert np.array_equal(fine.valid_mask, coarse.valid_mask)
    assert np.abs(fine.disparity[fine.valid_mask]).max() < 1e-9


def test_plane_disparity(rig):
    main, aux = _views(PlaneScene(450.0), rig)
    d = sad_match(main, aux, rig.disparity_range())
    expected = rig.baseline * rig.main.fx / 450.0
    assert d.valid_mask.sum() > 100
    assert np.abs(d.disparity[d.valid_mask] - expected).max() <= 0.5


def test_step_edge_is_localised(rig):
    scene = StepScene(430.0, 480.0)
    main, aux = _views(scene, rig)
    window = 5
    d = sad_match(main, aux, rig.disparity_range(), window)
    z = scene.depth(0.0, rig.main.rays()[0])
    truth = rig.main.fx * rig.baseline / z
    edge_col = int(np.argmax(np.diff(z[0]) != 0)) + 0.5
    bad = d.valid_mask & (np.abs(d.disparity - truth) > 0.5)
    cols = np.nonzero(bad)[1]
    assert np.all(np.abs(cols - edge_col) <= window)


def test_sad_match_errors(rig):
    main, aux = _views(PlaneScene(450.0), rig)
    with pytest.raises(ValueError):
        sad_match(main, aux, (10.0, 20.0), window=4)
    with pytest.raises(ValueError):
        sad_match(main, aux, (20.0, 10.0))
    with pytest.raises(ValueError):
        sad_match(main, PhaseFrame(aux.phase.copy(), aux.valid_mask.copy(), 0, 3), (10.0, 20.0))


def test_order_examples():
    n = order_from_projector_x(100.5, 100.5 / 24 % 1 * TWO_PI, 24.0)
    assert n == 4
    assert n * TWO_PI + 1.0 == pytest.approx(8 * np.pi + 1.0)
    # just past a period start the projector estimate says order 5; the wrapped phase
    # is still at the end of period 4, so the snap picks the lower order
    assert order_from_projector_x(120.01, TWO_PI - 1e-3, 24.0) == 4
    assert order_from_projector_x(119.99, 1e-3, 24.0) == 5


def test_phase_order_single_pixel(rig):
    d = rig.main.fx * rig.baseline / 450.0
    u = rig.main.cx
    xp = float(rig.projector.project_x(0.0, 450.0))
    wrapped = (xp / 24.0 % 1) * TWO_PI
    n, absolute = phase_order(u, 0.0, d, wrapped, rig, 24.0)
    assert n == int(xp // 24.0)
    assert absolute == pytest.approx(TWO_PI * xp / 24.0)
    with pytest.raises(ValueError):
        phase_order(u, 0.0, -1.0, wrapped, rig, 24.0)


def test_noiseless_plane_round_trip(rig):
    main, aux = _views(PlaneScene(450.0), rig)
    depth, unwrapped, _ = stereo_depth(main, aux, rig, 24.0)
    phi0 = phase0_from_scene(PlaneScene(450.0), rig.main, rig.projector, FringeConfig(24.0))
    m = unwrapped.valid_mask
    assert m.sum() > 100
    assert np.array_equal(unwrapped.order[m], np.floor(phi0 / TWO_PI).astype(int)[m])
    assert np.abs(depth.depth[depth.valid_mask] - 450.0).max() < 1e-6
    assert depth.points().shape == (int(depth.valid_mask.sum()), 3)


def test_triangulation_from_exact_phase(rig):
    for z in (410.0, 450.0, 495.0):
        phi0 = phase0_from_scene(PlaneScene(z), rig.main, rig.projector, FringeConfig(24.0))
        u = UnwrappedPhaseMap(phi0, np.zeros(phi0.shape, int), np.ones(phi0.shape, bool))
        depth = triangulate_depth(u, rig, 24.0)
        assert np.abs(depth.depth - z).max() < 1e-6


def test_plane_rmse_grows_with_noise(rig):
    rmse = []
    for sigma in (0.0, 1.0, 2.0):
        vals = []
        for seed in range(3):
            main, aux = _views(PlaneScene(450.0), rig, sigma, 10 * seed)
            depth, _, _ = stereo_depth(main, aux, rig, 24.0)
            vals.append(np.sqrt(np.mean(plane_fit_residual(depth.depth, depth.valid_mask) ** 2)))
        rmse.append(np.mean(vals))
    assert rmse[0] < rmse[1] < rmse[2]


def test_invalid_phase_gives_invalid_depth(rig):
    main, aux = _views(PlaneScene(450.0), rig)
    mask = main.valid_mask.copy()
    mask[20, 40] = False
    holed = PhaseFrame(main.phase.copy(), mask, 0, 0)
    depth, unwrapped, disp = stereo_depth(holed, aux, rig, 24.0)
    assert not depth.valid_mask[20, 40]
    assert not unwrapped.valid_mask[20, 40]
    dm = DisparityMap(np.full(mask.shape, np.nan), np.zeros(mask.shape, bool), 0.0, 1.0)
    assert not unwrap_phase(main, dm, rig, 24.0).valid_mask.any()
