import math

import numpy as np
import pytest

import lqg
from lqg import Connectivity, InvalidParameterError, OutOfBoundsError


def _gff_metric(n=64, xi=0.4, seed=0, eps_px=4):
    spacing = 1.0 / (n - 1)
    f = lqg.sample_discrete_gff(n, spacing, seed=seed)
    return lqg.build_metric(lqg.mollify(f, eps_px * spacing), xi)


# -- confluence ------------------------------------------------------------------


def test_confluence_single_target_reports_trivial_pairs():
    m = _gff_metric(n=33, seed=5)
    dmax = float(np.max(lqg.distance_map(m, [(16, 16)]).dist))
    rep = lqg.confluence_stat(m, (16, 16), 0.3 * dmax, 0.1 * dmax, 1, seed=2)
    assert rep.trivial_pairs
    assert rep.shared_prefix_fraction == 1.0
    assert rep.num_targets == 1
    assert rep.geodesic_tree


def test_confluence_validates_radii():
    m = _gff_metric(n=17, seed=1)
    with pytest.raises(InvalidParameterError):
        lqg.confluence_stat(m, (8, 8), 0.1, 0.2, 3, seed=0)
    with pytest.raises(InvalidParameterError):
        # s beyond every distance: nothing outside the ball
        lqg.confluence_stat(m, (8, 8), 1e9, 1.0, 3, seed=0)


def test_constant_field_same_direction_geodesics_share_first_edge():
    # deterministic tie-breaking: geodesics to targets due east leave the
    # center through one edge
    n = 21
    spacing = 1.0
    f = lqg.constant_field(n, spacing, 0.0)
    m = lqg.build_metric(lqg.mollify(f, 2.0), 0.4, Connectivity.AXIS4)
    dmap = lqg.distance_map(m, [(10, 10)])
    first = {lqg.geodesic(dmap, (10, c)).vertices[1] for c in (14, 16, 18, 20)}
    assert len(first) == 1


def test_confluence_report_fixed_seed_statistics():
    n = 128
    m = _gff_metric(n=n, xi=0.4, seed=7)
    center = (n // 2, n // 2)
    dmax = float(np.max(lqg.distance_map(m, [center]).dist))
    rep = lqg.confluence_stat(m, center, 0.3 * dmax, 0.075 * dmax, 20, seed=7)
    assert rep.geodesic_tree
    assert rep.distinct_exit_edges < 20
    assert rep.distinct_exit_edges <= min(rep.num_targets, 8)
    assert 0.0 <= rep.shared_prefix_fraction <= 1.0
    assert len(rep.targets) == 20
    assert len(rep.prefix_lengths) == 20
    # reproducible
    rep2 = lqg.confluence_stat(m, center, 0.3 * dmax, 0.075 * dmax, 20, seed=7)
    assert rep2 == rep


# -- annulus comparison event -------------------------------------------------------


def test_annulus_event_false_on_constant_field():
    # flat geometry: going around costs ~4 pi times going across
    f = lqg.constant_field(129, 1.0, 0.0)
    m = lqg.build_metric(lqg.mollify(f, 2.0), 0.4)
    assert lqg.annulus_event(m, (64, 64), 12.0) is False


@pytest.mark.parametrize("c", [-3.0, 3.0])
def test_annulus_event_invariant_under_constant_shift(c):
    n = 96
    spacing = 1.0
    rng = np.random.default_rng(17)
    vals = rng.standard_normal((n, n))
    r = 10.0
    base = lqg.build_metric(lqg.mollify(lqg.custom_field(vals, spacing), 2.0), 0.4)
    shifted = lqg.build_metric(
        lqg.mollify(lqg.add_constant(lqg.custom_field(vals, spacing), c), 2.0), 0.4)
    assert lqg.annulus_event(base, (48, 48), r) == \
        lqg.annulus_event(shifted, (48, 48), r)


def test_annulus_event_requires_room():
    m = _gff_metric(n=33, seed=3)
    with pytest.raises(OutOfBoundsError):
        lqg.annulus_event(m, (16, 16), 10 * m.spacing)


def test_annulus_event_probability_strictly_between_zero_and_one():
    """Estimated event probability over 200 seeds at the documented
    parameters. Desk-scale measurements put the log cost ratio ~25 standard
    deviations above zero here, so this check is expected to fail until far
    larger lattices are feasible; see the repository notes."""
    n = 512
    spacing = 1.0 / (n - 1)
    r = 16 * spacing
    hits = 0
    for seed in range(200):
        f = lqg.sample_discrete_gff(n, spacing, seed=seed)
        metric = lqg.build_metric(lqg.mollify(f, 4 * spacing), 0.4)
        hits += lqg.annulus_event(metric, (n // 2, n // 2), r)
    assert 0 < hits < 200


# -- thick points ----------------------------------------------------------------------


def test_thick_points_constant_zero_field_none_flagged():
    f = lqg.constant_field(65, 1.0 / 64, 0.0)
    tmap = lqg.thick_point_map(f, 1.0, [0.25, 0.125])
    assert tmap.flagged_fraction == 0.0
    assert not tmap.flags.any()


def test_thick_points_bump_is_flagged():
    n = 65
    spacing = 1.0 / (n - 1)
    radii = [8 * spacing, 4 * spacing]
    f = lqg.constant_field(n, spacing, 0.0)
    height = 10.0 * abs(math.log(min(radii)))
    f = lqg.add_bump(f, lqg.BumpSpec((32, 32), 10 * spacing, 14 * spacing,
                                     height))
    tmap = lqg.thick_point_map(f, 2.0, radii)
    assert tmap.flags[32, 32]


def test_thick_points_threshold_monotonicity():
    f = lqg.sample_discrete_gff(65, 1.0 / 64, seed=9)
    radii = [0.2, 0.1]
    lo = lqg.thick_point_map(f, 0.2, radii)
    hi = lqg.thick_point_map(f, 0.5, radii)
    assert hi.flagged_fraction <= lo.flagged_fraction
    assert not (hi.flags & ~lo.flags).any()
    assert lo.flagged_fraction == lo.flags.sum() / 65 ** 2


def test_thick_points_subcritical_threshold_rarely_flags():
    n = 512
    spacing = 1.0 / (n - 1)
    f = lqg.sample_discrete_gff(n, spacing, seed=3)
    tmap = lqg.thick_point_map(f, 2.04, [32 * spacing, 16 * spacing,
                                         8 * spacing])
    assert tmap.flagged_fraction < 0.01


def test_thick_points_validation():
    f = lqg.constant_field(17, 1.0 / 16, 0.0)
    with pytest.raises(InvalidParameterError):
        lqg.thick_point_map(f, 1.0, [])
    with pytest.raises(InvalidParameterError):
        lqg.thick_point_map(f, 1.0, [0.1, 0.2])  # not decreasing
    with pytest.raises(InvalidParameterError):
        lqg.thick_point_map(f, 1.0, [1.5, 0.2])  # outside (0, 1)
    with pytest.raises(OutOfBoundsError):
        lqg.thick_point_map(f, 1.0, [0.9, 0.8])  # circles fit nowhere


# -- rasters -----------------------------------------------------------------------------


def test_raster_tiny_radius_only_source_dark():
    f = lqg.constant_field(9, 1.0, 0.0)
    m = lqg.build_metric(lqg.mollify(f, 2.0), 0.4, Connectivity.AXIS4)
    dmap = lqg.distance_map(m, [(4, 4)])
    img = lqg.ball_raster(dmap, 0.5)
    assert img.shape == (9, 9)
    assert img[4, 4] == 0
    off = img.copy()
    off[4, 4] = 255
    assert np.all(off == 255)


def test_raster_l1_diamond_shape():
    n, k = 17, 5
    f = lqg.constant_field(n, 1.0, 0.0)
    m = lqg.build_metric(lqg.mollify(f, 2.0), 0.4, Connectivity.AXIS4)
    dmap = lqg.distance_map(m, [(8, 8)])
    img = lqg.ball_raster(dmap, float(k))
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    diamond = (np.abs(rows - 8) + np.abs(cols - 8)) <= k
    assert np.array_equal(img < 255, diamond)


def test_raster_deterministic_and_overlays_geodesics():
    m = _gff_metric(n=48, seed=21)
    dmap = lqg.distance_map(m, [(24, 24)])
    radius = 0.4 * float(np.max(dmap.dist))
    targets = [(40, 40), (5, 30)]
    a = lqg.ball_raster(dmap, radius, targets)
    b = lqg.ball_raster(dmap, radius, targets)
    assert a.tobytes() == b.tobytes()
    assert a.shape == (48, 48)
    for t in targets:
        if dmap.dist[t] <= radius:
            assert a[t] == 0


def test_raster_requires_positive_radius():
    m = _gff_metric(n=17, seed=2)
    dmap = lqg.distance_map(m, [(8, 8)])
    with pytest.raises(InvalidParameterError):
        lqg.ball_raster(dmap, 0.0)
