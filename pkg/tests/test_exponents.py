import math

import numpy as np
import pytest

import lqg
from lqg import Connectivity, InvalidParameterError, ResolutionError
from lqg.exponents import GAMMA_PURE, central_charge, default_dimension

SQRT6 = math.sqrt(6.0)


# -- crossing-length fits --------------------------------------------------------


def test_fit_q_exact_power_law():
    xi, q = 0.4, 2.0
    eps = np.geomspace(0.02, 0.2, 6)
    samples = [(e, e ** (1 - xi * q)) for e in eps]
    slope, q_hat, _ = lqg.fit_Q(samples, xi)
    assert q_hat == pytest.approx(q, abs=1e-9)
    assert slope == pytest.approx(1 - xi * q, abs=1e-12)


def test_fit_q_two_points_exact():
    samples = [(0.1, 2.0), (0.2, 3.0)]
    slope, _, stderr = lqg.fit_Q(samples, 0.5)
    assert slope == pytest.approx(math.log(3 / 2) / math.log(2), rel=1e-12)
    assert math.isnan(stderr)


def test_fit_q_rejects_bad_samples():
    with pytest.raises(InvalidParameterError):
        lqg.fit_Q([(0.1, 1.0), (0.1, 2.0)], 0.5)
    with pytest.raises(InvalidParameterError):
        lqg.fit_Q([(0.1, 1.0), (0.2, -2.0)], 0.5)


def test_fit_q_stderr_coverage():
    rng = np.random.default_rng(12345)
    xi, q_true = 0.4, 2.0
    eps = np.geomspace(0.01, 0.2, 8)
    covered = 0
    for _ in range(100):
        noise = rng.normal(0.0, 0.01, size=len(eps))
        med = eps ** (1 - xi * q_true) * np.exp(noise)
        _, q_hat, se = lqg.fit_Q(list(zip(eps, med)), xi)
        covered += abs(q_hat - q_true) <= 3 * se
    assert covered >= 95


def test_estimate_a_eps_constant_stub():
    def stub(n, spacing, seed):
        return lqg.constant_field(n, spacing, 0.0)

    xi = 0.37
    fit = lqg.estimate_a_eps(xi, [0.25, 0.125, 0.0625], n=65, replicates=3,
                             seed=4, sampler=stub)
    for _, med, count in fit.samples:
        assert med == pytest.approx(1.0, rel=1e-14)
        assert count == 3
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
    assert fit.q_hat == pytest.approx(1.0 / xi, rel=1e-12)


def test_estimate_a_eps_single_replicate_is_that_sample():
    fit = lqg.estimate_a_eps(0.4, [0.25, 0.125], n=33, replicates=1, seed=11)
    f = lqg.sample_discrete_gff(33, 1.0 / 32, lqg.mix64(11, 0))
    for (eps, med, count) in fit.samples:
        metric = lqg.build_metric(lqg.mollify(f, eps), 0.4)
        assert med == lqg.crossing_distance(metric)
        assert count == 1


def test_estimate_a_eps_validates_input():
    with pytest.raises(ResolutionError):
        lqg.estimate_a_eps(0.4, [0.001], n=17, replicates=3, seed=0)
    with pytest.raises(InvalidParameterError):
        lqg.estimate_a_eps(0.4, [0.3], n=17, replicates=3, seed=0)
    with pytest.raises(InvalidParameterError):
        lqg.estimate_a_eps(0.4, [0.125], n=17, replicates=4, seed=0)
    with pytest.raises(InvalidParameterError):
        lqg.estimate_a_eps(-0.1, [0.125], n=17, replicates=3, seed=0)


def test_estimate_a_eps_threads_do_not_change_results():
    fit1 = lqg.estimate_a_eps(0.4, [0.25, 0.125], n=33, replicates=5, seed=3)
    fit4 = lqg.estimate_a_eps(0.4, [0.25, 0.125], n=33, replicates=5, seed=3,
                              threads=4)
    assert fit1.samples == fit4.samples


# -- parameter relations -----------------------------------------------------------


def test_parameter_triple_pure_gravity_point():
    t = lqg.parameter_triple(GAMMA_PURE)
    assert t.xi == pytest.approx(1.0 / SQRT6, rel=1e-12)
    assert t.q == pytest.approx(5.0 / SQRT6, rel=1e-12)
    assert t.d == pytest.approx(4.0, rel=1e-12)
    assert t.c_m == pytest.approx(0.0, abs=1e-12)


def test_parameter_triple_critical_point():
    t = lqg.parameter_triple(2.0)
    assert t.q == pytest.approx(2.0, rel=1e-14)
    assert t.c_m == pytest.approx(1.0, abs=1e-12)


def test_central_charge_at_zero_q():
    assert central_charge(0.0) == 25.0


def test_parameter_triple_identities_on_grid():
    for gamma in np.linspace(0.002, 2.0, 1000):
        t = lqg.parameter_triple(float(gamma))
        assert abs(t.xi * t.d - t.gamma) < 1e-12
        assert abs(t.q - (2.0 / t.gamma + t.gamma / 2.0)) < 1e-12
        assert abs(t.c_m - (25.0 - 6.0 * t.q * t.q)) < 1e-12


def test_parameter_triple_rejects_bad_gamma():
    for gamma in (0.0, -1.0, 2.1):
        with pytest.raises(InvalidParameterError):
            lqg.parameter_triple(gamma)


def test_xi_to_gamma_default_table_figure_values():
    assert lqg.xi_to_gamma(0.2).gamma == pytest.approx(0.46, abs=0.05)
    assert lqg.xi_to_gamma(0.4).gamma == pytest.approx(1.48, abs=0.05)


def test_xi_to_gamma_roundtrip_and_span():
    for gamma in (0.3, 1.0, 1.7, 2.0):
        t = lqg.parameter_triple(gamma)
        back = lqg.xi_to_gamma(t.xi)
        assert back.gamma == pytest.approx(gamma, rel=1e-9)
    xi_max = 2.0 / default_dimension(2.0)
    with pytest.raises(InvalidParameterError):
        lqg.xi_to_gamma(xi_max * 1.01)


def test_xi_to_gamma_with_empirical_table():
    table = []
    for gamma in np.linspace(0.4, 2.0, 12):
        t = lqg.parameter_triple(float(gamma))
        table.append((t.xi, t.q))
    t = lqg.xi_to_gamma(1.0 / SQRT6, q_table=table)
    assert t.gamma == pytest.approx(GAMMA_PURE, rel=1e-3)
    with pytest.raises(InvalidParameterError):
        lqg.xi_to_gamma(1e-4, q_table=table)  # outside span


def test_user_dimension_table_interpolation():
    g = [0.5, 1.0, GAMMA_PURE, 2.0]
    d = [default_dimension(x) for x in g]
    table = lqg.dimension_table_from_points(g, d)
    assert table(GAMMA_PURE) == pytest.approx(4.0, rel=1e-12)
    assert lqg.parameter_triple(1.0, d_table=table).d == pytest.approx(
        default_dimension(1.0), rel=1e-2)
    with pytest.raises(InvalidParameterError):
        table(0.1)


# -- KPZ relation --------------------------------------------------------------------


def test_kpz_zero_dimension_maps_to_zero():
    t = lqg.parameter_triple(1.2)
    assert lqg.kpz(0.0, t.xi, t.q).value == 0.0


def test_kpz_full_plane_at_pure_gravity():
    t = lqg.parameter_triple(GAMMA_PURE)
    assert lqg.kpz(2.0, t.xi, t.q).value == pytest.approx(4.0, abs=1e-9)


def test_kpz_supercritical_sentinel_and_boundary():
    res = lqg.kpz(1.9, 0.9, 1.5)  # 1.5^2 / 2 = 1.125 < 1.9
    assert math.isinf(res.value)
    assert not res.boundary
    q = 1.5
    res = lqg.kpz(q * q / 2.0, 0.9, q)
    assert res.boundary
    assert res.value == pytest.approx(q / 0.9, rel=1e-12)


def test_kpz_rejects_bad_dimension():
    for d0 in (-0.1, 2.1):
        with pytest.raises(InvalidParameterError):
            lqg.kpz(d0, 0.4, 2.0)


def test_kpz_monotone_and_continuous_below_boundary():
    t = lqg.parameter_triple(1.5)
    grid = np.linspace(0.0, min(2.0, t.q * t.q / 2.0) - 1e-9, 400)
    vals = np.array([lqg.kpz(float(d), t.xi, t.q).value for d in grid])
    assert np.all(np.diff(vals) > -1e-9)
    assert np.max(np.abs(np.diff(vals))) < 0.2  # no jumps on a fine grid


def test_kpz_full_plane_identity_across_gamma():
    for gamma in np.linspace(0.05, 2.0, 80):
        t = lqg.parameter_triple(float(gamma))
        if t.q * t.q / 2.0 <= 2.0:
            continue
        assert lqg.kpz(2.0, t.xi, t.q).value == pytest.approx(
            t.gamma / t.xi, rel=1e-9)


# -- covering dimension ----------------------------------------------------------------


def _euclid_stub(n):
    spacing = 1.0 / (n - 1)
    return lqg.build_metric(
        lqg.mollify(lqg.constant_field(n, spacing, 0.0), 2 * spacing), 1e-6)


def test_box_dimension_validates_input():
    m = _euclid_stub(17)
    full = np.ones((17, 17), dtype=bool)
    with pytest.raises(InvalidParameterError):
        lqg.box_dimension(m, full, [0.1, 0.05])  # too few radii
    with pytest.raises(InvalidParameterError):
        lqg.box_dimension(m, full, [0.1, 0.09, 0.08])  # too narrow
    with pytest.raises(InvalidParameterError):
        lqg.box_dimension(m, np.zeros((17, 17), dtype=bool), [0.1, 0.05, 0.025])


def test_box_dimension_euclid_sanity_small():
    # coarse smoke version; the calibrated full-strength check lives in the
    # acceptance suite
    m = _euclid_stub(257)
    full = np.ones((257, 257), dtype=bool)
    dim = lqg.box_dimension(m, full, [0.08, 0.04, 0.02])
    assert dim == pytest.approx(2.0, abs=0.3)
    seg = np.zeros((257, 257), dtype=bool)
    seg[128, :] = True
    dim1 = lqg.box_dimension(m, seg, [0.1, 0.05, 0.025])
    assert dim1 == pytest.approx(1.0, abs=0.3)


def test_cover_counts_monotone_in_radius():
    m = _euclid_stub(65)
    full = np.ones((65, 65), dtype=bool)
    counts = lqg.cover_counts(m, full, [0.2, 0.1, 0.05])
    assert counts[0] < counts[1] < counts[2]
