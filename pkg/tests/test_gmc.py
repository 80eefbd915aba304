import math

import numpy as np
import pytest

import lqg
from lqg import InvalidParameterError


def _std_normalized_sampler(n, spacing, seed):
    """Lattice free field rescaled to unit log-variance growth (the
    normalization in which the moment threshold 4 / gamma^2 is stated)."""
    f = lqg.sample_discrete_gff(n, spacing, seed)
    return lqg.custom_field(math.sqrt(2 * math.pi) * np.asarray(f.values),
                            spacing)


def test_measure_rejects_bad_gamma():
    mol = lqg.mollify(lqg.constant_field(5, 1.0, 0.0), 1.0)
    for gamma in (0.0, -1.0, 2.5):
        with pytest.raises(InvalidParameterError):
            lqg.measure(mol, gamma)
    lqg.measure(mol, 2.0)  # critical value allowed (no log correction)


def test_measure_constant_field_total():
    n, spacing, eps, gamma = 9, 0.25, 0.6, 1.3
    mol = lqg.mollify(lqg.constant_field(n, spacing, 0.0), eps)
    grid = lqg.measure(mol, gamma)
    want = eps ** (gamma * gamma / 2.0) * n * n * spacing * spacing
    assert grid.total == pytest.approx(want, rel=1e-14)
    assert np.all(grid.cell_mass > 0)
    assert grid.total == pytest.approx(float(grid.cell_mass.sum()), rel=1e-9)


@pytest.mark.parametrize("C", [0.5, 2.0, 10.0])
@pytest.mark.parametrize("gamma", [1.0, math.sqrt(2.0), math.sqrt(8.0 / 3.0)])
def test_measure_mass_rescaling_under_shift(C, gamma):
    f = lqg.sample_discrete_gff(17, 0.25, seed=8)
    eps = 0.5
    base = lqg.measure(lqg.mollify(f, eps), gamma)
    shifted = lqg.measure(
        lqg.mollify(lqg.add_constant(f, math.log(C) / gamma), eps), gamma)
    ratio = shifted.cell_mass / base.cell_mass
    assert np.max(np.abs(ratio - C)) < 1e-12 * C


def test_mass_of_additivity():
    f = lqg.sample_discrete_gff(12, 0.5, seed=9)
    grid = lqg.measure(lqg.mollify(f, 1.0), 1.0)
    empty = np.zeros((12, 12), dtype=bool)
    full = np.ones((12, 12), dtype=bool)
    left = full.copy()
    left[:, 6:] = False
    right = ~left
    assert lqg.mass_of(grid, empty) == 0.0
    assert lqg.mass_of(grid, full) == pytest.approx(grid.total, rel=1e-12)
    assert lqg.mass_of(grid, left) + lqg.mass_of(grid, right) == pytest.approx(
        grid.total, rel=1e-12)


def test_center_cell_mass_is_lognormal_mean():
    n, gamma = 17, 1.0
    spacing = 1.0 / (n - 1)
    eps = 4 * spacing
    n_samples = 100_000
    mass = np.empty(n_samples)
    h = np.empty(n_samples)
    for k in range(n_samples):
        mol = lqg.mollify(lqg.sample_discrete_gff(n, spacing,
                                                  seed=lqg.mix64(99, k)), eps)
        h[k] = mol.values[n // 2, n // 2]
        mass[k] = (eps ** (gamma * gamma / 2.0)
                   * math.exp(gamma * h[k]) * spacing ** 2)
    pred = spacing ** 2 * eps ** (gamma ** 2 / 2) * math.exp(gamma ** 2 * h.var() / 2)
    se = mass.std(ddof=1) / math.sqrt(n_samples)
    assert abs(mass.mean() - pred) <= 5 * se


def test_moment_estimate_constant_stub_and_p0():
    def stub(n, spacing, seed):
        return lqg.constant_field(n, spacing, 0.0)

    eps = 0.125
    rep = lqg.moment_estimate(1.0, 1.0, 9, eps, 16, seed=1, sampler=stub)
    want = eps ** 0.5 * 81 * (1.0 / 64)
    assert rep.estimate == pytest.approx(want, rel=1e-14)
    assert rep.stderr == 0.0
    assert not rep.heavy_tail
    rep0 = lqg.moment_estimate(1.0, 0.0, 9, eps, 16, seed=1, sampler=stub)
    assert rep0.estimate == 1.0


def test_moment_estimate_requires_replicates():
    with pytest.raises(InvalidParameterError):
        lqg.moment_estimate(1.0, 1.0, 9, 0.1, 1, seed=1)


def test_moment_stability_and_heavy_tail_flag():
    # run with the documented seed: below the moment threshold the estimate
    # stabilizes; above it the single largest sample dominates the mean
    n = 64
    eps = 1.0 / (n - 1)
    seed = 3
    rep2 = lqg.moment_estimate(1.0, 2.0, n, eps, 10_000, seed,
                               sampler=_std_normalized_sampler)
    rep5 = lqg.moment_estimate(1.0, 5.0, n, eps, 10_000, seed,
                               sampler=_std_normalized_sampler)
    assert 1.96 * rep2.stderr / rep2.estimate < 0.2
    assert not rep2.heavy_tail
    assert rep5.heavy_tail


def test_max_cell_fraction_decreases_with_resolution():
    eps_phys = 0.05
    medians = []
    for n in (64, 128, 256):
        spacing = 1.0 / (n - 1)
        ratios = []
        for k in range(20):
            f = lqg.sample_discrete_gff(n, spacing, seed=lqg.mix64(5, k))
            grid = lqg.measure(lqg.mollify(f, eps_phys), 1.0)
            ratios.append(float(np.max(grid.cell_mass)) / grid.total)
        medians.append(float(np.median(ratios)))
    assert medians[0] > medians[1] > medians[2]


def test_every_subsquare_has_positive_mass():
    f = lqg.sample_discrete_gff(64, 1.0 / 63, seed=31)
    grid = lqg.measure(lqg.mollify(f, 0.1), 1.5)
    for i in range(0, 64, 8):
        for j in range(0, 64, 8):
            assert grid.cell_mass[i:i + 8, j:j + 8].sum() > 0.0


def test_refinement_diagnostic_reports_quadrants():
    f = lqg.sample_discrete_gff(32, 1.0 / 31, seed=13)
    diag = lqg.refinement_diagnostic(f, 1.0, 0.2)
    assert len(diag["quadrant_mass_at_eps"]) == 4
    assert len(diag["quadrant_mass_at_half_eps"]) == 4
    assert all(v > 0 for v in diag["quadrant_mass_at_eps"])
    assert diag["max_quadrant_rel_change"] >= 0.0
    total = sum(diag["quadrant_mass_at_eps"])
    grid = lqg.measure(lqg.mollify(f, 0.2), 1.0)
    assert total == pytest.approx(grid.total, rel=1e-12)
