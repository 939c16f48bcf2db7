import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levelset_gibbs.catalog import build_map
from levelset_gibbs.measures import (AngleDensity, AtomicMeasure,
                                     EmpiricalMeasure, angle_pushforward,
                                     nearest_atom_masses, rate_fit,
                                     tv_histogram, w1_circular, w1_line)
from levelset_gibbs.quadrature import GibbsSpec, GridDensity, gibbs_cdf

finite_floats = st.floats(-50.0, 50.0)


def atom(x):
    return AtomicMeasure(atoms=np.array([x]), weights=np.array([1.0]))


def test_w1_two_diracs():
    assert w1_line(atom(0.0), atom(1.0)) == pytest.approx(1.0, abs=1e-15)


def test_w1_identical_empiricals():
    pts = np.array([0.1, -2.0, 3.7, 0.1])
    assert w1_line(EmpiricalMeasure(pts), EmpiricalMeasure(pts.copy())) == 0.0


def test_w1_gaussian_mean_absolute():
    # mean absolute value of the centered Gaussian with variance eps/2;
    # the tabulation must be fine enough that its piecewise-linear CDF is
    # within the 1e-6 target of the continuum measure
    eps = 0.04
    spec = GibbsSpec(map=build_map("line"), k=2, eps=eps)
    tab = gibbs_cdf(spec, grid_n=32768)
    assert w1_line(tab, atom(0.0)) == pytest.approx(math.sqrt(eps / math.pi),
                                                    rel=1e-6)


def test_w1_empirical_vs_atomic_exact():
    emp = EmpiricalMeasure(np.array([0.0, 1.0]))
    assert w1_line(emp, atom(0.0)) == pytest.approx(0.5)
    assert w1_line(emp, atom(1.0)) == pytest.approx(0.5)


@given(st.lists(finite_floats, min_size=1, max_size=30),
       st.lists(finite_floats, min_size=1, max_size=30),
       st.lists(finite_floats, min_size=1, max_size=30))
@settings(max_examples=80, deadline=None)
def test_w1_metric_properties(a, b, c):
    ma, mb, mc = (EmpiricalMeasure(np.array(v)) for v in (a, b, c))
    dab = w1_line(ma, mb)
    dba = w1_line(mb, ma)
    assert dab == pytest.approx(dba, abs=1e-10)
    assert w1_line(ma, ma) <= 1e-15
    assert dab <= w1_line(ma, mc) + w1_line(mc, mb) + 1e-10


def test_w1_circular_identical():
    ang = np.array([-3.0, -1.0, 0.0, 2.0])
    assert w1_circular(ang, ang.copy()) == pytest.approx(0.0, abs=1e-12)


def test_w1_circular_uniform_rotation_invariance():
    grid = np.linspace(-math.pi, math.pi, 512, endpoint=False)
    unif = AngleDensity.from_values(grid, np.ones_like(grid))
    assert w1_circular(unif, unif) == pytest.approx(0.0, abs=1e-10)
    n = 4096
    samples = -math.pi + 2 * math.pi * (np.arange(n) + 0.5) / n
    for c in (0.7, 2.5, -1.2):
        rotated = np.mod(samples + c + math.pi, 2 * math.pi) - math.pi
        assert w1_circular(samples, rotated) <= 2 * math.pi / n


def test_w1_circular_two_diracs():
    assert w1_circular(np.array([0.0]), np.array([math.pi / 2])) == \
        pytest.approx(math.pi / 2, abs=1e-9)


def test_w1_circular_rejects_out_of_range():
    with pytest.raises(ValueError):
        w1_circular(np.array([0.0]), np.array([3.5]))


@given(st.lists(st.floats(-math.pi, math.pi - 1e-9), min_size=1, max_size=40),
       st.lists(st.floats(-math.pi, math.pi - 1e-9), min_size=1, max_size=40))
@settings(max_examples=60, deadline=None)
def test_circular_at_most_line(a, b):
    # cutting the circle open can only increase transport cost
    ma = EmpiricalMeasure(np.array(a))
    mb = EmpiricalMeasure(np.array(b))
    assert w1_circular(np.array(a), np.array(b)) <= w1_line(ma, mb) + 1e-10


def test_tv_exact_bin_centers():
    grid = np.linspace(0.0, 1.0, 513)
    target = GridDensity.from_samples_of(grid, np.ones_like(grid))
    bins = 8
    centers = (np.arange(bins) + 0.5) / bins
    samples = np.repeat(centers, 100)
    assert tv_histogram(samples, target, bins=bins) <= 1e-12


def test_tv_disjoint_supports():
    grid = np.linspace(0.0, 1.0, 129)
    target = GridDensity.from_samples_of(grid, np.ones_like(grid))
    samples = np.full(1000, 5.0)
    assert tv_histogram(samples, target, bins=8) == pytest.approx(1.0)


def test_tv_inverse_cdf_uniform():
    grid = np.linspace(0.0, 1.0, 513)
    target = GridDensity.from_samples_of(grid, np.ones_like(grid))
    samples = target.quantile((np.arange(100000) + 0.5) / 100000)
    assert tv_histogram(samples, target, bins=40) <= 0.02


def test_tv_shrinks_with_sample_size():
    grid = np.linspace(0.0, 1.0, 513)
    density = 1.0 + 0.5 * np.sin(2 * math.pi * grid)
    target = GridDensity.from_samples_of(grid, density)
    rng = np.random.default_rng(11)
    tvs = []
    for n in (10 ** 3, 10 ** 4, 10 ** 5):
        samples = target.quantile(rng.uniform(size=n))
        tvs.append(tv_histogram(samples, target, bins=40))
    # allow 2x noise on the expected 1/sqrt(n) trend
    assert tvs[2] <= 2.0 * tvs[1]
    assert tvs[1] <= 2.0 * tvs[0]
    assert tvs[2] <= tvs[0]


def test_tv_bins_validation():
    grid = np.linspace(0.0, 1.0, 17)
    target = GridDensity.from_samples_of(grid, np.ones_like(grid))
    with pytest.raises(ValueError):
        tv_histogram(np.array([0.5]), target, bins=1)


def test_rate_fit_exact_half_power():
    eps = [1e-4, 1e-3, 1e-2, 1e-1]
    fit = rate_fit([(e, e ** 0.5) for e in eps])
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_rate_fit_linear_with_constant():
    eps = [1e-3, 1e-2, 1e-1]
    fit = rate_fit([(e, 3.0 * e) for e in eps])
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)


def test_rate_fit_with_noise():
    rng = np.random.default_rng(7)
    eps = np.logspace(-5, -1, 12)
    vals = eps ** 0.5 * (1.0 + 0.1 * (2 * rng.uniform(size=12) - 1))
    fit = rate_fit(list(zip(eps, vals)))
    assert 0.4 <= fit.slope <= 0.6
    assert fit.r_squared >= 0.95


def test_rate_fit_validation():
    with pytest.raises(ValueError):
        rate_fit([(0.1, 1.0), (0.2, 2.0)])
    with pytest.raises(ValueError):
        rate_fit([(0.1, 1.0), (0.2, -2.0), (0.3, 1.0)])


def test_rate_fit_refit_consistency():
    fit = rate_fit([(e, 2.0 * e ** 0.7) for e in (1e-3, 1e-2, 1e-1, 1.0)])
    slope, intercept = fit.refit()
    assert slope == pytest.approx(fit.slope, abs=1e-12)
    assert intercept == pytest.approx(fit.intercept, abs=1e-12)


def test_angle_pushforward():
    pts = np.array([[1.0, 0.0], [0.0, 0.5], [-1.0, -1e-18]])
    ang = angle_pushforward(pts)
    assert ang[0] == 0.0
    assert ang[1] == pytest.approx(math.pi / 2)
    assert -math.pi <= ang[2] < math.pi


def test_angle_pushforward_origin_rejected():
    with pytest.raises(ValueError):
        angle_pushforward(np.array([[0.0, 0.0], [1.0, 1.0]]))


def test_atomic_measure_validation():
    with pytest.raises(ValueError):
        AtomicMeasure(atoms=np.array([0.0, 1.0]), weights=np.array([0.6, 0.6]))
    with pytest.raises(ValueError):
        AtomicMeasure(atoms=np.array([0.0, 1e-9]), weights=np.array([0.5, 0.5]))


def test_empirical_measure_sorted_1d():
    m = EmpiricalMeasure(np.array([3.0, -1.0, 2.0]))
    assert np.array_equal(m.points, np.array([-1.0, 2.0, 3.0]))
    with pytest.raises(ValueError):
        EmpiricalMeasure(np.empty(0))


def test_nearest_atom_masses():
    target = AtomicMeasure(atoms=np.array([0.0, 1.0]),
                           weights=np.array([0.5, 0.5]))
    samples = np.array([-0.1, 0.2, 0.9, 1.3])
    masses = nearest_atom_masses(samples, target)
    assert np.allclose(masses, [0.5, 0.5])
