import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysheet.mc import RunningMoments, block_reduce, rng_stream
from levysheet.sheets import (Box, Domain, box_increment,
                              box_increment_samples, compensated_integral,
                              compensated_integral_samples, empirical_cf_check,
                              jump_count, sheet_value, simulate_brownian_sheet,
                              simulate_levy_sheet)


def test_domain_defaults_and_volume():
    d = Domain(upper=(2.0, 3.0))
    assert d.lower == (0.0, 0.0)
    assert d.volume == 6.0
    sym = Domain(upper=(1.0,), lower=(-1.0,))
    assert sym.volume == 2.0
    with pytest.raises(ValueError):
        Domain(upper=(1.0,), lower=(2.0,))


def test_levy_path_determinism(two_point):
    dom = Domain(upper=(1.0, 1.0))
    p1 = simulate_levy_sheet(two_point, dom, seed=42)
    p2 = simulate_levy_sheet(two_point, dom, seed=42)
    assert np.array_equal(p1.locations, p2.locations)
    assert np.array_equal(p1.marks, p2.marks)
    p3 = simulate_levy_sheet(two_point, dom, seed=43)
    assert p1.n_jumps != p3.n_jumps or not np.array_equal(p1.marks, p3.marks)


def test_sheet_value_additive_in_boxes(two_point):
    dom = Domain(upper=(2.0,))
    path = simulate_levy_sheet(two_point, dom, seed=5)
    full = box_increment(path, Box((0.0,), (2.0,)))
    left = box_increment(path, Box((0.0,), (1.3,)))
    right = box_increment(path, Box((1.3,), (2.0,)))
    assert full == pytest.approx(left + right, abs=1e-12)
    assert sheet_value(path, (2.0,)) == pytest.approx(full, abs=1e-12)


def test_marks_live_on_support(two_point):
    path = simulate_levy_sheet(two_point, Domain(upper=(3.0, 3.0)), seed=1)
    assert set(np.unique(path.marks)).issubset({-1.0, 1.0})
    assert np.all(path.locations >= 0.0) and np.all(path.locations <= 3.0)


def test_jump_count_excludes_zero_interval(two_point):
    path = simulate_levy_sheet(two_point, Domain(upper=(2.0,)), seed=9)
    box = Box((0.0,), (2.0,))
    n_pos = jump_count(path, box, [(0.5, 1.5)])
    n_neg = jump_count(path, box, [(-1.5, -0.5)])
    assert n_pos + n_neg == path.n_jumps
    with pytest.raises(ValueError):
        jump_count(path, box, [(-1.0, 1.0)])


def test_epsilon_truncation(two_point):
    # all atoms below epsilon: empty path, zero drift
    path = simulate_levy_sheet(two_point, Domain(upper=(1.0,)), epsilon=2.0,
                               seed=0)
    assert path.n_jumps == 0
    assert path.drift_rate == 0.0
    assert path.small_jump_variance == pytest.approx(1.0)


def test_compensated_integral_is_exact_sum(two_point):
    dom = Domain(upper=(1.0,))
    path = simulate_levy_sheet(two_point, dom, seed=3)

    def f(x, z):
        return np.asarray(x)[:, 0] * np.asarray(z)

    manual = float(np.sum(path.locations[:, 0] * path.marks))
    # compensator of x*z vanishes: int z nu(dz) = 0 for the symmetric measure
    assert compensated_integral(path, f) == pytest.approx(manual, abs=1e-12)


def test_brownian_sheet_values():
    dom = Domain(upper=(1.0, 1.0))
    grid = (np.linspace(0, 1, 5), np.linspace(0, 1, 5))
    path = simulate_brownian_sheet(dom, grid, seed=11)
    assert path.increments.shape == (4, 4)
    assert path.sheet_value((0.0, 0.0)) == 0.0
    total = path.sheet_value((1.0, 1.0))
    assert total == pytest.approx(float(path.increments.sum()), abs=1e-12)
    inc = box_increment(path, Box((0.25, 0.5), (0.75, 1.0)))
    assert inc == pytest.approx(float(path.increments[1:3, 2:4].sum()),
                                abs=1e-12)


def test_brownian_variance_scaling():
    dom = Domain(upper=(1.0, 1.0))
    grid = (np.linspace(0, 1, 3), np.linspace(0, 1, 3))
    vals = [simulate_brownian_sheet(dom, grid, seed=s).increments
            for s in range(400)]
    flat = np.array([v[0, 0] for v in vals])
    # cell volume 1/4; SE of the sample variance ~ 0.25 sqrt(2/400)
    assert abs(np.var(flat) - 0.25) < 3 * 0.25 * np.sqrt(2.0 / 400)


def test_block_reduce_worker_invariance(two_point):
    dom = Domain(upper=(1.0,))
    box = Box((0.0,), (1.0,))
    a = box_increment_samples(two_point, dom, box, 5000, seed=7, workers=1)
    b = box_increment_samples(two_point, dom, box, 5000, seed=7, workers=4)
    assert np.array_equal(a, b)


def test_cf_check_statistics(two_point):
    dom = Domain(upper=(1.0,))
    res = empirical_cf_check(two_point, dom, Box((0.0,), (1.0,)),
                             [0.5, 1.0, 2.0], n_seeds=20_000, seed=13)
    assert res["passed"], res["deviation"]


def test_compensated_integral_mean_and_variance(two_point):
    # Monte-Carlo mean 0, variance M int phi^2 for phi(x, z) = z * 1
    dom = Domain(upper=(1.0,))
    acc = compensated_integral_samples(
        two_point, dom, lambda x, z: np.asarray(z), 20_000, seed=17)
    assert abs(acc.mean) < 3 * acc.se_mean + 1e-12
    # int z^2 nu x lambda over [0,1] = M = 1
    assert abs(acc.variance - 1.0) < 3 * acc.se_variance


@given(st.integers(0, 2 ** 32), st.integers(0, 100))
@settings(max_examples=20, deadline=None)
def test_rng_streams_reproducible(seed, stream):
    a = rng_stream(seed, stream).normal(size=4)
    b = rng_stream(seed, stream).normal(size=4)
    assert np.array_equal(a, b)


def test_running_moments_merge():
    rng = np.random.default_rng(1)
    xs = rng.normal(size=1000)
    whole = RunningMoments()
    whole.add(xs)
    left, right = RunningMoments(), RunningMoments()
    left.add(xs[:400])
    right.add(xs[400:])
    left.merge(right)
    assert left.mean == pytest.approx(whole.mean, rel=1e-12)
    assert left.variance == pytest.approx(whole.variance, rel=1e-12)
