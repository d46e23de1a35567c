import math

import numpy as np
import pytest
from scipy import stats

from procdcov.core import InvalidArgumentError, PairedSample, make_equidistant_grid, rng_stream
from procdcov.dcov_alpha import (
    PoissonGrid,
    _alpha_pair_stats,
    alpha_distance,
    c_k_constant,
    default_l_n,
    kernel_identity_integral,
    poisson_alpha_dcov,
    sample_poisson_grid,
)
from procdcov.gaussian_sim import ProcessModel, simulate_pair_sample


@pytest.fixture(scope="module")
def poisson_draws():
    rng = rng_stream(5, 0)
    return [sample_poisson_grid(rng) for _ in range(100_000)]


def test_poisson_empty_fraction(poisson_draws):
    empty = np.array([len(g) == 0 for g in poisson_draws], dtype=float)
    p = math.exp(-1.0)
    se = math.sqrt(p * (1 - p) / empty.size)
    assert abs(empty.mean() - p) < 4 * se


def test_poisson_mean_count(poisson_draws):
    counts = np.array([len(g) for g in poisson_draws], dtype=float)
    assert abs(counts.mean() - 1.0) < 4 * counts.std(ddof=1) / math.sqrt(counts.size)


def test_poisson_order_statistics(poisson_draws):
    pairs = np.array([g.arrivals for g in poisson_draws if len(g) == 2])
    # given two arrivals: min ~ Beta(1, 2), max ~ Beta(2, 1)
    assert stats.kstest(pairs[:, 0], stats.beta(1, 2).cdf).pvalue > 0.01
    assert stats.kstest(pairs[:, 1], stats.beta(2, 1).cdf).pvalue > 0.01
    assert np.all(np.diff(pairs, axis=1) > 0)


def test_poisson_grid_validation():
    PoissonGrid([])
    with pytest.raises(InvalidArgumentError):
        PoissonGrid([0.5, 0.4])
    with pytest.raises(InvalidArgumentError):
        PoissonGrid([0.5, 1.5])


def test_alpha_distance_examples():
    u = np.array([0.3, -1.2, 4.0])
    assert alpha_distance(u, u, 1.3) == 0.0
    assert alpha_distance([0, 0], [3, 4], 1.0) == pytest.approx(5.0)
    assert alpha_distance([0], [2], 0.5) == pytest.approx(1.4142136, abs=5e-8)
    assert alpha_distance([], [], 1.0) == 0.0
    with pytest.raises(InvalidArgumentError):
        alpha_distance([1, 2], [1], 1.0)


def test_single_pair_is_zero():
    grid = make_equidistant_grid(10)
    s = simulate_pair_sample(ProcessModel(rho=0.5), 1, grid, 0)
    assert poisson_alpha_dcov(s, 1.0, l_n=5, seed=1).value == 0.0


def test_two_pair_hand_example():
    # one arrival, |X1 - X2| = |Y1 - Y2| = 1  ->  I1 = 1/2, I2 = 1/4, I3 = 1/4
    s1, s2, s3, s4 = _alpha_pair_stats(np.array([[0.0], [1.0]]), np.array([[2.0], [3.0]]), 1.3)
    n = 2
    i1 = s1 / n**2
    i2 = (s2 / n**2) * (s3 / n**2)
    i3 = s4 / n**3
    assert (i1, i2, i3) == (0.5, 0.25, 0.25)
    assert i1 + i2 - 2 * i3 == 0.25


def test_two_pair_hand_example_through_estimator(monkeypatch):
    import procdcov.dcov_alpha as mod

    monkeypatch.setattr(mod, "sample_poisson_grid", lambda rng: PoissonGrid([0.5]))
    grid = make_equidistant_grid(2)
    s = PairedSample(grid, np.array([[0.0, 0.0], [0.0, 1.0]]), np.array([[5.0, 1.0], [5.0, 2.0]]))
    for form in ("per_grid", "pooled"):
        est = poisson_alpha_dcov(s, 0.7, l_n=1, seed=0, i2_form=form)
        # arrival 0.5 is nearest to grid point 0.5 (index 0): both differences 0
        assert est.value == 0.0
    s = PairedSample(grid, np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([[5.0, 0.0], [4.0, 0.0]]))
    for form in ("per_grid", "pooled"):
        est = poisson_alpha_dcov(s, 0.7, l_n=1, seed=0, i2_form=form)
        assert (est.i1_hat, est.i2_hat, est.i3_hat, est.value) == (0.5, 0.25, 0.25, 0.25)


def test_factorised_triple_sum_matches_naive(rng):
    for n in (2, 5, 12):
        x = rng.standard_normal((n, 3))
        y = rng.standard_normal((n, 3))
        alpha = 0.8
        a = np.array([[alpha_distance(x[i], x[j], alpha) for j in range(n)] for i in range(n)])
        b = np.array([[alpha_distance(y[i], y[j], alpha) for j in range(n)] for i in range(n)])
        naive = sum(a[i, j] * b[i, m] for i in range(n) for j in range(n) for m in range(n))
        _, sa, sb, rows = _alpha_pair_stats(x, y, alpha)
        assert rows == pytest.approx(naive, rel=1e-12)
        assert sa == pytest.approx(a.sum(), rel=1e-12)


def test_invariants_and_permutations():
    grid = make_equidistant_grid(25)
    s = simulate_pair_sample(ProcessModel(rho=0.6), 15, grid, 3)
    est = poisson_alpha_dcov(s, 1.2, l_n=6, seed=4)
    assert est.value == pytest.approx(est.i1_hat + est.i2_hat - 2 * est.i3_hat, abs=1e-12)
    assert min(est.i1_hat, est.i2_hat, est.i3_hat) >= 0.0
    assert est.value >= -1e-12
    perm = np.random.default_rng(0).permutation(15)
    p = poisson_alpha_dcov(s.permuted(perm), 1.2, l_n=6, seed=4)
    for f in ("i1_hat", "i2_hat", "i3_hat"):
        assert getattr(p, f) == pytest.approx(getattr(est, f), rel=1e-12)


def test_identical_y_paths_give_zero():
    grid = make_equidistant_grid(25)
    s = simulate_pair_sample(ProcessModel(rho=0.6), 10, grid, 3)
    s = PairedSample(grid, s.x_values, np.tile(s.y_values[0], (10, 1)))
    assert abs(poisson_alpha_dcov(s, 1.0, l_n=8, seed=4).value) <= 1e-12


def test_empty_grids_contribute_nothing(monkeypatch):
    import procdcov.dcov_alpha as mod

    grid = make_equidistant_grid(10)
    s = simulate_pair_sample(ProcessModel(rho=0.6), 6, grid, 3)
    seq = iter([PoissonGrid([0.3, 0.8]), PoissonGrid([]), PoissonGrid([0.3, 0.8]), PoissonGrid([])])
    monkeypatch.setattr(mod, "sample_poisson_grid", lambda rng: next(seq))
    with_empty = poisson_alpha_dcov(s, 1.0, l_n=4, seed=0)
    seq2 = iter([PoissonGrid([0.3, 0.8])])
    monkeypatch.setattr(mod, "sample_poisson_grid", lambda rng: next(seq2))
    single = poisson_alpha_dcov(s, 1.0, l_n=1, seed=0)
    assert with_empty.value == pytest.approx(single.value / 2, rel=1e-14)


def test_alpha_validation():
    grid = make_equidistant_grid(5)
    s = simulate_pair_sample(ProcessModel(), 3, grid, 0)
    for bad in (0.0, 2.0, -1.0):
        with pytest.raises(InvalidArgumentError):
            poisson_alpha_dcov(s, bad)
    with pytest.raises(InvalidArgumentError):
        poisson_alpha_dcov(ProcessModel(), 1.0)
    with pytest.raises(InvalidArgumentError):
        poisson_alpha_dcov(s, 1.0, i2_form="other")


def test_default_l_n():
    assert [default_l_n(n) for n in (1, 25, 26, 100)] == [1, 5, 6, 10]
    est = poisson_alpha_dcov(ProcessModel(), 1.0, seed=0, n=30)
    assert est.l_n == 6 and est.n == 30


def test_model_estimate_deterministic():
    m = ProcessModel("FractionalBrownianPair", rho=0.5, hurst=0.75)
    a = poisson_alpha_dcov(m, 1.5, seed=3, n=20)
    b = poisson_alpha_dcov(m, 1.5, seed=3, n=20)
    assert a == b


def test_independent_estimate_shrinks():
    m = ProcessModel(rho=0.0)
    med = []
    for n in (25, 50, 100):
        med.append(np.median([abs(poisson_alpha_dcov(m, 1.0, seed=r, n=n).value) for r in range(50)]))
    assert med[0] > med[1] > med[2]


def test_pooled_i2_is_biased_under_independence():
    # the literal pooled product does not vanish under independence
    m = ProcessModel(rho=0.0)
    vals = [poisson_alpha_dcov(m, 1.0, seed=r, n=100, i2_form="pooled").value for r in range(20)]
    assert np.median(vals) < -0.1


def test_c_k_examples():
    assert c_k_constant(1, 1.0) == pytest.approx(1 / math.pi, rel=1e-14)
    for k in (1, 2, 3, 5):
        for alpha in (0.1, 0.5, 1.0, 1.5, 1.9):
            assert c_k_constant(k, alpha) > 0.0
    with pytest.raises(InvalidArgumentError):
        c_k_constant(0, 1.0)
    with pytest.raises(InvalidArgumentError):
        c_k_constant(1, 2.0)


@pytest.mark.parametrize("u", [0.5, 1.0, 2.0, -2.0])
def test_kernel_identity_alpha_one(u):
    assert kernel_identity_integral(u, 1.0, 1.0 / math.pi) == pytest.approx(abs(u), abs=1e-3)


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_kernel_identity_other_alpha(alpha):
    assert kernel_identity_integral(1.0, alpha, c_k_constant(1, alpha)) == pytest.approx(1.0, abs=1e-3)
    assert kernel_identity_integral(2.0, alpha) == pytest.approx(2.0**alpha, abs=1e-3)


def test_c_k_two_dimensions_monte_carlo():
    # k=2: integral over R^2 of (1 - cos(s'x)) c_2 |s|^(-2-alpha) in polar form
    from scipy import integrate, special

    alpha = 1.0
    x = 1.7
    c2 = c_k_constant(2, alpha)
    # angular integral of 1 - cos(r |x| cos t) = 2 pi (1 - J0(r |x|))
    radial, _ = integrate.quad(
        lambda r: 2 * math.pi * (1 - special.j0(r * x)) * r ** (-1 - alpha), 0, 200, limit=500
    )
    tail = 2 * math.pi / (alpha * 200**alpha)  # J0 term negligible beyond r=200
    assert c2 * (radial + tail) == pytest.approx(x**alpha, rel=2e-3)
