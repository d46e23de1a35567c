import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from procdcov import _accel
from procdcov._kernels import cross_exp_sums, pairwise_distances
from procdcov.core import Grid, InvalidArgumentError, PairedSample, SampledPath, make_equidistant_grid
from procdcov.gaussian_sim import ProcessModel, simulate_pair_sample
from procdcov.kernels import (
    KernelField,
    WeightKernel,
    build_kernel_field,
    field_from_values,
    integrated_exponent,
    kernel_value,
)


def test_kernel_value_examples():
    assert kernel_value(WeightKernel(1.0, 1.0), 0.0) == 1.0
    assert kernel_value(WeightKernel(2.0, 0.5), 2.0) == pytest.approx(math.exp(-2.0), rel=1e-15)
    assert kernel_value(WeightKernel(2.0, 0.5), 2.0) == pytest.approx(0.1353353, abs=5e-8)
    k = WeightKernel(1.0, 1.0)
    assert kernel_value(k, -3.0) == kernel_value(k, 3.0) == pytest.approx(math.exp(-3.0))


@pytest.mark.parametrize("alpha, scale", [(0.0, 1.0), (2.5, 1.0), (1.0, 0.0), (1.0, -1.0)])
def test_kernel_validation(alpha, scale):
    with pytest.raises(InvalidArgumentError):
        WeightKernel(alpha, scale)


def test_field_single_path(grid10):
    f = build_kernel_field([SampledPath(grid10, np.arange(10.0))], WeightKernel(1.0, 1.0))
    assert f.entries.shape == (1, 1, 10)
    assert np.all(f.entries == 1.0)


def test_field_constant_paths(grid10):
    paths = [SampledPath(grid10, np.zeros(10)), SampledPath(grid10, np.ones(10))]
    f = build_kernel_field(paths, WeightKernel(1.0, 1.0))
    assert np.allclose(f.entries[0, 1], math.exp(-1.0), rtol=0, atol=1e-16)
    assert np.allclose(f.entries[1, 0], math.exp(-1.0), rtol=0, atol=1e-16)


def test_field_rejects_mixed_grids():
    a = SampledPath(make_equidistant_grid(3), np.zeros(3))
    b = SampledPath(make_equidistant_grid(4), np.zeros(4))
    with pytest.raises(InvalidArgumentError):
        build_kernel_field([a, b], WeightKernel())


def test_field_matches_kernel_value(grid10, rng):
    k = WeightKernel(1.3, 0.7)
    s = simulate_pair_sample(ProcessModel(), 5, grid10, 1)
    f = build_kernel_field(s.x_paths, k)
    for i, j, g in [(0, 1, 0), (3, 2, 9), (4, 4, 5)]:
        want = kernel_value(k, s.x_values[i, g] - s.x_values[j, g])
        assert f.entries[i, j, g] == pytest.approx(want, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 5)), elements=st.floats(-5, 5)),
    st.floats(0.1, 2.0),
    st.floats(0.1, 3.0),
)
def test_field_invariants(values, alpha, scale):
    f = field_from_values(values, WeightKernel(alpha, scale))
    n = values.shape[0]
    assert np.all(f[np.arange(n), np.arange(n)] == 1.0)
    assert np.array_equal(f, f.transpose(1, 0, 2))
    assert f.max() <= 1.0 and f.min() >= 0.0


def test_field_entries_positive_for_moderate_values(rng):
    f = field_from_values(rng.standard_normal((20, 30)), WeightKernel(2.0, 0.5))
    assert f.min() > 0.0 and f.max() <= 1.0


def _field(entries, grid):
    return KernelField(np.asarray(entries, dtype=float), grid)


def test_integrated_exponent_examples():
    g5 = make_equidistant_grid(5)
    ones = _field(np.ones((2, 2, 5)), g5)
    assert integrated_exponent(ones, ones, 0, 1, 1, 0) == pytest.approx(1.0, abs=1e-15)
    g1 = Grid([1.0], [1.0])
    a = _field(np.full((1, 1, 1), 0.3), g1)
    b = _field(np.full((1, 1, 1), 0.6), g1)
    assert integrated_exponent(a, b, 0, 0, 0, 0) == pytest.approx(0.18)
    g2 = make_equidistant_grid(2)
    a = _field(np.array([[[0.2, 0.4]]]), g2)
    b = _field(np.ones((1, 1, 2)), g2)
    assert integrated_exponent(a, b, 0, 0, 0, 0) == pytest.approx(0.3, abs=1e-15)


def test_integrated_exponent_symmetry(grid10):
    s = simulate_pair_sample(ProcessModel(rho=0.5), 6, grid10, 2)
    a = build_kernel_field(s.x_paths, WeightKernel())
    b = build_kernel_field(s.y_paths, WeightKernel())
    v = integrated_exponent(a, b, 1, 4, 2, 5)
    assert integrated_exponent(a, b, 4, 1, 2, 5) == v
    assert integrated_exponent(a, b, 1, 4, 5, 2) == v
    assert 0.0 < v <= 1.0


def test_integrated_exponent_quadrature_convergence():
    # refine the grid on one smooth pair of paths: differences shrink
    t_fine = np.arange(1, 1601) / 1600
    rng = np.random.default_rng(5)
    coef = rng.standard_normal((4, 3))

    def paths(m):
        t = np.arange(1, m + 1) / m
        return np.stack([c[0] * np.sin(3 * t) + c[1] * t**2 + c[2] * np.cos(t) for c in coef])

    k = WeightKernel()
    vals = []
    for m in (25, 50, 100, 200, 400):
        g = make_equidistant_grid(m)
        f = KernelField(field_from_values(paths(m), k), g)
        vals.append(integrated_exponent(f, f, 0, 1, 2, 3))
    diffs = np.abs(np.diff(vals))
    assert np.all(diffs[1:] < diffs[:-1])
    assert diffs[-1] < 1e-3


def test_cross_exp_sums_backends_agree(rng):
    a = field_from_values(rng.standard_normal((9, 7)), WeightKernel())
    b = field_from_values(rng.standard_normal((9, 7)), WeightKernel(1.0, 1.0))
    w = make_equidistant_grid(7).weights
    for excl in (False, True):
        with _accel.use_backend("numba"):
            f1 = cross_exp_sums(a, b, w, excl)
            f1w = cross_exp_sums(a, b, w, excl, workers=4)
        with _accel.use_backend("numpy"):
            f2 = cross_exp_sums(a, b, w, excl)
            f2w = cross_exp_sums(a, b, w, excl, workers=3)
        np.testing.assert_allclose(f1, f2, rtol=1e-13)
        assert np.array_equal(f1, f1w)
        assert np.array_equal(f2, f2w)
        # brute force entry
        i, k = 2, 5
        want = sum(
            math.exp(float(np.dot(w, a[i, j] * b[k, l])))
            for j in range(9)
            for l in range(9)
            if not excl or (j != i and l != k)
        )
        assert f1[i, k] == pytest.approx(want, rel=1e-13)


def test_pairwise_distances_backends(backend, rng):
    x = rng.standard_normal((11, 4))
    d = pairwise_distances(x)
    want = np.sqrt(((x[:, None] - x[None]) ** 2).sum(-1))
    np.testing.assert_allclose(d, want, rtol=1e-14, atol=1e-15)
    assert np.array_equal(d, d.T) and np.all(np.diag(d) == 0.0)
