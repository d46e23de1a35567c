"""Sample distance covariance and correlation for paths, integrable weights.

With ``A[i, j, g] = w_x(X_i(x_g) - X_j(x_g))`` and the analogous ``B`` for
``Y``, the V-statistic is::

    T_n = 1/n^2 sum_{ij} exp(<A_ij, B_ij>)
        + 1/n^4 sum_{ijkl} exp(<A_ij, B_kl>)
        - 2/n^3 sum_{ijl} exp(<A_ij, B_il>)

where ``<a, b> = sum_g weight_g a_g b_g`` is the grid quadrature.  The two
multi-index sums are read off the cross matrix
``F[i, k] = sum_{j,l} exp(<A_ij, B_kl>)``: the 4-index sum is ``F.sum()``
and the 3-index sum is ``trace(F)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence, Union

import numpy as np

from ._kernels import cross_exp_sums, matched_exp_sum
from .core import (
    DegenerateSampleError,
    Grid,
    InsufficientSampleError,
    InvalidArgumentError,
    PairedSample,
    SampledPath,
    rng_stream,
)
from .gaussian_sim import ProcessModel, draw_values
from .kernels import GAUSSIAN_KERNEL, WeightKernel, field_from_values

Variant = Literal["V", "U"]
PairDrawer = Callable[[int, np.ndarray, np.random.Generator], tuple]


@dataclass(frozen=True)
class DcovTerms:
    """The three sums of the statistic plus the pieces needed to re-pair Y."""

    first: float
    second: float
    third: float
    variant: str
    cross: np.ndarray  # F matrix (diagonal-excluded for U)
    matched: float  # sum_{ij} exp(<A_ij, B_ij>) (off-diagonal for U)

    @property
    def value(self) -> float:
        return self.first + self.second - 2.0 * self.third


def _check_variant(variant: str) -> str:
    v = str(variant).upper()
    if v not in ("V", "U"):
        raise InvalidArgumentError(f"variant must be 'V' or 'U', got {variant!r}")
    return v


def _combine(n: int, variant: str, total: float, trace: float, matched: float):
    if variant == "V":
        return matched / n**2, total / n**4, trace / n**3
    n1, n2, n3 = n * (n - 1), n * (n - 1) * (n - 2), n * (n - 1) * (n - 2) * (n - 3)
    # inclusion-exclusion over coincidences of {i, j} with {k, l}
    return matched / n1, (total - 4.0 * trace + 2.0 * matched) / n3, (trace - matched) / n2


def dcov_terms(a: np.ndarray, b: np.ndarray, weights, variant: Variant = "V", workers=None) -> DcovTerms:
    """Three-term decomposition from two ``(n, n, G)`` kernel tensors."""
    variant = _check_variant(variant)
    n = a.shape[0]
    if variant == "U" and n < 4:
        raise InsufficientSampleError(f"U-statistic needs n >= 4, got n={n}")
    exclude = variant == "U"
    cross = cross_exp_sums(a, b, weights, exclude_diag=exclude, workers=workers)
    matched = matched_exp_sum(a, b, weights, exclude_diag=exclude)
    first, second, third = _combine(n, variant, float(cross.sum()), float(np.trace(cross)), matched)
    return DcovTerms(first, second, third, variant, cross, matched)


def repaired_value(terms: DcovTerms, a: np.ndarray, b: np.ndarray, weights, perm) -> float:
    """Statistic after pairing ``X_i`` with ``Y_perm[i]``, reusing ``terms``.

    The 4-index sum does not depend on the pairing; the 3-index sum is
    ``sum_i F[i, perm[i]]``.  Cost is O(n^2 G).
    """
    perm = np.asarray(perm)
    n = a.shape[0]
    bp = b[np.ix_(perm, perm)]
    matched = matched_exp_sum(a, bp, weights, exclude_diag=terms.variant == "U")
    trace = float(terms.cross[np.arange(n), perm].sum())
    first, second, third = _combine(n, terms.variant, float(terms.cross.sum()), trace, matched)
    return first + second - 2.0 * third


def _fields(sample: PairedSample, kx: WeightKernel, ky: WeightKernel):
    return field_from_values(sample.x_values, kx), field_from_values(sample.y_values, ky)


def vstat_dcov(
    sample: PairedSample,
    kx: WeightKernel = GAUSSIAN_KERNEL,
    ky: WeightKernel = GAUSSIAN_KERNEL,
    workers: int | None = None,
) -> float:
    """V-statistic sample distance covariance ``T_n = e * d(P_n, P_n,X x P_n,Y)``."""
    a, b = _fields(sample, kx, ky)
    return dcov_terms(a, b, sample.grid.weights, "V", workers).value


def ustat_dcov(
    sample: PairedSample,
    kx: WeightKernel = GAUSSIAN_KERNEL,
    ky: WeightKernel = GAUSSIAN_KERNEL,
    workers: int | None = None,
) -> float:
    """U-statistic variant: every index in each sum pairwise distinct."""
    a, b = _fields(sample, kx, ky)
    return dcov_terms(a, b, sample.grid.weights, "U", workers).value


@dataclass(frozen=True)
class DcovDensityResult:
    t_xy: float
    t_xx: float
    t_yy: float
    r: float
    variant: str
    kernel_x: WeightKernel
    kernel_y: WeightKernel


def _positive(value: float, scale: float) -> bool:
    return value > 64.0 * np.finfo(float).eps * max(1.0, abs(scale))


def distance_correlation(
    sample: PairedSample,
    kx: WeightKernel = GAUSSIAN_KERNEL,
    ky: WeightKernel = GAUSSIAN_KERNEL,
    variant: Variant = "V",
    workers: int | None = None,
) -> DcovDensityResult:
    """``R_n = T_n(X, Y) / sqrt(T_n(X, X) T_n(Y, Y))``.

    Raises
    ------
    DegenerateSampleError
        If ``T_n(X, X)`` or ``T_n(Y, Y)`` vanishes (constant paths).
    """
    variant = _check_variant(variant)
    w = sample.grid.weights
    a, b = _fields(sample, kx, ky)
    txy = dcov_terms(a, b, w, variant, workers)
    txx = dcov_terms(a, a, w, variant, workers)
    tyy = dcov_terms(b, b, w, variant, workers)
    if not (_positive(txx.value, txx.first) and _positive(tyy.value, tyy.first)):
        raise DegenerateSampleError(
            f"distance correlation undefined: T_n(X,X)={txx.value:.3g}, T_n(Y,Y)={tyy.value:.3g}"
        )
    r = txy.value / math.sqrt(txx.value * tyy.value)
    if variant == "V":
        r = max(r, 0.0)
    return DcovDensityResult(txy.value, txx.value, tyy.value, r, variant, kx, ky)


def _pair_drawer(model: Union[ProcessModel, PairDrawer]) -> PairDrawer:
    if isinstance(model, ProcessModel):
        return lambda n, points, rng: draw_values(model, points, n, rng)
    if callable(model):
        return model
    raise InvalidArgumentError("model must be a ProcessModel or a callable(n, points, rng)")


def population_dcov_mc(
    model: Union[ProcessModel, PairDrawer],
    kx: WeightKernel,
    ky: WeightKernel,
    m_draws: int,
    grid: Grid,
    seed: int,
    chunk: int = 10_000,
    return_se: bool = False,
):
    """Monte Carlo value of the population distance covariance ``d``.

    Averages, over ``m_draws`` independent draws of ``(X, Y)``, ``(X', Y')``
    and two extra copies ``Y''``, ``Y'''``::

        exp(E_U w(X-X') w(Y-Y')) + exp(E_U w(X-X') w(Y''-Y'''))
            - 2 exp(E_U w(X-X') w(Y-Y''))

    times ``e^-1``, with the inner expectation over ``U`` replaced by the grid
    quadrature.  ``model`` may be a callable ``(n, points, rng) -> (x, y)``.
    Returns the estimate, or ``(estimate, standard_error)``.
    """
    if m_draws < 1:
        raise InvalidArgumentError("m_draws must be at least 1")
    draw = _pair_drawer(model)
    wts = grid.weights
    total = 0.0
    total_sq = 0.0
    for c, start in enumerate(range(0, m_draws, chunk)):
        cnt = min(chunk, m_draws - start)
        rng = rng_stream(seed, c)
        x1, y1 = draw(cnt, grid.points, rng)
        x2, y2 = draw(cnt, grid.points, rng)
        _, y3 = draw(cnt, grid.points, rng)
        _, y4 = draw(cnt, grid.points, rng)
        ax = kx(x1 - x2)
        v = (
            np.exp((ax * ky(y1 - y2)) @ wts)
            + np.exp((ax * ky(y3 - y4)) @ wts)
            - 2.0 * np.exp((ax * ky(y1 - y3)) @ wts)
        )
        total += float(v.sum())
        total_sq += float((v * v).sum())
    mean = total / m_draws
    est = math.exp(-1.0) * mean
    if not return_se:
        return est
    var = max(total_sq / m_draws - mean * mean, 0.0)
    se = math.exp(-1.0) * math.sqrt(var / max(m_draws - 1, 1))
    return est, se


def _as_values(paths) -> tuple[np.ndarray, Grid | None]:
    if isinstance(paths, np.ndarray):
        return np.atleast_2d(paths), None
    paths = list(paths)
    if not paths:
        raise InvalidArgumentError("empty sample")
    if isinstance(paths[0], SampledPath):
        return np.stack([p.values for p in paths]), paths[0].grid
    return np.atleast_2d(np.asarray(paths, dtype=float)), None


def gof_distance(
    sample_x: Sequence[SampledPath] | np.ndarray,
    sample_y: Sequence[SampledPath] | np.ndarray,
    k: WeightKernel = GAUSSIAN_KERNEL,
    grid: Grid | None = None,
) -> float:
    """Sample goodness-of-fit distance ``e * d(P_n,X, P_n,Y)``.

    ``1/n^2 sum exp(<w(X_i-X_j)>) + 1/n^2 sum exp(<w(Y_i-Y_j)>)
    - 2/n^2 sum exp(<w(X_i-Y_j)>)``; zero when both samples coincide.
    """
    x, gx = _as_values(sample_x)
    y, gy = _as_values(sample_y)
    if gx is not None and gy is not None and gx != gy:
        raise InvalidArgumentError("samples are on different grids")
    grid = grid or gx or gy
    if grid is None:
        raise InvalidArgumentError("a grid is required when passing raw values")
    if x.shape != y.shape:
        raise InvalidArgumentError(f"sample shapes differ: {x.shape} vs {y.shape}")
    if x.shape[1] != len(grid):
        raise InvalidArgumentError("path length does not match grid")
    w = grid.weights

    def mean_exp(u, v):
        return float(np.exp(k(u[:, None, :] - v[None, :, :]) @ w).mean())

    return mean_exp(x, x) + mean_exp(y, y) - 2.0 * mean_exp(x, y)
