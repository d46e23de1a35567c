"""Distance covariance with the non-integrable weight ``|s|^(-k-alpha)``,
estimated by evaluating paths at the arrivals of unit-rate Poisson processes.

For Poisson grids ``N_1..N_l`` and ``a_ij^(k) = |X_i(N_k) - X_j(N_k)|^alpha``
(Euclidean norm over the arrivals of ``N_k``), ``b`` likewise for ``Y``::

    I1 = 1/(l n^2) sum_k sum_{ij} a_ij b_ij
    I2 = 1/l sum_k [1/n^2 sum_{ij} a_ij] [1/n^2 sum_{ij} b_ij]
    I3 = 1/(l n^3) sum_k sum_{ijm} a_ij b_im
    value = I1 + I2 - 2 I3

The population I2 takes both expectations under the same Poisson grid, so
the product is formed per grid.  Pooling the two means over all grids first
(``i2_form="pooled"``) instead estimates ``E[A] E[B]`` over grids, which is
biased low by the covariance of the two per-grid means and does not vanish
under independence.  With ``i2_form="per_grid"`` the value is the average of
nonnegative per-grid V-statistics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import integrate, special

from ._kernels import pairwise_distances
from .core import InvalidArgumentError, PairedSample, rng_stream
from .gaussian_sim import ProcessModel, evaluate_model_at_points


@dataclass(frozen=True)
class PoissonGrid:
    arrivals: np.ndarray

    def __post_init__(self):
        arr = np.array(self.arrivals, dtype=float).reshape(-1)
        if arr.size and (arr[0] <= 0.0 or arr[-1] > 1.0 or np.any(np.diff(arr) <= 0.0)):
            raise InvalidArgumentError("arrivals must be strictly increasing in (0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "arrivals", arr)

    def __len__(self) -> int:
        return self.arrivals.size


@dataclass(frozen=True)
class AlphaEstimate:
    i1_hat: float
    i2_hat: float
    i3_hat: float
    value: float
    alpha: float
    l_n: int
    n: int


def sample_poisson_grid(source: np.random.Generator) -> PoissonGrid:
    """Arrivals in (0, 1] of a unit-rate Poisson process, built from
    exponential(1) inter-arrival times."""
    arrivals = []
    t = source.exponential(1.0)
    while t <= 1.0:
        arrivals.append(t)
        t += source.exponential(1.0)
    return PoissonGrid(np.array(arrivals))


def alpha_distance(u, v, alpha: float) -> float:
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if u.shape != v.shape:
        raise InvalidArgumentError(f"length mismatch: {u.size} vs {v.size}")
    if u.size == 0:
        return 0.0
    d = u - v
    return float(np.dot(d, d) ** (alpha / 2.0))


def default_l_n(n: int) -> int:
    return max(1, math.ceil(math.sqrt(n)))


def _nearest_index(points: np.ndarray, t: np.ndarray) -> np.ndarray:
    hi = np.clip(np.searchsorted(points, t), 0, points.size - 1)
    lo = np.clip(hi - 1, 0, points.size - 1)
    return np.where(np.abs(points[lo] - t) <= np.abs(points[hi] - t), lo, hi)


def _alpha_pair_stats(x: np.ndarray, y: np.ndarray, alpha: float, workers=None):
    a = pairwise_distances(x, workers) ** alpha
    b = pairwise_distances(y, workers) ** alpha
    return (
        float((a * b).sum()),
        float(a.sum()),
        float(b.sum()),
        # sum_{i,j,m} a_ij b_im via row sums
        float(np.dot(a.sum(axis=1), b.sum(axis=1))),
    )


def poisson_alpha_dcov(
    source: Union[PairedSample, ProcessModel],
    alpha: float,
    l_n: int | None = None,
    seed: int = 0,
    n: int | None = None,
    stream: int | Sequence[int] = 0,
    workers: int | None = None,
    i2_form: str = "per_grid",
) -> AlphaEstimate:
    """Poisson-randomised alpha-distance covariance.

    ``source`` is either a :class:`PairedSample` (paths are read at the grid
    point nearest to each arrival) or a :class:`ProcessModel`, in which case
    ``n`` path pairs are simulated exactly at the union of all arrivals.
    ``l_n`` defaults to ``ceil(sqrt(n))``.
    """
    if not 0.0 < alpha < 2.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 2), got {alpha}")
    if i2_form not in ("per_grid", "pooled"):
        raise InvalidArgumentError(f"i2_form must be 'per_grid' or 'pooled', got {i2_form!r}")
    if isinstance(source, PairedSample):
        n = source.n
    elif isinstance(source, ProcessModel):
        if n is None or n < 1:
            raise InvalidArgumentError("n is required when estimating from a model")
    else:
        raise InvalidArgumentError("source must be a PairedSample or a ProcessModel")
    l_n = default_l_n(n) if l_n is None else int(l_n)
    if l_n < 1:
        raise InvalidArgumentError("l_n must be at least 1")
    key = (stream,) if isinstance(stream, (int, np.integer)) else tuple(stream)

    grid_rng = rng_stream(seed, (*key, 0))
    grids = [sample_poisson_grid(grid_rng) for _ in range(l_n)]

    if isinstance(source, PairedSample):
        points = source.grid.points
        x_all, y_all = source.x_values, source.y_values
        cols = [_nearest_index(points, g.arrivals) for g in grids]
    else:
        union = np.unique(np.concatenate([g.arrivals for g in grids] + [np.empty(0)]))
        evaluated = evaluate_model_at_points(source, union, n, seed, stream=(*key, 1))
        x_all, y_all = evaluated.x_values, evaluated.y_values
        cols = [np.searchsorted(union, g.arrivals) for g in grids]

    nn = float(n * n)
    s_ab = s_a = s_b = s_prod = s_rows = 0.0
    for c in cols:
        if c.size == 0:
            continue  # empty grid: the k = 0 summand is zero
        ab, a, b, rows = _alpha_pair_stats(x_all[:, c], y_all[:, c], alpha, workers)
        s_ab += ab
        s_a += a
        s_b += b
        s_prod += (a / nn) * (b / nn)
        s_rows += rows

    norm = l_n * nn
    i1 = s_ab / norm
    if i2_form == "per_grid":
        i2 = s_prod / l_n
    else:
        i2 = (s_a / norm) * (s_b / norm)
    i3 = s_rows / (norm * n)
    return AlphaEstimate(i1, i2, i3, i1 + i2 - 2.0 * i3, float(alpha), l_n, n)


def c_k_constant(k: int, alpha: float) -> float:
    """Normaliser ``c_k(alpha)`` making
    ``int (1 - cos(s'x)) c_k |s|^(-k-alpha) ds = |x|^alpha`` on ``R^k``."""
    if k < 1:
        raise InvalidArgumentError("k must be at least 1")
    if not 0.0 < alpha < 2.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 2), got {alpha}")
    log_c = (
        math.log(alpha)
        + (alpha - 1.0) * math.log(2.0)
        + special.gammaln((k + alpha) / 2.0)
        - (k / 2.0) * math.log(math.pi)
        - special.gammaln(1.0 - alpha / 2.0)
    )
    return math.exp(log_c)


def kernel_identity_integral(u: float, alpha: float, c: float | None = None) -> float:
    """Adaptive quadrature of ``int_R (1 - cos(s u)) c |s|^(-1-alpha) ds``.

    Independent of :func:`c_k_constant` except for the default ``c``.
    """
    if c is None:
        c = c_k_constant(1, alpha)
    u = abs(float(u))
    if u == 0.0:
        return 0.0
    head, _ = integrate.quad(
        lambda s: 2.0 * math.sin(0.5 * s * u) ** 2 * s ** (-1.0 - alpha), 0.0, 1.0, limit=200
    )
    tail_cos, _ = integrate.quad(lambda s: s ** (-1.0 - alpha), 1.0, np.inf, weight="cos", wvar=u)
    tail = 1.0 / alpha - tail_cos
    return 2.0 * c * (head + tail)
