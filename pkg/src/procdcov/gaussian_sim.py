"""Exact simulation of correlated Brownian, fractional Brownian and
piecewise-constant path pairs on arbitrary point sets."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import lapack

from .core import (
    Grid,
    InvalidArgumentError,
    NumericalDegeneracyError,
    PairedSample,
    rng_stream,
)

logger = logging.getLogger(__name__)

ModelKind = Literal["BrownianPair", "FractionalBrownianPair", "PiecewiseIidNormalPair"]
MODEL_KINDS = ("BrownianPair", "FractionalBrownianPair", "PiecewiseIidNormalPair")
JITTER = 1e-12


@dataclass(frozen=True)
class ProcessModel:
    """A bivariate path model ``(X, Y)``.

    ``Y = rho * X + sqrt(1 - rho**2) * X~`` with ``X~`` an independent copy
    of ``X``; for the piecewise model ``rho`` defaults to 0 (independent).
    """

    kind: ModelKind = "BrownianPair"
    rho: float = 0.0
    hurst: float = 0.5
    cells: int = 50

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidArgumentError(f"unknown model kind {self.kind!r}")
        if not -1.0 <= self.rho <= 1.0:
            raise InvalidArgumentError(f"rho must lie in [-1, 1], got {self.rho}")
        if not 0.0 < self.hurst < 1.0:
            raise InvalidArgumentError(f"hurst must lie in (0, 1), got {self.hurst}")
        if int(self.cells) != self.cells or self.cells < 1:
            raise InvalidArgumentError(f"cells must be a positive integer, got {self.cells}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessModel":
        return cls(**{k: d[k] for k in ("kind", "rho", "hurst", "cells") if k in d})


def bm_cross_cov(s: float, t: float, rho: float) -> float:
    return rho * min(s, t)


def fbm_cross_cov(s: float, t: float, rho: float, hurst: float) -> float:
    h2 = 2.0 * hurst
    return 0.5 * rho * (abs(s) ** h2 + abs(t) ** h2 - abs(t - s) ** h2)


def process_covariance(model: ProcessModel, points) -> np.ndarray:
    """Covariance matrix of the single (X) process at ``points``."""
    p = np.asarray(points, dtype=float)
    s, t = p[:, None], p[None, :]
    if model.kind == "BrownianPair":
        return np.minimum(s, t)
    if model.kind == "FractionalBrownianPair":
        h2 = 2.0 * model.hurst
        return 0.5 * (np.abs(s) ** h2 + np.abs(t) ** h2 - np.abs(t - s) ** h2)
    raise InvalidArgumentError(f"{model.kind} has no continuous covariance")


def cholesky_factor(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, retrying once with a tiny diagonal jitter."""
    if cov.shape[0] == 0:
        return np.zeros((0, 0))
    factor, info = lapack.dpotrf(cov, lower=1, clean=1)
    if info == 0:
        return factor
    logger.info("Cholesky failed at pivot %d; retrying with jitter %g", info, JITTER)
    factor, info = lapack.dpotrf(cov + JITTER * np.eye(cov.shape[0]), lower=1, clean=1)
    if info != 0:
        raise NumericalDegeneracyError(
            f"covariance matrix is not positive definite: Cholesky pivot {info} "
            f"of {cov.shape[0]} failed even with jitter {JITTER:g}"
        )
    return factor


def _piecewise_index(points: np.ndarray, cells: int) -> np.ndarray:
    # cell i covers ((i-1)/cells, i/cells]
    edges = np.arange(1, cells + 1) / cells
    return np.minimum(np.searchsorted(edges, points, side="left"), cells - 1)


def draw_values(model: ProcessModel, points, n: int, rng: np.random.Generator):
    """Draw ``n`` pairs at ``points``; returns two ``(n, len(points))`` arrays."""
    points = np.asarray(points, dtype=float)
    k = points.size
    mix = np.sqrt(max(0.0, 1.0 - model.rho**2))
    if model.kind == "PiecewiseIidNormalPair":
        v1 = rng.standard_normal((n, model.cells))
        v2 = rng.standard_normal((n, model.cells))
        idx = _piecewise_index(points, model.cells)
        x = v1[:, idx]
        y = model.rho * x + mix * v2[:, idx]
        return x, y
    factor = cholesky_factor(process_covariance(model, points))
    z1 = rng.standard_normal((n, k))
    z2 = rng.standard_normal((n, k))
    x = z1 @ factor.T
    y = model.rho * x + mix * (z2 @ factor.T)
    return x, y


def _check_points(points) -> np.ndarray:
    p = np.asarray(points, dtype=float).reshape(-1)
    if p.size and (p[0] <= 0.0 or p[-1] > 1.0):
        raise InvalidArgumentError("points must lie in (0, 1]")
    if np.any(np.diff(p) <= 0.0):
        raise InvalidArgumentError("points must be strictly increasing (no duplicates)")
    return p


def simulate_pair_sample(
    model: ProcessModel,
    n: int,
    grid: Grid,
    seed: int,
    stream: int | Sequence[int] = 0,
) -> PairedSample:
    """Simulate ``n`` iid path pairs on ``grid`` from stream ``(seed, stream)``."""
    if n < 1:
        raise InvalidArgumentError("n must be at least 1")
    x, y = draw_values(model, grid.points, n, rng_stream(seed, stream))
    meta = {"seed": int(seed), "model": model.to_dict()}
    return PairedSample(grid, x, y, metadata=meta)


def evaluate_model_at_points(
    model: ProcessModel,
    points: Sequence[float],
    n: int,
    seed: int,
    stream: int | Sequence[int] = 0,
) -> PairedSample:
    """Exact simulation at an arbitrary increasing point set in (0, 1].

    The returned sample carries unit quadrature weights; it is meant for
    pointwise (not integrated) use.
    """
    p = _check_points(points)
    if n < 1:
        raise InvalidArgumentError("n must be at least 1")
    grid = Grid(p, np.ones_like(p))
    x, y = draw_values(model, p, n, rng_stream(seed, stream))
    return PairedSample(grid, x, y, metadata={"seed": int(seed), "model": model.to_dict()})
