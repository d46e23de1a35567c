"""Grids, sampled paths, paired samples, reports and the RNG contract."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class DegenerateSampleError(ValueError):
    """A statistic's normaliser vanishes (e.g. a constant sample)."""


class InsufficientSampleError(ValueError):
    """Too few observations for the requested estimator."""


class NumericalDegeneracyError(ArithmeticError):
    """A covariance matrix could not be factorised."""


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature grid on (0, 1].

    ``points`` are the abscissae and ``weights`` the quadrature weights used
    for every path integral over [0, 1].
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points).reshape(-1)
        wts = _frozen(self.weights).reshape(-1)
        if pts.shape != wts.shape:
            raise InvalidArgumentError("points and weights differ in length")
        if pts.size and (np.any(pts <= 0.0) or np.any(pts > 1.0)):
            raise InvalidArgumentError("grid points must lie in (0, 1]")
        if np.any(np.diff(pts) <= 0.0):
            raise InvalidArgumentError("grid points must be strictly increasing")
        if np.any(wts <= 0.0):
            raise InvalidArgumentError("quadrature weights must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(
            self.weights, other.weights
        )

    __hash__ = object.__hash__

    def integrate(self, values) -> float:
        """Quadrature of ``values`` (one per grid point)."""
        return float(np.dot(self.weights, values))


def make_equidistant_grid(m: int) -> Grid:
    """Right-endpoint grid ``i/m, i = 1..m`` with all weights ``1/m``."""
    if int(m) != m or m < 1:
        raise InvalidArgumentError(f"mesh count must be a positive integer, got {m!r}")
    m = int(m)
    return Grid(np.arange(1, m + 1) / m, np.full(m, 1.0 / m))


@dataclass(frozen=True, eq=False)
class SampledPath:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values).reshape(-1)
        if vals.size != len(self.grid):
            raise InvalidArgumentError(
                f"path has {vals.size} values for a grid of {len(self.grid)} points"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidArgumentError("path values must be finite")
        object.__setattr__(self, "values", vals)


class PairedSample:
    """n iid path pairs ``(X_i, Y_i)`` observed on one shared grid.

    Values are held as two ``(n, G)`` arrays; :attr:`x_paths` and
    :attr:`y_paths` expose them as :class:`SampledPath` sequences.
    """

    def __init__(self, grid: Grid, x_values, y_values, metadata: Mapping | None = None):
        x = _frozen(x_values)
        y = _frozen(y_values)
        if x.ndim == 1:
            x = _frozen(x.reshape(-1, len(grid)) if len(grid) else x.reshape(-1, 0))
        if y.ndim == 1:
            y = _frozen(y.reshape(-1, len(grid)) if len(grid) else y.reshape(-1, 0))
        if x.shape != y.shape:
            raise InvalidArgumentError(f"x and y shapes differ: {x.shape} vs {y.shape}")
        if x.shape[1] != len(grid):
            raise InvalidArgumentError("path length does not match grid")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidArgumentError("path values must be finite")
        self.grid = grid
        self.x_values = x
        self.y_values = y
        self.metadata = dict(metadata or {})

    @classmethod
    def from_paths(cls, x_paths: Sequence[SampledPath], y_paths: Sequence[SampledPath]):
        if len(x_paths) != len(y_paths):
            raise InvalidArgumentError("x_paths and y_paths differ in count")
        if not x_paths:
            raise InvalidArgumentError("empty sample")
        grid = x_paths[0].grid
        for p in (*x_paths, *y_paths):
            if p.grid is not grid and p.grid != grid:
                raise InvalidArgumentError("paths do not share one grid")
        return cls(
            grid,
            np.stack([p.values for p in x_paths]),
            np.stack([p.values for p in y_paths]),
        )

    @property
    def n(self) -> int:
        return self.x_values.shape[0]

    def __len__(self) -> int:
        return self.n

    @property
    def x_paths(self) -> list[SampledPath]:
        return [SampledPath(self.grid, v) for v in self.x_values]

    @property
    def y_paths(self) -> list[SampledPath]:
        return [SampledPath(self.grid, v) for v in self.y_values]

    def permuted(self, perm) -> "PairedSample":
        """Reorder the pairs."""
        perm = np.asarray(perm)
        return PairedSample(self.grid, self.x_values[perm], self.y_values[perm], self.metadata)

    def with_y_pairing(self, perm) -> "PairedSample":
        """Keep X in place and re-pair it with ``Y[perm]``."""
        perm = np.asarray(perm)
        return PairedSample(self.grid, self.x_values, self.y_values[perm], self.metadata)

    def digest(self) -> str:
        """Short content hash of grid and values."""
        h = hashlib.sha256()
        for arr in (self.grid.points, self.grid.weights, self.x_values, self.y_values):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class EstimateReport:
    statistic_name: str
    value: float
    parameters: Mapping[str, str] = field(default_factory=dict)
    seed: int = 0
    replication_index: int = 0

    def __post_init__(self):
        if not self.statistic_name:
            raise InvalidArgumentError("statistic_name must be nonempty")
        if not np.isfinite(self.value):
            raise InvalidArgumentError("report value must be finite")
        object.__setattr__(
            self, "parameters", {str(k): str(v) for k, v in dict(self.parameters).items()}
        )


def rng_stream(seed: int, stream_id: int | Sequence[int] = 0) -> np.random.Generator:
    """Deterministic, counter-based random source for ``(seed, stream_id)``.

    ``stream_id`` may be a tuple of non-negative integers, e.g.
    ``(rho_index, replication)``; distinct ids give independent streams.
    """
    if isinstance(stream_id, (int, np.integer)):
        key = (int(stream_id),)
    else:
        key = tuple(int(s) for s in stream_id)
    if int(seed) < 0 or any(k < 0 for k in key):
        raise InvalidArgumentError("seed and stream ids must be unsigned")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
