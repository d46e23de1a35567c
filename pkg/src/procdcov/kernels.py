"""Weight kernels ``w(u) = exp(-c |u|^alpha)`` and pairwise kernel fields.

``w`` is the Fourier transform of a symmetric alpha-stable weight density.
Two scale conventions are in use: ``c = 1`` for the generic alpha-stable
examples and ``c = 1/2`` with ``alpha = 2`` for the standard normal density.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Grid, InvalidArgumentError, PairedSample, SampledPath

__all__ = [
    "WeightKernel",
    "GAUSSIAN_KERNEL",
    "KernelField",
    "kernel_value",
    "build_kernel_field",
    "integrated_exponent",
]


@dataclass(frozen=True)
class WeightKernel:
    alpha: float = 2.0
    scale: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise InvalidArgumentError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.scale > 0.0:
            raise InvalidArgumentError(f"scale must be positive, got {self.scale}")

    def __call__(self, u):
        return np.exp(-self.scale * np.abs(u) ** self.alpha)


GAUSSIAN_KERNEL = WeightKernel(2.0, 0.5)


def kernel_value(k: WeightKernel, u: float) -> float:
    return float(np.exp(-k.scale * abs(u) ** k.alpha))


@dataclass(frozen=True, eq=False)
class KernelField:
    """``entries[i, j, g] = w(path_i(x_g) - path_j(x_g))``.

    Stored C-contiguous as ``(n, n, G)`` so each pair owns a contiguous
    G-vector.
    """

    entries: np.ndarray
    grid: Grid

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def g_count(self) -> int:
        return self.entries.shape[2]


def _values_of(paths) -> tuple[np.ndarray, Grid | None]:
    if isinstance(paths, np.ndarray):
        return paths, None
    paths = list(paths)
    if not paths:
        raise InvalidArgumentError("no paths given")
    grid = paths[0].grid
    for p in paths[1:]:
        if p.grid is not grid and p.grid != grid:
            raise InvalidArgumentError("paths do not share one grid")
    return np.stack([p.values for p in paths]), grid


def field_from_values(values: np.ndarray, k: WeightKernel) -> np.ndarray:
    """Kernel field tensor from an ``(n, G)`` value array."""
    v = np.asarray(values, dtype=float)
    diff = np.abs(v[:, None, :] - v[None, :, :])
    if k.alpha == 2.0:
        field = np.exp(-k.scale * diff * diff)
    elif k.alpha == 1.0:
        field = np.exp(-k.scale * diff)
    else:
        field = np.exp(-k.scale * diff**k.alpha)
    return np.ascontiguousarray(field)


def build_kernel_field(
    paths: Sequence[SampledPath], k: WeightKernel, grid: Grid | None = None
) -> KernelField:
    """Kernel field of a list of paths (or an ``(n, G)`` array plus ``grid``)."""
    values, path_grid = _values_of(paths)
    grid = path_grid or grid
    if grid is None:
        raise InvalidArgumentError("a grid is required when passing raw values")
    if values.shape[1] != len(grid):
        raise InvalidArgumentError("path length does not match grid")
    return KernelField(field_from_values(values, k), grid)


def sample_fields(sample: PairedSample, kx: WeightKernel, ky: WeightKernel):
    return (
        KernelField(field_from_values(sample.x_values, kx), sample.grid),
        KernelField(field_from_values(sample.y_values, ky), sample.grid),
    )


def integrated_exponent(a: KernelField, b: KernelField, i: int, j: int, k: int, l: int) -> float:
    """``sum_g weight_g * A[i, j, g] * B[k, l, g]``, the exponent before ``exp``."""
    if a.grid != b.grid or a.n != b.n:
        raise InvalidArgumentError("fields do not share grid and sample size")
    return float(np.dot(a.grid.weights, a.entries[i, j] * b.entries[k, l]))
