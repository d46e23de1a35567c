"""Vector distance covariance/correlation of paths read as grid vectors."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import pairwise_distances
from .core import DegenerateSampleError, InvalidArgumentError, PairedSample


@dataclass(frozen=True)
class VectorSample:
    x_vectors: np.ndarray
    y_vectors: np.ndarray

    def __post_init__(self):
        x = _as_matrix(self.x_vectors, "x")
        y = _as_matrix(self.y_vectors, "y")
        if x.shape[0] != y.shape[0]:
            raise InvalidArgumentError(f"sample sizes differ: {x.shape[0]} vs {y.shape[0]}")
        if x.shape[0] < 1:
            raise InvalidArgumentError("empty sample")
        object.__setattr__(self, "x_vectors", x)
        object.__setattr__(self, "y_vectors", y)

    @property
    def n(self) -> int:
        return self.x_vectors.shape[0]


def _as_matrix(vectors, side: str) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        arr = vectors.astype(float)
        return arr[:, None] if arr.ndim == 1 else arr
    rows = [np.atleast_1d(np.asarray(v, dtype=float)) for v in vectors]
    dims = {r.size for r in rows}
    if len(dims) > 1:
        raise InvalidArgumentError(f"{side}-vectors have inconsistent dimensions {sorted(dims)}")
    return np.stack(rows) if rows else np.empty((0, 1))


def _dcov_from_distances(a: np.ndarray, b: np.ndarray) -> float:
    n = a.shape[0]
    term1 = float((a * b).sum()) / n**2
    term2 = float(a.mean()) * float(b.mean())
    term3 = float(np.dot(a.mean(axis=1), b.mean(axis=1))) / n
    return term1 + term2 - 2.0 * term3


def szekely_dcov(sample: VectorSample) -> float:
    """V-type distance covariance with Euclidean distances."""
    return _dcov_from_distances(
        pairwise_distances(sample.x_vectors), pairwise_distances(sample.y_vectors)
    )


def szekely_dcor(sample: VectorSample) -> float:
    a = pairwise_distances(sample.x_vectors)
    b = pairwise_distances(sample.y_vectors)
    txy = _dcov_from_distances(a, b)
    txx = _dcov_from_distances(a, a)
    tyy = _dcov_from_distances(b, b)
    tiny = 64.0 * np.finfo(float).eps
    if txx <= tiny * max(1.0, float((a * a).mean())) or tyy <= tiny * max(1.0, float((b * b).mean())):
        raise DegenerateSampleError(
            f"distance correlation undefined: T(X,X)={txx:.3g}, T(Y,Y)={tyy:.3g}"
        )
    return max(txy / math.sqrt(txx * tyy), 0.0)


def paths_to_vectors(sample: PairedSample) -> VectorSample:
    return VectorSample(sample.x_values, sample.y_values)
