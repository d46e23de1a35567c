"""Simulation-study harness: histograms of R_n, R_n^Sz and the Poisson
alpha statistic over replications, plus a permutation independence test."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ._kernels import pairwise_distances
from .core import (
    DegenerateSampleError,
    InvalidArgumentError,
    PairedSample,
    make_equidistant_grid,
    rng_stream,
)
from .dcov_alpha import poisson_alpha_dcov
from .dcov_density import dcov_terms, distance_correlation, repaired_value
from .gaussian_sim import ProcessModel, simulate_pair_sample
from .io import fmt
from .kernels import GAUSSIAN_KERNEL, WeightKernel, field_from_values
from .szekely import _dcov_from_distances, paths_to_vectors, szekely_dcor

logger = logging.getLogger(__name__)

STATISTICS = ("Rn", "RnSz", "alpha")
HISTOGRAM_HEADER = ["statistic", "rho", "replication", "value"]


@dataclass(frozen=True)
class ExperimentConfig:
    model: ProcessModel = ProcessModel("BrownianPair")
    n: int = 100
    mesh: int = 50
    replications: int = 40
    rho_list: tuple = (0.0, 0.5, 0.8)
    statistics: tuple = ("Rn", "RnSz")
    kernel: WeightKernel = GAUSSIAN_KERNEL
    seed: int = 0
    alpha: float = 1.0
    l_n: int | None = None
    output_dir: str | None = None
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "rho_list", tuple(float(r) for r in self.rho_list))
        object.__setattr__(self, "statistics", tuple(self.statistics))
        if self.replications < 1:
            raise InvalidArgumentError("replications must be at least 1")
        if self.mesh < 1:
            raise InvalidArgumentError("mesh must be at least 1")
        if self.n < 2:
            raise InvalidArgumentError("n must be at least 2")
        if not self.rho_list or any(not 0.0 <= r <= 1.0 for r in self.rho_list):
            raise InvalidArgumentError("rho_list values must lie in [0, 1]")
        bad = [s for s in self.statistics if s not in STATISTICS]
        if bad or not self.statistics:
            raise InvalidArgumentError(f"unknown statistics {bad}; choose from {STATISTICS}")

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "n": self.n,
            "mesh": self.mesh,
            "replications": self.replications,
            "rho_list": list(self.rho_list),
            "statistics": list(self.statistics),
            "kernel": {"alpha": self.kernel.alpha, "scale": self.kernel.scale},
            "seed": self.seed,
            "alpha": self.alpha,
            "l_n": self.l_n,
            "output_dir": self.output_dir,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "model" in d:
            d["model"] = ProcessModel.from_dict(d["model"])
        if "kernel" in d:
            d["kernel"] = WeightKernel(**d["kernel"])
        for key in ("rho_list", "statistics"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    def config_hash(self) -> str:
        """Hash of everything that determines the numbers (not paths/workers)."""
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("workers")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:12]


FIGURE_MODELS = {
    1: ProcessModel("BrownianPair"),
    2: ProcessModel("FractionalBrownianPair", hurst=0.25),
    3: ProcessModel("FractionalBrownianPair", hurst=0.75),
    4: ProcessModel("PiecewiseIidNormalPair", cells=50),
}


def figure_config(figure: int, **overrides) -> ExperimentConfig:
    """Full-scale preset: n=100, mesh 1/50, 40 replications.

    Presets 1 to 3 are BM, fBm H=0.25 and fBm H=0.75 over rho 0, 0.5, 0.8;
    preset 4 is the independent piecewise iid model with 50 cells.
    """
    if figure not in FIGURE_MODELS:
        raise InvalidArgumentError(f"figure must be one of {sorted(FIGURE_MODELS)}")
    base = ExperimentConfig(
        model=FIGURE_MODELS[figure],
        rho_list=(0.0,) if figure == 4 else (0.0, 0.5, 0.8),
    )
    return replace(base, **overrides)


def desk_preset(config: ExperimentConfig) -> ExperimentConfig:
    """Laptop-scale variant: n=50, mesh 1/25, 20 replications."""
    return replace(config, n=50, mesh=25, replications=20)


@dataclass
class HistogramTable:
    statistic_name: str
    rho: float
    values: np.ndarray
    sample_hashes: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.values)


def _replicate(config: ExperimentConfig, rho_index: int, rho: float, r: int, grid):
    model = replace(config.model, rho=rho)
    sample = simulate_pair_sample(model, config.n, grid, config.seed, stream=(rho_index, r))
    out = {}
    for stat in config.statistics:
        try:
            if stat == "Rn":
                out[stat] = distance_correlation(sample, config.kernel, config.kernel).r
            elif stat == "RnSz":
                out[stat] = szekely_dcor(paths_to_vectors(sample))
            else:
                out[stat] = poisson_alpha_dcov(
                    sample, config.alpha, config.l_n, config.seed, stream=(rho_index, r)
                ).value
        except DegenerateSampleError as exc:
            logger.warning("rho=%g replication %d: %s recorded as missing (%s)", rho, r, stat, exc)
            out[stat] = math.nan
    return out, sample.digest()


def run_experiment(config: ExperimentConfig) -> list[HistogramTable]:
    """One table per (statistic, rho); every statistic of a replication is
    computed from the same simulated sample."""
    grid = make_equidistant_grid(config.mesh)
    tables: list[HistogramTable] = []
    jobs = [(e, rho, r) for e, rho in enumerate(config.rho_list) for r in range(config.replications)]

    def job(args):
        e, rho, r = args
        return _replicate(config, e, rho, r, grid)

    if config.workers and config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(job, jobs))
    else:
        results = [job(j) for j in jobs]

    for e, rho in enumerate(config.rho_list):
        chunk = results[e * config.replications : (e + 1) * config.replications]
        hashes = [h for _, h in chunk]
        for stat in config.statistics:
            values = np.array([vals[stat] for vals, _ in chunk])
            tables.append(HistogramTable(stat, rho, values, hashes))

    if config.output_dir:
        write_experiment(config, tables, config.output_dir)
    return tables


def table_filename(table: HistogramTable) -> str:
    return f"{table.statistic_name}_rho{table.rho:g}.csv"


def write_experiment(config: ExperimentConfig, tables: Sequence[HistogramTable], out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        chash = config.config_hash()
        for t in tables:
            emit_histogram_csv(t, out / table_filename(t))
        with open(out / "replications.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["statistic", "rho", "replication", "sample_hash", "config_hash"])
            for t in tables:
                for r, h in enumerate(t.sample_hashes):
                    w.writerow([t.statistic_name, fmt(t.rho), r, h, chash])
        manifest = {
            "config": config.to_dict(),
            "config_hash": chash,
            "tables": [table_filename(t) for t in tables],
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    except OSError as exc:
        raise OSError(f"cannot write experiment output to {out}: {exc}") from exc
    return out


def emit_histogram_csv(table: HistogramTable, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(HISTOGRAM_HEADER)
            for r, v in enumerate(table.values):
                w.writerow([table.statistic_name, fmt(table.rho), r, fmt(v)])
    except OSError as exc:
        raise OSError(f"cannot write histogram table to {path}: {exc}") from exc
    return path


def read_histogram_csv(path) -> HistogramTable:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != HISTOGRAM_HEADER:
        raise InvalidArgumentError(f"{path}: not a histogram table")
    body = rows[1:]
    if not body:
        raise InvalidArgumentError(f"{path}: empty histogram table")
    return HistogramTable(body[0][0], float(body[0][1]), np.array([float(r[3]) for r in body]))


# -- permutation test -------------------------------------------------------

PERMUTATION_STATISTICS = ("dcor", "dcov", "szekely")


def permutation_null(
    sample: PairedSample,
    statistic: str = "dcor",
    B: int = 199,
    seed: int = 0,
    kx: WeightKernel = GAUSSIAN_KERNEL,
    ky: WeightKernel = GAUSSIAN_KERNEL,
    variant: str = "V",
):
    """Observed statistic and its ``B`` re-paired replicates.

    Replicate ``b`` pairs ``X_i`` with ``Y_pi(i)`` for a uniform permutation
    ``pi`` drawn from stream ``(seed, b)``.  For ``dcor`` the self terms are
    pairing-invariant, so ``dcov`` values are used and rescaled.
    """
    if B < 1:
        raise InvalidArgumentError("B must be at least 1")
    if sample.n < 2:
        raise InvalidArgumentError("permutation test needs n >= 2")
    if statistic not in PERMUTATION_STATISTICS:
        raise InvalidArgumentError(f"statistic must be one of {PERMUTATION_STATISTICS}")
    n = sample.n
    perms = [rng_stream(seed, b).permutation(n) for b in range(B)]
    identity = np.arange(n)

    if statistic == "szekely":
        a = pairwise_distances(sample.x_values)
        bm = pairwise_distances(sample.y_values)
        scale = math.sqrt(_dcov_from_distances(a, a) * _dcov_from_distances(bm, bm))
        szekely_dcor(paths_to_vectors(sample))  # raises on degenerate samples

        def value(p):
            return _dcov_from_distances(a, bm[np.ix_(p, p)]) / scale

    else:
        w = sample.grid.weights
        a = field_from_values(sample.x_values, kx)
        bf = field_from_values(sample.y_values, ky)
        scale = 1.0
        if statistic == "dcor":
            res = distance_correlation(sample, kx, ky, variant)
            scale = math.sqrt(res.t_xx * res.t_yy)
        terms = dcov_terms(a, bf, w, variant)

        def value(p):
            return repaired_value(terms, a, bf, w, p) / scale

    observed = value(identity)
    null = np.array([value(p) for p in perms])
    return observed, null


def permutation_test(
    sample: PairedSample,
    statistic: str = "dcor",
    B: int = 199,
    seed: int = 0,
    kx: WeightKernel = GAUSSIAN_KERNEL,
    ky: WeightKernel = GAUSSIAN_KERNEL,
    variant: str = "V",
) -> float:
    """Permutation p-value ``(1 + #{b : T_b >= T_obs}) / (B + 1)``."""
    observed, null = permutation_null(sample, statistic, B, seed, kx, ky, variant)
    return (1 + int(np.count_nonzero(null >= observed))) / (B + 1)
