"""On-disk formats for paired samples and estimate reports.

A paired sample ``stem`` is stored as three files::

    stem.json     manifest: grid, n, seed, model parameters
    stem_x.csv    rows = grid points, columns = replicates
    stem_y.csv

with CSV header ``x,rep1,...,repn`` and 17 significant digits, so that a
save/load round trip is bit-exact.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import EstimateReport, Grid, InvalidArgumentError, PairedSample

FLOAT_FMT = "%.17g"
REPORT_HEADER = ["statistic_name", "value", "seed", "replication_index", "parameters"]


def fmt(x: float) -> str:
    return FLOAT_FMT % x


def _stem(path) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix == ".json" else p


def sample_paths(path) -> tuple[Path, Path, Path]:
    stem = _stem(path)
    return (
        stem.with_name(stem.name + ".json"),
        stem.with_name(stem.name + "_x.csv"),
        stem.with_name(stem.name + "_y.csv"),
    )


def _write_matrix(path: Path, points: np.ndarray, values: np.ndarray) -> None:
    n = values.shape[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"] + [f"rep{i + 1}" for i in range(n)])
        for g, x in enumerate(points):
            w.writerow([fmt(x)] + [fmt(v) for v in values[:, g]])


def _read_matrix(path: Path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "x":
        raise InvalidArgumentError(f"{path}: missing 'x,rep1,...' header")
    n = len(rows[0]) - 1
    body = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, n + 1)
    return body[:, 0], body[:, 1:].T.copy()


def save_sample(sample: PairedSample, path, seed: int | None = None, model: dict | None = None) -> Path:
    """Write ``sample``; returns the manifest path."""
    manifest_path, x_path, y_path = sample_paths(path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    meta = dict(sample.metadata)
    manifest = {
        "format": "procdcov-paired-sample/1",
        "n": sample.n,
        "seed": seed if seed is not None else meta.get("seed"),
        "model": model if model is not None else meta.get("model"),
        "grid": {
            "points": [fmt(p) for p in sample.grid.points],
            "weights": [fmt(w) for w in sample.grid.weights],
        },
        "x_file": x_path.name,
        "y_file": y_path.name,
    }
    try:
        _write_matrix(x_path, sample.grid.points, sample.x_values)
        _write_matrix(y_path, sample.grid.points, sample.y_values)
        manifest_path.write_text(json.dumps(manifest, indent=2))
    except OSError as exc:
        raise OSError(f"cannot write sample to {manifest_path}: {exc}") from exc
    return manifest_path


def load_sample(path) -> PairedSample:
    manifest_path, _, _ = sample_paths(path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read sample manifest {manifest_path}: {exc}") from exc
    base = manifest_path.parent
    grid = Grid(
        np.array([float(p) for p in manifest["grid"]["points"]]),
        np.array([float(w) for w in manifest["grid"]["weights"]]),
    )
    px, x = _read_matrix(base / manifest["x_file"])
    py, y = _read_matrix(base / manifest["y_file"])
    if not (np.array_equal(px, grid.points) and np.array_equal(py, grid.points)):
        raise InvalidArgumentError(f"{manifest_path}: CSV abscissae disagree with manifest grid")
    if x.shape[0] != manifest["n"]:
        raise InvalidArgumentError(f"{manifest_path}: expected n={manifest['n']}, found {x.shape[0]}")
    meta = {"seed": manifest.get("seed"), "model": manifest.get("model")}
    return PairedSample(grid, x, y, metadata=meta)


def report_row(report: EstimateReport) -> list[str]:
    params = ";".join(f"{k}={v}" for k, v in report.parameters.items())
    return [
        report.statistic_name,
        fmt(report.value),
        str(report.seed),
        str(report.replication_index),
        params,
    ]


def parse_report_row(row: list[str]) -> EstimateReport:
    name, value, seed, rep, params = row
    pairs = dict(p.split("=", 1) for p in params.split(";") if p)
    return EstimateReport(name, float(value), pairs, int(seed), int(rep))


def write_reports(reports: Iterable[EstimateReport], path) -> Path:
    """Append report rows to ``path`` (header written for new files)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        new = not path.exists() or path.stat().st_size == 0
        with open(path, "a", newline="") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(REPORT_HEADER)
            for r in reports:
                w.writerow(report_row(r))
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def read_reports(path) -> list[EstimateReport]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] == REPORT_HEADER:
        rows = rows[1:]
    return [parse_report_row(r) for r in rows]
