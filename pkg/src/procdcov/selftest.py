"""Quick internal consistency checks: optimised kernels against naive loops,
hand-computed values, and the alpha-stable kernel identity."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import _accel
from ._kernels import naive_ustat_terms, naive_vstat_terms
from .core import PairedSample, make_equidistant_grid, rng_stream
from .dcov_alpha import c_k_constant, kernel_identity_integral, poisson_alpha_dcov
from .dcov_density import dcov_terms
from .kernels import WeightKernel, field_from_values
from .szekely import VectorSample, szekely_dcov


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_vstat_oracle(instances: int = 10, seed: int = 11) -> tuple[bool, str]:
    worst = 0.0
    for r in range(instances):
        rng = rng_stream(seed, r)
        n = int(rng.integers(1, 8))
        g = int(rng.integers(1, 8))
        x = rng.standard_normal((n, g)).cumsum(axis=1)
        y = rng.standard_normal((n, g)).cumsum(axis=1)
        w = make_equidistant_grid(g).weights
        k = WeightKernel(float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.3, 1.5)))
        a, b = field_from_values(x, k), field_from_values(y, k)
        ref = naive_vstat_terms(a, b, w)
        ref_value = ref[0] + ref[1] - 2 * ref[2]
        for backend in ("numba", "numpy") if _accel.HAVE_NUMBA else ("numpy",):
            with _accel.use_backend(backend):
                t = dcov_terms(a, b, w, "V")
            for got, want in zip((t.first, t.second, t.third), ref):
                worst = max(worst, _rel(got, want))
            worst = max(worst, abs(t.value - ref_value) / max(ref[0], 1.0))
    return worst <= 1e-10, f"max relative deviation {worst:.2e}"


def check_ustat_oracle(instances: int = 5, seed: int = 12) -> tuple[bool, str]:
    worst = 0.0
    for r in range(instances):
        rng = rng_stream(seed, r)
        n = int(rng.integers(4, 7))
        g = int(rng.integers(1, 6))
        x = rng.standard_normal((n, g))
        y = rng.standard_normal((n, g))
        w = make_equidistant_grid(g).weights
        k = WeightKernel(2.0, 0.5)
        a, b = field_from_values(x, k), field_from_values(y, k)
        ref = naive_ustat_terms(a, b, w)
        t = dcov_terms(a, b, w, "U")
        for got, want in zip((t.first, t.second, t.third), ref):
            worst = max(worst, _rel(got, want))
    return worst <= 1e-10, f"max relative deviation {worst:.2e}"


def check_hand_values() -> tuple[bool, str]:
    one = np.ones(1)
    e1 = math.exp(-1.0)
    a = np.array([[[1.0], [e1]], [[e1], [1.0]]])
    t = dcov_terms(a, a, one, "V").value
    closed = (math.e + math.exp(e1 * e1) - 2 * math.exp(e1)) / 4
    sz = szekely_dcov(VectorSample(np.array([[0.0], [1.0]]), np.array([[0.0], [2.0]])))
    ok = abs(t - closed) <= 1e-12 and abs(sz - 0.5) <= 1e-15
    return ok, f"T_2={t:.10f} (closed form {closed:.10f}), Szekely n=2 {sz}"


def check_alpha_n1() -> tuple[bool, str]:
    grid = make_equidistant_grid(5)
    s = PairedSample(grid, np.arange(5.0)[None, :], np.arange(5.0)[None, :] ** 2)
    v = poisson_alpha_dcov(s, 1.0, l_n=4, seed=3).value
    return v == 0.0, f"n=1 value {v}"


def check_kernel_identity() -> tuple[bool, str]:
    worst = 0.0
    for u in (0.5, 1.0, 2.0):
        worst = max(worst, abs(kernel_identity_integral(u, 1.0, 1.0 / math.pi) - u))
    for alpha in (0.5, 1.5):
        worst = max(worst, abs(kernel_identity_integral(1.0, alpha, c_k_constant(1, alpha)) - 1.0))
    return worst <= 1e-3, f"max |quadrature - |u|^alpha| {worst:.2e}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "vstat-oracle": check_vstat_oracle,
    "ustat-oracle": check_ustat_oracle,
    "hand-values": check_hand_values,
    "alpha-n1": check_alpha_n1,
    "kernel-identity": check_kernel_identity,
}


def run_selftest(echo: Callable[[str], None] = print) -> bool:
    all_ok = True
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        echo(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return all_ok
