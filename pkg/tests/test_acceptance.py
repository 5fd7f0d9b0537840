"""Acceptance criteria, one test (and one printed pass/fail line) per criterion.

Run ``python3 tests/test_acceptance.py`` for the summary alone, or
``pytest -s tests/test_acceptance.py`` to see the lines next to the tests.
Tolerances below are fixed by the criteria and are not tuned.
"""

import time
from functools import lru_cache

import numpy as np
import pytest

from heisenberg_hodge import fan
from heisenberg_hodge.config import RunConfig
from heisenberg_hodge.oscillator import ModelConfig
from heisenberg_hodge.suites import run_suite

# 16 lambda values for the operator battery: +-2^-2 .. 2^3 at 8 points per sign
LAMBDAS_16 = tuple(np.concatenate([-np.geomspace(2.0 ** -2, 2.0 ** 3, 8)[::-1], np.geomspace(2.0 ** -2, 2.0 ** 3, 8)]))


def default_cfg(**model):
    cfg = RunConfig()
    if model:
        cfg.model = ModelConfig(**model)
    return cfg


@lru_cache(maxsize=None)
def timed_suite(suite, lambdas=None):
    cfg = default_cfg(n=1, M=8, lambdas=lambdas) if lambdas else default_cfg()
    t0 = time.perf_counter()
    reports = run_suite(suite, cfg)
    return {r.check: r for r in reports}, time.perf_counter() - t0


def verdict(number, title, items, runtime=None, limit=None):
    """Print one line and return (ok, detail). items: list of (label, value, tol, ok)."""
    bad = [f"{lab}={val:.3g} (tol {tol:g})" for lab, val, tol, ok in items if not ok]
    ok = not bad
    if runtime is not None and limit is not None and runtime >= limit:
        ok = False
        bad.append(f"runtime {runtime:.1f}s >= {limit:g}s")
    worst = max((val / tol if tol else val for _, val, tol, _ in items), default=0.0)
    extra = f", {runtime:.1f}s" if runtime is not None else ""
    detail = "; ".join(bad) if bad else f"worst error/tol {worst:.2e}{extra}"
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
    return ok, detail


def from_reports(reports, names, tol):
    """Re-check suite reports against the criterion's own tolerance."""
    items = []
    for name in names:
        r = reports[name]
        items.append((name, r.max_error, tol, r.max_error < tol))
    return items


def criterion_1():
    reps, dt = timed_suite("exterior")
    items = from_reports(reps, ["lefschetz_reconstruction", "lefschetz_eigenvalues",
                                "lefschetz_commutator", "edtheta_adjoint"], 1e-12)
    dim = reps["lefschetz_dimensions"]
    items.append(("dimension mismatches", dim.max_error, 1, dim.max_error == 0))
    return verdict(1, "Lefschetz decomposition for n <= 4", items, dt, 10)


def criterion_2():
    reps, dt = timed_suite("operators", LAMBDAS_16)
    names = [k for k in reps if not k.startswith("injectivity")]
    return verdict(2, "operator identities, n in {1,2}, M=8, 16 lambdas", from_reports(reps, names, 1e-10), dt, 60)


def criterion_3():
    reps, dt = timed_suite("fan-eigen")
    cfg = RunConfig()
    count = len(cfg.fan_lambdas()) * (cfg.fan["m_max"] + 1)
    items = [("fan point shortfall", max(0.0, 1e4 - count), 1, count >= 1e4)]
    items += from_reports(reps, ["eigen_residuals"], 1e-10)
    items += from_reports(reps, ["projector_sum", "q_identities", "hand_point"], 1e-12)
    es = fan.fan_eigensystem(fan.FanPoint(1.0, 0, 1))
    err = max(np.abs(np.sort(es.eigenvalues) - [1, 2, 4]).max(), np.abs(es.vectors["-"] - [1j, 0, 0]).max())
    items.append(("hand point direct", err, 1e-12, err < 1e-12))
    return verdict(3, "closed-form fan eigensystem", items, dt)


def criterion_4():
    reps, _ = timed_suite("decomposition")
    names = ["R_isometry", "Gamma_isometry", "S0_isometry", "Splus_isometry", "Sminus_isometry",
             "Rhol_partial_isometry", "Rantihol_partial_isometry"]
    assert RunConfig().trials >= 10
    return verdict(4, "isometries and partial isometries", from_reports(reps, names, 1e-10))


def criterion_5():
    reps, _ = timed_suite("decomposition")
    names = ["five_way_residual", "five_way_orthogonality", "five_way_symbols", "coclosed_n1"]
    return verdict(5, "five-way decomposition", from_reports(reps, names, 1e-10))


def criterion_6():
    reps, dt = timed_suite("multiplier")
    names = ["agreement_heat_0.1", "agreement_heat_1", "agreement_imaginary_power_1"]
    return verdict(6, "product path vs block-eigendecomposition oracle", from_reports(reps, names, 1e-8), dt, 120)


def criterion_7():
    reps, _ = timed_suite("decomposition")
    names = ["intertwine_R", "intertwine_plus", "intertwine_minus"]
    return verdict(7, "intertwining relations", from_reports(reps, names, 1e-10))


def criterion_8():
    reps, _ = timed_suite("mh-norms")
    const = reps["constant_r_independent"].max_error
    growth = 1.0 / reps["jump_divergence"].max_error
    cstab = reps["imaginary_power_constant"].max_error
    items = [
        ("constant r-spread", const, 1e-12, const < 1e-12),
        ("jump growth shortfall (10/growth)", 10 / growth, 1, growth >= 10),
        ("s^{iu} constant J-ratio", cstab, 2, cstab <= 2),
    ]
    return verdict(8, "MH estimator sanity", items)


def criterion_9():
    reps, _ = timed_suite("mh-norms")
    names = [k for k in reps if k.startswith("transform_")]
    items = [(k, reps[k].max_error, 2, reps[k].max_error <= 2) for k in names]
    items += from_reports(reps, ["fan_extension"], 1e-12)
    return verdict(9, "transform audits and fan extension", items)


def criterion_10():
    reps, _ = timed_suite("mh-norms")
    ref = reps["nu_refinement"].max_error
    nu0 = reps["nu0_bound"].max_error
    items = [("nu refinement ratio", ref, 2, ref <= 2), ("nu0 sup", nu0, np.sqrt(3), nu0 <= np.sqrt(3))]
    return verdict(10, "nu pointwise estimates", items)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_criterion(criterion):
    ok, detail = criterion()
    assert ok, detail


if __name__ == "__main__":
    results = [c()[0] for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
