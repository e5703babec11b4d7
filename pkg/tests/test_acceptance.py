"""End-to-end acceptance checks, one PASS/FAIL line per criterion.

The Monte Carlo criteria run at full scale and take several minutes in
total on one core.
"""
import math

import numpy as np
import pytest

from eulerdiv import cli
from eulerdiv.bounds import (
    certified_growth_floor,
    divergence_lower_bound,
    gaussian_band_lower,
    gaussian_tail_exact,
    gaussian_tail_lower,
    r_simple,
    reflection_explosion_bound,
)
from eulerdiv.brownian import BrownianGrid, force_event_increments
from eulerdiv.euler import deterministic_explosion_threshold, euler_path
from eulerdiv.exact import QuadratureConfig
from eulerdiv.models import CERTIFIED_MODELS, catalog, check_growth_certificate
from eulerdiv.montecarlo import EulerSampler, ExactSampler, PathSupSampler, draw_samples, estimate_moment

SEED = 20240611


def test_01_gaussian_domination(acceptance_report):
    xs = np.arange(601) * 0.01
    worst_tail = max(gaussian_tail_lower(x) - gaussian_tail_exact(x) for x in xs)
    worst_band = max(gaussian_band_lower(x) - (gaussian_tail_exact(x) - gaussian_tail_exact(2 * x)) for x in xs)
    acceptance_report(
        "1 gaussian lower bounds dominated on [0, 6]",
        worst_tail <= 1e-15 and worst_band <= 1e-15,
        f"max excess tail={worst_tail:.3e} band={worst_band:.3e}",
    )


def test_02_forced_event_growth(acceptance_report):
    spec, _ = catalog("cubic_additive", {"sigma": 1.0, "T": 1.0})
    rng = np.random.default_rng(SEED)
    checked, failures = 0, []
    for N in (4, 8, 16, 32):
        r = r_simple(N, 1.0)
        cases = [(r, 1.0, [1] * (N - 1)), (-r, 0.0, [-1] * (N - 1)), (1.5 * r, 0.5, [1, -1] * ((N - 1) // 2) + [1] * ((N - 1) % 2))]
        for _ in range(20):
            cases.append((rng.choice([-1, 1]) * r * rng.uniform(1, 3), rng.uniform(0, 1), list(rng.choice([-1, 1], N - 1))))
        for first, mag, signs in cases:
            values = euler_path(spec, force_event_increments(N, 1.0, first, mag, signs)).values
            for k in range(1, N + 1):
                if not math.isfinite(values[k]):
                    break
                checked += 1
                if not math.log2(abs(values[k])) >= certified_growth_floor(N, k, r, 2.0):
                    failures.append((N, k))
    acceptance_report(
        "2 forced-event double-exponential growth",
        not failures,
        f"{checked} finite iterates checked, {len(failures)} below the floor",
    )


# converged E[X_3^2] from an implicit finite-difference solve of the backward
# equation for log X (independent of the sampler), frozen
PDE_MOMENT = {2.0: 0.46865, 5.0: 1.14168}


@pytest.mark.xfail(
    strict=True,
    reason="the sigma=5 target 1.2357 +- 0.06 excludes the converged moment 1.1417; "
    "a left-endpoint quadrature on a 1000-step grid reproduces the target",
)
def test_03_table1_exact_moment(acceptance_report):
    cfg = QuadratureConfig(32)
    out = {}
    for i, (sigma, target, tol) in enumerate(((2.0, 0.4739, 0.02), (5.0, 1.2357, 0.06))):
        spec, _ = catalog("stratonovich_gl", {"sigma": sigma})
        est = estimate_moment(ExactSampler(spec, 300, cfg), 2.0, 1_000_000, SEED + i)
        out[sigma] = (est, abs(est.ieee_mean - target) <= tol)
    acceptance_report(
        "3 exact E[X_3^2] at sigma 2 and 5",
        all(ok for _, ok in out.values()),
        "; ".join(
            f"sigma={s}: {e.ieee_mean:.4f} +- {e.finite_stderr:.4f} (PDE {PDE_MOMENT[s]:.4f})" for s, (e, _) in out.items()
        ),
    )


def test_04_table1_euler_column(acceptance_report):
    s2, _ = catalog("stratonovich_gl", {"sigma": 2.0})
    s7, _ = catalog("stratonovich_gl", {"sigma": 7.0})
    e2 = estimate_moment(EulerSampler(s2, 1000), 2.0, 100_000, SEED)
    e7 = estimate_moment(EulerSampler(s7, 1000), 2.0, 100_000, SEED)
    bad7 = e7.count_nan + e7.count_pos_inf + e7.count_neg_inf
    acceptance_report(
        "4 Euler second moments at sigma 2 and 7",
        0.43 <= e2.ieee_mean <= 0.49 and bad7 >= 1 and not math.isfinite(e7.ieee_mean),
        f"sigma=2: {e2.ieee_mean:.4f}; sigma=7: ieee={cli.format_value(e7.ieee_mean)} with {bad7} non-finite runs",
    )


def test_05_power_drift_moments(acceptance_report):
    spec, _ = catalog("power_drift")
    means = {}
    for N in range(1, 61):
        means[N] = estimate_moment(EulerSampler(spec, N), 1.0, 10_000, SEED).ieee_mean
    first_inf = next((N for N, m in means.items() if not math.isfinite(m)), None)
    ok = 5 <= means[1] <= 20 and means[5] > 1e6 and first_inf is not None
    acceptance_report(
        "5 power-drift first moment",
        ok,
        f"N=1: {means[1]:.4g}; N=5: {means[5]:.4g}; first non-finite at N={first_inf}",
    )


def test_06_deterministic_threshold(acceptance_report):
    spec, _ = catalog("cubic_additive", {"sigma": 0.0, "T": 1.0})
    details, ok = [], True
    for N in (8, 64, 512):
        thr = deterministic_explosion_threshold(N, 1.0)
        grid = BrownianGrid.from_increments(1.0, np.zeros(N))
        below = np.abs(euler_path(spec.with_(x0=0.99 * thr), grid).values)
        above = euler_path(spec.with_(x0=1.01 * thr), grid)
        stable = bool(np.all(np.diff(below) <= 0))
        blown = above.exploded or abs(above.terminal) > 1e100
        ok &= stable and blown
        details.append(f"N={N}: below non-increasing={stable}, above blow-up={blown}")
    acceptance_report("6 deterministic explosion threshold", ok, "; ".join(details))


def test_07_certificates(acceptance_report):
    results = {}
    for name in CERTIFIED_MODELS:
        spec, cert = catalog(name)
        results[name] = check_growth_certificate(spec, cert, 10_000, 1e6).holds
    acceptance_report(
        "7 growth certificates on [C, 1e6]",
        all(results.values()),
        ", ".join(f"{k}={'holds' if v else 'violated'}" for k, v in results.items()),
    )


def test_08_divergence_bound(acceptance_report):
    vals = [divergence_lower_bound(N, 1.0).log2_expectation_lower for N in range(1, 201)]
    bad = [N for N in range(1, 200) if not vals[N] > vals[N - 1]]
    n0 = max(bad) + 1 if bad else 1
    crossover = next(N for N in range(1, 201) if divergence_lower_bound(N, 1.0).certified)
    acceptance_report(
        "8 simple divergence bound eventually increasing",
        n0 <= 64,
        f"increasing from N0={n0} to 200; certified (> 2^64) from N={crossover}",
    )


def test_09_reflection_bound(acceptance_report):
    level = math.sqrt(2 * 3)
    hits = draw_samples(PathSupSampler(1000, 1.0), 1_000_000, SEED) >= level
    p = hits.mean()
    se = math.sqrt(max(p * (1 - p), 1e-300) / hits.size)
    bound = reflection_explosion_bound(3)
    acceptance_report(
        "9 reflection bound at N=3",
        p <= bound + 3 * se,
        f"MC {p:.3e} (se {se:.1e}) vs 2e^-3 = {bound:.3e}",
    )


def test_10_worker_determinism(acceptance_report, tmp_path):
    jobs = {
        "table1": ["table1", "--sigmas", "2,7", "--steps", "1000", "--exact-steps", "100", "--substeps", "8",
                   "--runs", "5000", "--runs-exact", "3000", "--seed", str(SEED)],
        "figure1": ["figure1", "--steps-max", "53", "--runs", "3000", "--seed", str(SEED)],
    }
    same = {}
    for name, argv in jobs.items():
        outputs = []
        for workers in (1, 8):
            path = tmp_path / f"{name}-{workers}.csv"
            assert cli.main(argv + ["--workers", str(workers), "--out", str(path)]) == 0
            outputs.append(path.read_bytes())
        same[name] = outputs[0] == outputs[1]
    acceptance_report(
        "10 byte-identical output for 1 and 8 workers",
        all(same.values()),
        ", ".join(f"{k} {'identical' if v else 'differs'}" for k, v in same.items()),
    )
