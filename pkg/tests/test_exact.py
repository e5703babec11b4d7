import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eulerdiv.brownian import BrownianGrid, sample_increments, stream
from eulerdiv.euler import euler_path
from eulerdiv.exact import (
    QuadratureConfig,
    coupled_batch,
    coupled_error_sample,
    exact_terminal_batch,
    gl_exact_terminal,
    has_oracle,
    oracle_for,
    verhulst_exact_terminal,
)
from eulerdiv.models import catalog
from eulerdiv.montecarlo import ExplosionSampler, draw_samples

INV_SQRT7 = 0.3779644730092272


@pytest.mark.parametrize("M", [1, 2, 32, 100])
def test_gl_zero_noise_matches_ode(M):
    grid = BrownianGrid.from_increments(3.0, np.zeros(30))
    x = gl_exact_terminal(0.0, 1.0, 1.0, 1.0, grid, QuadratureConfig(M))
    assert x == pytest.approx(INV_SQRT7, rel=1e-14)


@pytest.mark.parametrize("dw", [0.0, 1e-6, -1e-6])
def test_gl_short_horizon_returns_start(dw):
    # a one-sd increment on [0, 1e-12] moves x0 by about x0 * sigma * 1e-6
    grid = BrownianGrid.from_increments(1e-12, [dw])
    assert gl_exact_terminal(0.0, 1.0, 0.5, 1.0, grid) == pytest.approx(1.0, abs=1e-6)


def test_verhulst_zero_noise_matches_logistic_ode():
    grid = BrownianGrid.from_increments(1.0, np.zeros(100))
    assert verhulst_exact_terminal(1.0, 1.0, 1.0, 1.0, grid) == pytest.approx(1.0, abs=1e-6)


def test_verhulst_short_horizon_returns_start():
    grid = BrownianGrid.from_increments(1e-12, [1e-6])
    assert verhulst_exact_terminal(1.0, 1.0, 0.5, 0.7, grid) == pytest.approx(0.7, abs=1e-6)


@given(seed=st.integers(0, 2**32), N=st.integers(1, 40), sigma=st.floats(0.0, 5.0), x0=st.floats(0.01, 10.0))
def test_verhulst_bounded_by_noise_only_growth(seed, N, sigma, x0):
    grid = sample_increments(seed, 0, N, 1.0)
    x = verhulst_exact_terminal(1.0, 1.0, sigma, x0, grid, QuadratureConfig(8), rng=stream(seed, 1))
    assert 0.0 < x <= x0 * math.exp(1.0 + sigma * grid.values.max())


@given(seed=st.integers(0, 2**32), N=st.integers(1, 40), sigma=st.floats(0.0, 7.0), eta=st.floats(0.0, 2.0))
def test_gl_strictly_positive(seed, N, sigma, eta):
    grid = sample_increments(seed, 0, N, 3.0)
    assert gl_exact_terminal(eta, 1.0, sigma, 1.0, grid, QuadratureConfig(4), rng=stream(seed, 1)) > 0.0


def test_quadrature_error_is_second_order():
    # with rng=None the fine path is the linear interpolant, a fixed smooth path
    grid = sample_increments(11, 0, 10, 3.0)
    xs = [gl_exact_terminal(0.5, 1.0, 1.0, 1.0, grid, QuadratureConfig(m)) for m in (8, 16, 32, 64)]
    d = np.abs(np.diff(xs))
    ratios = d[:-1] / d[1:]
    assert np.all((ratios > 3.5) & (ratios < 4.5)), ratios


def test_refinement_moment_discrepancy_below_standard_error():
    spec, _ = catalog("stratonovich_gl", {"sigma": 2.0})
    oracle = oracle_for(spec)
    runs, n_fine = 4000, 300 * 64
    w = np.zeros((runs, n_fine + 1))
    for i in range(runs):
        w[i, 1:] = np.cumsum(stream(5, i).standard_normal(n_fine)) * math.sqrt(spec.T / n_fine)
    x64 = oracle(w) ** 2
    x32 = oracle(w[:, ::2]) ** 2
    se = x64.std(ddof=1) / math.sqrt(runs)
    assert abs(x64.mean() - x32.mean()) < se


@pytest.mark.parametrize("sigma,moment", [(2.0, 0.46865), (5.0, 1.14168)])
def test_second_moment_matches_pde_solution(sigma, moment):
    # moment: implicit finite-difference solve of the backward equation of
    # log X, converged to about 1e-4 and frozen
    spec, _ = catalog("stratonovich_gl", {"sigma": sigma})
    x2 = exact_terminal_batch(spec, 300, QuadratureConfig(32), 77, np.arange(20000)) ** 2
    se = x2.std(ddof=1) / math.sqrt(x2.size)
    assert abs(x2.mean() - moment) < 4 * se


def test_gl_at_eta_zero_agrees_with_stratonovich_form():
    cfg = QuadratureConfig(8)
    gl, _ = catalog("ginzburg_landau", {"eta": 0.0, "lambda": 1.0, "sigma": 2.0, "T": 3.0})
    sgl, _ = catalog("stratonovich_gl", {"sigma": 2.0})
    a_exact, a_euler = coupled_batch(gl, 50, cfg, 3, range(64))
    b_exact, b_euler = coupled_batch(sgl, 50, cfg, 3, range(64))
    np.testing.assert_array_equal(a_exact, b_exact)
    np.testing.assert_allclose(a_euler, b_euler, rtol=1e-12)


def test_coupled_grid_is_the_run_grid():
    spec, _ = catalog("stratonovich_gl", {"sigma": 0.0})
    _, y = coupled_batch(spec, 20, QuadratureConfig(4), 9, [0, 5])
    for k, run in enumerate((0, 5)):
        assert y[k] == euler_path(spec, sample_increments(9, run, 20, spec.T)).terminal


def test_zero_noise_coupled_error_converges():
    spec, _ = catalog("stratonovich_gl", {"sigma": 0.0})
    errs = []
    for N in (10, 100, 1000):
        x, y = coupled_error_sample(spec, N, QuadratureConfig(4), 0, 0)
        assert math.isfinite(x) and math.isfinite(y)
        assert x == pytest.approx(INV_SQRT7, rel=1e-14)
        errs.append(abs(x - y))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_moderate_noise_pairs_are_finite():
    spec, _ = catalog("stratonovich_gl", {"sigma": 2.0})
    x, y = coupled_batch(spec, 1000, QuadratureConfig(4), 1, range(2000))
    assert np.all(np.isfinite(x))
    assert np.count_nonzero(np.isfinite(x - y)) >= 0.999 * x.size


def test_strong_noise_gives_nonfinite_euler_with_finite_exact():
    spec, _ = catalog("stratonovich_gl", {"sigma": 7.0})
    flags = draw_samples(ExplosionSampler(spec, 1000), 20000, 2)
    exploded = np.flatnonzero(flags)
    assert exploded.size > 0
    for run in exploded[:3]:
        x, y = coupled_error_sample(spec, 1000, QuadratureConfig(4), 2, int(run))
        assert math.isfinite(x) and x > 0
        assert not math.isfinite(y)


def test_verhulst_has_oracle_and_others_do_not():
    assert has_oracle(catalog("verhulst")[0])
    for name in ("cubic_additive", "feller_logistic", "ohta_kimura", "power_drift"):
        spec, _ = catalog(name)
        assert not has_oracle(spec)
        with pytest.raises(ValueError):
            coupled_error_sample(spec, 10, QuadratureConfig(), 0, 0)


def test_exact_batch_law_matches_coupled_batch():
    spec, _ = catalog("stratonovich_gl", {"sigma": 1.0})
    cfg = QuadratureConfig(8)
    a = exact_terminal_batch(spec, 30, cfg, 1, np.arange(3000)) ** 2
    b = coupled_batch(spec, 30, cfg, 2, np.arange(3000))[0] ** 2
    se = math.hypot(a.std(), b.std()) / math.sqrt(3000)
    assert abs(a.mean() - b.mean()) < 4 * se


@pytest.mark.parametrize("bad", [0, -1, 2.0, True])
def test_quadrature_config_rejects(bad):
    with pytest.raises(ValueError):
        QuadratureConfig(bad)


def test_oracle_parameter_domain():
    grid = BrownianGrid.from_increments(1.0, [0.1])
    with pytest.raises(ValueError):
        gl_exact_terminal(0.0, 0.0, 1.0, 1.0, grid)
    with pytest.raises(ValueError):
        verhulst_exact_terminal(0.0, 1.0, 1.0, 1.0, grid)
    with pytest.raises(ValueError):
        verhulst_exact_terminal(1.0, 1.0, 1.0, -1.0, grid)
