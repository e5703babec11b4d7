"""Closed-form solutions of the Ginzburg-Landau and Verhulst SDEs.

Both solutions involve a pathwise time integral of an exponential of the
Brownian path, evaluated with the trapezoidal rule on the grid refined
``M``-fold by Brownian-bridge interpolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .brownian import BrownianGrid, bridge_refine, stream
from .euler import euler_batch
from .models import SdeSpec


@dataclass(frozen=True)
class QuadratureConfig:
    substeps: int = 32

    def __post_init__(self):
        if isinstance(self.substeps, bool) or not isinstance(self.substeps, (int, np.integer)) or self.substeps < 1:
            raise ValueError(f"substeps must be a positive integer, got {self.substeps!r}")


def _fine_path(grid: BrownianGrid, cfg: QuadratureConfig, rng) -> np.ndarray:
    fine = bridge_refine(grid.increments, grid.T, cfg.substeps, rng)
    w = np.empty(fine.size + 1)
    w[0] = 0.0
    np.cumsum(fine, out=w[1:])
    # pin the coarse nodes so the terminal value uses the grid's own W_T
    w[:: cfg.substeps] = grid.values
    return w


def _trapezoid_exp(w: np.ndarray, T: float, rate: float, vol: float) -> np.ndarray:
    """Trapezoidal ``int_0^T exp(rate*s + vol*W_s) ds`` along the last axis of ``w``."""
    n = w.shape[-1] - 1
    h = T / n
    s = np.linspace(0.0, T, n + 1)
    with np.errstate(over="ignore"):
        e = np.exp(rate * s + vol * w)
    return h * (e.sum(axis=-1) - 0.5 * (e[..., 0] + e[..., -1]))


def gl_terminal_from_fine(eta, lam, sigma, x0, T, w_fine) -> np.ndarray:
    """Ginzburg-Landau ``X_T`` from fine-grid Brownian values (last axis)."""
    integral = _trapezoid_exp(w_fine, T, 2.0 * eta, 2.0 * sigma)
    wT = w_fine[..., -1]
    with np.errstate(over="ignore", invalid="ignore"):
        return x0 * np.exp(eta * T + sigma * wT) / np.sqrt(1.0 + 2.0 * x0 * x0 * lam * integral)


def verhulst_terminal_from_fine(eta, lam, sigma, x0, T, w_fine) -> np.ndarray:
    """Verhulst ``X_T`` from fine-grid Brownian values (last axis)."""
    integral = _trapezoid_exp(w_fine, T, eta, sigma)
    wT = w_fine[..., -1]
    with np.errstate(over="ignore", invalid="ignore"):
        return x0 * np.exp(eta * T + sigma * wT) / (1.0 + x0 * lam * integral)


def gl_exact_terminal(eta, lam, sigma, x0, grid: BrownianGrid, cfg: QuadratureConfig = QuadratureConfig(), rng=None) -> float:
    """``X_T`` of the stochastic Ginzburg-Landau equation along ``grid``.

    ``rng`` drives the Brownian-bridge refinement; without it the bridge
    mean (linear interpolation) is used, which makes the result a
    deterministic function of the grid.
    """
    if not (eta >= 0 and lam > 0 and sigma >= 0 and x0 > 0):
        raise ValueError(f"need eta >= 0, lambda > 0, sigma >= 0, x0 > 0; got {eta}, {lam}, {sigma}, {x0}")
    w = _fine_path(grid, cfg, rng)
    return float(gl_terminal_from_fine(eta, lam, sigma, x0, grid.T, w))


def verhulst_exact_terminal(eta, lam, sigma, x0, grid: BrownianGrid, cfg: QuadratureConfig = QuadratureConfig(), rng=None) -> float:
    """``X_T`` of the stochastic Verhulst equation along ``grid``; see :func:`gl_exact_terminal`."""
    if not (eta > 0 and lam > 0 and sigma >= 0 and x0 > 0):
        raise ValueError(f"need eta > 0, lambda > 0, sigma >= 0, x0 > 0; got {eta}, {lam}, {sigma}, {x0}")
    w = _fine_path(grid, cfg, rng)
    return float(verhulst_terminal_from_fine(eta, lam, sigma, x0, grid.T, w))


def oracle_for(spec: SdeSpec):
    """Return ``f(w_fine) -> X_T`` for a spec with a closed-form solution."""
    p = spec.params
    if spec.label == "stratonovich_gl":
        args = (0.0, 1.0, p["sigma"], spec.x0, spec.T)
        return lambda w: gl_terminal_from_fine(*args, w)
    if spec.label == "ginzburg_landau":
        args = (p["eta"], p["lambda"], p["sigma"], spec.x0, spec.T)
        return lambda w: gl_terminal_from_fine(*args, w)
    if spec.label == "verhulst":
        args = (p["eta"], p["lambda"], p["sigma"], spec.x0, spec.T)
        return lambda w: verhulst_terminal_from_fine(*args, w)
    raise ValueError(f"no closed-form solution available for {spec.label!r}")


def has_oracle(spec: SdeSpec) -> bool:
    return spec.label in ("stratonovich_gl", "ginzburg_landau", "verhulst")


def coupled_batch(spec: SdeSpec, N: int, cfg: QuadratureConfig, seed: int, runs) -> tuple[np.ndarray, np.ndarray]:
    """Exact and Euler terminal values driven by the same Brownian paths.

    Run ``i`` draws its coarse increments first and the bridge normals next
    from its own stream, so its coarse grid equals
    ``sample_increments(seed, i, N, T)``.
    """
    oracle = oracle_for(spec)
    runs = np.asarray(runs).reshape(-1)
    T, M = spec.T, cfg.substeps
    coarse = np.empty((runs.size, N))
    w_fine = np.empty((runs.size, N * M + 1))
    w_fine[:, 0] = 0.0
    scale = math.sqrt(T / N)
    for row, run in enumerate(runs):
        rng = stream(seed, int(run))
        coarse[row] = rng.standard_normal(N) * scale
        np.cumsum(bridge_refine(coarse[row], T, M, rng), out=w_fine[row, 1:])
        w_fine[row, ::M] = np.concatenate(([0.0], np.cumsum(coarse[row])))
    exact = oracle(w_fine)
    approx = euler_batch(spec, coarse, T / N)
    return np.asarray(exact, dtype=np.float64), approx


def coupled_error_sample(spec: SdeSpec, N: int, cfg: QuadratureConfig, seed: int, run: int) -> tuple[float, float]:
    """One pair ``(X_T, Y_N)`` sharing a single Brownian path."""
    exact, approx = coupled_batch(spec, N, cfg, seed, [run])
    return float(exact[0]), float(approx[0])


def exact_terminal_batch(spec: SdeSpec, N: int, cfg: QuadratureConfig, seed: int, runs) -> np.ndarray:
    """Exact ``X_T`` on independent fine grids of ``N * M`` steps.

    Used when only moments are needed: the fine increments are drawn
    directly, which has the same law as refining a coarse grid.
    """
    oracle = oracle_for(spec)
    runs = np.asarray(runs).reshape(-1)
    n_fine = N * cfg.substeps
    w = np.empty((runs.size, n_fine + 1))
    w[:, 0] = 0.0
    for row, run in enumerate(runs):
        stream(seed, int(run)).standard_normal(out=w[row, 1:])
    w[:, 1:] *= math.sqrt(spec.T / n_fine)
    np.cumsum(w[:, 1:], axis=1, out=w[:, 1:])
    return np.asarray(oracle(w), dtype=np.float64)
