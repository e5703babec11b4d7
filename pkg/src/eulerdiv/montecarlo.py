"""Monte Carlo moments with explosion accounting.

Runs are cut into fixed-size chunks whose boundaries do not depend on the
number of workers. Chunk results are concatenated in run order and then
reduced by numpy's pairwise summation, so an estimate for a given seed is
bit-identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .brownian import sample_increment_matrix
from .euler import euler_batch, euler_batch_exploded
from .exact import QuadratureConfig, coupled_batch, exact_terminal_batch, has_oracle
from .models import SdeSpec

CHUNK_RUNS = 1024


@dataclass(frozen=True)
class MomentEstimate:
    """Estimate of ``E|S|^p`` with the IEEE and the finite-only views side by side."""

    p: float
    runs: int
    ieee_mean: float
    finite_mean: float
    finite_stderr: float
    count_finite: int
    count_pos_inf: int
    count_neg_inf: int
    count_nan: int

    @property
    def count_nonfinite(self) -> int:
        return self.runs - self.count_finite


# -- samplers --------------------------------------------------------------

class Sampler:
    """A pure map ``(seed, run_index) -> float``, evaluated a chunk at a time."""

    def batch(self, seed: int, runs: np.ndarray) -> np.ndarray:
        return np.array([self(seed, int(i)) for i in runs], dtype=np.float64)

    def __call__(self, seed: int, run_index: int) -> float:
        return float(self.batch(seed, np.array([run_index]))[0])


class FunctionSampler(Sampler):
    def __init__(self, func: Callable[[int, int], float]):
        self.func = func

    def __call__(self, seed, run_index):
        return float(self.func(seed, run_index))


class EulerSampler(Sampler):
    """Terminal Euler value ``Y_N`` of ``spec`` with ``N`` steps."""

    def __init__(self, spec: SdeSpec, N: int):
        self.spec, self.N = spec, int(N)

    def batch(self, seed, runs):
        inc = sample_increment_matrix(seed, runs, self.N, self.spec.T)
        return euler_batch(self.spec, inc, self.spec.T / self.N)


class ExplosionSampler(EulerSampler):
    """1.0 when the Euler path left the finite range at any step, else 0.0."""

    def batch(self, seed, runs):
        inc = sample_increment_matrix(seed, runs, self.N, self.spec.T)
        _, exploded = euler_batch_exploded(self.spec, inc, self.spec.T / self.N)
        return exploded.astype(np.float64)


class ExactSampler(Sampler):
    """Closed-form ``X_T`` on an independent fine grid of ``N * M`` steps."""

    def __init__(self, spec: SdeSpec, N: int, cfg: QuadratureConfig = QuadratureConfig()):
        if not has_oracle(spec):
            raise ValueError(f"no closed-form solution available for {spec.label!r}")
        self.spec, self.N, self.cfg = spec, int(N), cfg

    def batch(self, seed, runs):
        return exact_terminal_batch(self.spec, self.N, self.cfg, seed, runs)


class StrongErrorSampler(ExactSampler):
    """``X_T - Y_N`` with both values driven by one Brownian path."""

    def batch(self, seed, runs):
        exact, approx = coupled_batch(self.spec, self.N, self.cfg, seed, runs)
        with np.errstate(invalid="ignore"):
            return exact - approx


class PathSupSampler(Sampler):
    """``max_k |W_{kT/N}|`` of the run's Brownian grid."""

    def __init__(self, N: int, T: float):
        self.N, self.T = int(N), float(T)

    def batch(self, seed, runs):
        inc = sample_increment_matrix(seed, runs, self.N, self.T)
        w = np.cumsum(inc, axis=1)
        return np.max(np.abs(w), axis=1, initial=0.0)


# -- execution -------------------------------------------------------------

def _run_chunk(args):
    sampler, seed, start, stop = args
    return np.asarray(sampler.batch(seed, np.arange(start, stop, dtype=np.uint64)), dtype=np.float64)


def draw_samples(sampler, runs: int, seed: int, workers: int = 1, chunk_runs: int = CHUNK_RUNS) -> np.ndarray:
    """Evaluate ``sampler`` for run indices ``0..runs-1``, in run order."""
    if isinstance(runs, bool) or runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if not isinstance(sampler, Sampler):
        sampler = FunctionSampler(sampler)
    tasks = [(sampler, seed, s, min(s + chunk_runs, runs)) for s in range(0, runs, chunk_runs)]
    if workers == 1 or len(tasks) == 1:
        parts = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    return np.concatenate(parts)


def aggregate(samples, p: float) -> MomentEstimate:
    """Summarise ``|samples|**p``.

    ``ieee_mean`` is NaN if any sample is NaN, ``+inf`` if any is infinite,
    and otherwise the finite mean. The finite mean is accumulated on values
    scaled by their maximum, so a large but representable mean does not
    overflow in the running sum.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = np.asarray(samples, dtype=np.float64).reshape(-1)
    runs = s.size
    if runs < 1:
        raise ValueError("need at least one sample")
    nan = np.isnan(s)
    pos = s == np.inf
    neg = s == -np.inf
    finite = s[np.isfinite(s)]
    n = finite.size
    with np.errstate(over="ignore"):
        powered = np.abs(finite) ** p
    if n == 0:
        mean = stderr = math.nan
    elif not np.all(np.isfinite(powered)):
        # |x|^p itself overflowed for a finite sample
        mean = stderr = math.inf
    else:
        scale = float(powered.max())
        if scale == 0.0:
            mean, stderr = 0.0, (0.0 if n > 1 else math.nan)
        else:
            y = powered / scale
            ybar = np.sum(y) / n
            mean = float(ybar * scale)
            if n > 1:
                var = np.sum((y - ybar) ** 2) / (n - 1)
                stderr = float(math.sqrt(var / n) * scale)
            else:
                stderr = math.nan
    if nan.any():
        ieee = math.nan
    elif pos.any() or neg.any():
        ieee = math.inf
    else:
        ieee = mean
    return MomentEstimate(
        p=float(p),
        runs=int(runs),
        ieee_mean=ieee,
        finite_mean=mean,
        finite_stderr=stderr,
        count_finite=int(n),
        count_pos_inf=int(pos.sum()),
        count_neg_inf=int(neg.sum()),
        count_nan=int(nan.sum()),
    )


def estimate_moment(sampler, p: float, runs: int, seed: int, workers: int = 1) -> MomentEstimate:
    """Estimate ``E|S|^p`` where ``S = sampler(seed, i)`` for ``i < runs``."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return aggregate(draw_samples(sampler, runs, seed, workers), p)


def estimate_strong_error(
    spec: SdeSpec,
    N: int,
    p: float,
    runs: int,
    cfg: QuadratureConfig = QuadratureConfig(),
    seed: int = 0,
    workers: int = 1,
) -> MomentEstimate:
    """Estimate ``E|X_T - Y_N|^p`` over coupled exact/Euler pairs."""
    return estimate_moment(StrongErrorSampler(spec, N, cfg), p, runs, seed, workers)


def explosion_fraction(spec: SdeSpec, N: int, runs: int, seed: int, workers: int = 1) -> float:
    """Fraction of Euler paths that reach a non-finite value."""
    flags = draw_samples(ExplosionSampler(spec, N), runs, seed, workers)
    return float(np.count_nonzero(flags)) / flags.size
