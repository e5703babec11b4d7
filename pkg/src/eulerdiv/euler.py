"""Explicit Euler-Maruyama recursion with IEEE extended-real semantics.

Nothing is clamped. Overflow produces ``inf``, ``inf - inf`` produces
``nan``, and both propagate as ordinary data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .brownian import BrownianGrid
from .models import SdeSpec


@dataclass(frozen=True, eq=False)
class Trajectory:
    values: np.ndarray
    explosion_index: int | None

    @property
    def exploded(self) -> bool:
        return self.explosion_index is not None

    @property
    def terminal(self) -> float:
        return float(self.values[-1])


def euler_step(spec: SdeSpec, y: float, dt: float, dw: float) -> float:
    """One step ``y + dt*f(y) + g(y)*dw`` in IEEE double arithmetic."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    y = np.float64(y)
    with np.errstate(all="ignore"):
        return float(y + np.float64(dt) * spec.f(y) + spec.g(y) * np.float64(dw))


def euler_path(spec: SdeSpec, grid: BrownianGrid) -> Trajectory:
    """Iterate :func:`euler_step` along ``grid`` starting from ``spec.x0``."""
    if grid.T != spec.T:
        raise ValueError(f"grid horizon {grid.T} does not match spec horizon {spec.T}")
    values = euler_batch(spec, grid.increments[None, :], grid.dt, keep_path=True)[0]
    bad = np.flatnonzero(~np.isfinite(values))
    return Trajectory(values=values, explosion_index=int(bad[0]) if bad.size else None)


def euler_batch(spec: SdeSpec, increments: np.ndarray, dt: float, keep_path: bool = False):
    """Run the recursion for many paths at once, one row of ``increments`` each.

    Returns the terminal values, or the full ``(runs, N + 1)`` array with
    ``keep_path``. Each path is computed elementwise, so a row's result does
    not depend on the other rows.
    """
    inc = np.asarray(increments, dtype=np.float64)
    runs, N = inc.shape
    dt = np.float64(dt)
    y = np.full(runs, spec.x0)
    path = None
    if keep_path:
        path = np.empty((runs, N + 1))
        path[:, 0] = y
    with np.errstate(all="ignore"):
        for k in range(N):
            y = y + dt * spec.drift(y) + spec.diffusion(y) * inc[:, k]
            if keep_path:
                path[:, k + 1] = y
    return path if keep_path else y


def euler_batch_exploded(spec: SdeSpec, increments: np.ndarray, dt: float):
    """Terminal values plus a flag per path telling whether it ever left the finite range."""
    inc = np.asarray(increments, dtype=np.float64)
    runs, N = inc.shape
    dt = np.float64(dt)
    y = np.full(runs, spec.x0)
    exploded = ~np.isfinite(y)
    with np.errstate(all="ignore"):
        for k in range(N):
            y = y + dt * spec.drift(y) + spec.diffusion(y) * inc[:, k]
            exploded |= ~np.isfinite(y)
    return y, exploded


def deterministic_explosion_threshold(N: int, T: float) -> float:
    """Initial-value magnitude ``sqrt(2N/T)`` beyond which the noiseless cubic recursion blows up."""
    if N < 1 or not T > 0:
        raise ValueError(f"need N >= 1 and T > 0, got N={N}, T={T}")
    return math.sqrt(2.0 * N / T)
