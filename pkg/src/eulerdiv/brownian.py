"""Discretised Brownian paths on uniform grids.

Every random draw in the package goes through :func:`stream`, which keys a
counter-based Philox generator by ``(seed, run_index)``. A run's path is
therefore a pure function of those two integers and never depends on how
runs are split across workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_UINT64_MAX = 2**64 - 1


def _check_key(name: str, value: int) -> int:
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if not 0 <= value <= _UINT64_MAX:
        raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return value


def _check_grid_args(N: int, T: float) -> None:
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if not (T > 0 and math.isfinite(T)):
        raise ValueError(f"T must be positive and finite, got {T!r}")


def stream(seed: int, run_index: int, *extra: int) -> np.random.Generator:
    """Return the random stream owned by one Monte Carlo run.

    Extra integer keys give further independent streams, e.g. one per
    table cell.
    """
    keys = [_check_key("seed", seed), _check_key("run_index", run_index)]
    keys += [_check_key("key", k) for k in extra]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministically derive a new 64-bit seed from ``seed`` and ``keys``."""
    ss = np.random.SeedSequence([_check_key("seed", seed)] + [_check_key("key", k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, eq=False)
class BrownianGrid:
    """Brownian increments and values on the uniform grid ``k*T/N``.

    ``values[0]`` is always 0 and ``values`` is the running sum of
    ``increments``.
    """

    N: int
    T: float
    increments: np.ndarray
    values: np.ndarray

    @classmethod
    def from_increments(cls, T: float, increments) -> "BrownianGrid":
        inc = np.array(increments, dtype=np.float64).reshape(-1)
        _check_grid_args(inc.size, T)
        values = np.empty(inc.size + 1)
        values[0] = 0.0
        np.cumsum(inc, out=values[1:])
        inc.flags.writeable = False
        values.flags.writeable = False
        return cls(N=int(inc.size), T=float(T), increments=inc, values=values)

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.N + 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BrownianGrid):
            return NotImplemented
        return (
            self.N == other.N
            and self.T == other.T
            and np.array_equal(self.increments, other.increments)
        )

    __hash__ = None


def sample_increments(seed: int, run_index: int, N: int, T: float) -> BrownianGrid:
    """Draw the grid of run ``run_index`` under ``seed``.

    Increments are i.i.d. Normal(0, T/N). The first ``N`` normals of the
    run's stream are used, so :func:`sample_increment_matrix` and the
    coupled samplers in :mod:`eulerdiv.exact` see the same path.
    """
    _check_grid_args(N, T)
    z = stream(seed, run_index).standard_normal(N)
    return BrownianGrid.from_increments(T, z * math.sqrt(T / N))


def sample_increment_matrix(seed: int, run_indices, N: int, T: float) -> np.ndarray:
    """Stack the increments of several runs, one row per run index."""
    _check_grid_args(N, T)
    run_indices = np.asarray(run_indices, dtype=np.uint64).reshape(-1)
    out = np.empty((run_indices.size, N))
    for row, run in enumerate(run_indices):
        stream(seed, int(run)).standard_normal(out=out[row])
    out *= math.sqrt(T / N)
    return out


def bridge_refine(increments, T: float, substeps: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Refine coarse increments to ``substeps`` fine increments each.

    The last axis of ``increments`` holds the coarse steps of one path.
    With ``rng`` the fine increments are an exact Brownian-bridge sample
    conditioned on each coarse increment; without it they are the bridge
    mean, i.e. linear interpolation. Output has shape
    ``increments.shape[:-1] + (N * substeps,)``.
    """
    inc = np.asarray(increments, dtype=np.float64)
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    N = inc.shape[-1]
    _check_grid_args(N, T)
    M = int(substeps)
    fine = np.repeat(inc[..., :, None] / M, M, axis=-1)
    if rng is not None and M > 1:
        z = rng.standard_normal(inc.shape + (M,)) * math.sqrt(T / (N * M))
        fine += z - z.mean(axis=-1, keepdims=True)
    return fine.reshape(inc.shape[:-1] + (N * M,))


def path_sup(grid: BrownianGrid) -> float:
    """Largest absolute grid value of the path, ``max_k |W_{kT/N}|``."""
    return float(np.max(np.abs(grid.values)))


# -- the divergence events -------------------------------------------------

def simple_event_threshold(N: int, T: float) -> float:
    """First-increment threshold ``max(3N/T, 1)`` of the cubic event."""
    _check_grid_args(N, T)
    return max(3.0 * N / T, 1.0)


def in_simple_event(grid: BrownianGrid) -> bool:
    """Membership of the additive-noise cubic divergence event.

    The first increment must reach ``max(3N/T, 1)`` and every later
    increment must stay within [-1, 1].
    """
    first_ok = abs(grid.increments[0]) >= simple_event_threshold(grid.N, grid.T)
    return bool(first_ok and np.all(np.abs(grid.increments[1:]) <= 1.0))


def in_general_event(grid: BrownianGrid, first_threshold: float) -> bool:
    """Membership of the general divergence event.

    ``first_threshold`` is ``K * (r_N + K)``; the later increments must have
    magnitude within ``[T/N, 2T/N]``.
    """
    lo, hi = grid.T / grid.N, 2.0 * grid.T / grid.N
    rest = np.abs(grid.increments[1:])
    return bool(
        abs(grid.increments[0]) >= first_threshold and np.all((rest >= lo) & (rest <= hi))
    )


def force_event_increments(
    N: int,
    T: float,
    first: float,
    subsequent_magnitude: float,
    signs: Sequence[int],
    event: str = "simple",
) -> BrownianGrid:
    """Build a deterministic grid inside a divergence event.

    ``event="simple"`` targets the cubic event (later increments bounded
    by 1, first increment at least ``max(3N/T, 1)``); ``event="general"``
    targets the band ``[T/N, 2T/N]`` for the later increments. The general
    first-increment threshold depends on the SDE, so it is checked with
    :func:`in_general_event` by the caller.
    """
    _check_grid_args(N, T)
    signs = list(signs)
    if len(signs) != N - 1:
        raise ValueError(f"expected {N - 1} signs, got {len(signs)}")
    if any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be +1 or -1")
    m = float(subsequent_magnitude)
    if event == "simple":
        if not 0.0 <= m <= 1.0:
            raise ValueError(f"subsequent magnitude {m} outside [0, 1] for the simple event")
        r = simple_event_threshold(N, T)
        if abs(first) < r:
            raise ValueError(f"|first| = {abs(first)} below the event threshold {r}")
    elif event == "general":
        lo, hi = T / N, 2.0 * T / N
        if N > 1 and not lo <= m <= hi:
            raise ValueError(f"subsequent magnitude {m} outside [{lo}, {hi}] for the general event")
    else:
        raise ValueError(f"unknown event {event!r}; expected 'simple' or 'general'")
    inc = np.empty(N)
    inc[0] = first
    inc[1:] = np.asarray(signs, dtype=np.float64) * m
    return BrownianGrid.from_increments(T, inc)
