"""Analytic lower bounds certifying divergence of the Euler moments.

The probability of the divergence event is exponentially small while the
iterates on it are double-exponentially large. Both factors leave the
double range for modest N, so every product is formed in log2 space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .models import GrowthCertificate, SdeSpec

LN2 = math.log(2.0)
CERTIFIED_LOG2_LEVEL = 64.0


class PreconditionError(ValueError):
    """An argument is well-formed but the bound does not apply to it."""


def _nonneg(x: float) -> float:
    x = float(x)
    if not x >= 0:
        raise ValueError(f"x must be >= 0, got {x}")
    return x


def gaussian_tail_lower(x: float) -> float:
    """Lower bound ``x exp(-x^2) / 4`` on ``P[|Z| >= x]``."""
    x = _nonneg(x)
    return x * math.exp(-x * x) / 4.0


def gaussian_band_lower(x: float) -> float:
    """Lower bound ``x exp(-2x^2) / 2`` on ``P[x <= |Z| <= 2x]``."""
    x = _nonneg(x)
    return x * math.exp(-2.0 * x * x) / 2.0


def gaussian_tail_exact(x: float) -> float:
    """``P[|Z| >= x]`` for standard normal ``Z``."""
    x = _nonneg(x)
    return math.erfc(x / math.sqrt(2.0))


def strip_stay_probability(a: float, T: float) -> float:
    """``P[sup_{t <= T} |W_t| <= a]`` from the alternating eigenfunction series.

    Summation stops once a term drops below 1e-15; the alternating-series
    remainder is bounded by that first omitted term.
    """
    if not (a > 0 and T > 0):
        raise ValueError(f"need a > 0 and T > 0, got a={a}, T={T}")
    rate = math.pi**2 * T / (8.0 * a * a)
    # smallest k with exp(-(2k+1)^2 rate) / (2k+1) < 1e-15
    kmax = max(1, int(math.ceil((math.sqrt(math.log(1e15) / rate) - 1.0) / 2.0)) + 1)
    odd = 2.0 * np.arange(kmax + 1) + 1.0
    terms = np.exp(-odd * odd * rate) / odd
    keep = np.flatnonzero(terms < 1e-15)
    if keep.size:
        terms = terms[: keep[0]]
    signs = np.where(np.arange(terms.size) % 2 == 0, 1.0, -1.0)
    value = 4.0 / math.pi * math.fsum(signs * terms)
    return min(max(value, 0.0), 1.0)


def r_simple(N: int, T: float) -> float:
    """First-increment threshold ``max(3N/T, 1)`` for the additive cubic case."""
    if N < 1 or not T > 0:
        raise ValueError(f"need N >= 1 and T > 0, got N={N}, T={T}")
    return max(3.0 * N / T, 1.0)


def r_general(N: int, T: float, cert: GrowthCertificate) -> float:
    """Growth threshold ``max(2, C, (2CN/T + 2C^2)^(1/(beta - alpha)))``."""
    if N < 1 or not T > 0:
        raise ValueError(f"need N >= 1 and T > 0, got N={N}, T={T}")
    if not cert.beta > cert.alpha:
        raise ValueError(f"need beta > alpha, got alpha={cert.alpha}, beta={cert.beta}")
    C = cert.C
    return max(2.0, C, (2.0 * C * N / T + 2.0 * C * C) ** (1.0 / (cert.beta - cert.alpha)))


def induction_certificate(cert: GrowthCertificate, alpha: float | None = None) -> GrowthCertificate:
    """Weaken ``cert`` to an exponent usable in the growth induction.

    The induction ``|Y_{k+1}| >= |Y_k|**alpha`` absorbs the ``-|Y_k|`` term
    only when ``alpha >= 1``, and the floor ``2**(alpha**(N-1))`` only grows
    when ``alpha > 1``. Because ``|x| >= C >= 1`` on the relevant range, the
    bound ``C |x|**alpha`` stays valid for any larger exponent, so ``alpha``
    may be raised to any value in ``[max(alpha, 1), beta)``. The default
    keeps an exponent already above 1, else takes ``(1 + beta) / 2``.
    """
    if alpha is None:
        alpha = cert.alpha if cert.alpha > 1 else (1.0 + cert.beta) / 2.0
    if not max(cert.alpha, 1.0) <= alpha < cert.beta:
        raise ValueError(f"alpha must lie in [{max(cert.alpha, 1.0)}, {cert.beta}), got {alpha}")
    return replace(cert, C=max(cert.C, 1.0), alpha=float(alpha))


def k_and_mu(spec: SdeSpec) -> tuple[float, float]:
    """Constants ``(K, mu)`` for a deterministic start ``x0``.

    ``K = max(2, 1/|g(x0)|, |x0| + T|f(x0)|)``, and the event defining
    ``mu`` is then certain, so ``mu = 1``.
    """
    g0 = abs(float(spec.g(spec.x0)))
    f0 = abs(float(spec.f(spec.x0)))
    if g0 == 0.0:
        raise PreconditionError(f"g(x0) = 0 at x0={spec.x0}: no noise enters the first step")
    if not (math.isfinite(g0) and math.isfinite(f0)):
        raise PreconditionError(f"non-finite coefficient at x0={spec.x0}")
    return max(2.0, 1.0 / g0, abs(spec.x0) + spec.T * f0), 1.0


@dataclass(frozen=True)
class DivergenceCertificateReport:
    N: int
    r_N: float
    log2_prob_lower: float
    log2_expectation_lower: float
    certified: bool
    factors: dict[str, float] = field(default_factory=dict, compare=False)


def divergence_lower_bound(
    N: int,
    T: float,
    mode: str = "simple",
    *,
    cert: GrowthCertificate | None = None,
    K: float | None = None,
    mu: float = 1.0,
) -> DivergenceCertificateReport:
    """Log2 lower bounds on the event probability and on ``E|Y_N|``.

    ``mode="simple"`` is the additive cubic SDE with unit noise started at
    0. ``mode="general"`` needs the growth certificate and ``(K, mu)`` from
    :func:`k_and_mu`. The certificate is used as given; its floor
    ``2**(alpha**(N-1))`` only grows when ``alpha > 1`` (see
    :func:`induction_certificate`). The individual log2 factors are returned
    in ``factors``.
    """
    if isinstance(N, bool) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if mode == "simple":
        if N > 1024:
            raise ValueError(f"2**(N-1) overflows a double for N={N} > 1024")
        r = r_simple(N, T)
        factors = {
            "prefactor": math.log2(1.0 / (4.0 * math.sqrt(T))),
            "strip_stay": math.log2(strip_stay_probability(0.5, T)),
            "first_increment": -(N / T) * r * r / LN2,
        }
        growth = 2.0 ** (N - 1) * math.log2(r)
    elif mode == "general":
        if cert is None or K is None:
            raise ValueError("general mode needs cert and K")
        if not K > 1:
            raise ValueError(f"K must exceed 1, got {K}")
        if not 0 < mu <= 1:
            raise ValueError(f"mu must lie in (0, 1], got {mu}")
        r = r_general(N, T, cert)
        try:
            growth = float(cert.alpha) ** (N - 1)
        except OverflowError:
            growth = math.inf
        if not math.isfinite(growth):
            raise ValueError(f"alpha**(N-1) overflows a double for N={N}, alpha={cert.alpha}")
        factors = {
            "band": N * math.log2(0.5 * math.sqrt(T / N)),
            "first_increment": -(N / T) * K * K * (r + K) ** 2 / LN2,
            "prefactor": math.log2(mu * math.exp(-2.0 * T) / (4.0 * math.sqrt(T))),
        }
    else:
        raise ValueError(f"unknown mode {mode!r}; expected 'simple' or 'general'")
    log2_prob = math.fsum(factors.values())
    factors["growth"] = growth
    log2_expect = log2_prob + growth
    return DivergenceCertificateReport(
        N=N,
        r_N=r,
        log2_prob_lower=log2_prob,
        log2_expectation_lower=log2_expect,
        certified=log2_expect > CERTIFIED_LOG2_LEVEL,
        factors=factors,
    )


def reflection_explosion_bound(N: int) -> float:
    """Upper bound ``2 exp(-N)`` on ``P[sup_{t <= 1} |W_t| >= sqrt(2N)]``."""
    if isinstance(N, bool) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    return 2.0 * math.exp(-N)


def certified_growth_floor(N: int, k: int, r: float, alpha: float) -> float:
    """Certified log2 floor ``alpha**(k-1) * log2(r)`` for ``|Y_k|`` on the event.

    Use ``alpha=2`` for the additive cubic case.
    """
    if not 1 <= k <= N:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={N}")
    if not r >= 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return float(alpha) ** (k - 1) * math.log2(r)
