"""Scalar SDE definitions and the catalog of super-linear examples.

Coefficients are numpy-vectorised callables evaluated in IEEE double
arithmetic, so overflow yields ``inf``/``nan`` instead of raising.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

Coefficient = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SdeSpec:
    """``dX = f(X) dt + g(X) dW`` on ``[0, T]`` started at ``x0``."""

    drift: Coefficient
    diffusion: Coefficient
    x0: float
    T: float
    label: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"horizon T must be positive and finite, got {self.T!r}")
        if not math.isfinite(self.x0):
            raise ValueError(f"x0 must be finite, got {self.x0!r}")
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "params", dict(self.params))

    def f(self, x):
        with np.errstate(all="ignore"):
            return self.drift(np.float64(x) if np.ndim(x) == 0 else np.asarray(x, dtype=np.float64))

    def g(self, x):
        with np.errstate(all="ignore"):
            return self.diffusion(np.float64(x) if np.ndim(x) == 0 else np.asarray(x, dtype=np.float64))

    def with_(self, **changes) -> "SdeSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class GrowthCertificate:
    """Constants ``(C, alpha, beta)`` of the max/min growth condition.

    For ``|x| >= C`` the dominating coefficient satisfies
    ``|h(x)| >= |x|**beta / C`` and the other ``|h(x)| <= C |x|**alpha``.
    """

    C: float
    alpha: float
    beta: float
    dominating: str = "drift"

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        if not self.beta > self.alpha >= 0:
            raise ValueError(f"need beta > alpha >= 0, got alpha={self.alpha}, beta={self.beta}")
        if self.dominating not in ("drift", "diffusion"):
            raise ValueError(f"dominating must be 'drift' or 'diffusion', got {self.dominating!r}")


@dataclass(frozen=True)
class CertificateReport:
    holds: bool
    first_violation: float | None


# -- coefficient families --------------------------------------------------
# Module-level callables (not lambdas) so specs pickle into worker processes.

@dataclass(frozen=True)
class _Cubic:
    linear: float
    cubic: float

    def __call__(self, x):
        if self.linear == 0.0:
            # avoid 0 * inf = nan so that f(+inf) = -inf
            return -self.cubic * (x * x * x)
        return self.linear * x - self.cubic * (x * x * x)


@dataclass(frozen=True)
class _Quadratic:
    linear: float
    quadratic: float

    def __call__(self, x):
        return self.linear * x - self.quadratic * (x * x)


@dataclass(frozen=True)
class _Constant:
    value: float

    def __call__(self, x):
        if np.ndim(x):
            return np.full(np.shape(x), self.value)
        return np.float64(self.value)


@dataclass(frozen=True)
class _Linear:
    slope: float

    def __call__(self, x):
        return self.slope * x


@dataclass(frozen=True)
class _Logistic:
    rate: float
    capacity: float

    def __call__(self, x):
        return self.rate * x * (self.capacity - x)


@dataclass(frozen=True)
class _FellerNoise:
    sigma: float

    def __call__(self, x):
        return self.sigma * np.sqrt(np.maximum(x, 0.0))


@dataclass(frozen=True)
class _WrightFisherNoise:
    sigma: float

    def __call__(self, x):
        return self.sigma * x * (1.0 - x)


@dataclass(frozen=True)
class _PowerRestoring:
    scale: float
    exponent: float

    def __call__(self, x):
        return -self.scale * np.sign(x) * np.abs(x) ** self.exponent


# -- catalog ---------------------------------------------------------------

_DEFAULTS: dict[str, dict[str, float]] = {
    "cubic_additive": {"sigma": 1.0, "x0": 0.0, "T": 1.0},
    "ginzburg_landau": {"eta": 0.0, "lambda": 1.0, "sigma": 1.0, "x0": 1.0, "T": 1.0},
    "verhulst": {"eta": 1.0, "lambda": 1.0, "sigma": 1.0, "x0": 1.0, "T": 1.0},
    "feller_logistic": {"lambda": 1.0, "K": 1.0, "sigma": 1.0, "x0": 1.0, "T": 1.0},
    "ohta_kimura": {"sigma": 1.0, "x0": 0.5, "T": 1.0},
    "power_drift": {"scale": 10.0, "exponent": 1.1, "sigma": 4.0, "x0": 0.0, "T": 10.0},
    "stratonovich_gl": {"sigma": 1.0, "x0": 1.0, "T": 3.0},
}

MODEL_NAMES = tuple(_DEFAULTS)
CERTIFIED_MODELS = tuple(n for n in MODEL_NAMES if n not in ("power_drift", "stratonovich_gl"))


def model_defaults(name: str) -> dict[str, float]:
    if name not in _DEFAULTS:
        raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
    return dict(_DEFAULTS[name])


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def catalog(name: str, parameters: Mapping[str, float] | None = None) -> tuple[SdeSpec, GrowthCertificate | None]:
    """Build a catalog SDE in Itô form together with its growth certificate.

    ``parameters`` overrides the defaults returned by :func:`model_defaults`;
    unknown keys are rejected. ``sigma = 0`` is accepted for the cubic and
    Ginzburg-Landau families to obtain their deterministic limits.
    """
    p = model_defaults(name)
    for key, value in (parameters or {}).items():
        if key not in p:
            raise ValueError(f"unknown parameter {key!r} for {name}; expected one of {sorted(p)}")
        p[key] = float(value)
    for key, value in p.items():
        _require(math.isfinite(value), f"parameter {key} must be finite, got {value}")
    _require(p["T"] > 0, f"T must be positive, got {p['T']}")
    sigma = p["sigma"]

    if name == "cubic_additive":
        _require(sigma >= 0, f"sigma must be >= 0, got {sigma}")
        spec = SdeSpec(_Cubic(0.0, 1.0), _Constant(sigma), p["x0"], p["T"], name, p)
        cert = GrowthCertificate(C=max(1.0, sigma), alpha=0.0, beta=3.0)

    elif name in ("ginzburg_landau", "stratonovich_gl"):
        if name == "stratonovich_gl":
            # Itô form of dX = -X^3 dt + sigma X o dW: the drift gains sigma^2 x / 2
            eta, lam = 0.0, 1.0
        else:
            eta, lam = p["eta"], p["lambda"]
            _require(eta >= 0, f"eta must be >= 0, got {eta}")
            _require(lam > 0, f"lambda must be > 0, got {lam}")
        _require(sigma >= 0, f"sigma must be >= 0, got {sigma}")
        _require(p["x0"] > 0, f"x0 must be > 0, got {p['x0']}")
        spec = SdeSpec(_Cubic(eta + 0.5 * sigma**2, lam), _Linear(sigma), p["x0"], p["T"], name, p)
        cert = GrowthCertificate(C=max(1.0, sigma, 2.0 / lam, (2.0 * eta + sigma**2) / lam), alpha=1.0, beta=3.0)
        if name == "stratonovich_gl":
            cert = None

    elif name == "verhulst":
        eta, lam = p["eta"], p["lambda"]
        _require(eta > 0, f"eta must be > 0, got {eta}")
        _require(lam > 0, f"lambda must be > 0, got {lam}")
        _require(sigma > 0, f"sigma must be > 0, got {sigma}")
        _require(p["x0"] > 0, f"x0 must be > 0, got {p['x0']}")
        spec = SdeSpec(_Quadratic(eta + 0.5 * sigma**2, lam), _Linear(sigma), p["x0"], p["T"], name, p)
        cert = GrowthCertificate(C=max(sigma, 2.0 / lam, (2.0 * eta + sigma**2) / lam), alpha=1.0, beta=2.0)

    elif name == "feller_logistic":
        lam, K = p["lambda"], p["K"]
        _require(lam > 0, f"lambda must be > 0, got {lam}")
        _require(K > 0, f"K must be > 0, got {K}")
        _require(sigma > 0, f"sigma must be > 0, got {sigma}")
        _require(p["x0"] > 0, f"x0 must be > 0, got {p['x0']}")
        spec = SdeSpec(_Logistic(lam, K), _FellerNoise(sigma), p["x0"], p["T"], name, p)
        cert = GrowthCertificate(C=max(1.0, 2.0 / lam, sigma, 2.0 * K), alpha=1.0, beta=2.0)

    elif name == "ohta_kimura":
        _require(sigma > 0, f"sigma must be > 0, got {sigma}")
        _require(0 < p["x0"] < 1, f"x0 must lie in (0, 1), got {p['x0']}")
        spec = SdeSpec(_Constant(0.0), _WrightFisherNoise(sigma), p["x0"], p["T"], name, p)
        cert = GrowthCertificate(C=max(2.0, 2.0 / sigma), alpha=0.0, beta=2.0, dominating="diffusion")

    else:  # power_drift
        _require(p["scale"] > 0, f"scale must be > 0, got {p['scale']}")
        _require(p["exponent"] > 0, f"exponent must be > 0, got {p['exponent']}")
        _require(sigma > 0, f"sigma must be > 0, got {sigma}")
        spec = SdeSpec(_PowerRestoring(p["scale"], p["exponent"]), _Constant(sigma), p["x0"], p["T"], name, p)
        cert = None

    return spec, cert


def check_growth_certificate(
    spec: SdeSpec,
    cert: GrowthCertificate,
    sample_count: int = 10_000,
    x_max: float = 1e6,
    rtol: float = 1e-12,
) -> CertificateReport:
    """Check the growth condition on a log-spaced grid of ``|x|`` in ``[C, x_max]``.

    Both signs are sampled. ``rtol`` absorbs rounding at points where an
    inequality is tight. A non-finite coefficient value counts as a
    violation.
    """
    if sample_count < 2:
        raise ValueError(f"sample_count must be >= 2, got {sample_count}")
    if not x_max > cert.C:
        raise ValueError(f"x_max={x_max} must exceed C={cert.C}")
    mags = np.geomspace(cert.C, x_max, int(sample_count))
    xs = np.concatenate([mags, -mags])
    with np.errstate(all="ignore"):
        fx = np.abs(np.broadcast_to(spec.f(xs), xs.shape))
        gx = np.abs(np.broadcast_to(spec.g(xs), xs.shape))
        hi = np.maximum(fx, gx)
        lo = np.minimum(fx, gx)
        ax = np.abs(xs)
        lower = ax**cert.beta / cert.C
        upper = cert.C * ax**cert.alpha
        ok = (
            np.isfinite(fx)
            & np.isfinite(gx)
            & (hi >= lower * (1.0 - rtol))
            & (lo <= upper * (1.0 + rtol))
        )
    if ok.all():
        return CertificateReport(True, None)
    bad = np.flatnonzero(~ok)
    worst = bad[np.argmin(ax[bad])]
    return CertificateReport(False, float(xs[worst]))
