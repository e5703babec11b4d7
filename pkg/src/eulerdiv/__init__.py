"""Euler-Maruyama divergence for SDEs with super-linearly growing coefficients."""
from .bounds import (
    DivergenceCertificateReport,
    PreconditionError,
    certified_growth_floor,
    divergence_lower_bound,
    gaussian_band_lower,
    gaussian_tail_exact,
    gaussian_tail_lower,
    induction_certificate,
    k_and_mu,
    r_general,
    r_simple,
    reflection_explosion_bound,
    strip_stay_probability,
)
from .brownian import BrownianGrid, force_event_increments, path_sup, sample_increments
from .euler import Trajectory, deterministic_explosion_threshold, euler_path, euler_step
from .exact import QuadratureConfig, coupled_error_sample, gl_exact_terminal, verhulst_exact_terminal
from .models import GrowthCertificate, SdeSpec, catalog, check_growth_certificate
from .montecarlo import EulerSampler, ExactSampler, MomentEstimate, estimate_moment, estimate_strong_error, explosion_fraction

__version__ = "0.1.0"
