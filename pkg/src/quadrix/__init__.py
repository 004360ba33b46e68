"""Numerics for singular oscillatory integrals concentrated on the cone x.y = 0.

The central object is

    J_nu = int F(z) cos(lambda x.y) / ((x.y)^2 + nu^2) dz,   z = (x, y) in R^d x R^d,

whose leading behaviour as nu -> 0 is nu^-1 J_0 with
J_0 = pi exp(-nu lambda) int_{cone} F |z|^-1 dSigma.
"""

from ._rules import ConvergenceError, IntegralEstimate, QuadratureSpec
from .functions import TestFunction, bump, decay_certificate, gaussian, parse_function, polydecay
from .geometry import (
    OUTSIDE,
    NeighborhoodSpec,
    PhasePoint,
    TubularCoords,
    fiber_split,
    invariant_suite,
    omega,
    tubular_invert,
    tubular_map,
)
from .integrals import example_1d, jnu, jnu_mc, jnu_sin2
from .lab import LambdaSchedule, ScanRecord, chi, corollary_check, fit_error_model, scan, trend_test
from .oracle import RadialDensity, cauchy_cos, oracle_error, oracle_j0, oracle_jnu, rho, rho0
from .surface import j0, surface_chart_d2, surface_fibered, surface_integral

__all__ = [
    "OUTSIDE", "ConvergenceError", "IntegralEstimate", "LambdaSchedule", "NeighborhoodSpec", "PhasePoint",
    "QuadratureSpec", "RadialDensity", "ScanRecord", "TestFunction", "TubularCoords", "bump", "cauchy_cos",
    "chi", "corollary_check", "decay_certificate", "example_1d", "fiber_split", "fit_error_model", "gaussian",
    "invariant_suite", "j0", "jnu", "jnu_mc", "jnu_sin2", "omega", "oracle_error", "oracle_j0", "oracle_jnu",
    "parse_function", "polydecay", "rho", "rho0", "scan", "surface_chart_d2", "surface_fibered",
    "surface_integral", "trend_test", "tubular_invert", "tubular_map",
]
