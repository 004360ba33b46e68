import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate

from quadrix import ConvergenceError, QuadratureSpec, bump, gaussian, polydecay
from quadrix.integrals import (
    _jnu_signed,
    example_1d,
    example_1d_rhs,
    fiber_rule,
    jnu,
    jnu_mc,
    jnu_near,
    jnu_sin2,
)
from quadrix.oracle import oracle_jnu

PI2 = math.pi**2
# jnu(polydecay(6), 3, 0.5, 1) at rel_tol 1e-4 (error estimate 1.4e-5)
POLY6_D3 = 31.0468156


def test_fiber_rule_exact_on_cauchy_weight():
    for r, nu in [(1.0, 0.1), (0.01, 1e-4), (3.0, 1e-3)]:
        s, w = fiber_rule(r, nu, 0.0, 5.0, 8)
        assert w.sum() == pytest.approx(math.atan(r * 5.0 / nu) / (r * nu), rel=1e-10)


def test_fiber_rule_phase_resolution():
    s, w = fiber_rule(1.0, 0.1, 50.0, 3.0, 8)
    ref = integrate.quad(lambda t: 1 / (t * t + 0.01), 0, 3.0, weight="cos", wvar=50.0, limit=500)[0]
    assert np.dot(w, np.cos(50.0 * s)) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("nu, lam", [(1.0, 0.0), (0.1, 10.0), (0.01, 1.0)])
def test_jnu_gaussian_d2_matches_oracle(nu, lam):
    est = jnu(gaussian(), 2, nu, lam)
    assert est.value == pytest.approx(oracle_jnu(2, nu, lam), rel=1e-6)
    assert est.abs_error_estimate <= 1e-5 * abs(est.value)


def test_jnu_gaussian_d3_matches_oracle():
    assert jnu(gaussian(), 3, 0.5, 0.0).value == pytest.approx(oracle_jnu(3, 0.5, 0.0), rel=1e-6)


def test_jnu_even_in_lambda():
    F = gaussian()
    a = _jnu_signed(F, 2, 0.2, 3.0).value
    b = _jnu_signed(F, 2, 0.2, -3.0).value
    assert a == b


def test_jnu_bounded_by_lambda_zero():
    F = polydecay(6)
    spec = QuadratureSpec(rel_tol=1e-4)
    base = jnu(F, 2, 0.2, 0.0, spec).value
    for lam in (1.0, 5.0):
        assert abs(jnu(F, 2, 0.2, lam, spec).value) <= base


def test_generic_path_matches_radial():
    F = gaussian()
    spec = QuadratureSpec(rel_tol=1e-5, sphere_order=2)
    generic = jnu(replace(F, radial=False), 2, 0.5, 1.0, spec)
    assert generic.value == pytest.approx(jnu(F, 2, 0.5, 1.0).value, rel=1e-5)


def test_sin2_zero_lambda_is_zero():
    assert jnu_sin2(gaussian(), 2, 0.3, 0.0).value == 0.0
    assert jnu_sin2(gaussian(), 2, 0.3, 0.0, mode="direct").value == 0.0


def test_sin2_identity_vs_direct():
    a = jnu_sin2(gaussian(), 2, 0.2, 5.0)
    b = jnu_sin2(gaussian(), 2, 0.2, 5.0, mode="direct")
    assert abs(a.value - b.value) <= a.abs_error_estimate + b.abs_error_estimate
    with pytest.raises(ValueError):
        jnu_sin2(gaussian(), 2, 0.2, 5.0, mode="other")


def test_sin2_large_lambda_near_limit():
    nu = 0.1
    val = jnu_sin2(gaussian(), 2, nu, 1 / nu).value
    lead = 0.5 * math.pi / nu * (1 - math.exp(-1)) * PI2
    assert abs(val - lead) <= 4 * PI2 * math.log(1 / nu) * 1.5


def test_mc_gaussian_d2():
    mc = jnu_mc(gaussian(), 2, 0.5, 0.0)
    ref = jnu(gaussian(), 2, 0.5, 0.0).value
    assert abs(mc.value - ref) <= 3 * mc.abs_error_estimate
    strata = mc.diagnostics["strata"]
    assert strata["near"]["samples"] + strata["far"]["samples"] == 1_000_000
    assert mc.abs_error_estimate == pytest.approx(math.hypot(strata["near"]["stderr"], strata["far"]["stderr"]))


def test_mc_polydecay_d3():
    mc = jnu_mc(polydecay(6), 3, 0.5, 1.0)
    assert abs(mc.value - POLY6_D3) <= 3 * mc.abs_error_estimate


def test_mc_deterministic_across_threads():
    spec = QuadratureSpec(mc_samples=300_000, seed=7)
    a = jnu_mc(gaussian(), 3, 0.3, 2.0, spec, workers=1)
    b = jnu_mc(gaussian(), 3, 0.3, 2.0, spec, workers=4)
    assert (a.value, a.abs_error_estimate) == (b.value, b.abs_error_estimate)
    c = jnu_mc(gaussian(), 3, 0.3, 2.0, replace(spec, seed=8))
    assert c.value != a.value


def test_near_field_exponent():
    # int over |z| <= sqrt(nu) scales like nu^-1 nu^(2d-2) = nu^0 for d = 2
    spec = QuadratureSpec(rel_tol=1e-5)
    nus = (1e-2, 1e-3)
    vals = [jnu_near(gaussian(), 2, nu, 0.0, math.sqrt(nu), spec).value for nu in nus]
    exponent = math.log(vals[1] / vals[0]) / math.log(nus[1] / nus[0])
    assert abs(exponent) <= 0.2


def test_near_field_full_ball_is_jnu():
    whole = jnu_near(gaussian(), 2, 0.1, 1.0, 8.0).value
    assert whole == pytest.approx(jnu(gaussian(), 2, 0.1, 1.0).value, rel=1e-5)


def test_example_1d():
    F = bump(1, 2)
    lhs0, rhs0 = example_1d(F, 0.01, 0.0)
    assert abs(lhs0.value - rhs0) / rhs0 <= 0.01
    lhs1, rhs1 = example_1d(F, 0.01, 100.0)
    budget = 1.5 * abs(lhs0.value - rhs0) + 0.05
    assert abs(lhs1.value - rhs1) <= budget
    with pytest.raises(ValueError):
        example_1d(gaussian(), 0.01, 0.0)


def test_example_1d_rhs_definition():
    F = bump(1, 2)
    contour = integrate.quad(lambda t: float(F(np.array([t, 0.0]))) / t, 1, 2, epsabs=0, epsrel=1e-12)[0]
    assert example_1d_rhs(F, 0.01, 0.0) == pytest.approx(math.pi / 0.01 * 4 * contour, rel=1e-6)


def test_validation_and_budget():
    with pytest.raises(ValueError):
        jnu(gaussian(), 2, 0.0, 0.0)
    with pytest.raises(ValueError):
        jnu(gaussian(), 2, 1.5, 0.0)
    with pytest.raises(ValueError):
        jnu(gaussian(), 2, 0.5, -1.0)
    with pytest.raises(ValueError):
        jnu(gaussian(), 1, 0.5, 0.0)
    with pytest.raises(ConvergenceError):
        jnu(bump(1, 2), 2, 0.1, 0.0, QuadratureSpec(rel_tol=1e-15, max_depth=1))
