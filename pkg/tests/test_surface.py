import math
from dataclasses import replace

import pytest

from quadrix import ConvergenceError, QuadratureSpec, bump, gaussian, polydecay
from quadrix.surface import j0, surface_chart_d2, surface_fibered, surface_integral

PI2 = math.pi**2


@pytest.mark.parametrize("d, exact", [(2, PI2), (3, 2 * PI2)])
def test_gaussian_closed_form(d, exact):
    S = surface_fibered(gaussian(), d)
    assert S.value == pytest.approx(exact, rel=1e-9)
    assert S.abs_error_estimate <= 1e-6 * exact


def test_chart_gaussian():
    assert surface_chart_d2(gaussian()).value == pytest.approx(PI2, rel=1e-9)


def test_polydecay_closed_form():
    # int_0^inf int_0^inf (1 + r^2 + p^2)^-3 dr dp = pi / 8, times (2 pi)(2)
    exact = PI2 / 2
    assert surface_fibered(polydecay(6), 2).value == pytest.approx(exact, rel=1e-6)
    assert surface_chart_d2(polydecay(6)).value == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("N", [2.5, 3.0, 4.0])
def test_slow_decay_closed_form(N):
    # S = 2 pi^2 / (N - 2) in d = 2
    exact = 2 * PI2 / (N - 2)
    assert surface_chart_d2(polydecay(N)).value == pytest.approx(exact, rel=1e-6)
    assert surface_fibered(polydecay(N), 2).value == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("F", [gaussian(), polydecay(6), polydecay(4.5), bump(1, 2)], ids=str)
def test_methods_agree_d2(F):
    a = surface_fibered(F, 2).value
    b = surface_chart_d2(F).value
    assert abs(a - b) / abs(a) <= 2e-3
    both = surface_integral(F, 2)
    assert both.value == pytest.approx(0.5 * (a + b))
    assert both.abs_error_estimate >= 0.5 * abs(a - b)


def test_chart_phi_resolution_irrelevant_for_radial():
    a = surface_chart_d2(polydecay(6), n_phi=1).value
    b = surface_chart_d2(polydecay(6), n_phi=32).value
    assert a == pytest.approx(b, rel=1e-13)


def test_bump_stable_under_grid_change():
    a = surface_fibered(bump(1, 2), 3).value
    b = surface_fibered(bump(1, 2), 3, QuadratureSpec(outer_nodes=12)).value
    assert a == pytest.approx(b, rel=1e-6)


@pytest.mark.parametrize("d", [2, 3])
def test_dilation_scaling(d):
    # the measure |z|^-1 dSigma has degree 2d - 2 under z -> a z
    a = 2.0
    S1 = surface_integral(gaussian(), d).value
    S2 = surface_integral(gaussian().scaled(a), d).value
    assert S2 / S1 == pytest.approx(a ** (2 * d - 2), rel=1e-3)


def test_positivity():
    for F in (gaussian(), polydecay(6), bump(1, 2)):
        assert surface_fibered(F, 2).value > 0


@pytest.mark.parametrize("d", [2, 3])
def test_generic_path_matches_radial(d):
    spec = QuadratureSpec(rel_tol=1e-5, sphere_order=2)
    F = gaussian()
    generic = surface_fibered(replace(F, radial=False), d, spec)
    assert generic.method == "fibered-tensor"
    assert generic.value == pytest.approx(surface_fibered(F, d).value, rel=1e-5)


def test_j0_examples():
    assert j0(gaussian(), 2, 0.1, 0.0).value == pytest.approx(math.pi**3, rel=1e-9)
    assert j0(gaussian(), 2, 0.1, 10.0).value == pytest.approx(math.pi**3 / math.e, rel=1e-9)
    vals = [j0(gaussian(), 2, 0.1, lam).value for lam in (0, 1, 10, 100, 1000)]
    assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-40


def test_errors():
    with pytest.raises(ValueError):
        surface_fibered(gaussian(), 1)
    with pytest.raises(ValueError):
        j0(gaussian(), 2, 0.0, 0.0)
    with pytest.raises(ValueError):
        j0(gaussian(), 2, 0.5, -1.0)
    with pytest.raises(ConvergenceError) as info:
        surface_fibered(bump(1, 2), 2, QuadratureSpec(rel_tol=1e-15, max_depth=1))
    assert info.value.estimate.value > 0
