import json
import math

import numpy as np
import pytest

from quadrix import ConvergenceError, QuadratureSpec, gaussian
from quadrix import lab
from quadrix.lab import (
    CSV_COLUMNS,
    STANDARD_SCHEDULES,
    LambdaSchedule,
    ScanRecord,
    chi,
    corollary_check,
    fit_error_model,
    nu_grid,
    parse_nu_grid,
    records_from_csv,
    records_to_csv,
    records_to_json,
    scan,
    trend_test,
)

FOUR_PI2 = 4 * math.pi**2
ZERO = LambdaSchedule("constant", 0.0)
GRID = parse_nu_grid("1e-1:1e-5:4")


@pytest.fixture(scope="module")
def d2_oracle_records():
    return scan(gaussian(), 2, GRID, STANDARD_SCHEDULES, engine="oracle")


def by_schedule(records, name):
    return [r for r in records if r.schedule == name]


def test_chi():
    assert chi(3, 1e-4) == 1.0 and chi(5, 0.5) == 1.0
    assert chi(2, 0.5) == 1.0
    assert chi(2, 1e-3) == pytest.approx(math.log(1e3))
    with pytest.raises(ValueError):
        chi(1, 0.1)


def test_schedules():
    assert LambdaSchedule.parse("inverse")(0.01) == pytest.approx(100)
    assert LambdaSchedule.parse("inverse_sqrt")(0.01) == pytest.approx(10)
    assert LambdaSchedule.parse("constant:2.5")(0.01) == 2.5
    assert LambdaSchedule.parse("3")(0.2) == 3.0
    assert LambdaSchedule.parse("constant").name == "constant:0"
    for bad in ("linear", "constant:x", "-1"):
        with pytest.raises(ValueError):
            LambdaSchedule.parse(bad)
    for s in STANDARD_SCHEDULES:
        assert all(s(nu) >= 0 for nu in GRID)


def test_nu_grid():
    assert len(GRID) == 17
    assert GRID[0] == pytest.approx(0.1) and GRID[-1] == pytest.approx(1e-5)
    assert np.allclose(np.diff(np.log10(GRID)), -0.25)
    assert len(nu_grid(1.0, 1e-2)) == 17
    for bad in ("1e-1:1e-5", "0:1e-5:4", "1e-1:2:4", "1e-1:1e-5:0"):
        with pytest.raises(ValueError):
            parse_nu_grid(bad)


def test_records_ordered_and_chi_exact(d2_oracle_records):
    recs = d2_oracle_records
    assert len(recs) == 3 * len(GRID)
    assert [(r.nu, r.schedule) for r in recs] == [(nu, s.name) for nu in GRID for s in STANDARD_SCHEDULES]
    for r in recs:
        assert r.chi == chi(2, r.nu)
        assert r.ratio == r.error / r.chi
        assert r.method == "oracle"


def test_d2_ratio_approaches_four_pi2(d2_oracle_records):
    zero = by_schedule(d2_oracle_records, ZERO.name)
    assert zero[-1].ratio == pytest.approx(FOUR_PI2, rel=0.1)
    slope, intercept, sup_ratio = fit_error_model(zero)
    assert slope == pytest.approx(FOUR_PI2, rel=0.1)
    assert sup_ratio >= zero[-1].ratio


def test_uniformity_in_lambda(d2_oracle_records):
    zero_sup = max(r.ratio for r in by_schedule(d2_oracle_records, ZERO.name))
    assert max(r.ratio for r in d2_oracle_records) <= 3 * zero_sup


def test_nu_jnu_tends_to_j0(d2_oracle_records):
    C = fit_error_model(by_schedule(d2_oracle_records, ZERO.name))[0]
    for r in d2_oracle_records:
        j0 = r.nu * r.j0_over_nu
        assert abs(r.nu * r.jnu - j0) <= C * r.nu * math.log(1 / r.nu) * 1.5


def test_d3_error_bounded():
    recs = scan(gaussian(), 3, GRID, STANDARD_SCHEDULES, engine="oracle")
    for s in STANDARD_SCHEDULES:
        E = np.array([r.error for r in by_schedule(recs, s.name)])
        assert E.max() < 150
    # lambda growing with 1/nu: no increasing trend
    for s in STANDARD_SCHEDULES[1:]:
        assert trend_test(by_schedule(recs, s.name))[2]


def test_trend_test_on_synthetic():
    nus = nu_grid(0.1, 1e-4, 2)

    def rec(nu, E):
        return ScanRecord(3, nu, 0.0, "x", 0.0, 0.0, E, 1.0, E, "synthetic")

    rising = [rec(nu, 10 + math.log(1 / nu)) for nu in nus]
    tau, p, flat = trend_test(rising)
    assert tau == pytest.approx(1.0) and p < 0.05 and not flat
    falling = [rec(nu, 10 - math.log(1 / nu)) for nu in nus]
    assert trend_test(falling)[2]


def test_fit_linearity(d2_oracle_records):
    zero = by_schedule(d2_oracle_records, ZERO.name)
    doubled = [ScanRecord(**{**r.__dict__, "error": 2 * r.error}) for r in zero]
    assert fit_error_model(doubled)[0] == pytest.approx(2 * fit_error_model(zero)[0], rel=1e-12)
    with pytest.raises(ValueError):
        fit_error_model(zero[:3])
    with pytest.raises(ValueError):
        fit_error_model(d2_oracle_records)


def test_scan_preconditions():
    from quadrix import polydecay

    with pytest.raises(ValueError):
        scan(polydecay(6), 2, [0.1], engine="oracle")
    with pytest.raises(ValueError):
        scan(gaussian(), 2, [1.5], engine="oracle")
    with pytest.raises(ValueError):
        scan(gaussian(), 2, [0.1], engine="exact")


def test_quadrature_engine_matches_oracle():
    nus = [0.1, 0.01]
    q = scan(gaussian(), 2, nus, [ZERO, LambdaSchedule("inverse")])
    o = scan(gaussian(), 2, nus, [ZERO, LambdaSchedule("inverse")], engine="oracle")
    for a, b in zip(q, o):
        assert a.error == pytest.approx(b.error, abs=1e-6 * b.jnu)
        assert a.method == "quadrature"


def test_failures_are_recorded(monkeypatch):
    real = lab.jnu

    def flaky(F, d, nu, lam, spec, workers=None):
        if nu < 0.05:
            raise ConvergenceError("forced", None)
        return real(F, d, nu, lam, spec, workers)

    monkeypatch.setattr(lab, "jnu", flaky)
    recs = scan(gaussian(), 2, [0.1, 0.01], [ZERO])
    assert recs[0].method == "quadrature" and math.isfinite(recs[0].error)
    assert recs[1].method == "quadrature:failed" and math.isnan(recs[1].error)
    with pytest.raises(ValueError):
        fit_error_model(recs * 3)  # only finite rows count


def test_csv_and_json(d2_oracle_records):
    text = records_to_csv(d2_oracle_records)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[0] == "d,nu,lambda,schedule,jnu,j0_over_nu,error,chi,ratio,method,walltime_s"
    assert len(lines) == 1 + len(d2_oracle_records)
    back = records_from_csv(text)
    assert back[5].error == pytest.approx(d2_oracle_records[5].error, rel=1e-11)
    rows = json.loads(records_to_json(d2_oracle_records))
    assert rows[5] == dict(zip(CSV_COLUMNS, lines[6].split(",")))
    again = scan(gaussian(), 2, GRID, STANDARD_SCHEDULES, engine="oracle")
    assert records_to_csv(again) == text
    assert all(r.wall_time == 0 for r in again)


def test_timing_flag():
    recs = scan(gaussian(), 2, [0.1], [ZERO], engine="oracle", timing=True)
    assert recs[0].wall_time >= 0


def test_mc_scan_deterministic():
    spec = QuadratureSpec(mc_samples=100_000)
    a = records_to_csv(scan(gaussian(), 2, [0.5, 0.1], [ZERO], spec, engine="mc", workers=1))
    b = records_to_csv(scan(gaussian(), 2, [0.5, 0.1], [ZERO], spec, engine="mc", workers=4))
    assert a == b


def test_corollary_check():
    F = gaussian()
    r0 = corollary_check(F, 2, 0.05, 0.0)
    assert r0.lhs == 0 and r0.rhs == 0 and r0.budget is None
    r = corollary_check(F, 2, 0.05, 20.0, C=FOUR_PI2)
    assert r.passed and r.deviation <= r.budget
    assert r.budget == pytest.approx(1.5 * FOUR_PI2 * math.log(20))
    big = corollary_check(F, 2, 0.5, 100.0, C=FOUR_PI2)
    assert big.rhs == pytest.approx(0.5 * math.pi / 0.5 * math.pi**2, rel=1e-12)
    assert big.passed
