"""Scans of |J_nu - J_0/nu| against the envelope chi_d(nu).

A scan evaluates, for every nu on a grid and every lambda schedule, the
full integral and the leading term and records their gap E together with
chi_d(nu) = 1 (d >= 3) or max(ln(1/nu), 1) (d = 2).  Records are plain data
and serialise to CSV and JSON with a fixed column order and 12 significant
digits, so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy import stats

from ._rules import ConvergenceError, QuadratureSpec, ordered_map
from .functions import TestFunction
from .integrals import jnu, jnu_mc, jnu_sin2
from .oracle import oracle_error, oracle_j0, oracle_jnu, rho0
from .surface import surface_integral

Engine = Literal["quadrature", "mc", "oracle"]
CSV_COLUMNS = ("d", "nu", "lambda", "schedule", "jnu", "j0_over_nu", "error", "chi", "ratio", "method", "walltime_s")


def chi(d: int, nu: float) -> float:
    """Error envelope: 1 for d >= 3, max(ln(1/nu), 1) for d = 2."""
    if d < 2:
        raise ValueError("chi_d is defined for d >= 2")
    if d >= 3:
        return 1.0
    return max(math.log(1.0 / nu), 1.0)


@dataclass(frozen=True)
class LambdaSchedule:
    """lambda as a function of nu: constant c, nu^-1/2 or nu^-1."""

    kind: Literal["constant", "inverse_sqrt", "inverse"]
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "inverse_sqrt", "inverse"):
            raise ValueError(f"unknown schedule {self.kind!r}")
        if self.kind == "constant" and not self.c >= 0:
            raise ValueError("constant schedule needs c >= 0")

    def __call__(self, nu: float) -> float:
        if self.kind == "constant":
            return self.c
        if self.kind == "inverse_sqrt":
            return nu**-0.5
        return 1.0 / nu

    @property
    def name(self) -> str:
        return f"constant:{self.c:g}" if self.kind == "constant" else self.kind

    @classmethod
    def parse(cls, text: str) -> "LambdaSchedule":
        text = text.strip()
        if text in ("inverse", "inverse_sqrt"):
            return cls(text)
        if text == "constant":
            return cls("constant", 0.0)
        if text.startswith("constant:"):
            return cls("constant", float(text.split(":", 1)[1]))
        try:
            return cls("constant", float(text))
        except ValueError:
            raise ValueError(f"bad schedule {text!r}; use constant[:c] | inverse_sqrt | inverse") from None


STANDARD_SCHEDULES = (LambdaSchedule("constant", 0.0), LambdaSchedule("inverse_sqrt"), LambdaSchedule("inverse"))


@dataclass
class ScanRecord:
    d: int
    nu: float
    lam: float
    schedule: str
    jnu: float
    j0_over_nu: float
    error: float
    chi: float
    ratio: float
    method: str
    wall_time: float = 0.0

    def row(self) -> list[str]:
        def g(x):
            return format(x, ".12g")

        return [
            str(self.d), g(self.nu), g(self.lam), self.schedule, g(self.jnu), g(self.j0_over_nu),
            g(self.error), g(self.chi), g(self.ratio), self.method, g(self.wall_time),
        ]

    def as_dict(self) -> dict:
        return dict(zip(CSV_COLUMNS, self.row()))


def nu_grid(start: float, stop: float, per_decade: int = 8) -> np.ndarray:
    """Log-spaced grid from ``start`` to ``stop`` inclusive."""
    if not (0 < start <= 1 and 0 < stop <= 1):
        raise ValueError("nu grid must lie in (0, 1]")
    if per_decade < 1:
        raise ValueError("points per decade must be positive")
    decades = abs(math.log10(stop / start))
    n = int(round(decades * per_decade)) + 1
    return 10.0 ** np.linspace(math.log10(start), math.log10(stop), n)


def parse_nu_grid(text: str) -> np.ndarray:
    """``start:stop:points_per_decade``, e.g. ``1e-1:1e-5:4``."""
    try:
        a, b, k = text.split(":")
        return nu_grid(float(a), float(b), int(k))
    except ValueError as exc:
        raise ValueError(f"bad nu grid {text!r}: {exc}") from None


def _one_record(F, d, nu, sched, spec, engine, S, timing):
    lam = sched(nu)
    t0 = time.perf_counter()
    c = chi(d, nu)
    try:
        if engine == "oracle":
            J = oracle_jnu(d, nu, lam)
            lead = oracle_j0(d, nu, lam) / nu
            E = oracle_error(d, nu, lam)
        else:
            est = jnu(F, d, nu, lam, spec, workers=1) if engine == "quadrature" else jnu_mc(F, d, nu, lam, spec, workers=1)
            J = est.value
            lead = math.pi * math.exp(-nu * lam) * S / nu
            E = abs(J - lead)
        method = engine
    except (ConvergenceError, ValueError, FloatingPointError):
        J = lead = E = math.nan
        method = f"{engine}:failed"
    wall = time.perf_counter() - t0 if timing else 0.0
    return ScanRecord(d, float(nu), float(lam), sched.name, J, lead, E, c, E / c, method, wall)


def scan(
    F: TestFunction,
    d: int,
    nus: Sequence[float],
    schedules: Sequence[LambdaSchedule] = STANDARD_SCHEDULES,
    spec: QuadratureSpec = QuadratureSpec(),
    engine: Engine = "quadrature",
    workers: int | None = None,
    timing: bool = False,
) -> list[ScanRecord]:
    """One record per (nu, schedule), ordered by nu then schedule.

    ``timing`` stores measured wall times; it is off by default so that the
    output is a pure function of the inputs.
    """
    if engine not in ("quadrature", "mc", "oracle"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "oracle" and F.kind != "gaussian":
        raise ValueError("the oracle engine needs the gaussian test function")
    for nu in nus:
        if not 0 < nu <= 1:
            raise ValueError("nu grid must lie in (0, 1]")
    if engine == "oracle":
        S = rho0(d)
    else:
        S = surface_integral(F, d, spec).value
    jobs = [(nu, sched) for nu in nus for sched in schedules]
    return ordered_map(lambda job: _one_record(F, d, job[0], job[1], spec, engine, S, timing), jobs, workers)


def fit_error_model(records: Iterable[ScanRecord]) -> tuple[float, float, float]:
    """Least-squares fit E = slope * chi + intercept; also sup E/chi."""
    recs = [r for r in records if math.isfinite(r.error)]
    if len(recs) < 4:
        raise ValueError("need at least 4 finite records")
    if len({(r.d, r.schedule) for r in recs}) != 1:
        raise ValueError("records must share d and schedule")
    x = np.array([r.chi for r in recs])
    y = np.array([r.error for r in recs])
    if np.ptp(x) == 0:
        slope, intercept = 0.0, float(y.mean())
    else:
        slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept), float(np.max(y / x))


def trend_test(records: Iterable[ScanRecord], level: float = 0.05) -> tuple[float, float, bool]:
    """Kendall tau of E against ln(1/nu), one-sided test for an increase.

    Returns ``(tau, p_value, no_increasing_trend)`` where the last entry is
    true when an increasing trend is not significant at ``level``.
    """
    recs = [r for r in records if math.isfinite(r.error)]
    x = [math.log(1.0 / r.nu) for r in recs]
    y = [r.error for r in recs]
    res = stats.kendalltau(x, y, alternative="greater")
    return float(res.statistic), float(res.pvalue), bool(res.pvalue >= level)


@dataclass
class CorollaryReport:
    d: int
    nu: float
    lam: float
    lhs: float
    rhs: float
    deviation: float
    chi: float
    budget: float | None
    passed: bool | None


def corollary_check(
    F: TestFunction,
    d: int,
    nu: float,
    lam: float,
    spec: QuadratureSpec = QuadratureSpec(),
    C: float | None = None,
    S: float | None = None,
    workers: int | None = None,
) -> CorollaryReport:
    """Compare the sin^2 integral with (pi/2) nu^-1 (1 - e^(-nu lambda)) S(F).

    With a constant ``C`` the deviation is judged against the budget
    ``1.5 C chi_d(nu)``.
    """
    lhs = jnu_sin2(F, d, nu, lam, spec, workers=workers).value
    if S is None:
        S = surface_integral(F, d, spec).value
    rhs = 0.5 * math.pi / nu * (-math.expm1(-nu * lam)) * S
    dev = abs(lhs - rhs)
    c = chi(d, nu)
    budget = None if C is None else 1.5 * C * c
    return CorollaryReport(d, nu, lam, lhs, rhs, dev, c, budget, None if budget is None else dev <= budget)


def records_to_csv(records: Iterable[ScanRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def records_to_json(records: Iterable[ScanRecord]) -> str:
    return json.dumps([r.as_dict() for r in records], indent=1) + "\n"


def write_records(records: Sequence[ScanRecord], path, fmt: Literal["csv", "json"] = "csv") -> None:
    text = records_to_csv(records) if fmt == "csv" else records_to_json(records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def records_from_csv(text: str) -> list[ScanRecord]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(
            ScanRecord(
                int(row["d"]), float(row["nu"]), float(row["lambda"]), row["schedule"], float(row["jnu"]),
                float(row["j0_over_nu"]), float(row["error"]), float(row["chi"]), float(row["ratio"]),
                row["method"], float(row["walltime_s"]),
            )
        )
    return out


__all__ = [
    "CSV_COLUMNS", "CorollaryReport", "LambdaSchedule", "ScanRecord", "STANDARD_SCHEDULES", "chi",
    "corollary_check", "fit_error_model", "nu_grid", "parse_nu_grid", "records_from_csv",
    "records_to_csv", "records_to_json", "scan", "trend_test", "write_records",
]
