"""Command-line front end.

    quadrix surface   --d 2 --fn gaussian
    quadrix integrate --d 2 --fn gaussian --nu 0.1 --lambda 10 [--sin2 [--direct]] [--engine mc]
    quadrix oracle    --d 2 --nu 0.5 --lambda 2 [--cauchy-only]
    quadrix scan      --d 2 --fn gaussian --engine oracle --nu 1e-1:1e-5:4 --schedule inverse --out run.csv
    quadrix example1d --fn bump:1:2 --nu 0.01 --lambda 100
    quadrix geomcheck [--samples 10000]

Options resolve as flags > JSON config file (``--config``) > defaults.  The
resolved configuration is printed as a ``# config`` line before the results.
Exit status: 0 success, 1 computational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ._rules import ConvergenceError, QuadratureSpec
from .functions import parse_function

COMMANDS = ("surface", "integrate", "oracle", "scan", "example1d", "geomcheck")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    """Fully resolved options of one invocation."""

    command: str
    d: int = 2
    fn: str = "gaussian"
    nu: str | None = None
    lam: float | None = None
    schedule: list[str] = field(default_factory=lambda: ["constant:0"])
    engine: str = "quadrature"
    rel_tol: float = 1e-6
    max_depth: int = 4
    outer_nodes: int = 8
    sphere_order: int = 16
    mc_samples: int = 1_000_000
    seed: int = 42
    theta0: float = 0.5
    threads: int | None = None
    out: str | None = None
    format: str = "csv"
    sin2: bool = False
    direct: bool = False
    cauchy_only: bool = False
    samples: int = 10_000
    timing: bool = False

    def canonical(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_canonical(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec(self.rel_tol, self.max_depth, self.outer_nodes, self.sphere_order, self.mc_samples, self.seed)

    def validate(self) -> None:
        """Reject inconsistent combinations before any computation."""
        c = self.command
        if c not in COMMANDS:
            raise UsageError(f"unknown command {c!r}")
        if self.engine not in ("quadrature", "mc", "oracle"):
            raise UsageError(f"unknown engine {self.engine!r}")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.d < 2:
            raise UsageError("--d must be at least 2")
        if self.threads is not None and self.threads < 1:
            raise UsageError("--threads must be positive")
        if not 0 < self.theta0 < 1:
            raise UsageError("--theta0 must lie in (0, 1)")
        try:
            self.quadrature_spec()
            F = parse_function(self.fn)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if c in ("integrate", "oracle", "example1d"):
            if self.nu is None or self.lam is None:
                raise UsageError(f"{c} needs --nu and --lambda")
            nu = _float(self.nu, "--nu")
            if not 0 < nu <= 1:
                raise UsageError("--nu must lie in (0, 1]")
            if self.lam < 0:
                raise UsageError("--lambda must be non-negative")
        if c == "scan":
            from .lab import LambdaSchedule, parse_nu_grid

            if self.nu is None:
                raise UsageError("scan needs --nu start:stop:points-per-decade (or a single value)")
            try:
                _scan_nus(self.nu, parse_nu_grid)
                for s in self.schedule:
                    LambdaSchedule.parse(s)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        uses_oracle = (c == "oracle" and not self.cauchy_only) or (c in ("scan", "integrate") and self.engine == "oracle")
        if uses_oracle and F.kind != "gaussian":
            raise UsageError("the oracle needs --fn gaussian")
        if c == "integrate" and self.engine == "mc" and self.sin2:
            raise UsageError("--sin2 is available with the quadrature engine only")
        if self.direct and not self.sin2:
            raise UsageError("--direct only applies with --sin2")
        if c == "example1d" and F.kind != "bump":
            raise UsageError("example1d needs a bump function, e.g. --fn bump:1:2")
        if c in ("surface", "integrate", "scan") and self.engine != "oracle":
            try:
                F.check_mode(self.d, "relaxed")
            except ValueError as exc:
                raise UsageError(str(exc)) from None


def _float(text, flag):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise UsageError(f"{flag} expects a number, got {text!r}") from None


def _scan_nus(text, parse_nu_grid):
    if ":" in text:
        return parse_nu_grid(text)
    nu = float(text)
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    return np.array([nu])


def _g(x) -> str:
    return format(x, ".12g")


def _emit(**values) -> None:
    for k, v in values.items():
        print(f"{k} {_g(v) if isinstance(v, float) else v}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quadrix", description="Singular oscillatory integrals concentrated on the cone x.y = 0.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help="JSON file with option defaults")
    common.add_argument("--d", type=int, default=S)
    common.add_argument("--fn", default=S, help="gaussian | polydecay:N | bump:R1:R2")
    common.add_argument("--nu", default=S, help="value, or start:stop:points-per-decade for scan")
    common.add_argument("--lambda", dest="lam", type=float, default=S)
    common.add_argument("--schedule", action="append", default=S, help="constant[:c] | inverse_sqrt | inverse (repeatable)")
    common.add_argument("--engine", choices=("quadrature", "mc", "oracle"), default=S)
    common.add_argument("--rel-tol", dest="rel_tol", type=float, default=S)
    common.add_argument("--max-depth", dest="max_depth", type=int, default=S)
    common.add_argument("--outer-nodes", dest="outer_nodes", type=int, default=S)
    common.add_argument("--sphere-order", dest="sphere_order", type=int, default=S)
    common.add_argument("--mc-samples", dest="mc_samples", type=int, default=S)
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--theta0", type=float, default=S)
    common.add_argument("--threads", type=int, default=S)
    common.add_argument("--out", default=S)
    common.add_argument("--format", choices=("csv", "json"), default=S)
    common.add_argument("--timing", action="store_true", default=S, help="record wall times in scan output")
    helps = {
        "surface": "cone integral S(F) and J_0",
        "integrate": "full integral J_nu or its sin^2 variant",
        "oracle": "1D oracle values for the gaussian",
        "scan": "error scan over a nu grid and lambda schedules",
        "example1d": "planar example with a bump vanishing near 0",
        "geomcheck": "geometry invariant suite",
    }
    subs = {name: sub.add_parser(name, parents=[common], help=h) for name, h in helps.items()}
    subs["integrate"].add_argument("--sin2", action="store_true", default=S)
    subs["integrate"].add_argument("--direct", action="store_true", default=S)
    subs["oracle"].add_argument("--cauchy-only", dest="cauchy_only", action="store_true", default=S)
    subs["geomcheck"].add_argument("--samples", type=int, default=S)
    return p


def resolve_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    merged: dict = {}
    if "config" in ns:
        try:
            with open(ns.pop("config"), encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        if "lambda" in loaded:
            loaded["lam"] = loaded.pop("lambda")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    merged.update(ns)
    if "nu" in merged and merged["nu"] is not None:
        merged["nu"] = str(merged["nu"])
    if isinstance(merged.get("schedule"), str):
        merged["schedule"] = [merged["schedule"]]
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    cfg.validate()
    return cfg


# --- commands ----------------------------------------------------------------------


def _cmd_surface(cfg, spec):
    from .surface import surface_chart_d2, surface_integral

    F = parse_function(cfg.fn)
    S = surface_integral(F, cfg.d, spec)
    _emit(S=S.value, abs_error=S.abs_error_estimate, method=S.method)
    if cfg.d == 2:
        _emit(chart=S.diagnostics["chart"], fibered=S.diagnostics["fibered"])
    if cfg.nu is not None and cfg.lam is not None:
        _emit(J0=math.pi * math.exp(-float(cfg.nu) * cfg.lam) * S.value)
    else:
        _emit(J0_at_zero_lambda=math.pi * S.value)
    return 0


def _cmd_integrate(cfg, spec):
    from .integrals import jnu, jnu_mc, jnu_sin2
    from .oracle import oracle_jnu

    F = parse_function(cfg.fn)
    nu = float(cfg.nu)
    if cfg.sin2:
        est = jnu_sin2(F, cfg.d, nu, cfg.lam, spec, mode="direct" if cfg.direct else "identity", workers=cfg.threads)
    elif cfg.engine == "mc":
        est = jnu_mc(F, cfg.d, nu, cfg.lam, spec, theta0=cfg.theta0, workers=cfg.threads)
    elif cfg.engine == "oracle":
        _emit(jnu=oracle_jnu(cfg.d, nu, cfg.lam), method="oracle")
        return 0
    else:
        est = jnu(F, cfg.d, nu, cfg.lam, spec, workers=cfg.threads)
    name = "jnu_sin2" if cfg.sin2 else "jnu"
    _emit(**{name: est.value, "abs_error": est.abs_error_estimate, "method": est.method})
    return 0


def _cmd_oracle(cfg, spec):
    from .oracle import cauchy_cos, oracle_error, oracle_j0, oracle_jnu, rho0

    nu = float(cfg.nu)
    if cfg.cauchy_only:
        _emit(cauchy_cos=cauchy_cos(nu, cfg.lam))
        return 0
    if parse_function(cfg.fn).kind != "gaussian":
        raise UsageError("the oracle needs --fn gaussian")
    _emit(
        jnu=oracle_jnu(cfg.d, nu, cfg.lam),
        j0=oracle_j0(cfg.d, nu, cfg.lam),
        error=oracle_error(cfg.d, nu, cfg.lam),
        rho0=rho0(cfg.d),
    )
    return 0


def _cmd_scan(cfg, spec):
    from .lab import LambdaSchedule, parse_nu_grid, records_to_csv, records_to_json, scan

    F = parse_function(cfg.fn)
    nus = _scan_nus(cfg.nu, parse_nu_grid)
    schedules = [LambdaSchedule.parse(s) for s in cfg.schedule]
    records = scan(F, cfg.d, nus, schedules, spec, cfg.engine, workers=cfg.threads, timing=cfg.timing)
    text = records_to_csv(records) if cfg.format == "csv" else records_to_json(records)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        failed = sum(r.method.endswith(":failed") for r in records)
        _emit(records=len(records), failed=failed, out=cfg.out)
    else:
        sys.stdout.write(text)
    return 1 if any(r.method.endswith(":failed") for r in records) else 0


def _cmd_example1d(cfg, spec):
    from .integrals import example_1d

    lhs, rhs = example_1d(parse_function(cfg.fn), float(cfg.nu), cfg.lam, spec)
    _emit(lhs=lhs.value, rhs=rhs, difference=lhs.value - rhs, abs_error=lhs.abs_error_estimate)
    return 0


def _cmd_geomcheck(cfg, spec):
    from .geometry import invariant_suite

    results = invariant_suite(cfg.samples, seed=cfg.seed, d=cfg.d, theta0=cfg.theta0)
    ok = True
    for name, (dev, tol) in results.items():
        passed = dev <= tol
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name} max_dev {_g(dev)} tol {_g(tol)}")
    print("geomcheck", "passed" if ok else "FAILED")
    return 0 if ok else 1


_DISPATCH = {
    "surface": _cmd_surface,
    "integrate": _cmd_integrate,
    "oracle": _cmd_oracle,
    "scan": _cmd_scan,
    "example1d": _cmd_example1d,
    "geomcheck": _cmd_geomcheck,
}


def main(argv=None) -> int:
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"quadrix: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    print(f"# config {cfg.canonical()}")
    try:
        return _DISPATCH[cfg.command](cfg, cfg.quadrature_spec())
    except UsageError as exc:
        print(f"quadrix: error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, ValueError, ArithmeticError) as exc:
        print(f"quadrix: computation failed: {exc}", file=sys.stderr)
        return 1
