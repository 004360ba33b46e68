"""Shared quadrature plumbing: specs, estimates, panel rules, sphere rules.

Everything in here is deterministic.  Parallel helpers preserve input order
and all reductions go through :func:`exact_sum`, so results do not depend on
the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gammaln

THREADS_ENV = "QUADRIX_THREADS"
MAX_PHASE_PER_PANEL = np.pi / 4


class ConvergenceError(RuntimeError):
    """Raised when an integrator exhausts its refinement budget.

    The best available estimate is attached as ``estimate`` so callers can
    still inspect (or deliberately accept) it.
    """

    def __init__(self, message: str, estimate: "IntegralEstimate"):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy and budget knobs shared by all integrators.

    Parameters
    ----------
    rel_tol : float
        Target relative accuracy of deterministic quadratures.
    max_depth : int
        Maximum number of per-axis refinement steps.
    outer_nodes : int
        Gauss-Legendre nodes per panel.
    sphere_order : int
        Angular resolution of the direction rule for non-radial integrands.
    mc_samples : int
        Total Monte Carlo sample budget.
    seed : int
        Root seed for Monte Carlo streams (64-bit unsigned).
    """

    rel_tol: float = 1e-6
    max_depth: int = 4
    outer_nodes: int = 8
    sphere_order: int = 16
    mc_samples: int = 1_000_000
    seed: int = 42

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        for name in ("max_depth", "outer_nodes", "sphere_order", "mc_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive count")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class IntegralEstimate:
    """A value with an a-posteriori error estimate and diagnostics."""

    value: float
    abs_error_estimate: float
    evaluations: int
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.abs_error_estimate) and self.abs_error_estimate >= 0):
            raise ValueError("abs_error_estimate must be finite and non-negative")

    @property
    def rel_error_estimate(self) -> float:
        return self.abs_error_estimate / abs(self.value) if self.value else math.inf


def exact_sum(values: Iterable[float]) -> float:
    """Correctly rounded sum; independent of summation order."""
    return math.fsum(np.asarray(list(values), dtype=float).ravel())


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(workers))


def ordered_map(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool, order preserved."""
    workers = resolve_workers(workers)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def panel_rule(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite n-point Gauss-Legendre rule over consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (x + 1.0)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def subdivide(edges: np.ndarray, level: int) -> np.ndarray:
    """Split every panel into ``2**level`` equal pieces."""
    edges = np.asarray(edges, dtype=float)
    if level <= 0:
        return edges
    k = 2**level
    t = np.arange(k) / k
    inner = edges[:-1, None] + t * np.diff(edges)[:, None]
    return np.append(inner.ravel(), edges[-1])


def phase_split(edges: np.ndarray, rate: float, max_phase: float = MAX_PHASE_PER_PANEL) -> np.ndarray:
    """Refine panels so a phase growing at ``rate`` changes < ``max_phase`` per panel."""
    edges = np.asarray(edges, dtype=float)
    if rate <= 0 or len(edges) < 2:
        return edges
    widths = np.diff(edges)
    counts = np.maximum(1, np.ceil(widths * rate / max_phase).astype(int))
    if np.all(counts == 1):
        return edges
    pieces = [np.linspace(a, b, c + 1)[:-1] for a, b, c in zip(edges[:-1], edges[1:], counts)]
    return np.append(np.concatenate(pieces), edges[-1])


def graded_edges(upper: float, fine: float, coarse_ratio: float = 2.0) -> np.ndarray:
    """Panel edges on ``[0, upper]`` graded geometrically towards 0.

    Doubling from ``fine`` up to 1, unit panels up to 4, then geometric with
    ``coarse_ratio`` up to ``upper``.  Suited to integrands that vary on the
    scale ``fine`` near the origin and decay on the unit scale.
    """
    if upper <= 0:
        raise ValueError("upper must be positive")
    fine = min(max(fine, 1e-300), 1.0)
    pts = [0.0]
    e = fine
    while e < 1.0:
        pts.append(e)
        e *= 2.0
    e = 1.0
    while e < min(upper, 4.0):
        pts.append(e)
        e += 1.0 if e >= 2.0 else 0.5
    e = max(e, 4.0)
    while e < upper:
        pts.append(e)
        e *= coarse_ratio
    pts = np.array([p for p in pts if p < upper] + [upper])
    return np.unique(pts)


def unit_sphere_area(n: int) -> float:
    """Area of the unit sphere in R^n (n=1 gives the two-point set, area 2)."""
    return float(np.exp(np.log(2.0) + 0.5 * n * np.log(np.pi) - gammaln(0.5 * n)))


def sphere_rule(d: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions and weights integrating over the unit sphere in R^d.

    d=1: the two points +-1.  d=2: trapezoid rule in the angle (``2*order``
    nodes).  d=3: Gauss-Legendre in cos(polar) times trapezoid in azimuth.
    Weights sum to the sphere area.
    """
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        m = 2 * order
        phi = 2 * np.pi * (np.arange(m) + 0.5) / m
        return np.c_[np.cos(phi), np.sin(phi)], np.full(m, 2 * np.pi / m)
    if d == 3:
        c, wc = gauss_legendre(order)
        m = 2 * order
        phi = 2 * np.pi * (np.arange(m) + 0.5) / m
        C, P = np.meshgrid(c, phi, indexing="ij")
        S = np.sqrt(1 - C**2)
        dirs = np.stack([S * np.cos(P), S * np.sin(P), C], axis=-1).reshape(-1, 3)
        w = (wc[:, None] * np.full(m, 2 * np.pi / m)[None, :]).ravel()
        return dirs, w
    raise NotImplementedError("direction rules are provided for d <= 3 only")


def refine_axes(
    evaluate: Callable[[tuple[int, ...]], tuple[float, int]],
    n_axes: int,
    rel_tol: float,
    max_depth: int,
    abs_tol: float = 0.0,
) -> tuple[float, float, tuple[int, ...], int, bool]:
    """Per-axis refinement driven by level-bump differences.

    ``evaluate(levels)`` returns ``(value, n_evaluations)``.  Each round
    evaluates the current levels and every single-axis bump; the summed
    absolute differences serve as the error estimate of the current value.
    Axes whose bump moved the value by more than their share of the
    tolerance are refined.

    Returns ``(value, error, levels, evaluations, converged)``.
    """
    cache: dict[tuple[int, ...], tuple[float, int]] = {}

    def ev(levels):
        if levels not in cache:
            cache[levels] = evaluate(levels)
        return cache[levels][0]

    levels = (0,) * n_axes
    value = err = math.nan
    converged = False
    for depth in range(max_depth + 1):
        value = ev(levels)
        diffs = []
        for a in range(n_axes):
            bumped = tuple(l + (i == a) for i, l in enumerate(levels))
            diffs.append(abs(ev(bumped) - value))
        err = sum(diffs)
        tol = max(rel_tol * abs(value), abs_tol)
        if err <= tol:
            converged = True
            break
        if depth == max_depth:
            break
        worst = int(np.argmax(diffs))
        levels = tuple(
            l + (d > tol / n_axes or i == worst) for i, (l, d) in enumerate(zip(levels, diffs))
        )
    evaluations = sum(n for _, n in cache.values())
    return value, err, levels, evaluations, converged
