"""Cone integral S(F) = int_{Sigma*} F |z|^-1 dSigma and the leading term J_0.

Two independent routes:

* :func:`surface_fibered` disintegrates the measure along (x, y) -> x as
  ``|x|^-1 dx dy_perp`` (y_perp ranging over the hyperplane orthogonal to x),
  valid for every d >= 2.  Polar coordinates in x leave the integrable weight
  ``r^(d-2)``.
* :func:`surface_chart_d2` integrates the flat measure ``dr dl dphi`` of the
  d = 2 chart.

The two use unrelated node sets so that their agreement is a meaningful check.
"""

from __future__ import annotations

import math

import numpy as np

from ._rules import (
    ConvergenceError,
    IntegralEstimate,
    QuadratureSpec,
    graded_edges,
    panel_rule,
    refine_axes,
    sphere_rule,
    subdivide,
    unit_sphere_area,
)
from .functions import TestFunction
from .geometry import householder_complement

DEFAULT_SPEC = QuadratureSpec()

_CHART_SPLIT = 8.0
_CHART_CHUNK = 1 << 18


def _mirror(nodes, weights):
    return np.concatenate([-nodes[::-1], nodes]), np.concatenate([weights[::-1], weights])


def _check(est: IntegralEstimate, converged: bool, spec: QuadratureSpec) -> IntegralEstimate:
    if not converged:
        raise ConvergenceError(
            f"{est.method}: error estimate {est.abs_error_estimate:.3g} above rel_tol "
            f"{spec.rel_tol:g} after {spec.max_depth} refinements",
            est,
        )
    return est


def surface_fibered(F: TestFunction, d: int, spec: QuadratureSpec = DEFAULT_SPEC) -> IntegralEstimate:
    """S(F) through the fibration over x.

    Radial ``F`` uses exact sphere areas for both the direction of x and the
    direction of y_perp; otherwise a direction rule on the x-sphere and a
    tensor rule on y_perp (coordinates in the Householder basis of x-perp).
    """
    if d < 2:
        raise ValueError("surface_fibered needs d >= 2; use example_1d for the planar case")
    R = F.truncation_radius(d, 0.1 * spec.rel_tol)
    r_edges = graded_edges(R, 0.25)
    p_edges = graded_edges(R, 0.25 if F.radial else 0.5)
    n = spec.outer_nodes

    if F.radial:
        area = unit_sphere_area(d) * unit_sphere_area(d - 1)

        def evaluate(levels):
            r, wr = panel_rule(subdivide(r_edges, levels[0]), n)
            p, wp = panel_rule(subdivide(p_edges, levels[1]), n)
            vals = F.profile(r[:, None] ** 2 + p[None, :] ** 2)
            inner = vals @ (wp * p ** (d - 2))
            return area * float(np.dot(wr * r ** (d - 2), inner)), vals.size

        n_axes = 2
    else:
        dirs, wdir = sphere_rule(d, spec.sphere_order)
        bases = householder_complement(dirs)

        def evaluate(levels):
            r, wr = panel_rule(subdivide(r_edges, levels[0]), n)
            p, wp = _mirror(*panel_rule(subdivide(p_edges, levels[1]), n))
            grids = np.meshgrid(*([p] * (d - 1)), indexing="ij")
            W = np.stack([g.ravel() for g in grids], axis=-1)
            ww = np.ones(len(W))
            for k in range(d - 1):
                ww = ww * np.meshgrid(*([wp] * (d - 1)), indexing="ij")[k].ravel()
            total = 0.0
            for u, wu, B in zip(dirs, wdir, bases):
                Y = W @ B.T
                X = r[:, None] * u[None, :]
                z = np.concatenate(
                    [np.broadcast_to(X[:, None, :], (len(r), len(W), d)),
                     np.broadcast_to(Y[None, :, :], (len(r), len(W), d))],
                    axis=-1,
                )
                total += wu * float(np.dot(wr * r ** (d - 2), F(z) @ ww))
            return total, len(dirs) * len(r) * len(W)

        n_axes = 2

    value, err, levels, evals, ok = refine_axes(evaluate, n_axes, spec.rel_tol, spec.max_depth)
    est = IntegralEstimate(
        value,
        err,
        evals,
        "fibered" if F.radial else "fibered-tensor",
        {"levels": levels, "truncation_radius": R},
    )
    return _check(est, ok, spec)


def _chart_axis(level: int, n: int, power: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on (0, inf): uniform panels on [0, 8], then t = 8 u^-power on (0, 1]."""
    a, wa = panel_rule(subdivide(np.linspace(0.0, _CHART_SPLIT, 17), level), n)
    u, wu = panel_rule(subdivide(np.linspace(0.0, 1.0, 5), level), n)
    b = _CHART_SPLIT * u**-power
    wb = wu * power * b / u
    return np.concatenate([a, b]), np.concatenate([wa, wb])


def surface_chart_d2(F: TestFunction, spec: QuadratureSpec = DEFAULT_SPEC, n_phi: int | None = None) -> IntegralEstimate:
    """S(F) for d = 2 over the chart (r, l, phi) with flat measure dr dl dphi.

    The half-plane r > 0 is swept in polar form r = t cos a, l = t sin a,
    The tail map of t is stretched for slow algebraic decay so that the
    mapped integrand vanishes at least linearly at infinity.
    """
    n = spec.outer_nodes
    power = max(1.0, 2.0 / (F.N - 2.0)) if F.kind == "polydecay" else 1.0
    m = n_phi if n_phi is not None else 2 * spec.sphere_order
    phi = 2 * np.pi * (np.arange(m) + 0.5) / m
    c, s = np.cos(phi), np.sin(phi)

    def evaluate(levels):
        t, wt = _chart_axis(levels[0], n, power)
        a, wa = panel_rule(subdivide(np.linspace(-0.5 * np.pi, 0.5 * np.pi, 5), levels[1]), n)
        wt = wt * t
        step = max(1, _CHART_CHUNK // a.size)
        per_phi = np.zeros(m)
        for k in range(m):
            for i in range(0, t.size, step):
                T = t[i : i + step, None]
                r, l = T * np.cos(a), T * np.sin(a)
                z = np.stack((r * c[k], r * s[k], -l * s[k], l * c[k]), axis=-1)
                per_phi[k] += wt[i : i + step] @ F(z) @ wa
        return 2 * np.pi * float(np.mean(per_phi)), m * t.size * a.size

    value, err, levels, evals, ok = refine_axes(evaluate, 2, spec.rel_tol, spec.max_depth)
    est = IntegralEstimate(value, err, evals, "chart-d2", {"levels": levels, "n_phi": m})
    return _check(est, ok, spec)


def surface_integral(F: TestFunction, d: int, spec: QuadratureSpec = DEFAULT_SPEC) -> IntegralEstimate:
    """S(F): fibered for d >= 3, cross-validated mean of both routes for d = 2."""
    if d != 2:
        return surface_fibered(F, d, spec)
    a = surface_fibered(F, 2, spec)
    b = surface_chart_d2(F, spec)
    value = 0.5 * (a.value + b.value)
    err = max(a.abs_error_estimate, b.abs_error_estimate) + 0.5 * abs(a.value - b.value)
    return IntegralEstimate(
        value,
        err,
        a.evaluations + b.evaluations,
        "fibered+chart",
        {"fibered": a.value, "chart": b.value},
    )


def j0(F: TestFunction, d: int, nu: float, lam: float, spec: QuadratureSpec = DEFAULT_SPEC) -> IntegralEstimate:
    """Leading coefficient J_0 = pi exp(-nu lambda) S(F)."""
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    S = surface_integral(F, d, spec)
    k = math.pi * math.exp(-nu * lam)
    return IntegralEstimate(k * S.value, k * S.abs_error_estimate, S.evaluations, "j0/" + S.method, {"S": S.value})
