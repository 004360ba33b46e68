"""The singular oscillatory integral J_nu and its relatives.

J_nu = int F(z) cos(lambda x.y) / ((x.y)^2 + nu^2) dz over R^d x R^d.

Deterministic route: polar coordinates in x, the hyperplane x-perp for the
orthogonal part of y, and the component s of y along x last.  On the fiber
x.y = r s, and in the layer |s| < nu/r the substitution s = (nu/r) tan u
turns ds / ((r s)^2 + nu^2) into du / (nu r), so the nu-thin layer costs the
same for every nu.  Outside the layer panels grow geometrically and are cut
so the phase lambda r s moves less than pi/4 per panel.

Monte Carlo route: :func:`jnu_mc`, stratified into the tubular neighbourhood
of the cone (sampled in foot-point / normal-offset coordinates with a
Cauchy proposal in the offset) and its complement.
"""

from __future__ import annotations

import math
from typing import Callable, Literal

import numpy as np
from scipy import stats
from scipy.special import gammaln

from ._rules import (
    ConvergenceError,
    IntegralEstimate,
    QuadratureSpec,
    exact_sum,
    graded_edges,
    ordered_map,
    panel_rule,
    phase_split,
    refine_axes,
    sphere_rule,
    subdivide,
    unit_sphere_area,
)
from .functions import TestFunction
from .geometry import (
    DEFAULT_THETA0,
    householder_complement,
    sample_sphere,
    tubular_invert_many,
)

DEFAULT_SPEC = QuadratureSpec()
MAX_FIBER_NODES = 4_000_000
MC_BLOCK = 1 << 16
_CHUNK = 1 << 20

Kernel = Literal["cos", "sin2"]


def _kernel(kind: Kernel, lam: float) -> Callable[[np.ndarray], np.ndarray]:
    if kind == "cos":
        return lambda w: np.cos(lam * w)
    if kind == "sin2":
        return lambda w: np.sin(0.5 * lam * w) ** 2
    raise ValueError(f"unknown kernel {kind!r}")


def _validate(d: int, nu: float, lam: float) -> None:
    if d < 2:
        raise ValueError("J_nu needs d >= 2; use example_1d for the planar example")
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    if lam < 0:
        raise ValueError("lambda must be non-negative")


def fiber_rule(r: float, nu: float, rate: float, upper: float, n: int, level: int = 0):
    """Nodes and weights on (0, upper] for the weight 1 / ((r s)^2 + nu^2).

    ``sum(w * g(s))`` approximates ``int_0^upper g(s) / ((r s)^2 + nu^2) ds``
    for smooth g whose oscillation rate in s is at most ``rate``.
    """
    s_core = min(nu / r, upper)
    core = subdivide(phase_split(np.array([0.0, s_core]), rate), level)
    u, wu = panel_rule(np.arctan(r * core / nu), n)
    s = (nu / r) * np.tan(u)
    w = wu / (nu * r)
    if s_core < upper:
        k = int(math.ceil(math.log2(upper / s_core)))
        edges = np.minimum(s_core * 2.0 ** np.arange(k + 1), upper)
        edges = subdivide(phase_split(np.unique(edges), rate), level)
        so, wo = panel_rule(edges, n)
        s = np.concatenate([s, so])
        w = np.concatenate([w, wo / ((r * so) ** 2 + nu**2)])
    return s, w


def _radial_fiber_sum(F, d, r, nu, lam, kern, R, n, lv_s, lv_p):
    """int_0^S ds K(r s)/((rs)^2+nu^2) int_0^P drho rho^(d-2) f(r^2+s^2+rho^2)."""
    S = math.sqrt(max(R * R - r * r, 0.0))
    if S == 0.0:
        return 0.0, 0
    s, ws = fiber_rule(r, nu, abs(lam) * r, S, n, lv_s)
    if s.size > MAX_FIBER_NODES:
        raise ValueError("oscillation too fast for deterministic quadrature at this truncation")
    p, wp = panel_rule(subdivide(graded_edges(S, 0.25), lv_p), n)
    wp = wp * p ** (d - 2)
    p2 = p * p
    c = r * r + s * s
    step = max(1, _CHUNK // p.size)
    G = np.concatenate([F.profile(c[i : i + step, None] + p2[None, :]) @ wp for i in range(0, c.size, step)])
    return float(np.dot(ws * kern(r * s), G)), s.size * p.size


def _jnu_radial(F, d, nu, lam, kern, spec, workers):
    R = F.truncation_radius(d, 0.1 * spec.rel_tol)
    r_edges = graded_edges(R, nu / 8)
    area = 2.0 * unit_sphere_area(d) * unit_sphere_area(d - 1)
    n = spec.outer_nodes

    def evaluate(levels):
        r, wr = panel_rule(subdivide(r_edges, levels[0]), n)
        parts = ordered_map(
            lambda rk: _radial_fiber_sum(F, d, rk, nu, lam, kern, R, n, levels[2], levels[1]),
            list(r),
            workers,
        )
        vals = np.array([v for v, _ in parts])
        return area * exact_sum(wr * r ** (d - 1) * vals), sum(c for _, c in parts)

    return R, refine_axes(evaluate, 3, spec.rel_tol, spec.max_depth)


def _jnu_generic(F, d, nu, lam, kern, spec, workers):
    R = F.truncation_radius(d, 0.1 * spec.rel_tol)
    r_edges = graded_edges(R, nu / 8)
    p_edges = graded_edges(R, 0.5)
    dirs, wdir = sphere_rule(d, spec.sphere_order)
    bases = householder_complement(dirs)
    n = spec.outer_nodes

    def fiber(args):
        rk, lv_s, W, ww = args
        s, ws = fiber_rule(rk, nu, abs(lam) * rk, R, n, lv_s)
        s = np.concatenate([-s[::-1], s])
        ws = np.concatenate([ws[::-1], ws])
        total = []
        for u, wu, B in zip(dirs, wdir, bases):
            x = np.broadcast_to(rk * u, (len(W), len(s), d))
            y = (W @ B.T)[:, None, :] + s[None, :, None] * u
            vals = F(np.concatenate([x, y], axis=-1))
            total.append(wu * (ww @ vals @ (ws * kern(rk * s))))
        return exact_sum(total), len(dirs) * len(W) * len(s)

    def evaluate(levels):
        r, wr = panel_rule(subdivide(r_edges, levels[0]), n)
        p, wp = panel_rule(subdivide(p_edges, levels[1]), n)
        p, wp = np.concatenate([-p[::-1], p]), np.concatenate([wp[::-1], wp])
        mesh = np.meshgrid(*([p] * (d - 1)), indexing="ij")
        W = np.stack([g.ravel() for g in mesh], axis=-1)
        ww = np.prod(np.stack(np.meshgrid(*([wp] * (d - 1)), indexing="ij")), axis=0).ravel()
        parts = ordered_map(fiber, [(rk, levels[2], W, ww) for rk in r], workers)
        vals = np.array([v for v, _ in parts])
        return exact_sum(wr * r ** (d - 1) * vals), sum(c for _, c in parts)

    return R, refine_axes(evaluate, 3, spec.rel_tol, spec.max_depth)


def _jnu_quadrature(F, d, nu, lam, kernel: Kernel, spec, workers, method):
    kern = _kernel(kernel, lam)
    path = _jnu_radial if F.radial else _jnu_generic
    R, (value, err, levels, evals, ok) = path(F, d, nu, lam, kern, spec, workers)
    est = IntegralEstimate(
        value,
        err,
        evals,
        method,
        {"levels": levels, "truncation_radius": R, "radial": F.radial, "refinement_depth": max(levels)},
    )
    if not ok:
        raise ConvergenceError(
            f"{method}: error estimate {err:.3g} above rel_tol {spec.rel_tol:g} "
            f"after {spec.max_depth} refinements",
            est,
        )
    return est


def jnu(
    F: TestFunction,
    d: int,
    nu: float,
    lam: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    workers: int | None = None,
) -> IntegralEstimate:
    """J_nu by fibered quadrature with the tan substitution across the layer."""
    _validate(d, nu, lam)
    return _jnu_quadrature(F, d, nu, lam, "cos", spec, workers, "quadrature")


def jnu_near(
    F: TestFunction,
    d: int,
    nu: float,
    lam: float,
    radius: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> IntegralEstimate:
    """J_nu restricted to the ball |z| <= ``radius`` (radial F only).

    Used to measure how the near-vertex region scales with nu.
    """
    _validate(d, nu, lam)
    if not F.radial:
        raise ValueError("jnu_near supports radial test functions only")
    if radius <= 0:
        raise ValueError("radius must be positive")
    kern = _kernel("cos", lam)
    n = spec.outer_nodes
    r_edges = graded_edges(radius, min(nu / 8, radius / 4))
    area = 2.0 * unit_sphere_area(d) * unit_sphere_area(d - 1)

    def fiber(rk, lv_s, lv_p):
        S = math.sqrt(max(radius * radius - rk * rk, 0.0))
        if S == 0.0:
            return 0.0
        s, ws = fiber_rule(rk, nu, abs(lam) * rk, S, n, lv_s)
        t, wt = panel_rule(subdivide(np.array([0.0, 0.5, 0.9, 1.0]), lv_p), n)
        P = np.sqrt(np.maximum(S * S - s * s, 0.0))
        q = (rk * rk + s * s)[:, None] + (P[:, None] * t[None, :]) ** 2
        G = P ** (d - 1) * (F.profile(q) @ (wt * t ** (d - 2)))
        return float(np.dot(ws * kern(rk * s), G))

    def evaluate(levels):
        r, wr = panel_rule(subdivide(r_edges, levels[0]), n)
        vals = np.array([fiber(rk, levels[2], levels[1]) for rk in r])
        return area * exact_sum(wr * r ** (d - 1) * vals), len(r)

    value, err, levels, evals, ok = refine_axes(evaluate, 3, spec.rel_tol, spec.max_depth)
    est = IntegralEstimate(value, err, evals, "quadrature-ball", {"levels": levels, "radius": radius})
    if not ok:
        raise ConvergenceError("jnu_near: refinement budget exhausted", est)
    return est


def _jnu_signed(F, d, nu, lam, spec=DEFAULT_SPEC, workers=None) -> IntegralEstimate:
    """Same as :func:`jnu` but accepting negative lambda (evenness checks)."""
    _validate(d, nu, abs(lam))
    return _jnu_quadrature(F, d, nu, lam, "cos", spec, workers, "quadrature")


def jnu_sin2(
    F: TestFunction,
    d: int,
    nu: float,
    lam: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    mode: Literal["identity", "direct"] = "identity",
    workers: int | None = None,
) -> IntegralEstimate:
    """int F sin^2(lambda x.y / 2) / ((x.y)^2 + nu^2) dz.

    ``identity`` returns (J(0) - J(lambda)) / 2; ``direct`` integrates the
    sin^2 kernel itself.
    """
    _validate(d, nu, lam)
    if mode == "direct":
        return _jnu_quadrature(F, d, nu, lam, "sin2", spec, workers, "sin2-direct")
    if mode != "identity":
        raise ValueError(f"unknown mode {mode!r}")
    a = jnu(F, d, nu, 0.0, spec, workers)
    b = jnu(F, d, nu, lam, spec, workers)
    return IntegralEstimate(
        0.5 * (a.value - b.value),
        0.5 * (a.abs_error_estimate + b.abs_error_estimate),
        a.evaluations + b.evaluations,
        "sin2-identity",
        {"jnu_0": a.value, "jnu_lambda": b.value},
    )


# --- planar example: z = (x, y) in R^2, quadric xy = 0 -----------------------------


def example_1d(
    F: TestFunction, nu: float, lam: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> tuple[IntegralEstimate, float]:
    """Both sides of the planar statement for a bump vanishing near 0.

    ``lhs`` is int_{R^2} F cos(lambda x y) / (x^2 y^2 + nu^2) dx dy;
    ``rhs`` is pi nu^-1 exp(-nu lambda) times the sum over the four half-axes
    of int_0^inf F(t e)/t dt.
    """
    if F.kind != "bump":
        raise ValueError("example_1d needs a bump function vanishing near the origin")
    if not 0 < nu <= 1 or lam < 0:
        raise ValueError("need 0 < nu <= 1 and lambda >= 0")
    R1, R2 = F.inner_radius(), F.support_radius()
    n = spec.outer_nodes
    kern = _kernel("cos", lam)
    x_edges = np.unique([R1 / math.sqrt(2), min(R1, R2 / math.sqrt(2)), max(R1, R2 / math.sqrt(2)), R2])
    x_edges = subdivide(x_edges, 3)

    def inner(x, level):
        top = min(x, math.sqrt(max(R2 * R2 - x * x, 0.0)))
        if top <= 0:
            return 0.0
        y, wy = fiber_rule(x, nu, lam * x, top, n, level)
        return float(np.dot(wy * kern(x * y), F(np.c_[np.full_like(y, x), y])))

    def evaluate(levels):
        x, wx = panel_rule(subdivide(x_edges, levels[0]), n)
        vals = np.array([inner(xk, levels[1]) for xk in x])
        # eight congruent triangles 0 <= y <= x
        return 8.0 * exact_sum(wx * vals), len(x)

    value, err, levels, evals, ok = refine_axes(evaluate, 2, spec.rel_tol, spec.max_depth)
    lhs = IntegralEstimate(value, err, evals, "example1d", {"levels": levels})
    if not ok:
        raise ConvergenceError("example1d: refinement budget exhausted", lhs)
    return lhs, example_1d_rhs(F, nu, lam)


def example_1d_rhs(F: TestFunction, nu: float, lam: float) -> float:
    """pi nu^-1 e^(-nu lambda) times the contour integral of F/|z| over xy = 0."""
    t, wt = panel_rule(np.linspace(F.inner_radius(), F.support_radius(), 65), 16)
    axes = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    contour = sum(float(np.dot(wt, F(np.outer(t, a)) / t)) for a in axes)
    return math.pi / nu * math.exp(-nu * lam) * contour


# --- Monte Carlo -------------------------------------------------------------------

_T_DF = 3.0


def _radial_tail(F, d):
    """BetaPrime shape b for |xi|^2: p_T ~ T^-(2b+1) must not decay faster
    than the cone-weighted integrand, ~ T^-(N-2d+3)."""
    if F.kind == "polydecay":
        return min(0.5 * _T_DF, 0.375 * (F.N - 2 * d + 2))
    return 0.5 * _T_DF


def _stratum_near(F, d, nu, kern, theta0, rng, n):
    """Unbiased weights for the integral over the tubular neighbourhood.

    Foot points xi = (x, y) on the cone are drawn as |xi| = T with
    T^2 ~ BetaPrime(d - 1, df/2), |x| = T cos(a), |y| = T sin(a) with
    sin^2(a) ~ Beta((d-1)/2, (d-1)/2), and uniform directions for x and for y
    inside x-perp.  The normal offset theta follows a Cauchy law of scale
    nu/|xi|^2 truncated to (-theta0, theta0).  With the cone measure
    d_Sigma = |xi|/|x| dx dy_perp and dz = |xi| (1-theta^2)^(d-1) d_Sigma
    dtheta, the weight depends on xi essentially through T only.
    """
    a, b = d - 1.0, _radial_tail(F, d)
    T = np.sqrt(rng.gamma(a, size=n) / rng.gamma(b, size=n))
    v = rng.beta(0.5 * (d - 1), 0.5 * (d - 1), n)
    r, p = T * np.sqrt(1.0 - v), T * np.sqrt(v)
    u = sample_sphere(rng, d, n)
    wdir = sample_sphere(rng, d - 1, n) if d > 2 else np.where(rng.random((n, 1)) < 0.5, -1.0, 1.0)
    x = r[:, None] * u
    y = np.einsum("nij,nj->ni", householder_complement(u), p[:, None] * wdir)
    xi2 = T * T
    eps = nu / xi2
    span = np.arctan(theta0 / eps)
    theta = eps * np.tan(rng.uniform(-1.0, 1.0, n) * span)
    t = theta[:, None]
    zx, zy = x + t * y, y + t * x
    # log p_T(T) for T^2 ~ BetaPrime(a, b)
    log_pT = (
        (a - 1) * np.log(xi2) - (a + b) * np.log1p(xi2) - (gammaln(a) + gammaln(b) - gammaln(a + b))
        + np.log(2.0 * T)
    )
    log_beta_alpha = gammaln(0.5 * (d - 1)) * 2 - gammaln(d - 1.0) - math.log(2.0)
    log_factor = (
        math.log(unit_sphere_area(d) * unit_sphere_area(d - 1)) + log_beta_alpha + (2 * d - 3) * np.log(T) - log_pT
    )
    F_val = F(np.concatenate([zx, zy], axis=1))
    return F_val * kern(xi2 * theta) * (1.0 - theta**2) ** (d - 1) * 2.0 * span / nu * np.exp(log_factor)


def _stratum_far(F, d, nu, kern, theta0, rng, n):
    """Unbiased weights for the integral over the complement of the neighbourhood."""
    m = 2 * d
    z = rng.standard_normal((n, m)) / np.sqrt(rng.chisquare(_T_DF, (n, 1)) / _T_DF)
    x, y = z[:, :d], z[:, d:]
    inside = tubular_invert_many(x, y, theta0)[3]
    om = np.sum(x * y, axis=1)
    log_q = stats.multivariate_t.logpdf(z, loc=np.zeros(m), shape=np.eye(m), df=_T_DF)
    vals = F(z) * kern(om) / (om * om + nu * nu) * np.exp(-log_q)
    return np.where(inside, 0.0, vals)


def _block_moments(args):
    sampler, F, d, nu, kern, theta0, seed_seq, n = args
    w = sampler(F, d, nu, kern, theta0, np.random.default_rng(seed_seq), n)
    return math.fsum(w), math.fsum(w * w), n


def jnu_mc(
    F: TestFunction,
    d: int,
    nu: float,
    lam: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    theta0: float = DEFAULT_THETA0,
    workers: int | None = None,
    near_fraction: float = 0.75,
) -> IntegralEstimate:
    """Stratified importance-sampling estimate of J_nu.

    Blocks of fixed size draw from independent streams spawned from
    ``spec.seed``; block moments are combined with exact summation, so the
    result is bit-identical for any number of workers.
    """
    _validate(d, nu, lam)
    kern = _kernel("cos", lam)
    n_near = max(2, int(round(near_fraction * spec.mc_samples)))
    n_far = max(2, spec.mc_samples - n_near)

    def sizes(total):
        full, rest = divmod(total, MC_BLOCK)
        return [MC_BLOCK] * full + ([rest] if rest else [])

    near_sizes, far_sizes = sizes(n_near), sizes(n_far)
    seeds = np.random.SeedSequence(spec.seed).spawn(len(near_sizes) + len(far_sizes))
    jobs = [(_stratum_near, F, d, nu, kern, theta0, s, m) for s, m in zip(seeds, near_sizes)]
    jobs += [(_stratum_far, F, d, nu, kern, theta0, s, m) for s, m in zip(seeds[len(near_sizes):], far_sizes)]
    moments = ordered_map(_block_moments, jobs, workers)

    strata = {}
    for name, part in (("near", moments[: len(near_sizes)]), ("far", moments[len(near_sizes):])):
        m = sum(c for _, _, c in part)
        mean = math.fsum(s for s, _, _ in part) / m
        second = math.fsum(q for _, q, _ in part) / m
        var = max(second - mean * mean, 0.0) * m / (m - 1)
        strata[name] = {"mean": mean, "variance": var, "samples": m, "stderr": math.sqrt(var / m)}
    value = strata["near"]["mean"] + strata["far"]["mean"]
    stderr = math.hypot(strata["near"]["stderr"], strata["far"]["stderr"])
    return IntegralEstimate(
        value,
        stderr,
        n_near + n_far,
        "mc",
        {"strata": strata, "seed": spec.seed, "theta0": theta0, "stderr": stderr},
    )
