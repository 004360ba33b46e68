"""Geometry of the cone ``{x . y = 0}`` in R^d x R^d and its neighbourhood.

Points are :class:`PhasePoint` objects holding ``x`` and ``y`` arrays of
shape ``(..., d)``, so every operation works on single points and on
batches alike.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_THETA0 = 0.5
ON_QUADRIC_ATOL = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    """A point (or batch of points) z = (x, y) in R^d x R^d."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim == 0 or x.shape != y.shape:
            raise ValueError("x and y must be vectors of equal length")
        if x.shape[-1] < 1:
            raise ValueError("dimension d must be at least 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_array(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        d = z.shape[-1] // 2
        if z.shape[-1] != 2 * d:
            raise ValueError("z must have an even number of coordinates")
        return cls(z[..., :d], z[..., d:])

    @property
    def d(self) -> int:
        return self.x.shape[-1]

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y], axis=-1)

    @property
    def norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.x**2, axis=-1) + np.sum(self.y**2, axis=-1))

    def scaled(self, t: float) -> "PhasePoint":
        """The dilation z -> t z."""
        return PhasePoint(t * self.x, t * self.y)


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Half-width of the tubular neighbourhood, in normal-offset units."""

    theta0: float = DEFAULT_THETA0

    def __post_init__(self):
        if not 0 < self.theta0 <= 1:
            raise ValueError("theta0 must lie in (0, 1]")


@dataclass(frozen=True)
class TubularCoords:
    """Foot point ``xi`` on the regular cone plus a normal offset ``theta``."""

    xi: PhasePoint
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if np.any(np.abs(theta) >= 1):
            raise ValueError("|theta| must be < 1")
        if np.any(np.abs(omega(self.xi)) > ON_QUADRIC_ATOL * np.maximum(1.0, self.xi.norm**2)):
            raise ValueError("foot point is not on the quadric")
        if np.any(self.xi.norm == 0):
            raise ValueError("foot point must not be the vertex")
        object.__setattr__(self, "theta", theta)


class OutsideNeighborhood:
    """Returned by :func:`tubular_invert` for points outside the neighbourhood."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OUTSIDE"

    def __bool__(self):
        return False


OUTSIDE = OutsideNeighborhood()


@dataclass(frozen=True)
class FiberSplit:
    """Decomposition of y along x and its orthogonal complement."""

    r: np.ndarray
    xhat: np.ndarray
    s: np.ndarray
    yperp: np.ndarray
    basis: np.ndarray  # (..., d, d-1), orthonormal columns spanning x-perp

    def reconstruct_y(self) -> np.ndarray:
        return self.s[..., None] * self.xhat + np.einsum("...ij,...j->...i", self.basis, self.yperp)


def omega(z: PhasePoint) -> np.ndarray:
    """The quadratic form x . y."""
    return np.sum(z.x * z.y, axis=-1)


def normal(xi: PhasePoint) -> PhasePoint:
    """N(xi) = (y, x); normal to the cone at ``xi`` with |N| = |xi|."""
    if np.any(xi.norm == 0):
        raise ValueError("the normal is undefined at the vertex of the cone")
    return PhasePoint(xi.y, xi.x)


def tubular_map(tc: TubularCoords) -> PhasePoint:
    """xi + theta N(xi)."""
    t = tc.theta[..., None]
    return PhasePoint(tc.xi.x + t * tc.xi.y, tc.xi.y + t * tc.xi.x)


def tubular_invert_many(x: np.ndarray, y: np.ndarray, theta0: float = DEFAULT_THETA0):
    """Vectorised inverse of the tubular map.

    Returns ``(xi_x, xi_y, theta, inside)``.  Entries with ``inside`` false
    (offset at or beyond ``theta0`` or no real root) carry NaN.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n2 = np.sum(x**2, axis=-1) + np.sum(y**2, axis=-1)
    w = np.sum(x * y, axis=-1)
    disc = n2**2 - 4 * w**2
    with np.errstate(invalid="ignore", divide="ignore"):
        # small root of t^2 - t n2/w + 1 = 0 in cancellation-free form
        theta = 2 * w / (n2 + np.sqrt(disc))
        inside = (disc >= 0) & (np.abs(theta) < theta0) & (n2 > 0)
        theta = np.where(inside, theta, np.nan)
        c = 1.0 / (1.0 - theta**2)
        t = theta[..., None]
        xi_x = (x - t * y) * c[..., None]
        xi_y = (y - t * x) * c[..., None]
    return xi_x, xi_y, theta, inside


def tubular_invert(z: PhasePoint, nbh: NeighborhoodSpec = NeighborhoodSpec()):
    """Foot point and offset of a single point, or ``OUTSIDE``."""
    if z.x.ndim != 1:
        raise ValueError("tubular_invert takes a single point; use tubular_invert_many")
    if z.norm == 0:
        raise ValueError("the vertex has no tubular coordinates")
    if omega(z) == 0:
        return TubularCoords(z, np.float64(0.0))
    xi_x, xi_y, theta, inside = tubular_invert_many(z.x, z.y, nbh.theta0)
    if not inside:
        return OUTSIDE
    return TubularCoords(PhasePoint(xi_x, xi_y), theta)


def tubular_jacobian(xi_norm, theta, d: int):
    """Volume factor of (xi, theta) -> xi + theta N(xi).

    dz = |xi| (1 - theta^2)^(d-1) d_Sigma(xi) dtheta.
    """
    return np.asarray(xi_norm) * (1.0 - np.asarray(theta) ** 2) ** (d - 1)


def sample_sphere(rng: np.random.Generator, dim: int, n: int) -> np.ndarray:
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def far_field_bound_check(
    R: float,
    nbh: NeighborhoodSpec = NeighborhoodSpec(),
    samples: int = 10_000,
    d: int = 2,
    seed: int = 0,
) -> float:
    """Minimum of |x . y| / R^2 over sampled points of the sphere |z| = R
    lying outside the tubular neighbourhood.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    rng = np.random.default_rng(seed)
    z = R * sample_sphere(rng, 2 * d, samples)
    x, y = z[:, :d], z[:, d:]
    inside = tubular_invert_many(x, y, nbh.theta0)[3]
    w = np.abs(np.sum(x * y, axis=1))[~inside]
    if w.size == 0:
        return float("nan")
    return float(w.min() / R**2)


def chart_d2(r, l, phi) -> PhasePoint:
    """Coordinates (r, l, phi) on the d=2 cone: x = r e(phi), y = l e(phi + pi/2)."""
    r, l, phi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, l, phi)))
    if np.any(r <= 0):
        raise ValueError("chart_d2 requires r > 0")
    c, s = np.cos(phi), np.sin(phi)
    return PhasePoint(np.stack([r * c, r * s], -1), np.stack([-l * s, l * c], -1))


def chart_d2_volume_weight(r, l):
    """Surface volume density sqrt(r^2 + l^2) of :func:`chart_d2`."""
    return np.hypot(r, l)


def mu_d2(r: float, l: float, phi: float, theta: float, h: float = 1e-6) -> float:
    """Finite-difference Jacobian factor of the extended d=2 chart.

    With Psi(r, l, phi, theta) = tubular_map(chart_d2(r, l, phi), theta) this
    returns |det DPsi| / (r^2 + l^2), the density relative to
    t^3 m(deta) dt dtheta.  Equals 1 on the cone.  Diagnostic only.
    """

    def psi(p):
        xi = chart_d2(p[0], p[1], p[2])
        return tubular_map(TubularCoords(xi, np.float64(p[3]))).z

    p0 = np.array([r, l, phi, theta], dtype=float)
    jac = np.empty((4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        jac[:, k] = (psi(p0 + e) - psi(p0 - e)) / (2 * h)
    return abs(np.linalg.det(jac)) / (r * r + l * l)


def householder_complement(xhat: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of unit vectors ``xhat``.

    Uses the reflection H = I - 2 v v^T / v.v with v = xhat + sgn(xhat_1) e_1,
    sgn(0) = +1, which maps xhat to -sgn(xhat_1) e_1; the remaining d-1
    columns of H span the complement.  The basis is continuous away from the
    hyperplane xhat_1 = 0.
    """
    xhat = np.asarray(xhat, dtype=float)
    d = xhat.shape[-1]
    sgn = np.where(xhat[..., 0] >= 0, 1.0, -1.0)
    v = xhat.copy()
    v[..., 0] += sgn
    vv = np.sum(v * v, axis=-1)
    H = np.eye(d) - 2.0 * v[..., :, None] * v[..., None, :] / vv[..., None, None]
    return H[..., :, 1:]


def fiber_split(z: PhasePoint) -> FiberSplit:
    """Split y into its component along x and coordinates in x-perp."""
    r = np.linalg.norm(z.x, axis=-1)
    if np.any(r == 0):
        raise ValueError("x = 0 is the singular fiber of the projection (x, y) -> x")
    xhat = z.x / r[..., None]
    s = np.sum(z.y * xhat, axis=-1)
    basis = householder_complement(xhat)
    yperp = np.einsum("...ij,...i->...j", basis, z.y)
    return FiberSplit(r, xhat, s, yperp, basis)


def sample_cone(rng: np.random.Generator, d: int, n: int, log_radius: tuple[float, float] = (-3.0, 3.0)) -> PhasePoint:
    """Random regular points of the cone with log-uniform |x| and |y|."""
    if d < 2:
        raise ValueError("sample_cone needs d >= 2")
    x = sample_sphere(rng, d, n)
    y = rng.standard_normal((n, d))
    y -= np.sum(y * x, axis=1, keepdims=True) * x
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    rx = 10.0 ** rng.uniform(*log_radius, n)
    ry = 10.0 ** rng.uniform(*log_radius, n)
    return PhasePoint(rx[:, None] * x, ry[:, None] * y)


def invariant_suite(
    samples: int = 10_000, seed: int = 0, d: int = 2, theta0: float = DEFAULT_THETA0, tol: float = 1e-10
) -> dict[str, tuple[float, float]]:
    """Check the tubular-map identities on random instances.

    Returns ``{name: (max relative deviation, tolerance)}`` for: the form
    identity omega(xi + theta N) = |xi|^2 theta, the norm identity
    |xi + theta N|^2 = |xi|^2 (1 + theta^2), round-trip inversion, dilation
    equivariance, the fiber split and the far-field lower bound.
    """
    rng = np.random.default_rng(seed)
    xi = sample_cone(rng, d, samples)
    theta = rng.uniform(-0.99 * theta0, 0.99 * theta0, samples)
    z = tubular_map(TubularCoords(xi, theta))
    n2 = xi.norm**2
    out = {}
    out["omega_identity"] = float(np.max(np.abs(omega(z) - n2 * theta) / n2))
    out["norm_identity"] = float(np.max(np.abs(z.norm**2 - n2 * (1 + theta**2)) / n2))

    ix, iy, it, inside = tubular_invert_many(z.x, z.y, theta0)
    foot = np.sqrt(np.sum((ix - xi.x) ** 2, axis=1) + np.sum((iy - xi.y) ** 2, axis=1)) / xi.norm
    out["round_trip"] = float(np.max(np.where(inside, np.maximum(foot, np.abs(it - theta)), np.inf)))

    t = 10.0 ** rng.uniform(-2, 2, samples)
    dx, dy, dt, dinside = tubular_invert_many(t[:, None] * z.x, t[:, None] * z.y, theta0)
    scaled = np.sqrt(np.sum((dx - t[:, None] * ix) ** 2, axis=1) + np.sum((dy - t[:, None] * iy) ** 2, axis=1))
    dil = np.maximum(scaled / (t * xi.norm), np.abs(dt - it))
    out["dilation"] = float(np.max(np.where(dinside, dil, np.inf)))

    w = PhasePoint(z.x + 1e-3 * rng.standard_normal(z.x.shape), z.y)
    fs = fiber_split(w)
    out["fiber_split"] = float(np.max(np.linalg.norm(fs.reconstruct_y() - w.y, axis=1) / np.maximum(np.linalg.norm(w.y, axis=1), 1e-300)))

    u = sample_sphere(rng, 2 * d, samples)
    far = ~tubular_invert_many(u[:, :d], u[:, d:], theta0)[3]
    c = theta0 / (1 + theta0**2)
    ratio = np.abs(np.sum(u[:, :d] * u[:, d:], axis=1))[far]
    out["far_field_bound"] = float(max(0.0, c - ratio.min())) if ratio.size else 0.0
    return {k: (v, tol) for k, v in out.items()}
