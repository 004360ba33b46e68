"""Built-in integrands F(z) with decay certificates.

All built-in families are radial, ``F(z) = f(|z|^2)``; integrators use the
profile ``f`` for a fast path but can be forced through the generic
pointwise path by ``dataclasses.replace(F, radial=False)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .geometry import PhasePoint

Kind = Literal["gaussian", "polydecay", "bump"]
Mode = Literal["theorem", "relaxed"]

_BUMP_DECAY_N = 20.0


def smoothstep_window(u):
    """C^2 window on [0, 1]: mirrored quintic smoothstep, peak 1 at u = 1/2.

    Vanishes with its first two derivatives at both ends.
    """
    u = np.asarray(u, dtype=float)
    t = np.clip(2 * np.minimum(u, 1 - u), 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t * t)


@dataclass(frozen=True)
class TestFunction:
    """A test integrand with its declared decay ``|d^a F| <= C' <z>^(-N-|a|)``."""

    __test__ = False  # not a pytest class

    kind: Kind
    decay_N: float
    decay_Cprime: float = 1.0
    radial: bool = True
    N: float | None = None
    R1: float | None = None
    R2: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.kind == "polydecay" and not (self.N and self.N > 0):
            raise ValueError("polydecay needs a positive exponent N")
        if self.kind == "bump" and not (self.R1 is not None and self.R2 is not None and 0 < self.R1 < self.R2):
            raise ValueError("bump needs 0 < R1 < R2")
        if self.kind not in ("gaussian", "polydecay", "bump"):
            raise ValueError(f"unknown test function kind {self.kind!r}")

    def profile(self, q):
        """f(q) with F(z) = f(|z|^2)."""
        q = np.asarray(q, dtype=float) / self.scale**2
        if self.kind == "gaussian":
            return np.exp(-q)
        if self.kind == "polydecay":
            return (1.0 + q) ** (-0.5 * self.N)
        r = np.sqrt(q)
        return smoothstep_window((r - self.R1) / (self.R2 - self.R1))

    def __call__(self, z) -> np.ndarray:
        """Evaluate on an array of shape (..., 2d) or a :class:`PhasePoint`."""
        if isinstance(z, PhasePoint):
            z = z.z
        z = np.asarray(z, dtype=float)
        return self.profile(np.sum(z * z, axis=-1))

    def scaled(self, a: float) -> "TestFunction":
        """The dilated function z -> F(z / a)."""
        return replace(self, scale=self.scale * a)

    @property
    def spec_string(self) -> str:
        if self.scale != 1.0:
            raise ValueError("dilated test functions have no CLI name")
        if self.kind == "gaussian":
            return "gaussian"
        if self.kind == "polydecay":
            return f"polydecay:{self.N:g}"
        return f"bump:{self.R1:g}:{self.R2:g}"

    @property
    def is_even(self) -> bool:
        return True

    def support_radius(self) -> float | None:
        return self.scale * self.R2 if self.kind == "bump" else None

    def inner_radius(self) -> float:
        """Radius below which F vanishes identically (0 if none)."""
        return self.scale * self.R1 if self.kind == "bump" else 0.0

    def check_mode(self, d: int, mode: Mode = "theorem") -> None:
        """Reject a declared decay too weak for the requested mode."""
        need = 2 * d - 2 if mode == "theorem" else 2 * d - 4
        if not self.decay_N > need:
            raise ValueError(f"{mode} mode in d={d} needs N > {need}, got {self.decay_N:g}")

    def truncation_radius(self, d: int, tail: float) -> float:
        """Radius beyond which the surface-weighted mass of |F| is below ``tail``.

        Uses the tail of the cone integral, ``int_R^inf t^(2d-3) |f(t^2)| dt``,
        bounded through the declared decay for the algebraic family.
        """
        tail = min(max(tail, 1e-300), 0.5)
        if self.kind == "bump":
            return self.scale * float(self.R2)
        if self.kind == "gaussian":
            return self.scale * (math.sqrt(math.log(1.0 / tail)) + 1.5)
        excess = self.N - (2 * d - 2)
        if excess <= 0:
            raise ValueError("surface integral diverges for this decay; no finite truncation")
        return self.scale * max(4.0, (tail * excess / max(self.decay_Cprime, 1e-300)) ** (-1.0 / excess))


def gaussian(decay_N: float = 20.0) -> TestFunction:
    """exp(-|z|^2)."""
    return TestFunction("gaussian", decay_N=decay_N)


def polydecay(N: float, declared_N: float | None = None) -> TestFunction:
    """(1 + |z|^2)^(-N/2).  ``declared_N`` overrides the advertised decay."""
    return TestFunction("polydecay", decay_N=float(N if declared_N is None else declared_N), N=float(N))


def bump(R1: float, R2: float) -> TestFunction:
    """Radial C^2 window supported in R1 <= |z| <= R2."""
    return TestFunction("bump", decay_N=_BUMP_DECAY_N, R1=float(R1), R2=float(R2))


def parse_function(text: str) -> TestFunction:
    """Parse ``gaussian``, ``polydecay:N`` or ``bump:R1:R2``."""
    parts = text.strip().split(":")
    try:
        if parts[0] == "gaussian" and len(parts) == 1:
            return gaussian()
        if parts[0] == "polydecay" and len(parts) == 2:
            return polydecay(float(parts[1]))
        if parts[0] == "bump" and len(parts) == 3:
            return bump(float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ValueError(f"bad function spec {text!r}: {exc}") from None
    raise ValueError(f"bad function spec {text!r}; expected gaussian | polydecay:N | bump:R1:R2")


def evaluate(F: TestFunction, z) -> np.ndarray:
    return F(z)


def _derivatives(F: TestFunction, z: np.ndarray) -> list[tuple[int, np.ndarray]]:
    """Central-difference estimates of all partials of order <= 2 at points z."""
    n, m = z.shape
    h = 1e-4 * (1.0 + np.linalg.norm(z, axis=1))
    out = [(0, F(z))]
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        zp, zm = z + h[:, None] * e, z - h[:, None] * e
        out.append((1, (F(zp) - F(zm)) / (2 * h)))
        out.append((2, (F(zp) - 2 * F(z) + F(zm)) / h**2))
    for i, j in itertools.combinations(range(m), 2):
        ei = np.zeros(m)
        ej = np.zeros(m)
        ei[i] = 1.0
        ej[j] = 1.0
        H = h[:, None]
        f_pp = F(z + H * (ei + ej))
        f_pm = F(z + H * (ei - ej))
        f_mp = F(z - H * (ei - ej))
        f_mm = F(z - H * (ei + ej))
        out.append((2, (f_pp - f_pm - f_mp + f_mm) / (4 * h**2)))
    return out


def decay_certificate(
    F: TestFunction, d: int, samples: int = 2000, max_radius: float = 1e3, seed: int = 0
) -> tuple[float, bool]:
    """Empirical check of ``|d^a F(z)| <= C' <z>^(-N-|a|)`` for ``|a| <= 2``.

    Points are drawn with log-uniform radii up to ``max_radius`` and uniform
    directions.  Returns ``(C'_hat, passed)`` where ``C'_hat`` is the smallest
    constant consistent with the sample.  The check fails when ``C'_hat`` is
    not finite or when the required constant is still growing at the
    outermost radii (the declared ``N`` is then too strong).
    """
    rng = np.random.default_rng(seed)
    m = 2 * d
    radii = np.exp(rng.uniform(np.log(1e-3), np.log(max_radius), samples))
    dirs = rng.standard_normal((samples, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    z = radii[:, None] * dirs
    bracket = np.sqrt(1.0 + radii**2)
    need = np.zeros(samples)
    for order, vals in _derivatives(F, z):
        need = np.maximum(need, np.abs(vals) * bracket ** (F.decay_N + order))
    c_hat = float(need.max())
    outer = radii >= max_radius / 10
    inner_sup = float(need[~outer].max()) if np.any(~outer) else 0.0
    outer_sup = float(need[outer].max()) if np.any(outer) else 0.0
    passed = math.isfinite(c_hat) and outer_sup <= 2.0 * inner_sup
    return c_hat, passed
