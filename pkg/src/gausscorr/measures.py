"""Anisotropic plane measures with polar density r^(k+1) f(r) |cos(t-beta)|^k.

The angular weight has exact piecewise antiderivatives (cos-power reduction),
so angular masses of arcs and caps are closed-form; radial masses use the
regularized lower incomplete gamma for the Gaussian and adaptive quadrature
for custom radial densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import gammainc, gammaln

from . import _quad
from .geometry2d import ArcSet, Cone2D, SymmetricBody2D, angular_arcs

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """A density or measure specification that cannot be integrated."""


# ---------------------------------------------------------------------------
# Radial densities


@dataclass(frozen=True)
class RadialDensity:
    """Radial factor f(r) of the measure; gaussian or tabulated/callable."""

    kind: str
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    rmax: float = 12.0

    @staticmethod
    def gaussian(rmax: float = 12.0) -> "RadialDensity":
        return RadialDensity(kind="gaussian", rmax=rmax)

    @staticmethod
    def custom(fn: Callable[[np.ndarray], np.ndarray], rmax: float) -> "RadialDensity":
        if rmax <= 0.0:
            raise ConfigError("custom density must declare a positive rmax")
        return RadialDensity(kind="custom", fn=fn, rmax=rmax)

    def values(self, r: np.ndarray) -> np.ndarray:
        if self.kind == "gaussian":
            return np.exp(-0.5 * np.asarray(r, dtype=float) ** 2)
        return np.asarray(self.fn(np.asarray(r, dtype=float)), dtype=float)


def _lower_gamma(a: float, x: np.ndarray) -> np.ndarray:
    """Unnormalized lower incomplete gamma via the regularized routine."""
    return gammainc(a, x) * math.exp(gammaln(a))


def radial_mass(density: RadialDensity, k: int, X) -> float:
    """Integral of r^(k+1) f(r) dr from 0 to X (X may be +inf)."""
    return float(radial_mass_many(density, k, np.array([X], dtype=float))[0])


def radial_mass_many(density: RadialDensity, k: int, X: np.ndarray) -> np.ndarray:
    if k < 0:
        raise ValueError("exponent k must be non-negative")
    X = np.asarray(X, dtype=float)
    if np.any(X < 0.0):
        raise ValueError("upper limit must be non-negative")
    if density.kind == "gaussian":
        m = k + 2
        a = 0.5 * m
        with np.errstate(over="ignore"):
            arg = np.where(np.isinf(X), np.inf, 0.5 * X * X)
        return 2.0 ** (a - 1.0) * _lower_gamma(a, arg)
    out = np.empty(X.shape)
    for i, x in np.ndenumerate(X):
        hi = min(x, density.rmax)
        if hi <= 0.0:
            out[i] = 0.0
            continue
        try:
            res = _quad.integrate(
                lambda r: r ** (k + 1) * density.values(r), 0.0, hi,
                rel_tol=1e-12, abs_tol=1e-15,
            )
        except _quad.QuadratureError as exc:
            raise ConfigError(f"custom radial density is not integrable: {exc}") from exc
        out[i] = res.value
    return out


# ---------------------------------------------------------------------------
# Cos-power antiderivatives (exact for integer exponents)


def cos_power_primitive(k: int, x: np.ndarray) -> np.ndarray:
    """Integral of cos^k(t) dt from 0 to x, valid for |x| <= pi/2."""
    x = np.asarray(x, dtype=float)
    if k == 0:
        return x.copy()
    s, c = np.sin(x), np.cos(x)
    if k % 2 == 0:
        acc = x.copy()
        j0 = 2
    else:
        acc = s.copy()
        j0 = 3
    for j in range(j0, k + 1, 2):
        acc = (c ** (j - 1) * s + (j - 1) * acc) / j
    return acc


@lru_cache(maxsize=None)
def cos_power_half(k: int) -> float:
    """Integral of cos^k over [-pi/2, pi/2]."""
    return 2.0 * float(cos_power_primitive(k, np.array([math.pi / 2]))[0])


def abs_cos_power_antiderivative(k: int, u: np.ndarray) -> np.ndarray:
    """Global increasing antiderivative of |cos(t)|^k (pi-periodic weight)."""
    u = np.asarray(u, dtype=float)
    n = np.floor(u / math.pi + 0.5)
    frac = u - n * math.pi
    return n * cos_power_half(k) + cos_power_primitive(k, frac)


def angular_weight(k: int, beta: float, t1: float, t2: float) -> float:
    """Integral of |cos(t-beta)|^k over [t1, t2] (t2 - t1 <= 2*pi)."""
    if t2 - t1 > TWO_PI + 1e-12:
        raise ValueError("interval longer than the full circle")
    vals = abs_cos_power_antiderivative(k, np.array([t1 - beta, t2 - beta]))
    return float(vals[1] - vals[0])


# ---------------------------------------------------------------------------
# The measure family


@dataclass(frozen=True)
class MassReport:
    value: float
    abs_err: float
    nodes: int


@dataclass(frozen=True)
class AnisotropicMeasure2D:
    """Measure with polar density r^(k+1) f(r) |cos(t-beta)|^k."""

    k: int
    beta: float
    radial: RadialDensity = field(default_factory=RadialDensity.gaussian)

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ConfigError("angular exponent k must be non-negative")

    # -- angular pieces ------------------------------------------------------

    def weight_between(self, t1: float, t2: float) -> float:
        return angular_weight(self.k, self.beta, t1, t2)

    def cap_weight(self, alpha: float, eps) -> np.ndarray:
        """Weight of the single cap [alpha-eps, alpha+eps]; vectorized in eps."""
        eps = np.asarray(eps, dtype=float)
        shift = alpha - self.beta
        ends = np.concatenate([np.atleast_1d(shift - eps), np.atleast_1d(shift + eps)])
        vals = abs_cos_power_antiderivative(self.k, ends)
        n = vals.size // 2
        out = vals[n:] - vals[:n]
        return out.reshape(eps.shape) if eps.ndim else out[0]

    def arcs_weight(self, arcs: ArcSet) -> float:
        return math.fsum(self.weight_between(lo, hi) for lo, hi in arcs.intervals)

    def total_angular(self) -> float:
        """Weight of the full circle."""
        return 2.0 * cos_power_half(self.k)

    def half_angular(self) -> float:
        """Weight of any half-circle window centered at the pole."""
        return cos_power_half(self.k)

    def normalization(self) -> float:
        """C(k): reciprocal of the pole-centered half-window weight."""
        return 1.0 / cos_power_half(self.k)

    # -- radial pieces -------------------------------------------------------

    def radial_mass(self, X) -> float:
        return radial_mass(self.radial, self.k, X)

    def radial_mass_many(self, X: np.ndarray) -> np.ndarray:
        return radial_mass_many(self.radial, self.k, X)

    def radial_total(self) -> float:
        if self.radial.kind == "gaussian":
            return radial_mass(self.radial, self.k, math.inf)
        return radial_mass(self.radial, self.k, self.radial.rmax)

    def total_mass(self) -> float:
        """Mass of the full plane (no probability normalization applied)."""
        return self.total_angular() * self.radial_total()

    def rotated(self, delta: float) -> "AnisotropicMeasure2D":
        return AnisotropicMeasure2D(self.k, self.beta + delta, self.radial)


# ---------------------------------------------------------------------------
# Body mass


def body_mass(
    measure: AnisotropicMeasure2D,
    body: SymmetricBody2D,
    cone: Optional[Cone2D] = None,
    *,
    rel_tol: float = 1e-11,
) -> MassReport:
    """Mass of body (doubled over the antipodal cone when one is given)."""

    def integrand(ts: np.ndarray) -> np.ndarray:
        ext = body.radial_extent_many(ts)
        w = np.abs(np.cos(ts - measure.beta)) ** measure.k
        return w * measure.radial_mass_many(ext)

    if cone is None:
        lo, hi = measure.beta, measure.beta + math.pi
        doubling = 2.0
    else:
        lo, hi = cone.primary_window()
        doubling = 2.0
    points = set()
    # Kinks of the angular weight and of the radial extent must be panel edges.
    for base in (measure.beta + math.pi / 2, measure.beta - math.pi / 2):
        for j in (-2, -1, 0, 1, 2):
            points.add(base + j * math.pi)
    for ang in body.breakpoint_angles():
        for j in (-2, -1, 0, 1, 2):
            points.add(ang + j * math.pi)
    interior = [p for p in points if lo < p < hi]
    res = _quad.integrate(integrand, lo, hi, points=interior, rel_tol=rel_tol)
    return MassReport(doubling * res.value, doubling * res.error, res.nodes)


# ---------------------------------------------------------------------------
# sin^k-concavity midpoint test


@dataclass(frozen=True)
class ConcavityReport:
    passed: bool
    worst_margin: float
    worst_pair: tuple[float, float]
    pairs_checked: int


def sin_k_concavity_check(
    xs: np.ndarray,
    fs: np.ndarray,
    k: int,
    *,
    tol: float = 1e-9,
) -> ConcavityReport:
    """Midpoint criterion: f^(1/k)(mid) >= (f^(1/k)(x1)+f^(1/k)(x2)) / (2 cos(|x2-x1|/2)).

    Requires a uniformly spaced table so pair midpoints are sample points,
    an interval shorter than pi, and k >= 1.
    """
    if k == 0:
        raise ValueError("the midpoint criterion degenerates for k = 0")
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if xs[-1] - xs[0] >= math.pi:
        raise ValueError("table interval must be shorter than pi")
    if np.any(fs < 0.0):
        raise ValueError("function values must be non-negative")
    steps = np.diff(xs)
    if steps.size and (steps.max() - steps.min()) > 1e-9 * steps.mean():
        raise ValueError("table must be uniformly spaced")
    g = fs ** (1.0 / k)
    n = len(xs)
    worst = math.inf
    worst_pair = (xs[0], xs[0])
    checked = 0
    for i in range(n):
        for j in range(i + 2, n, 2):
            mid = (i + j) // 2
            delta = xs[j] - xs[i]
            rhs = (g[i] + g[j]) / (2.0 * math.cos(0.5 * delta))
            margin = g[mid] - rhs
            checked += 1
            if margin < worst:
                worst = margin
                worst_pair = (xs[i], xs[j])
    scale = max(1.0, float(g.max(initial=0.0)))
    return ConcavityReport(worst >= -tol * scale, worst, worst_pair, checked)
