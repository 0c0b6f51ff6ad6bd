"""Plane geometry of origin-symmetric convex regions.

Bodies are star-shaped about the origin and described by their radial extent
function.  Supported kinds: convex centrally-symmetric polygons, strips,
ellipses, pairwise intersections, and the full plane.  All angle bookkeeping
is exact interval arithmetic on the circle; extents may be +inf.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


def norm_angle(t: float) -> float:
    """Map an angle into [0, 2*pi)."""
    t = math.fmod(t, TWO_PI)
    return t + TWO_PI if t < 0.0 else t


def angle_dist_mod_pi(a: float, b: float) -> float:
    """Distance between two axis directions (angles identified mod pi)."""
    d = math.fmod(abs(a - b), math.pi)
    return min(d, math.pi - d)


# ---------------------------------------------------------------------------
# Arc sets


@dataclass(frozen=True)
class ArcSet:
    """Disjoint arcs on the circle, stored as non-wrapping [lo, hi] intervals.

    Intervals live in [0, 2*pi] (an arc crossing 0 is split).  Central
    symmetry is enforced structurally: build with ``from_half_arcs`` or
    ``from_caps`` and every interval enters together with its antipode.
    """

    intervals: tuple[tuple[float, float], ...]

    @staticmethod
    def empty() -> "ArcSet":
        return ArcSet(())

    @staticmethod
    def full_circle() -> "ArcSet":
        return ArcSet(((0.0, TWO_PI),))

    @staticmethod
    def from_half_arcs(arcs: Iterable[tuple[float, float]]) -> "ArcSet":
        """Build from arcs given on any half-period; antipodes are added."""
        raw = []
        for lo, hi in arcs:
            if hi <= lo:
                continue
            raw.append((lo, hi))
            raw.append((lo + math.pi, hi + math.pi))
        return ArcSet(_normalize_intervals(raw))

    @staticmethod
    def from_caps(alpha: float, eps: float) -> "ArcSet":
        """The double cap of half-width eps centered at alpha and alpha+pi."""
        if eps <= 0.0:
            return ArcSet.empty()
        if eps >= math.pi / 2:
            return ArcSet.full_circle()
        return ArcSet.from_half_arcs([(alpha - eps, alpha + eps)])

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_full(self) -> bool:
        return abs(self.total_angle() - TWO_PI) < 1e-12

    def total_angle(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.intervals)

    def contains(self, t: float) -> bool:
        t = norm_angle(t)
        return any(lo - 1e-12 <= t <= hi + 1e-12 for lo, hi in self.intervals)

    def intersect(self, other: "ArcSet") -> "ArcSet":
        out = []
        for a_lo, a_hi in self.intervals:
            for b_lo, b_hi in other.intervals:
                lo, hi = max(a_lo, b_lo), min(a_hi, b_hi)
                if hi > lo:
                    out.append((lo, hi))
        return ArcSet(_merge_sorted(sorted(out)))

    def restrict(self, lo: float, hi: float) -> "ArcSet":
        """Intersection with the (possibly wrapping) window [lo, hi]."""
        window = _normalize_intervals([(lo, hi)])
        return self.intersect(ArcSet(window))


def _normalize_intervals(raw: Sequence[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    """Split into non-wrapping pieces on [0, 2*pi], merge touching ones."""
    pieces = []
    for lo, hi in raw:
        if hi - lo >= TWO_PI:
            return ((0.0, TWO_PI),)
        lo_n = norm_angle(lo)
        hi_n = lo_n + (hi - lo)
        if hi_n <= TWO_PI:
            pieces.append((lo_n, hi_n))
        else:
            pieces.append((lo_n, TWO_PI))
            pieces.append((0.0, hi_n - TWO_PI))
    return _merge_sorted(sorted(pieces))


def _merge_sorted(pieces: Sequence[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    merged: list[list[float]] = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1] + 1e-15:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    # Glue across the 0/2*pi seam.
    if len(merged) > 1 and merged[0][0] <= 1e-15 and merged[-1][1] >= TWO_PI - 1e-15:
        total = math.fsum(hi - lo for lo, hi in merged)
        if total >= TWO_PI - 1e-12:
            return ((0.0, TWO_PI),)
    return tuple((lo, hi) for lo, hi in merged)


# ---------------------------------------------------------------------------
# Cones


@dataclass(frozen=True)
class Cone2D:
    """Cone over the arc [center-half, center+half], paired with its antipode."""

    center: float
    half: float

    def __post_init__(self) -> None:
        if not 0.0 < self.half <= math.pi / 2:
            raise ValueError("cone half-angle must lie in (0, pi/2]")

    @property
    def is_half_plane(self) -> bool:
        return self.half >= math.pi / 2

    def arcs(self) -> ArcSet:
        """Both antipodal cone arcs as an ArcSet."""
        return ArcSet.from_half_arcs([(self.center - self.half, self.center + self.half)])

    def primary_window(self) -> tuple[float, float]:
        return (self.center - self.half, self.center + self.half)


# ---------------------------------------------------------------------------
# Bodies


class BodyError(ValueError):
    pass


@dataclass(frozen=True)
class SymmetricBody2D:
    """Origin-symmetric convex region given by its radial extent function."""

    kind: str
    vertices: tuple[tuple[float, float], ...] = ()
    u: float = 0.0          # strip: pole-normal angle
    h: float = 0.0          # strip: half-width
    quad: tuple[float, float, float] = (0.0, 0.0, 0.0)  # ellipse x^T A x < 1, A=[[a,b],[b,c]]
    parts: tuple["SymmetricBody2D", ...] = ()

    # -- constructors -------------------------------------------------------

    @staticmethod
    def full_plane() -> "SymmetricBody2D":
        return SymmetricBody2D(kind="full_plane")

    @staticmethod
    def strip(u: float, h: float) -> "SymmetricBody2D":
        if h <= 0.0:
            raise BodyError("strip half-width must be positive")
        return SymmetricBody2D(kind="strip", u=norm_angle(u), h=float(h))

    @staticmethod
    def ellipse(a: float, b: float, c: float) -> "SymmetricBody2D":
        # Positive definiteness keeps the region bounded with the origin inside.
        if a <= 0.0 or a * c - b * b <= 0.0:
            raise BodyError("ellipse matrix must be positive definite")
        return SymmetricBody2D(kind="ellipse", quad=(float(a), float(b), float(c)))

    @staticmethod
    def disk(radius: float) -> "SymmetricBody2D":
        return SymmetricBody2D.ellipse(1.0 / radius**2, 0.0, 1.0 / radius**2)

    @staticmethod
    def polygon(vertices: Sequence[Sequence[float]]) -> "SymmetricBody2D":
        verts = [(float(x), float(y)) for x, y in vertices]
        n = len(verts)
        if n < 4 or n % 2 != 0:
            raise BodyError("symmetric polygon needs an even vertex count >= 4")
        m = n // 2
        for i in range(m):
            x, y = verts[i]
            x2, y2 = verts[i + m]
            if x2 != -x or y2 != -y:
                raise BodyError("polygon vertices must satisfy v[i+m] == -v[i]")
        body = SymmetricBody2D(kind="polygon", vertices=tuple(verts))
        if body.inradius() <= 0.0:
            raise BodyError("polygon must contain the origin in its interior")
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cx, cy = verts[(i + 2) % n]
            if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) <= 0.0:
                raise BodyError("polygon vertices must be in convex position (ccw)")
        return body

    @staticmethod
    def intersection(a: "SymmetricBody2D", b: "SymmetricBody2D") -> "SymmetricBody2D":
        return intersect_min(a, b)

    # -- radial extent ------------------------------------------------------

    def radial_extent(self, t: float) -> float:
        """sup{r : (r, t) in body}; may be +inf (strips along their axis)."""
        return float(self.radial_extent_many(np.array([t]))[0])

    def radial_extent_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        dx, dy = np.cos(ts), np.sin(ts)
        # Fold directions into the upper half-plane: extents are pi-periodic.
        flip = (dy < 0.0) | ((dy == 0.0) & (dx < 0.0))
        dx = np.where(flip, -dx, dx)
        dy = np.where(flip, -dy, dy)
        if self.kind == "full_plane":
            return np.full(ts.shape, math.inf)
        if self.kind == "strip":
            nx, ny = math.cos(self.u), math.sin(self.u)
            proj = np.abs(dx * nx + dy * ny)
            # Rays within float noise of the axis escape to infinity.
            with np.errstate(divide="ignore"):
                return np.where(proj > 1e-14, self.h / proj, math.inf)
        if self.kind == "ellipse":
            a, b, c = self.quad
            q = a * dx * dx + 2.0 * b * dx * dy + c * dy * dy
            return 1.0 / np.sqrt(q)
        if self.kind == "polygon":
            verts = np.asarray(self.vertices)
            ax, ay = verts[:, 0], verts[:, 1]
            bx = np.roll(ax, -1)
            by = np.roll(ay, -1)
            ex, ey = bx - ax, by - ay
            # Ray r*d hits edge line at r = cross(a, e)/cross(d, e); the hit
            # lies on the segment when the barycentric parameter is in [0, 1].
            denom = dx[:, None] * ey[None, :] - dy[:, None] * ex[None, :]
            num = ax[None, :] * ey[None, :] - ay[None, :] * ex[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                r = num / denom
                s = (dy[:, None] * ax[None, :] - dx[:, None] * ay[None, :]) / denom
            ok = (denom != 0.0) & (r > 0.0) & (s >= -1e-15) & (s <= 1.0 + 1e-15)
            r = np.where(ok, r, -math.inf)
            # Ties at shared vertices resolve toward the larger extent.
            return np.max(r, axis=1)
        if self.kind == "intersection":
            exts = [p.radial_extent_many(ts) for p in self.parts]
            return np.minimum.reduce(exts)
        raise BodyError(f"unknown body kind {self.kind!r}")

    # -- structural radii ---------------------------------------------------

    def inradius(self) -> float:
        """Radius of the largest origin-centered disk inside the body."""
        if self.kind == "full_plane":
            return math.inf
        if self.kind == "strip":
            return self.h
        if self.kind == "ellipse":
            a, b, c = self.quad
            # Largest eigenvalue of A bounds the quadratic form.
            lam = 0.5 * (a + c) + math.hypot(0.5 * (a - c), b)
            return 1.0 / math.sqrt(lam)
        if self.kind == "polygon":
            return min(self._edge_distances())
        if self.kind == "intersection":
            return min(p.inradius() for p in self.parts)
        raise BodyError(self.kind)

    def circumradius(self) -> float:
        """Radius of the smallest origin-centered disk containing the body (inf if unbounded)."""
        if self.kind in ("full_plane", "strip"):
            return math.inf
        if self.kind == "ellipse":
            a, b, c = self.quad
            lam = 0.5 * (a + c) - math.hypot(0.5 * (a - c), b)
            return 1.0 / math.sqrt(lam)
        if self.kind == "polygon":
            return max(math.hypot(x, y) for x, y in self.vertices)
        if self.kind == "intersection":
            return min(p.circumradius() for p in self.parts)
        raise BodyError(self.kind)

    def breakpoint_radii(self) -> list[float]:
        """Radii where the angular arcs gain or lose endpoints."""
        if self.kind == "polygon":
            rads = {math.hypot(x, y) for x, y in self.vertices}
            rads.update(self._edge_distances())
            return sorted(rads)
        if self.kind == "strip":
            return [self.h]
        if self.kind == "ellipse":
            return [self.inradius(), self.circumradius()]
        if self.kind == "intersection":
            out: list[float] = []
            for p in self.parts:
                out.extend(p.breakpoint_radii())
            return sorted(set(out))
        return []

    def breakpoint_angles(self) -> list[float]:
        """Angles where the radial extent function has kinks."""
        if self.kind == "polygon":
            return sorted(norm_angle(math.atan2(y, x)) for x, y in self.vertices)
        if self.kind == "strip":
            return sorted(norm_angle(self.u + s * math.pi / 2) for s in (-1, 1))
        if self.kind == "intersection":
            out: list[float] = []
            for p in self.parts:
                out.extend(p.breakpoint_angles())
            return sorted(set(out))
        return []

    def _edge_distances(self) -> list[float]:
        verts = self.vertices
        out = []
        n = len(verts)
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            ex, ey = bx - ax, by - ay
            L = math.hypot(ex, ey)
            out.append(abs(ax * ey - ay * ex) / L)
        return out

    # -- serialization ------------------------------------------------------

    def to_record(self) -> dict:
        if self.kind == "full_plane":
            return {"kind": "full_plane"}
        if self.kind == "strip":
            return {"kind": "strip", "u": self.u, "h": self.h}
        if self.kind == "ellipse":
            a, b, c = self.quad
            return {"kind": "ellipse", "a": a, "b": b, "c": c}
        if self.kind == "polygon":
            return {"kind": "polygon", "vertices": [[x, y] for x, y in self.vertices]}
        if self.kind == "intersection":
            return {"kind": "intersection", "parts": [p.to_record() for p in self.parts]}
        raise BodyError(self.kind)

    @staticmethod
    def from_record(rec: dict) -> "SymmetricBody2D":
        kind = rec.get("kind")
        if kind == "full_plane":
            return SymmetricBody2D.full_plane()
        if kind == "strip":
            return SymmetricBody2D.strip(rec["u"], rec["h"])
        if kind == "ellipse":
            return SymmetricBody2D.ellipse(rec["a"], rec["b"], rec["c"])
        if kind == "polygon":
            return SymmetricBody2D.polygon(rec["vertices"])
        if kind == "intersection":
            parts = [SymmetricBody2D.from_record(p) for p in rec["parts"]]
            body = parts[0]
            for p in parts[1:]:
                body = intersect_min(body, p)
            return body
        raise BodyError(f"unknown body record kind {kind!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    @staticmethod
    def from_json(text: str) -> "SymmetricBody2D":
        return SymmetricBody2D.from_record(json.loads(text))


def intersect_min(a: SymmetricBody2D, b: SymmetricBody2D) -> SymmetricBody2D:
    """Body whose radial extent is the pointwise min of the two extents."""
    if a.kind == "full_plane":
        return b
    if b.kind == "full_plane":
        return a
    if a is b:
        return a
    parts: list[SymmetricBody2D] = []
    for body in (a, b):
        parts.extend(body.parts if body.kind == "intersection" else (body,))
    return SymmetricBody2D(kind="intersection", parts=tuple(parts))


# ---------------------------------------------------------------------------
# Angular arcs


def angular_arcs(body: SymmetricBody2D, r: float) -> ArcSet:
    """The set {t : radial_extent(body, t) >= r} as disjoint antipodal arcs."""
    if r <= 0.0:
        raise ValueError("angular_arcs requires r > 0")
    if body.kind == "full_plane":
        return ArcSet.full_circle()
    if body.kind == "strip":
        if r <= body.h:
            return ArcSet.full_circle()
        # |cos(t-u)| <= h/r puts t within arcsin(h/r) of the strip axis u+pi/2.
        half = math.asin(body.h / r)
        axis = body.u + math.pi / 2
        return ArcSet.from_half_arcs([(axis - half, axis + half)])
    if body.kind == "ellipse":
        a, b, c = body.quad
        p = 0.5 * (a + c)
        q = math.hypot(0.5 * (a - c), b)
        psi = math.atan2(b, 0.5 * (a - c))
        # d^T A d = p + q*cos(2t - psi) <= 1/r^2
        if q == 0.0:
            return ArcSet.full_circle() if p <= 1.0 / r**2 else ArcSet.empty()
        c0 = (1.0 / r**2 - p) / q
        if c0 >= 1.0:
            return ArcSet.full_circle()
        if c0 <= -1.0:
            return ArcSet.empty()
        a0 = math.acos(c0)
        center = psi / 2 + math.pi / 2
        half = (math.pi - a0) / 2
        return ArcSet.from_half_arcs([(center - half, center + half)])
    if body.kind == "polygon":
        return _polygon_arcs(body, r)
    if body.kind == "intersection":
        arcs = angular_arcs(body.parts[0], r)
        for p in body.parts[1:]:
            arcs = arcs.intersect(angular_arcs(p, r))
        return arcs
    raise BodyError(body.kind)


def _polygon_arcs(body: SymmetricBody2D, r: float) -> ArcSet:
    verts = body.vertices
    n = len(verts)
    m = n // 2
    half_arcs: list[tuple[float, float]] = []
    # Edges 0..m-1 cover one half-period; antipodal edges are their mirrors.
    for i in range(m):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        th_a = math.atan2(ay, ax)
        th_b = math.atan2(by, bx)
        width = norm_angle(th_b - th_a)
        ex, ey = bx - ax, by - ay
        L = math.hypot(ex, ey)
        d = abs(ax * ey - ay * ex) / L
        # Foot-of-perpendicular direction of the edge line.
        cross = ax * by - ay * bx
        phix, phiy = ey * cross, -ex * cross
        phi = math.atan2(phiy, phix)
        if d >= r:
            half_arcs.append((th_a, th_a + width))
            continue
        # Within the sector, extent(t) = d/cos(t - phi) >= r off an open gap
        # of half-width acos(d/r) around phi.  Work in offsets s = t - th_a;
        # cos(t - phi) > 0 on the sector, so phi_rel lies in (-pi/2, width + pi/2).
        gap = math.acos(d / r)
        phi_rel = math.fmod(phi - th_a, TWO_PI)
        if phi_rel < -math.pi / 2:
            phi_rel += TWO_PI
        elif phi_rel >= 3 * math.pi / 2:
            phi_rel -= TWO_PI
        left_end = min(width, phi_rel - gap)
        right_start = max(0.0, phi_rel + gap)
        if left_end > 0.0:
            half_arcs.append((th_a, th_a + left_end))
        if right_start < width:
            half_arcs.append((th_a + right_start, th_a + width))
    return ArcSet.from_half_arcs(half_arcs)


def angular_length(body: SymmetricBody2D, r: float) -> float:
    """Quarter of H^1(body x circle of radius r)/r; always <= pi/2."""
    return angular_arcs(body, r).total_angle() / 4.0


# ---------------------------------------------------------------------------
# Random symmetric polygons (seeded generators for experiments)


def random_symmetric_polygon(
    rng: np.random.Generator,
    n_points: int = 6,
    r_min: float = 0.4,
    r_max: float = 2.5,
) -> SymmetricBody2D:
    """Convex hull of +-p_i for random points p_i; centrally symmetric by construction."""
    while True:
        angles = rng.uniform(0.0, math.pi, size=n_points)
        radii = rng.uniform(r_min, r_max, size=n_points)
        pts = [(r * math.cos(t), r * math.sin(t)) for r, t in zip(radii, angles)]
        pts = pts + [(-x, -y) for x, y in pts]
        hull = _convex_hull(pts)
        if len(hull) >= 4:
            try:
                return SymmetricBody2D.polygon(_rotate_to_symmetric(hull))
            except BodyError:
                continue


def _convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _rotate_to_symmetric(hull: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Rotate the ccw vertex list so v[i+m] == -v[i] holds exactly."""
    n = len(hull)
    m = n // 2
    for shift in range(n):
        rolled = hull[shift:] + hull[:shift]
        ok = all(
            rolled[i + m][0] == -rolled[i][0] and rolled[i + m][1] == -rolled[i][1]
            for i in range(m)
        )
        if ok:
            return rolled
    raise BodyError("hull of a symmetric point set should be symmetric")
