"""Double-cap symmetrisation, width-decreasing checks, and the strip reduction chain.

Profiles are functions from radius to a pair of antipodal caps (center alpha,
half-width eps(r)) whose per-radius angular mass matches the source body.  The
three-step procedure, the hybrid sets, and the final strips are all expressed
through such profiles; chain ratios come from adaptive radial quadrature with
closed-form angular masses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import _quad
from .geometry2d import (
    ArcSet,
    Cone2D,
    SymmetricBody2D,
    angle_dist_mod_pi,
    angular_arcs,
    intersect_min,
    norm_angle,
)
from .measures import (
    AnisotropicMeasure2D,
    MassReport,
    abs_cos_power_antiderivative,
    body_mass,
)

TWO_PI = 2.0 * math.pi
HALF_PI = math.pi / 2


class ProfileError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Radial grids


def make_r_grid(
    bodies: Sequence[SymmetricBody2D],
    measure: AnisotropicMeasure2D,
    n: int = 512,
) -> np.ndarray:
    """Geometric grid over (0, rmax] plus every body breakpoint radius."""
    rmax = measure.radial.rmax
    radii = [r for b in bodies for r in b.breakpoint_radii() if 0.0 < r < rmax]
    inradii = [b.inradius() for b in bodies if math.isfinite(b.inradius())]
    r_lo = min(inradii) / 8.0 if inradii else 1e-3
    r_lo = max(min(r_lo, 1e-1), 1e-4)
    grid = np.geomspace(r_lo, rmax, n)
    grid = np.unique(np.concatenate([grid, np.asarray(radii, dtype=float)]))
    return grid


# ---------------------------------------------------------------------------
# Vectorized angular masses


def _wd(measure: AnisotropicMeasure2D, u) -> np.ndarray:
    """Antiderivative of the angular weight at absolute angle u."""
    return abs_cos_power_antiderivative(measure.k, np.asarray(u, dtype=float) - measure.beta)


def _interval_weight(measure, lo, hi) -> np.ndarray:
    return np.maximum(_wd(measure, hi) - _wd(measure, lo), 0.0)


def body_arc_weight(
    body: SymmetricBody2D,
    measure: AnisotropicMeasure2D,
    rs: np.ndarray,
    window: Optional[tuple[float, float]] = None,
) -> np.ndarray:
    """Angular weight of {t : extent(t) >= r}, vectorized over radii.

    With a window (lo, hi) the arcs are clipped to that single interval
    (the primary cone); otherwise both antipodal halves are counted.
    """
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    if body.kind == "polygon":
        pieces = _polygon_pieces(body, rs)
    elif body.kind == "strip":
        axis = body.u + HALF_PI
        half = np.arcsin(np.clip(body.h / np.maximum(rs, 1e-300), 0.0, 1.0))
        pieces = [(axis - half, axis + half)]
    elif body.kind == "ellipse":
        pieces = _ellipse_pieces(body, rs)
    elif body.kind == "full_plane":
        pieces = [(np.zeros(rs.shape), np.full(rs.shape, math.pi))]
    else:
        return _generic_arc_weight(body, measure, rs, window)

    if window is None:
        total = np.zeros(rs.shape)
        for lo, hi in pieces:
            total += _interval_weight(measure, lo, hi)
        return 2.0 * total

    w_lo, w_hi = window
    length = w_hi - w_lo
    total = np.zeros(rs.shape)
    for lo, hi in pieces:
        # Each half-period piece and its antipode, shifted near the window.
        for shift_piece in (lo, lo + math.pi):
            width = hi - lo
            base = shift_piece - w_lo
            start = base - TWO_PI * np.floor(base / TWO_PI)
            for extra in (0.0, -TWO_PI):
                s = start + extra
                o_lo = np.maximum(s, 0.0)
                o_hi = np.minimum(s + width, length)
                mask = o_hi > o_lo
                if np.any(mask):
                    total += np.where(
                        mask, _interval_weight(measure, w_lo + o_lo, w_lo + o_hi), 0.0
                    )
    return total


def _polygon_pieces(body: SymmetricBody2D, rs: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Qualifying sub-arcs per half-period edge, as (lo, hi) angle arrays over rs."""
    verts = body.vertices
    n = len(verts)
    m = n // 2
    pieces: list[tuple[np.ndarray, np.ndarray]] = []
    for i in range(m):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        th_a = math.atan2(ay, ax)
        th_b = math.atan2(by, bx)
        width = norm_angle(th_b - th_a)
        ex, ey = bx - ax, by - ay
        L = math.hypot(ex, ey)
        d = abs(ax * ey - ay * ex) / L
        cross = ax * by - ay * bx
        phi = math.atan2(-ex * cross, ey * cross)
        phi_rel = math.fmod(phi - th_a, TWO_PI)
        if phi_rel < -HALF_PI:
            phi_rel += TWO_PI
        elif phi_rel >= 3 * HALF_PI:
            phi_rel -= TWO_PI
        with np.errstate(invalid="ignore"):
            gap = np.arccos(np.clip(d / np.maximum(rs, 1e-300), -1.0, 1.0))
        left_end = np.minimum(width, phi_rel - gap)
        right_start = np.maximum(0.0, phi_rel + gap)
        left_end = np.where(rs <= d, width, left_end)
        right_start = np.where(rs <= d, width, right_start)
        pieces.append((np.full(rs.shape, th_a), th_a + np.maximum(left_end, 0.0)))
        pieces.append((th_a + np.minimum(right_start, width), np.full(rs.shape, th_a + width)))
    return pieces


def _ellipse_pieces(body: SymmetricBody2D, rs: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    a, b, c = body.quad
    p = 0.5 * (a + c)
    q = math.hypot(0.5 * (a - c), b)
    if q == 0.0:
        radius = 1.0 / math.sqrt(p)
        inside = rs <= radius
        lo = np.where(inside, 0.0, 0.0)
        hi = np.where(inside, math.pi, 0.0)
        return [(lo, hi)]
    psi = math.atan2(b, 0.5 * (a - c))
    c0 = np.clip((1.0 / rs**2 - p) / q, -1.0, 1.0)
    a0 = np.arccos(c0)
    center = psi / 2 + HALF_PI
    half = (math.pi - a0) / 2
    return [(center - half, center + half)]


def _generic_arc_weight(body, measure, rs, window) -> np.ndarray:
    out = np.empty(rs.shape)
    for i, r in enumerate(rs):
        arcs = angular_arcs(body, float(r))
        if window is not None:
            arcs = arcs.restrict(window[0], window[1])
        out[i] = measure.arcs_weight(arcs)
    return out


def caps_overlap_weight(
    measure: AnisotropicMeasure2D,
    a1: float,
    e1: np.ndarray,
    a2: float,
    e2: np.ndarray,
) -> np.ndarray:
    """Weight of the intersection of two double caps, vectorized in the widths."""
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    s0 = math.fmod(a2 - a1, TWO_PI)
    if s0 > math.pi:
        s0 -= TWO_PI
    elif s0 <= -math.pi:
        s0 += TWO_PI
    s1 = s0 - math.pi if s0 > 0.0 else s0 + math.pi
    total = np.zeros(np.broadcast(e1, e2).shape)
    for s in (s0, s1):
        lo_rel = np.maximum(-e1, s - e2)
        hi_rel = np.minimum(e1, s + e2)
        mask = hi_rel > lo_rel
        if np.any(mask):
            w = _interval_weight(measure, a1 + lo_rel, a1 + hi_rel)
            total += np.where(mask, w, 0.0)
    return 2.0 * total


# ---------------------------------------------------------------------------
# Cap half-width solving (the defining mass-match equation of s_alpha)


def _cap_eps_from_target(
    measure: AnisotropicMeasure2D, alpha: float, target: np.ndarray
) -> np.ndarray:
    """Solve cap_weight(alpha, eps) = target for eps in [0, pi/2], vectorized."""
    target = np.asarray(target, dtype=float)
    w_max = measure.half_angular()
    tol = 1e-13 * max(1.0, w_max)
    if np.any(target > w_max * (1.0 + 1e-9)):
        raise ProfileError("source mass exceeds the available angular mass")
    target = np.clip(target, 0.0, w_max)
    lo = np.zeros_like(target)
    hi = np.full_like(target, HALF_PI)
    for _ in range(18):
        mid = 0.5 * (lo + hi)
        val = measure.cap_weight(alpha, mid)
        take = val < target
        lo = np.where(take, mid, lo)
        hi = np.where(take, hi, mid)
    eps = 0.5 * (lo + hi)
    k, beta = measure.k, measure.beta
    for _ in range(5):
        val = measure.cap_weight(alpha, eps)
        deriv = (np.abs(np.cos(alpha + eps - beta)) ** k
                 + np.abs(np.cos(alpha - eps - beta)) ** k)
        step = np.where(deriv > 1e-12, (target - val) / np.maximum(deriv, 1e-12), 0.0)
        eps = np.clip(eps + step, lo, hi)
    eps = np.where(target <= tol, 0.0, eps)
    eps = np.where(target >= w_max - tol, HALF_PI, eps)
    return eps


def cap_epsilon(
    source_mass: float,
    alpha: float,
    measure: AnisotropicMeasure2D,
    cone: Optional[Cone2D] = None,
    cone_slice_weight: Optional[float] = None,
) -> float:
    """Half-width of the double cap at alpha matching the source angular mass.

    Full-plane case: 2 * cap_weight(alpha, eps) = source_mass, where the
    source mass counts both antipodal halves.  Cone case: the normalized
    ratio match, with source_mass the weight inside the single primary cone
    and cone_slice_weight that cone's total weight at the radius.
    """
    if cone is None:
        target = 0.5 * source_mass
    else:
        denom = cone_slice_weight
        if denom is None:
            lo, hi = cone.primary_window()
            denom = measure.weight_between(lo, hi)
        if denom <= 0.0:
            raise ProfileError("cone slice carries no angular mass")
        ratio = source_mass / denom
        if ratio > 1.0 + 1e-9:
            raise ProfileError("cone source mass exceeds the cone slice mass")
        target = min(ratio, 1.0) * measure.half_angular()
    return float(_cap_eps_from_target(measure, alpha, np.array([target]))[0])


# ---------------------------------------------------------------------------
# Angular profiles


@dataclass
class AngularProfile:
    """Per-radius double cap (center alpha, half-width eps(r)) with its measure."""

    alpha: float
    measure: AnisotropicMeasure2D
    rs: np.ndarray
    eps: np.ndarray
    eps_fn: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    breakpoints: tuple[float, ...] = ()
    mass_residual: float = 0.0

    def eps_at(self, r) -> np.ndarray:
        return self.eps_fn(np.asarray(r, dtype=float))

    def caps_at(self, r: float) -> ArcSet:
        return ArcSet.from_caps(self.alpha, float(self.eps_at(np.atleast_1d(r))[0]))

    def angular_mass_at(self, rs) -> np.ndarray:
        return 2.0 * self.measure.cap_weight(self.alpha, self.eps_fn(rs))

    def mass(self, rel_tol: float = 1e-10) -> MassReport:
        return _radial_integral(self.measure, self.angular_mass_at, self.breakpoints, rel_tol)


def _radial_integral(
    measure: AnisotropicMeasure2D,
    angular_mass_at: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    rel_tol: float = 1e-10,
) -> MassReport:
    rmax = measure.radial.rmax
    k = measure.k

    def integrand(rs: np.ndarray) -> np.ndarray:
        dens = measure.radial.values(rs)
        return rs ** (k + 1) * dens * angular_mass_at(rs)

    pts = [p for p in breakpoints if 0.0 < p < rmax]
    res = _quad.integrate(integrand, 0.0, rmax, points=pts, rel_tol=rel_tol, abs_tol=1e-14)
    return MassReport(res.value, res.error, res.nodes)


def profile_overlap_mass(
    p1: AngularProfile, p2: AngularProfile, rel_tol: float = 1e-10
) -> MassReport:
    """Mass of the per-radius intersection of two cap profiles."""
    measure = p1.measure

    def overlap_at(rs: np.ndarray) -> np.ndarray:
        return caps_overlap_weight(measure, p1.alpha, p1.eps_fn(rs), p2.alpha, p2.eps_fn(rs))

    pts = sorted(set(p1.breakpoints) | set(p2.breakpoints))
    return _radial_integral(measure, overlap_at, pts, rel_tol)


def double_cap_symmetrize(
    body: SymmetricBody2D,
    alpha: float,
    measure: AnisotropicMeasure2D,
    cone: Optional[Cone2D] = None,
    grid: Optional[np.ndarray] = None,
    label: str = "",
) -> AngularProfile:
    """The alpha-double-cap symmetrisation s_alpha as an angular profile."""
    if grid is None:
        grid = make_r_grid([body], measure)
    alpha = norm_angle(alpha)
    w_half = measure.half_angular()

    if cone is None:
        def target_at(rs: np.ndarray) -> np.ndarray:
            return 0.5 * body_arc_weight(body, measure, rs)
    else:
        window = cone.primary_window()
        slice_w = measure.weight_between(*window)

        def target_at(rs: np.ndarray) -> np.ndarray:
            return body_arc_weight(body, measure, rs, window=window) / slice_w * w_half

    def eps_fn(rs) -> np.ndarray:
        rs = np.asarray(rs, dtype=float)
        scalar = rs.ndim == 0
        eps = _cap_eps_from_target(measure, alpha, target_at(np.atleast_1d(rs)))
        return eps[0] if scalar else eps

    eps = eps_fn(grid)
    # Certify the defining mass-match equation on the grid.
    resid = np.abs(measure.cap_weight(alpha, eps) - target_at(grid))
    residual = float(resid.max() / max(w_half, 1e-300))
    return AngularProfile(
        alpha=alpha,
        measure=measure,
        rs=grid,
        eps=eps,
        eps_fn=eps_fn,
        label=label or f"s_{alpha:.3f}({body.kind})",
        breakpoints=tuple(body.breakpoint_radii()),
        mass_residual=residual,
    )


def strip_profile(
    axis: float,
    h: float,
    measure: AnisotropicMeasure2D,
    grid: np.ndarray,
    label: str = "",
) -> AngularProfile:
    """Exact angular profile of a strip: caps at the axis, half-width asin(h/r)."""
    axis = norm_angle(axis)

    def eps_fn(rs) -> np.ndarray:
        rs = np.asarray(rs, dtype=float)
        return np.arcsin(np.clip(h / np.maximum(rs, 1e-300), 0.0, 1.0))

    return AngularProfile(
        alpha=axis,
        measure=measure,
        rs=grid,
        eps=eps_fn(grid),
        eps_fn=eps_fn,
        label=label or f"strip(axis={axis:.3f}, h={h:.3f})",
        breakpoints=(h,),
    )


def hybrid_profile(
    inner: AngularProfile, outer: AngularProfile, r0: float, label: str = ""
) -> AngularProfile:
    """Profile equal to `inner` inside B(0, r0) and to `outer` outside."""
    if angle_dist_mod_pi(inner.alpha, outer.alpha) > 1e-9:
        raise ProfileError("hybrid profiles need a common cap center")

    def eps_fn(rs) -> np.ndarray:
        rs = np.asarray(rs, dtype=float)
        return np.where(rs <= r0, inner.eps_fn(rs), outer.eps_fn(rs))

    grid = inner.rs
    return AngularProfile(
        alpha=inner.alpha,
        measure=inner.measure,
        rs=grid,
        eps=eps_fn(grid),
        eps_fn=eps_fn,
        label=label or f"hybrid({inner.label}|{outer.label})",
        breakpoints=tuple(sorted({*inner.breakpoints, *outer.breakpoints, r0})),
    )


# ---------------------------------------------------------------------------
# Width-decreasing verification


@dataclass(frozen=True)
class WidthDecreasingReport:
    passed: bool
    worst_margin: float
    worst_r: float
    checked: int
    skipped: int


def width_decreasing_check(
    profile: AngularProfile,
    slack: float = 1e-6,
    rel_step: float = 1e-5,
    plateau_margin: float = 0.05,
) -> WidthDecreasingReport:
    """Finite-difference test of eps'(r) <= -tan(eps(r))/r off the pi/2 plateau."""
    rs = profile.rs
    eps = profile.eps
    keep = eps <= HALF_PI - plateau_margin
    if not np.any(keep):
        return WidthDecreasingReport(True, -math.inf, math.nan, 0, int(len(rs)))
    r_sel = rs[keep]
    e_sel = eps[keep]
    dr = rel_step * r_sel
    e_minus = profile.eps_fn(r_sel - dr)
    e_plus = profile.eps_fn(r_sel + dr)
    ok = e_minus <= HALF_PI - plateau_margin
    deriv = (e_plus - e_minus) / (2.0 * dr)
    margin = deriv + np.tan(e_sel) / r_sel
    margin = np.where(ok, margin, -math.inf)
    checked = int(ok.sum())
    skipped = int(len(rs) - checked)
    if checked == 0:
        return WidthDecreasingReport(True, -math.inf, math.nan, 0, skipped)
    idx = int(np.argmax(margin))
    worst = float(margin[idx])
    return WidthDecreasingReport(worst <= slack, worst, float(r_sel[idx]), checked, skipped)


# ---------------------------------------------------------------------------
# The three-step procedure


@dataclass
class InterRecord:
    """Per-radius intersection masses (normalized) before and after capping."""

    rs: np.ndarray
    source_overlap: np.ndarray
    cap_overlap: np.ndarray
    flagged: np.ndarray


@dataclass
class ThreeStepTrace:
    step: int
    which: int
    deltas: tuple[float, float]
    wd_reports: list
    mass_test: Optional[tuple[float, float]]
    inter: Optional[InterRecord]
    orthogonal: bool = False


def _containment_delta(
    body_eps_grid: np.ndarray,
    inradius: float,
    measure: AnisotropicMeasure2D,
    grid: np.ndarray,
    ctol: float = 1e-12,
) -> float:
    """Largest offset d in [0, pi/2] with the body's pole caps inside the
    pole-symmetrized strip family member of axis pole+d and half-width inradius."""
    pole = measure.beta
    theta = np.arcsin(np.clip(inradius / np.maximum(grid, 1e-300), 0.0, 1.0))

    def admissible(delta: float) -> bool:
        target = measure.cap_weight(pole + delta, theta)
        eps_s = _cap_eps_from_target(measure, pole, target)
        return bool(np.all(body_eps_grid <= eps_s + ctol))

    if not admissible(0.0):
        raise ProfileError("containment must hold at the pole-aligned family member")
    lo, hi = 0.0, HALF_PI
    if admissible(hi):
        return hi
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    # Threshold-finding noise below angular resolution means "no tilt at all".
    return 0.0 if lo < 1e-6 else lo


def _inter_record(
    K1: SymmetricBody2D,
    K2: SymmetricBody2D,
    p1: AngularProfile,
    p2: AngularProfile,
    grid: np.ndarray,
    tol: float = 1e-9,
) -> InterRecord:
    measure = p1.measure
    total = measure.total_angular()
    src = np.empty(grid.shape)
    for i, r in enumerate(grid):
        a1 = angular_arcs(K1, float(r))
        a2 = angular_arcs(K2, float(r))
        src[i] = measure.arcs_weight(a1.intersect(a2)) / total
    cap = caps_overlap_weight(measure, p1.alpha, p1.eps, p2.alpha, p2.eps) / total
    flagged = np.nonzero(cap > src + tol)[0]
    return InterRecord(grid, src, cap, flagged)


def three_step_procedure(
    K1: SymmetricBody2D,
    K2: SymmetricBody2D,
    measure: AnisotropicMeasure2D,
    grid: Optional[np.ndarray] = None,
    wd_slack: float = 1e-7,
    mass_tol: float = 1e-9,
) -> tuple[AngularProfile, AngularProfile, ThreeStepTrace]:
    """Symmetrize a pair of bodies into double-cap profiles.

    Step one symmetrizes one body at the angle orthogonal to the pole when the
    result stays width-decreasing.  Step two pushes one body's cap away from
    the pole as far as strip-family containment allows and keeps the result
    when the intersection mass did not grow.  Step three places the caps on
    opposite sides of the pole; when the admissible offsets reach a combined
    quarter turn they are clamped to exactly orthogonal centers, where the
    inclusion-exclusion bound applies radius by radius.
    """
    if measure.k < 1:
        raise ProfileError("the symmetrisation procedure requires k >= 1")
    if grid is None:
        grid = make_r_grid([K1, K2], measure)
    pole = measure.beta
    horiz = pole + HALF_PI
    bodies = (K1, K2)
    wd_reports = []

    # First step: horizontal symmetrisation, kept when width-decreasing.
    for i in (0, 1):
        prof_h = double_cap_symmetrize(bodies[i], horiz, measure, grid=grid)
        report = width_decreasing_check(prof_h, slack=wd_slack)
        wd_reports.append(report)
        if report.passed:
            prof_v = double_cap_symmetrize(bodies[1 - i], pole, measure, grid=grid)
            profiles = (prof_h, prof_v) if i == 0 else (prof_v, prof_h)
            trace = ThreeStepTrace(1, i, (0.0, 0.0), wd_reports, None,
                                   _inter_record(K1, K2, *profiles, grid), True)
            return (*profiles, trace)

    p_pole = [double_cap_symmetrize(K, pole, measure, grid=grid) for K in bodies]
    deltas = [
        _containment_delta(p_pole[i].eps, bodies[i].inradius(), measure, grid)
        for i in (0, 1)
    ]
    m12 = body_mass(measure, intersect_min(K1, K2)).value
    scale = measure.total_mass()
    d1max, d2max = deltas

    if d1max == 0.0 and d2max == 0.0:
        # Both bodies already pole-aligned strip-like profiles; caps stay
        # coaxial and the matched strips are fixed points.
        p1, p2 = p_pole
        d1 = d2 = 0.0
    else:
        # Terminal placement: caps exactly a quarter turn apart, offsets split
        # in proportion to the strip-family containment bounds.  At orthogonal
        # centers the inclusion-exclusion bound holds radius by radius for any
        # bodies, so the intersection mass cannot grow under the capping.
        d2 = HALF_PI * d2max / (d1max + d2max)
        d1 = HALF_PI - d2
        p1 = double_cap_symmetrize(K1, pole - d1, measure, grid=grid)
        p2 = double_cap_symmetrize(K2, pole + d2, measure, grid=grid)
        wd_reports.append(width_decreasing_check(p1, slack=wd_slack))
        wd_reports.append(width_decreasing_check(p2, slack=wd_slack))
    overlap = profile_overlap_mass(p1, p2).value
    step = 2 if m12 >= overlap - mass_tol * scale else 3
    trace = ThreeStepTrace(step, 0, (d1, d2), wd_reports, (m12, overlap),
                           _inter_record(K1, K2, p1, p2, grid),
                           orthogonal=abs(d1 + d2 - HALF_PI) < 1e-12)
    return p1, p2, trace


# ---------------------------------------------------------------------------
# Reduction to strips (the chain of inequalities)


@dataclass(frozen=True)
class StageRow:
    stage: str
    numerator: float
    denominator: float
    ratio: float
    abs_err: float


@dataclass
class ChainReport:
    rows: list[StageRow]
    strips: tuple[SymmetricBody2D, SymmetricBody2D]
    r0: float
    trace: ThreeStepTrace
    violations: list[str]
    slack: float

    @property
    def passed(self) -> bool:
        return not self.violations

    def final_ratio(self) -> float:
        return self.rows[-1].ratio


def _stage_ratio(total: MassReport, inter: MassReport, m1: MassReport, m2: MassReport,
                 stage: str) -> StageRow:
    denom = m1.value * m2.value
    numer = total.value * inter.value
    ratio = numer / denom
    rel = 0.0
    for rep in (total, inter, m1, m2):
        if rep.value != 0.0:
            rel += rep.abs_err / abs(rep.value)
    return StageRow(stage, inter.value, denom, ratio, abs(ratio) * rel)


def reduce_to_strips(
    K1: SymmetricBody2D,
    K2: SymmetricBody2D,
    measure: AnisotropicMeasure2D,
    cone: Optional[Cone2D] = None,
    grid: Optional[np.ndarray] = None,
    slack: float = 1e-7,
) -> ChainReport:
    """Reduce a body pair to a strip pair, recording the ratio chain."""
    if grid is None:
        grid = make_r_grid([K1, K2], measure)
    p1, p2, trace = three_step_procedure(K1, K2, measure, grid=grid)
    if cone is not None and not cone.is_half_plane:
        q1 = double_cap_symmetrize(K1, p1.alpha, measure, cone=cone, grid=grid)
        q2 = double_cap_symmetrize(K2, p2.alpha, measure, cone=cone, grid=grid)
    else:
        q1, q2 = p1, p2

    # r0: first radius where the caps separate.  With orthogonal centers this
    # is the half-width sum dropping to pi/2; for closer centers the matched
    # strips must clear the actual separation.  Coaxial pairs (strip fixed
    # points) keep the quarter-turn threshold.
    d_eff = angle_dist_mod_pi(q1.alpha, q2.alpha)
    if d_eff < 1e-9:
        d_eff = HALF_PI

    def gap(r: float) -> float:
        return float(q1.eps_at(np.atleast_1d(r))[0] + q2.eps_at(np.atleast_1d(r))[0]) - d_eff

    idx = np.nonzero(q1.eps + q2.eps <= d_eff)[0]
    if idx.size == 0:
        raise ProfileError("cap half-widths never clear the center separation: no r0")
    i0 = int(idx[0])
    if i0 == 0:
        r0 = float(grid[0])
    else:
        lo, hi = float(grid[i0 - 1]), float(grid[i0])
        for _ in range(70):
            mid = 0.5 * (lo + hi)
            if gap(mid) <= 0.0:
                hi = mid
            else:
                lo = mid
        r0 = hi

    # Matched strips; the floor keeps nested pairs (one profile already empty
    # at r0) on the thin-strip limit instead of a 0/0 ratio.
    eps_floor = 1e-9
    h1 = r0 * math.sin(max(float(q1.eps_at(np.atleast_1d(r0))[0]), eps_floor))
    h2 = r0 * math.sin(max(float(q2.eps_at(np.atleast_1d(r0))[0]), eps_floor))
    s1 = strip_profile(q1.alpha, h1, measure, grid)
    s2 = strip_profile(q2.alpha, h2, measure, grid)
    E = hybrid_profile(q1, s1, r0, label="E")
    F = hybrid_profile(q2, s2, r0, label="F")

    total = MassReport(measure.total_mass(), 0.0, 0)
    if cone is not None and not cone.is_half_plane:
        stage0 = _stage_ratio(
            body_mass(measure, SymmetricBody2D.full_plane(), cone),
            body_mass(measure, intersect_min(K1, K2), cone),
            body_mass(measure, K1, cone),
            body_mass(measure, K2, cone),
            "original",
        )
    else:
        stage0 = _stage_ratio(
            total,
            body_mass(measure, intersect_min(K1, K2)),
            body_mass(measure, K1),
            body_mass(measure, K2),
            "original",
        )
    stage1 = _stage_ratio(total, profile_overlap_mass(q1, q2), q1.mass(), q2.mass(),
                          "symmetrized")
    f_mass = F.mass()
    stage2 = _stage_ratio(total, profile_overlap_mass(E, F), E.mass(), f_mass,
                          "hybrid_EF")
    stage3 = _stage_ratio(total, profile_overlap_mass(s1, F), s1.mass(), f_mass,
                          "hybrid_S1F")
    stage4 = _stage_ratio(total, profile_overlap_mass(s1, s2), s1.mass(), s2.mass(),
                          "strips")

    rows = [stage0, stage1, stage2, stage3, stage4]
    violations = []
    for prev, nxt in zip(rows[:-1], rows[1:]):
        if nxt.ratio > prev.ratio + slack * max(1.0, abs(prev.ratio)):
            violations.append(
                f"{nxt.stage} ratio {nxt.ratio:.12g} exceeds {prev.stage} ratio "
                f"{prev.ratio:.12g}"
            )

    strips = (
        SymmetricBody2D.strip(q1.alpha + HALF_PI, h1),
        SymmetricBody2D.strip(q2.alpha + HALF_PI, h2),
    )
    return ChainReport(rows, strips, r0, trace, violations, slack)


# ---------------------------------------------------------------------------
# Beta scan (hunting the good-strip configuration)


@dataclass(frozen=True)
class BetaRow:
    beta: float
    final_ratio: float
    axes: tuple[float, float]
    widths: tuple[float, float]
    deviation: float
    good: bool
    chain_ok: bool


@dataclass
class BetaScanReport:
    rows: list[BetaRow]
    beta0: Optional[float]

    @property
    def found(self) -> bool:
        return self.beta0 is not None


def beta_scan(
    K1: SymmetricBody2D,
    K2: SymmetricBody2D,
    betas: Sequence[float],
    k: int,
    radial=None,
    cone_fn: Optional[Callable[[float], Optional[Cone2D]]] = None,
    align_tol: float = 1e-3,
    slack: float = 1e-7,
) -> BetaScanReport:
    """Run the strip reduction under mu_(2,beta) for each beta on the grid.

    A row is flagged good when one output strip's normal matches the pole
    direction beta within align_tol (angles identified mod pi).
    """
    from .measures import RadialDensity

    rows = []
    beta0 = None
    for beta in betas:
        measure = AnisotropicMeasure2D(k, float(beta), radial or RadialDensity.gaussian())
        cone = cone_fn(float(beta)) if cone_fn is not None else None
        chain = reduce_to_strips(K1, K2, measure, cone=cone, slack=slack)
        s1, s2 = chain.strips
        normals = (s1.u, s2.u)
        dev = min(angle_dist_mod_pi(nrm, beta) for nrm in normals)
        good = dev <= align_tol
        rows.append(BetaRow(
            beta=float(beta),
            final_ratio=chain.final_ratio(),
            axes=(norm_angle(s1.u + HALF_PI), norm_angle(s2.u + HALF_PI)),
            widths=(s1.h, s2.h),
            deviation=dev,
            good=good,
            chain_ok=chain.passed,
        ))
        if good and beta0 is None:
            beta0 = float(beta)
    return BetaScanReport(rows, beta0)
