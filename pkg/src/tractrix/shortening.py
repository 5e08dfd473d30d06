"""Repeated tractor/tractrix processes that shorten curves to geodesics.

Each round replaces the current curve by a pole geodesic spliced onto the
tractrix that the curve drags behind it; the recorded iterate is the
spliced curve, whose length drops by the tractor/tractrix length gap until
the curve is a geodesic. Fixed-endpoint runs alternate the pulled end
between the two endpoints; free-loop runs keep orientation and track the
homotopy class as a constant winding vector on an unfolded periodic chart.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NotClosedError, PoleTooLongError
from .functionals import polyline_length
from .manifold import FlatModel, connect, distance, exp_map, space_form
from .tractrix_sim import SimParams, polyline_tractor, simulate

_TARGET_KNOTS = 200
_STEPS_PER_ROUND = 400
_POLE_SAMPLES = 16
_ENDPOINT_TOL = 1e-6


@dataclass(frozen=True)
class Iterate:
    """One spliced curve of the process: pole geodesic plus tractor."""

    points: np.ndarray
    length: float
    residual: float


@dataclass(frozen=True)
class ShorteningRun:
    mode: str
    ell: float
    initial_curve: np.ndarray
    iterates: tuple
    stop_reason: str
    P: np.ndarray | None = None
    Q: np.ndarray | None = None
    winding: np.ndarray | None = None

    @property
    def lengths(self):
        return np.array([it.length for it in self.iterates])

    @property
    def residuals(self):
        return np.array([it.residual for it in self.iterates])

    @property
    def final(self):
        return self.iterates[-1]


# ---------------------------------------------------------------------------
# Discrete geodesic residual


def _edge_lengths(model, pts):
    if model.has_closed_geodesy:
        return np.array([model.distance_closed(a, b)
                         for a, b in zip(pts[:-1], pts[1:])])
    out = np.empty(len(pts) - 1)
    for i, (a, b) in enumerate(zip(pts[:-1], pts[1:])):
        g = model.metric_at(0.5 * (a + b))
        d = b - a
        out[i] = math.sqrt(max(float(d @ g @ d), 0.0))
    return out


def geodesic_residual(model, points, closed=False):
    """Max discrete covariant acceleration over interior vertices.

    The polyline is treated as unit-speed, so the residual is in curvature
    units and vanishes on sampled geodesics. `closed` wraps the endpoint
    neighbors, shifting them by the winding displacement end - start so
    lifted periodic loops measure their seam vertex too.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 3:
        raise ValueError("need a (m >= 3, dim) polyline")
    if closed:
        D = pts[-1] - pts[0]
        pts = np.vstack([pts[-2] - D, pts[:-1], pts[1] + D])
    h = _edge_lengths(model, pts)
    worst = 0.0
    for i in range(1, len(pts) - 1):
        hm, hp = h[i - 1], h[i]
        if hm < 1e-12 or hp < 1e-12:
            continue
        x = pts[i]
        if model.has_closed_geodesy:
            v_out, _ = model.log_map(x, pts[i + 1])
            v_in, _ = model.log_map(x, pts[i - 1])
            acc = (v_out + v_in) / (0.5 * (hm + hp))
        else:
            vm = (x - pts[i - 1]) / hm
            vp = (pts[i + 1] - x) / hp
            vbar = 0.5 * (vm + vp)
            gamma = model.christoffel_at(x)
            acc = ((vp - vm) / (0.5 * (hm + hp))
                   + np.einsum("kij,i,j->k", gamma, vbar, vbar))
        worst = max(worst, model.norm(x, acc))
    return worst


# ---------------------------------------------------------------------------
# Round plumbing


def _downsample(pts, target=_TARGET_KNOTS):
    m = len(pts)
    if m > target:
        idx = np.unique(np.round(np.linspace(0, m - 1, target)).astype(int))
        pts = pts[idx]
    gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    keep = np.concatenate([[True], gaps > 1e-12])
    keep[-1] = True
    out = pts[keep]
    if len(out) >= 2 and np.linalg.norm(out[-1] - out[-2]) <= 1e-12:
        out = np.vstack([out[:-2], out[-1:]])
    return out


def _geodesic_points(model, a, b, samples=_POLE_SAMPLES):
    if model.has_closed_geodesy:
        v, L = model.log_map(a, b)
        fr = np.linspace(0.0, L, samples + 1)
        return np.array([model.exp_point(a, v, f)[0] for f in fr])
    v, L, _ = connect(model, a, b)
    pole = exp_map(model, a, v, L, steps=samples, want_jacobi=False)
    return pole.points


def _arclength_point(model, pts, target):
    """Chart point at metric arclength `target`, with its vertex cut."""
    h = _edge_lengths(model, pts)
    acc = 0.0
    for i, hi in enumerate(h):
        if acc + hi >= target - 1e-12:
            f = 0.0 if hi < 1e-12 else (target - acc) / hi
            return pts[i] + min(max(f, 0.0), 1.0) * (pts[i + 1] - pts[i]), i
        acc += hi
    return pts[-1].copy(), len(pts) - 2


def _splice_head(model, wagon, pts, ell, reach=None):
    """Replace the head arc of `pts` by a pole-aligned endpoint.

    The pole is shot from the wagon toward the curve point x at arclength
    `reach` (default ell), so the tractor [p1, x, tail] starts at distance
    ell from the wagon exactly and stays near the prior curve. Applied
    every round: replacing the head absorbs the backtracking that push
    phases leave near the pulled end, which would otherwise persist under
    reversal. The replaced arc is at least as long as the new chord, so
    iterate lengths stay monotone for any reach.
    """
    x, cut = _arclength_point(model, pts, ell if reach is None else reach)
    if model.has_closed_geodesy:
        v, _ = model.log_map(wagon, x)
        p1 = model.exp_point(wagon, v, ell)[0]
    else:
        v, _, _ = connect(model, wagon, x)
        p1 = exp_map(model, wagon, v, ell, steps=24,
                     want_jacobi=False).endpoint
    eta = _downsample(np.vstack([p1[None, :], x[None, :], pts[cut + 1:]]))
    if len(eta) < 2:
        raise PoleTooLongError(
            "pole consumes the whole curve; nothing left to pull")
    return eta


def _run_round(model, eta_pts, wagon, ell, steps):
    tractor = polyline_tractor(eta_pts)
    params = SimParams(dt=tractor.span / steps)
    return simulate(model, tractor, wagon, ell, params)


def _record(model, wagon, eta_pts, ell, closed):
    pole = _geodesic_points(model, wagon, eta_pts[0])
    curve = np.vstack([pole[:-1], eta_pts])
    length = ell + polyline_length(model, eta_pts)
    return Iterate(points=curve, length=float(length),
                   residual=geodesic_residual(model, curve, closed=closed))


# ---------------------------------------------------------------------------
# Fixed-endpoint process


def self_repeated(model, P, Q, initial, ell, tol=1e-6, max_iter=500,
                  steps_per_round=_STEPS_PER_ROUND):
    """Shorten a curve between fixed P and Q toward a geodesic.

    Each round pulls the wagon from one endpoint while the current curve,
    reversed, acts as tractor; the produced tractrix (reversed again)
    becomes the next tractor and the pulled end alternates. Stops when the
    residual or the per-round length decrease falls below tol.
    """
    if isinstance(model, FlatModel) and model.periods is not None:
        raise ConfigError(
            "fixed-endpoint shortening on periodic identifications is not "
            "supported; use loop_repeated for free classes")
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    pts = np.asarray(initial, dtype=float)
    if pts.ndim != 2 or len(pts) < 2 or pts.shape[1] != model.dim:
        raise ConfigError("initial curve must be a (m >= 2, dim) polyline")
    if (np.linalg.norm(pts[0] - P) > _ENDPOINT_TOL
            or np.linalg.norm(pts[-1] - Q) > _ENDPOINT_TOL):
        raise ConfigError("initial curve must connect P to Q")
    pts = np.vstack([P[None, :], pts[1:-1], Q[None, :]])
    dPQ = distance(model, P, Q)
    if dPQ < ell:
        raise PoleTooLongError(
            f"dist(P, Q) = {dPQ!r} is below the pole length {ell!r}")

    if len(pts) >= 3:
        res0 = geodesic_residual(model, pts)
        if res0 < tol:
            it = Iterate(points=pts, length=polyline_length(model, pts),
                         residual=res0)
            return ShorteningRun(mode="self_repeated", ell=float(ell),
                                 initial_curve=pts, iterates=(it,),
                                 stop_reason="residual", P=P, Q=Q)

    drag = pts
    wagon = P
    reach = ell
    iterates = []
    prev_len = math.inf
    stop = "max_iterations"
    for _ in range(max_iter):
        try:
            eta_pts = _splice_head(model, wagon, drag, ell, reach=reach)
        except PoleTooLongError:
            stop = "pole_exhausted"
            break
        it = _record(model, wagon, eta_pts, ell, closed=False)
        iterates.append(it)
        if it.residual < tol:
            stop = "residual"
            break
        if prev_len - it.length < tol:
            stop = "length_plateau"
            break
        prev_len = it.length
        trace = _run_round(model, eta_pts, wagon, ell, steps_per_round)
        far = eta_pts[-1]
        drag = _downsample(trace.gamma)[::-1]
        wagon = far
        reach = 2.0 * ell
    return ShorteningRun(mode="self_repeated", ell=float(ell),
                         initial_curve=pts, iterates=tuple(iterates),
                         stop_reason=stop, P=P, Q=Q)


# ---------------------------------------------------------------------------
# Free-loop process


def loop_repeated(model, loop, ell, tol=1e-6, max_iter=500,
                  steps_per_round=_STEPS_PER_ROUND):
    """Shorten a closed loop toward the geodesic of its free class.

    Supported on flat models with periodic identifications: the loop is
    given as a lift whose endpoint difference is the winding vector, the
    whole process runs in the universal cover, and the winding stays
    constant by construction. Orientation is kept round to round.
    """
    if not isinstance(model, FlatModel) or model.periods is None:
        raise ConfigError(
            "loop shortening needs a flat model with periodic "
            "identifications")
    periods = model.periods
    pts = np.asarray(loop, dtype=float)
    if pts.ndim != 2 or len(pts) < 2 or pts.shape[1] != 2:
        raise ConfigError("loop must be a (m >= 2, 2) polyline lift")
    W = np.empty(2)
    for axis, p in enumerate(periods):
        w = pts[-1, axis] - pts[0, axis]
        if p is None:
            if abs(w) > _ENDPOINT_TOL:
                raise NotClosedError(
                    f"lift endpoint offset {w!r} on a non-periodic axis")
            W[axis] = 0.0
        else:
            k = round(w / p)
            if abs(w - k * p) > _ENDPOINT_TOL:
                raise NotClosedError(
                    f"lift endpoint offset {w!r} is not a multiple of the "
                    f"period {p!r}")
            W[axis] = k * p
    if not np.any(W):
        raise ConfigError(
            "loop is contractible; free-class shortening needs nonzero "
            "winding")
    inj = min(p for p in periods if p is not None) / 2.0
    if ell >= inj:
        raise PoleTooLongError(
            f"pole length {ell!r} reaches the injectivity bound {inj!r}")
    pts = pts.copy()
    pts[-1] = pts[0] + W

    cover = space_form(0.0, dim=2)
    res0 = geodesic_residual(cover, pts, closed=True)
    if res0 < tol:
        it = Iterate(points=pts, length=polyline_length(cover, pts),
                     residual=res0)
        return ShorteningRun(mode="loop_repeated", ell=float(ell),
                             initial_curve=pts, iterates=(it,),
                             stop_reason="residual", winding=W)

    drag = pts
    wagon = pts[0].copy()
    reach = ell
    iterates = []
    prev_len = math.inf
    stop = "max_iterations"
    for _ in range(max_iter):
        eta_pts = _splice_head(cover, wagon, drag, ell, reach=reach)
        it = _record(cover, wagon, eta_pts, ell, closed=True)
        iterates.append(it)
        if it.residual < tol:
            stop = "residual"
            break
        if prev_len - it.length < tol:
            stop = "length_plateau"
            break
        prev_len = it.length
        trace = _run_round(cover, eta_pts, wagon, ell, steps_per_round)
        drag = _downsample(trace.gamma)
        wagon = drag[-1] - W
        reach = 2.0 * ell
    return ShorteningRun(mode="loop_repeated", ell=float(ell),
                         initial_curve=pts, iterates=tuple(iterates),
                         stop_reason=stop, winding=W)
