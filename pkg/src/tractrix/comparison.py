"""Inequality harness for curvature-bounded comparison checks.

Certifies a Gauss-curvature window over the chart region a simulation
visited, then re-evaluates each comparison inequality from the raw trace
data: length/area bounds under one-sided curvature bounds, the
distance/curvature sandwich against constant-curvature closed forms for
geodesic tractors, and the leading-exponent sandwich. Hypothesis failures
(conjugate-point flags, invalid reference profiles) demote checks to
"skipped"; only a genuine inequality violation fails.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import spaceform
from .errors import (DomainViolationError, HypothesisViolatedError,
                     LowConfidenceFitError, OutOfDomainError,
                     SingularChartError, UncertifiedBoundsError)
from .functionals import leading_exponent_estimate
from .manifold import jacobi_reference, jacobi_reference_integral

_PASS_TOL = 1e-6
_GRID_N = 200
_GRID_MARGIN = 0.05
_PAD_FRACTION = 0.15
_METHODS = ("constant", "analytic", "grid")


@dataclass(frozen=True)
class CurvatureBounds:
    """Certified open window (K_lo, K_hi) for the Gauss curvature."""

    K_lo: float
    K_hi: float
    certified: str

    def __post_init__(self):
        if not self.K_lo < self.K_hi:
            raise UncertifiedBoundsError(
                f"empty curvature window [{self.K_lo!r}, {self.K_hi!r}]")


@dataclass(frozen=True)
class Check:
    """One re-evaluated inequality, stated as lhs <= rhs."""

    name: str
    inequality: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    skipped: bool = False
    reason: str = ""

    def line(self):
        if self.skipped:
            return f"[SKIP] {self.name}: {self.reason}"
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.name}: {self.inequality}  "
                f"lhs={self.lhs!r} rhs={self.rhs!r} margin={self.margin!r}")


@dataclass(frozen=True)
class ComparisonReport:
    checks: tuple
    scenario: str = ""

    @property
    def passed(self):
        return all(c.passed for c in self.checks if not c.skipped)

    @property
    def failures(self):
        return [c for c in self.checks if not c.skipped and not c.passed]

    def text(self):
        head = f"comparison report: {self.scenario or 'unnamed'}"
        return "\n".join([head] + [c.line() for c in self.checks])


def merge_reports(reports, scenario=""):
    checks = tuple(c for r in reports for c in r.checks)
    return ComparisonReport(checks=checks,
                            scenario=scenario or reports[0].scenario)


def _check(name, inequality, lhs, rhs):
    margin = rhs - lhs
    return Check(name=name, inequality=inequality, lhs=float(lhs),
                 rhs=float(rhs), margin=float(margin),
                 passed=bool(margin >= -_PASS_TOL))


def _skip(name, inequality, reason):
    return Check(name=name, inequality=inequality, lhs=math.nan,
                 rhs=math.nan, margin=math.nan, passed=True,
                 skipped=True, reason=reason)


def _require_certified(bounds):
    if bounds.certified not in _METHODS:
        raise UncertifiedBoundsError(
            f"bounds lack a certification method: {bounds.certified!r}")


# ---------------------------------------------------------------------------
# Bound certification


def _visited_rect(chart, trace):
    pts = np.vstack([trace.gamma, trace.eta])
    pad = _PAD_FRACTION * trace.ell
    rect = []
    for axis in range(2):
        lo = float(pts[:, axis].min()) - pad
        hi = float(pts[:, axis].max()) + pad
        dlo, dhi = chart.domain[axis]
        if dlo is not None:
            lo = max(lo, dlo)
        if dhi is not None:
            hi = min(hi, dhi)
        rect.append((lo, hi))
    return tuple(rect)


def _grid_range(model, rect):
    us = np.linspace(rect[0][0], rect[0][1], _GRID_N)
    vs = np.linspace(rect[1][0], rect[1][1], _GRID_N)
    lo = math.inf
    hi = -math.inf
    n = 0
    for u in us:
        for v in vs:
            if not model.chart.contains(u, v):
                continue
            try:
                K = model.gauss_at(np.array([u, v]))
            except (SingularChartError, OutOfDomainError):
                continue
            if not math.isfinite(K):
                continue
            lo = min(lo, K)
            hi = max(hi, K)
            n += 1
    if n == 0:
        raise UncertifiedBoundsError(
            f"no valid curvature samples on rect {rect!r}")
    return lo, hi


def certify_bounds(model, trace, method="auto", widen=1e-3):
    """Certified Gauss-curvature window over the region the run visited.

    Space forms give a constant window widened by `widen`, which must also
    absorb the quadrature error of the functionals evaluated against the
    window. Charts with a closed-form curvature range over a rectangle
    report it, widened enough to keep containment strict. Everything else
    falls back to a 200x200 grid sample over the padded bounding box of
    the tractrix and tractor tracks, with a 5% safety margin on the
    spread.
    """
    if getattr(model, "kind", "") == "spaceform":
        K = model.K
        w = max(widen, abs(K) * widen)
        return CurvatureBounds(K - w, K + w, "constant")
    rect = _visited_rect(model.chart, trace)
    if method in ("auto", "analytic"):
        rng = model.chart.gauss_range(rect)
        if rng is not None:
            lo, hi = rng
            w = max(widen, 1e-9 * (abs(lo) + abs(hi)), 1e-6 * (hi - lo))
            return CurvatureBounds(lo - w, hi + w, "analytic")
        if method == "analytic":
            raise UncertifiedBoundsError(
                f"chart {model.chart.name!r} has no closed-form range")
    lo, hi = _grid_range(model, rect)
    m = _GRID_MARGIN * max(hi - lo, 1e-6)
    return CurvatureBounds(lo - m, hi + m, "grid")


# ---------------------------------------------------------------------------
# Length/area inequalities under one-sided curvature bounds


def rauch_length_area_check(trace, sweep, bounds, scenario=""):
    """Four length/area inequalities against the certified window.

    An upper curvature bound forces the tractor track to be long and the
    swept area large; a lower bound caps both. All four sides re-evaluate
    from the sweep functionals; a reference profile that closes up before
    the pole end (sqrt(K)*ell >= pi) demotes that side to skipped.
    """
    _require_certified(bounds)
    L_g, L_e = sweep.L_gamma, sweep.L_eta
    A, ell = sweep.area, sweep.ell
    # Cusp atoms turn the tangent by pi while the pole neither advances the
    # tractor nor sweeps area, so they drop out of both sides here.
    atoms = sum(abs(c.turning_angle) for c in trace.cusps)
    KT = max(sweep.K_total - atoms, 0.0)
    conj = bool(np.any(trace.pole_conjugate))
    checks = []

    up_len = ("length_floor_upper_K",
              "L_eta >= sqrt(L_gamma^2 + (J_hi(ell)*K_total)^2)")
    up_area = ("area_floor_upper_K", "area >= K_total * int_0^ell J_hi")
    lo_len = ("length_cap_lower_K", "L_eta <= L_gamma + J_lo(ell)*K_total")
    lo_area = ("area_cap_lower_K", "area <= K_total * int_0^ell J_lo")

    if conj:
        reason = "conjugate point flagged along a pole"
        return ComparisonReport(tuple(
            _skip(n, q, reason)
            for n, q in (up_len, up_area, lo_len, lo_area)), scenario)

    if bounds.K_hi > 0 and math.sqrt(bounds.K_hi) * ell >= math.pi:
        reason = (f"sqrt(K_hi)*ell = "
                  f"{math.sqrt(bounds.K_hi) * ell:.6g} >= pi")
        checks += [_skip(*up_len, reason), _skip(*up_area, reason)]
    else:
        J_hi = jacobi_reference(bounds.K_hi, ell)
        I_hi = jacobi_reference_integral(bounds.K_hi, ell)
        floor = math.sqrt(L_g ** 2 + (J_hi * KT) ** 2)
        checks.append(_check(*up_len, lhs=floor, rhs=L_e))
        checks.append(_check(*up_area, lhs=KT * I_hi, rhs=A))

    if bounds.K_lo > 0 and math.sqrt(bounds.K_lo) * ell >= math.pi:
        reason = (f"sqrt(K_lo)*ell = "
                  f"{math.sqrt(bounds.K_lo) * ell:.6g} >= pi")
        checks += [_skip(*lo_len, reason), _skip(*lo_area, reason)]
    else:
        J_lo = jacobi_reference(bounds.K_lo, ell)
        I_lo = jacobi_reference_integral(bounds.K_lo, ell)
        checks.append(_check(*lo_len, lhs=L_e, rhs=L_g + J_lo * KT))
        checks.append(_check(*lo_area, lhs=A, rhs=KT * I_lo))

    return ComparisonReport(tuple(checks), scenario)


# ---------------------------------------------------------------------------
# Distance/curvature sandwich for geodesic tractors


def _sandwich_samples(trace, sol_hi, sol_lo):
    s_max = min(sol_hi.s_hi, sol_lo.s_hi)
    keep = (trace.s > 0) & (trace.s <= s_max)
    return keep


def toponogov_sandwich_check(trace, sol_hi, sol_lo, scenario=""):
    """Strict sandwich of measured d(s), kappa(s) between closed forms.

    Requires a geodesic tractor and a shared starting distance; both are
    hypothesis errors when violated. Conjugate-point flags demote all four
    checks to skipped. Reported lhs/rhs belong to the worst sample.
    """
    if not trace.tractor.is_geodesic:
        raise HypothesisViolatedError(
            "sandwich needs a geodesic tractor on the base model")
    if not sol_lo.K < sol_hi.K:
        raise HypothesisViolatedError(
            f"reference curvatures must satisfy K_lo < K_hi, got "
            f"{sol_lo.K!r} >= {sol_hi.K!r}")
    d0 = float(trace.d[0])
    for sol, tag in ((sol_hi, "upper"), (sol_lo, "lower")):
        if abs(sol.d0 - d0) > 1e-8:
            raise HypothesisViolatedError(
                f"{tag} reference starts at d0={sol.d0!r}, trace at {d0!r}")
        if abs(sol.ell - trace.ell) > 1e-12:
            raise HypothesisViolatedError(
                f"{tag} reference pole {sol.ell!r} != trace pole "
                f"{trace.ell!r}")

    names = (("dist_below_upper_form", "d_M(s) < d_hi(s)"),
             ("dist_above_lower_form", "d_lo(s) < d_M(s)"),
             ("kappa_below_upper_form", "kappa_M(s) < kappa_hi(s)"),
             ("kappa_above_lower_form", "kappa_lo(s) < kappa_M(s)"))
    if bool(np.any(trace.pole_conjugate)):
        reason = "conjugate point flagged along a pole"
        return ComparisonReport(
            tuple(_skip(n, q, reason) for n, q in names), scenario)

    keep = _sandwich_samples(trace, sol_hi, sol_lo)
    s = trace.s[keep]
    if s.size == 0:
        raise HypothesisViolatedError(
            "no positive-arclength samples inside both reference windows")
    d_m = trace.d[keep]
    d_hi = spaceform.dist_at(sol_hi, s)
    d_lo = spaceform.dist_at(sol_lo, s)
    k_hi = spaceform.kappa_at(sol_hi, s)
    k_lo = spaceform.kappa_at(sol_lo, s)
    k_m = trace.kappa[keep]
    ok = np.isfinite(k_m)

    def worst(name, inequality, lhs, rhs):
        i = int(np.argmin(rhs - lhs))
        return _check(name, inequality, lhs=lhs[i], rhs=rhs[i])

    checks = [worst(*names[0], lhs=d_m, rhs=d_hi),
              worst(*names[1], lhs=d_lo, rhs=d_m)]
    if np.any(ok):
        checks.append(worst(*names[2], lhs=k_m[ok], rhs=k_hi[ok]))
        checks.append(worst(*names[3], lhs=k_lo[ok], rhs=k_m[ok]))
    else:
        reason = "no finite curvature samples in the window"
        checks += [_skip(*names[2], reason), _skip(*names[3], reason)]
    return ComparisonReport(tuple(checks), scenario)


# ---------------------------------------------------------------------------
# Leading-exponent sandwich


def le_sandwich_check(trace, ell, bounds, scenario=""):
    """Fitted decay exponents of d(s), kappa(s) between the closed forms.

    The constant-curvature exponent is monotone in K, so the certified
    window brackets both fits. K_hi must keep sqrt(K_hi)*ell below pi/2
    for the decaying regime to exist; a low-confidence fit is an error
    rather than a verdict.
    """
    _require_certified(bounds)
    if bounds.K_hi > 0 and math.sqrt(bounds.K_hi) * ell >= math.pi / 2:
        raise DomainViolationError(
            f"sqrt(K_hi)*ell = {math.sqrt(bounds.K_hi) * ell:.6g} must "
            f"stay below pi/2 for a decaying profile")
    le_lo = spaceform.leading_exponent(bounds.K_lo, ell)
    le_hi = spaceform.leading_exponent(bounds.K_hi, ell)

    def fit_checks(label, values):
        lo_name = (f"{label}_le_above_lower",
                   f"Le(K_lo, ell) <= Le({label}_M)")
        hi_name = (f"{label}_le_below_upper",
                   f"Le({label}_M) <= Le(K_hi, ell)")
        keep = np.isfinite(values)
        if not np.any(keep):
            reason = f"no finite {label} samples to fit"
            return [_skip(*lo_name, reason), _skip(*hi_name, reason)]
        fit = leading_exponent_estimate(trace.s[keep], values[keep])
        if fit.low_confidence:
            raise LowConfidenceFitError(
                f"{label} fit R^2 = {fit.r2:.6f} below the gate")
        return [_check(*lo_name, lhs=le_lo, rhs=fit.slope),
                _check(*hi_name, lhs=fit.slope, rhs=le_hi)]

    checks = fit_checks("dist", trace.d) + fit_checks("kappa", trace.kappa)
    return ComparisonReport(tuple(checks), scenario)
