"""Manifold models and geodesic machinery.

Two model kinds share one interface: constant-curvature space forms in
standard charts (colatitude/longitude for K > 0, Cartesian for K = 0,
Poincare disk for K < 0) and embedded parametric surfaces F(u, v) in R^3.
Geodesics integrate x'' + Gamma(x', x') = 0 with a fixed-step classical
Runge-Kutta scheme; the scalar Jacobi equation j'' + K j = 0 rides along,
which is exact in dimension two. Space forms additionally expose closed-form
exp/log/distance used as warm starts and by the simulator's inner loop.

Sign conventions: Gamma^k_ij = (1/2) g^kl (d_i g_jl + d_j g_il - d_l g_ij);
Gauss curvature from the second fundamental form for embedded charts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charts import SurfaceChart
from .errors import (
    ConfigError,
    DomainExitError,
    NoConvergenceError,
    OutOfDomainError,
    SingularChartError,
    StepTooLargeError,
)

__all__ = [
    "ManifoldModel",
    "SpaceFormModel",
    "FlatModel",
    "SphereModel",
    "HyperbolicModel",
    "SurfaceModel",
    "PoleGeodesic",
    "space_form",
    "surface_model",
    "model_from_config",
    "jacobi_reference",
    "jacobi_reference_integral",
    "exp_map",
    "geodesic_shoot",
    "connect",
    "parallel_transport",
    "jacobi_scalar",
    "distance",
]

_DET_EPS = 1e-12
_DRIFT_TOL = 1e-6
# sin(pi) rounds to ~1.2e-16, so a conjugate point is flagged by a small
# positive threshold rather than an exact sign change.
_CONJ_TOL = 1e-12
_SHOOT_TOL = 1e-9
_SHOOT_MAX_ITER = 50
_SHOOT_FD_H = 1e-6


def jacobi_reference(K, u):
    """Normalized Jacobi solution J^K(u) of j'' + K j = 0, j(0)=0, j'(0)=1."""
    u = np.asarray(u, dtype=float)
    if K > 0:
        k = math.sqrt(K)
        out = np.sin(k * u) / k
    elif K < 0:
        k = math.sqrt(-K)
        out = np.sinh(k * u) / k
    else:
        out = u.copy()
    return out if out.ndim else float(out)


def jacobi_reference_integral(K, ell):
    """Integral of J^K over [0, ell]."""
    if K > 0:
        k = math.sqrt(K)
        return (1.0 - math.cos(k * ell)) / K
    if K < 0:
        k = math.sqrt(-K)
        return (math.cosh(k * ell) - 1.0) / (-K)
    return 0.5 * ell * ell


@dataclass
class PoleGeodesic:
    """Sampled unit-speed geodesic segment (one pole position)."""

    u: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    length: float
    jacobi: np.ndarray | None = None
    conjugate: bool = False

    @property
    def start(self):
        return self.points[0]

    @property
    def endpoint(self):
        return self.points[-1]

    @property
    def start_tangent(self):
        return self.tangents[0]

    @property
    def end_tangent(self):
        return self.tangents[-1]


class ManifoldModel:
    """Common interface: metric, Christoffels, curvature, geodesic RHS."""

    kind = "abstract"
    dim = 2
    # Positive curvature bound sup K, used to gate pole lengths; None if free.
    conjugate_scale = None

    def metric_at(self, p):
        raise NotImplementedError

    def christoffel_at(self, p):
        raise NotImplementedError

    def gauss_at(self, p):
        raise NotImplementedError

    def check_point(self, p):
        """Raise OutOfDomain/SingularChart when p is unusable."""

    def _geo_rhs(self, x, v):
        """Acceleration tuple -Gamma(v, v) at x; raises on bad points."""
        raise NotImplementedError

    # -- metric helpers ----------------------------------------------------

    def inner(self, p, a, b):
        g = self.metric_at(p)
        return float(np.asarray(a) @ g @ np.asarray(b))

    def norm(self, p, a):
        return math.sqrt(max(self.inner(p, a, a), 0.0))

    def unit(self, p, a):
        n = self.norm(p, a)
        if n < 1e-300:
            raise ValueError("cannot normalize a zero tangent vector")
        return np.asarray(a, dtype=float) / n

    def frame_at(self, p):
        """g-orthonormal frame (rows) built from the coordinate basis."""
        g = self.metric_at(p)
        n = self.dim
        basis = np.eye(n)
        frame = []
        for i in range(n):
            w = basis[i].astype(float)
            for e in frame:
                w = w - (w @ g @ e) * e
            nn = math.sqrt(max(float(w @ g @ w), 0.0))
            if nn < 1e-150:
                raise SingularChartError(f"degenerate frame at {p}")
            frame.append(w / nn)
        return np.array(frame)

    def tangent_from_angle(self, p, angle, frame=None):
        if frame is None:
            frame = self.frame_at(p)
        return math.cos(angle) * frame[0] + math.sin(angle) * frame[1]

    def angle_of(self, p, v, frame=None):
        if frame is None:
            frame = self.frame_at(p)
        g = self.metric_at(p)
        a = float(np.asarray(v) @ g @ frame[0])
        b = float(np.asarray(v) @ g @ frame[1])
        return math.atan2(b, a)

    def rotate(self, p, v, angle):
        frame = self.frame_at(p)
        return self.tangent_from_angle(
            p, self.angle_of(p, v, frame) + angle, frame)

    # -- optional closed-form geodesy (space forms override) ---------------

    has_closed_geodesy = False

    def exp_point(self, p, v, length):
        raise NotImplementedError

    def log_map(self, p, q):
        raise NotImplementedError

    def distance_closed(self, p, q):
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Space forms


class SpaceFormModel(ManifoldModel):
    kind = "spaceform"
    has_closed_geodesy = True

    def __init__(self, K, dim=2, periods=None):
        self.K = float(K)
        self.dim = int(dim)
        self.periods = periods


class FlatModel(SpaceFormModel):
    """Euclidean plane or 3-space; optional periodic identifications in 2D."""

    def __init__(self, dim=2, periods=None):
        if dim not in (2, 3):
            raise ConfigError("flat model supports dimension 2 or 3")
        if periods is not None:
            if dim != 2:
                raise ConfigError("periodic identifications need dimension 2")
            periods = tuple(None if x is None else float(x) for x in periods)
        super().__init__(0.0, dim, periods)

    def metric_at(self, p):
        return np.eye(self.dim)

    def christoffel_at(self, p):
        return np.zeros((self.dim,) * 3)

    def gauss_at(self, p):
        return 0.0

    def _geo_rhs(self, x, v):
        return (0.0,) * self.dim

    def exp_point(self, p, v, length):
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        q = p + length * v
        return q, v.copy()

    def log_map(self, p, q):
        d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
        L = float(np.linalg.norm(d))
        if L < 1e-300:
            raise ValueError("log map undefined for coincident points")
        return d / L, L

    def distance_closed(self, p, q):
        return float(np.linalg.norm(np.asarray(q, float) - np.asarray(p, float)))

    def fold(self, p):
        """Fold a covering-space point into the fundamental domain."""
        if self.periods is None:
            return np.asarray(p, dtype=float)
        out = np.asarray(p, dtype=float).copy()
        for i, per in enumerate(self.periods):
            if per is not None:
                out[i] = out[i] % per
        return out


class SphereModel(SpaceFormModel):
    """Round sphere of curvature K = k^2 in (colatitude, longitude)."""

    def __init__(self, K):
        if K <= 0:
            raise ConfigError("SphereModel needs K > 0")
        super().__init__(K, 2)
        self.k = math.sqrt(K)
        self.radius = 1.0 / self.k
        self.conjugate_scale = math.pi / self.k

    def check_point(self, p):
        th = float(p[0])
        if not 0.0 < th < math.pi:
            raise OutOfDomainError(
                f"colatitude {th!r} outside (0, pi)")
        if math.sin(th) ** 2 * self.radius ** 4 < _DET_EPS:
            raise SingularChartError(
                f"chart singular near the poles (theta={th!r})")

    def metric_at(self, p):
        self.check_point(p)
        r2 = self.radius ** 2
        return np.diag([r2, r2 * math.sin(float(p[0])) ** 2])

    def christoffel_at(self, p):
        self.check_point(p)
        th = float(p[0])
        G = np.zeros((2, 2, 2))
        G[0, 1, 1] = -math.sin(th) * math.cos(th)
        G[1, 0, 1] = G[1, 1, 0] = 1.0 / math.tan(th)
        return G

    def gauss_at(self, p):
        return self.K

    def _geo_rhs(self, x, v):
        th = x[0]
        s, c = math.sin(th), math.cos(th)
        if abs(s) < 1e-9:
            raise SingularChartError(f"geodesic hit chart pole (theta={th!r})")
        return (s * c * v[1] * v[1], -2.0 * (c / s) * v[0] * v[1])

    # chart <-> R^3 embedding on the unit sphere (lengths scaled by radius)

    @staticmethod
    def _embed(p):
        th, ph = float(p[0]), float(p[1])
        return np.array([math.sin(th) * math.cos(ph),
                         math.sin(th) * math.sin(ph),
                         math.cos(th)])

    @staticmethod
    def _frame3(p):
        th, ph = float(p[0]), float(p[1])
        e_th = np.array([math.cos(th) * math.cos(ph),
                         math.cos(th) * math.sin(ph),
                         -math.sin(th)])
        e_ph = np.array([-math.sin(ph), math.cos(ph), 0.0])
        return e_th, e_ph

    def _tangent3(self, p, v):
        # chart tangent (unit g-norm) -> unit tangent of the unit sphere
        e_th, e_ph = self._frame3(p)
        w = v[0] * e_th + v[1] * math.sin(float(p[0])) * e_ph
        return w * self.radius

    def _tangent_chart(self, p3, t3, ref_phi):
        th = math.acos(min(1.0, max(-1.0, float(p3[2]))))
        ph = math.atan2(float(p3[1]), float(p3[0]))
        # keep longitude continuous relative to the caller's reference
        ph = ref_phi + math.remainder(ph - ref_phi, math.tau)
        p = np.array([th, ph])
        e_th, e_ph = self._frame3(p)
        s = math.sin(th)
        if s < 1e-12:
            raise SingularChartError("endpoint at chart pole")
        a = float(t3 @ e_th) / self.radius
        b = float(t3 @ e_ph) / (s * self.radius)
        return p, np.array([a, b])

    def exp_point(self, p, v, length):
        X = self._embed(p)
        W = self._tangent3(p, np.asarray(v, dtype=float))
        psi = self.k * length
        Y = X * math.cos(psi) + W * math.sin(psi)
        T3 = -X * math.sin(psi) + W * math.cos(psi)
        return self._tangent_chart(Y, T3, ref_phi=float(p[1]))

    def log_map(self, p, q):
        X, Y = self._embed(p), self._embed(q)
        c = min(1.0, max(-1.0, float(X @ Y)))
        psi = math.acos(c)
        if psi < 1e-14:
            raise ValueError("log map undefined for coincident points")
        if math.pi - psi < 1e-12:
            raise ValueError("log map undefined for antipodal points")
        W = (Y - X * c) / math.sin(psi)
        _, v = self._tangent_chart(X, W, ref_phi=float(p[1]))
        # _tangent_chart normalizes against radius; W is unit in R^3 here
        return v, psi * self.radius

    def distance_closed(self, p, q):
        c = min(1.0, max(-1.0, float(self._embed(p) @ self._embed(q))))
        return math.acos(c) * self.radius


class HyperbolicModel(SpaceFormModel):
    """Hyperbolic plane of curvature K = -k^2 in the Poincare disk."""

    def __init__(self, K):
        if K >= 0:
            raise ConfigError("HyperbolicModel needs K < 0")
        super().__init__(K, 2)
        self.k = math.sqrt(-K)

    def check_point(self, p):
        r2 = float(p[0]) ** 2 + float(p[1]) ** 2
        if r2 >= 1.0:
            raise OutOfDomainError(f"point |z|^2={r2!r} outside the unit disk")

    def _lam(self, p):
        return (2.0 / self.k) / (1.0 - (p[0] ** 2 + p[1] ** 2))

    def metric_at(self, p):
        self.check_point(p)
        lam = self._lam(np.asarray(p, dtype=float))
        return np.eye(2) * lam ** 2

    def christoffel_at(self, p):
        self.check_point(p)
        x, y = float(p[0]), float(p[1])
        f = 1.0 - x * x - y * y
        px, py = 2.0 * x / f, 2.0 * y / f
        G = np.zeros((2, 2, 2))
        G[0, 0, 0] = px
        G[0, 0, 1] = G[0, 1, 0] = py
        G[0, 1, 1] = -px
        G[1, 0, 0] = -py
        G[1, 0, 1] = G[1, 1, 0] = px
        G[1, 1, 1] = py
        return G

    def gauss_at(self, p):
        return self.K

    def _geo_rhs(self, x, v):
        f = 1.0 - x[0] * x[0] - x[1] * x[1]
        if f <= 0.0:
            raise DomainExitError("geodesic left the Poincare disk",
                                  point=np.array(x))
        px, py = 2.0 * x[0] / f, 2.0 * x[1] / f
        a1 = -(px * v[0] * v[0] + 2.0 * py * v[0] * v[1] - px * v[1] * v[1])
        a2 = -(-py * v[0] * v[0] + 2.0 * px * v[0] * v[1] + py * v[1] * v[1])
        return (a1, a2)

    def exp_point(self, p, v, length):
        z = complex(p[0], p[1])
        vc = complex(v[0], v[1])
        r2 = 1.0 - abs(z) ** 2
        v0 = vc / r2
        u = v0 / abs(v0)
        rho = math.tanh(0.5 * self.k * length)
        zeta = u * rho
        den = 1.0 + z.conjugate() * zeta
        w = (zeta + z) / den
        # velocity of the unit-speed geodesic at the endpoint
        dzeta = u * 0.5 * self.k / math.cosh(0.5 * self.k * length) ** 2
        dw = (1.0 - abs(z) ** 2) / den ** 2 * dzeta
        lam_w = (2.0 / self.k) / (1.0 - abs(w) ** 2)
        t = dw / (lam_w * abs(dw)) if abs(dw) > 0 else dw
        return (np.array([w.real, w.imag]),
                np.array([t.real, t.imag]) if abs(dw) > 0 else
                np.array([0.0, 0.0]))

    def log_map(self, p, q):
        z = complex(p[0], p[1])
        w = complex(q[0], q[1])
        zeta = (w - z) / (1.0 - z.conjugate() * w)
        az = abs(zeta)
        if az < 1e-300:
            raise ValueError("log map undefined for coincident points")
        L = (2.0 / self.k) * math.atanh(az)
        vc = (zeta / az) * (1.0 - abs(z) ** 2) * (self.k / 2.0)
        return np.array([vc.real, vc.imag]), L

    def distance_closed(self, p, q):
        z = complex(p[0], p[1])
        w = complex(q[0], q[1])
        num = 2.0 * abs(z - w) ** 2
        den = (1.0 - abs(z) ** 2) * (1.0 - abs(w) ** 2)
        return math.acosh(1.0 + num / den) / self.k


def space_form(K, dim=2, periods=None):
    """Constant-curvature model; K != 0 restricted to dimension 2."""
    if K == 0:
        return FlatModel(dim=dim, periods=periods)
    if dim != 2:
        raise ConfigError(
            "curved space forms are implemented in dimension 2 only")
    if periods is not None:
        raise ConfigError("periodic identifications need K = 0")
    return SphereModel(K) if K > 0 else HyperbolicModel(K)


# ---------------------------------------------------------------------------
# Embedded surfaces


class SurfaceModel(ManifoldModel):
    kind = "surface"
    dim = 2

    def __init__(self, chart: SurfaceChart):
        self.chart = chart
        self.K = None

    def check_point(self, p):
        self.chart.check_domain(float(p[0]), float(p[1]))

    def _forms(self, u, v):
        ch = self.chart
        fu, fv = ch.du(u, v), ch.dv(u, v)
        E = fu[0] * fu[0] + fu[1] * fu[1] + fu[2] * fu[2]
        F = fu[0] * fv[0] + fu[1] * fv[1] + fu[2] * fv[2]
        G = fv[0] * fv[0] + fv[1] * fv[1] + fv[2] * fv[2]
        return fu, fv, E, F, G

    def metric_at(self, p):
        u, v = float(p[0]), float(p[1])
        self.check_point(p)
        _, _, E, F, G = self._forms(u, v)
        if E * G - F * F < _DET_EPS:
            raise SingularChartError(
                f"{self.chart.name}: metric singular at ({u!r}, {v!r})")
        return np.array([[E, F], [F, G]])

    def christoffel_at(self, p):
        u, v = float(p[0]), float(p[1])
        self.check_point(p)
        ch = self.chart
        fu, fv, E, F, G = self._forms(u, v)
        det = E * G - F * F
        if det < _DET_EPS:
            raise SingularChartError(
                f"{self.chart.name}: metric singular at ({u!r}, {v!r})")
        iuu, iuv, ivv = G / det, -F / det, E / det
        out = np.zeros((2, 2, 2))
        for idx, second in ((0, ch.duu(u, v)), (1, ch.duv(u, v)),
                            (2, ch.dvv(u, v))):
            c1 = second[0] * fu[0] + second[1] * fu[1] + second[2] * fu[2]
            c2 = second[0] * fv[0] + second[1] * fv[1] + second[2] * fv[2]
            g1 = iuu * c1 + iuv * c2
            g2 = iuv * c1 + ivv * c2
            if idx == 0:
                out[0, 0, 0], out[1, 0, 0] = g1, g2
            elif idx == 1:
                out[0, 0, 1] = out[0, 1, 0] = g1
                out[1, 0, 1] = out[1, 1, 0] = g2
            else:
                out[0, 1, 1], out[1, 1, 1] = g1, g2
        return out

    def gauss_at(self, p):
        u, v = float(p[0]), float(p[1])
        ch = self.chart
        fu, fv, E, F, G = self._forms(u, v)
        det = E * G - F * F
        if det < _DET_EPS:
            raise SingularChartError(
                f"{self.chart.name}: metric singular at ({u!r}, {v!r})")
        nx = fu[1] * fv[2] - fu[2] * fv[1]
        ny = fu[2] * fv[0] - fu[0] * fv[2]
        nz = fu[0] * fv[1] - fu[1] * fv[0]
        nn = math.sqrt(nx * nx + ny * ny + nz * nz)
        nx, ny, nz = nx / nn, ny / nn, nz / nn
        suu, suv, svv = ch.duu(u, v), ch.duv(u, v), ch.dvv(u, v)
        L = suu[0] * nx + suu[1] * ny + suu[2] * nz
        M = suv[0] * nx + suv[1] * ny + suv[2] * nz
        N = svv[0] * nx + svv[1] * ny + svv[2] * nz
        return (L * N - M * M) / det

    def _geo_rhs(self, x, v):
        u, w = x[0], x[1]
        ch = self.chart
        if not ch.contains(u, w):
            raise DomainExitError(
                f"{ch.name}: geodesic left the chart domain",
                point=np.array([u, w]))
        fu, fv = ch.du(u, w), ch.dv(u, w)
        E = fu[0] * fu[0] + fu[1] * fu[1] + fu[2] * fu[2]
        F = fu[0] * fv[0] + fu[1] * fv[1] + fu[2] * fv[2]
        G = fv[0] * fv[0] + fv[1] * fv[1] + fv[2] * fv[2]
        det = E * G - F * F
        if det < _DET_EPS:
            raise SingularChartError(
                f"{ch.name}: metric singular at ({u!r}, {w!r})")
        iuu, iuv, ivv = G / det, -F / det, E / det
        suu, suv, svv = ch.duu(u, w), ch.duv(u, w), ch.dvv(u, w)
        cu1 = suu[0] * fu[0] + suu[1] * fu[1] + suu[2] * fu[2]
        cu2 = suu[0] * fv[0] + suu[1] * fv[1] + suu[2] * fv[2]
        cm1 = suv[0] * fu[0] + suv[1] * fu[1] + suv[2] * fu[2]
        cm2 = suv[0] * fv[0] + suv[1] * fv[1] + suv[2] * fv[2]
        cv1 = svv[0] * fu[0] + svv[1] * fu[1] + svv[2] * fu[2]
        cv2 = svv[0] * fv[0] + svv[1] * fv[1] + svv[2] * fv[2]
        g1uu, g2uu = iuu * cu1 + iuv * cu2, iuv * cu1 + ivv * cu2
        g1uv, g2uv = iuu * cm1 + iuv * cm2, iuv * cm1 + ivv * cm2
        g1vv, g2vv = iuu * cv1 + iuv * cv2, iuv * cv1 + ivv * cv2
        a, b = v[0], v[1]
        return (-(g1uu * a * a + 2.0 * g1uv * a * b + g1vv * b * b),
                -(g2uu * a * a + 2.0 * g2uv * a * b + g2vv * b * b))


def surface_model(chart):
    if isinstance(chart, (str, dict)):
        from .charts import chart_from_config

        if isinstance(chart, str):
            chart = {"name": chart}
        chart = chart_from_config(chart)
    return SurfaceModel(chart)


def model_from_config(spec):
    """Build a model from a config mapping."""
    from .charts import chart_from_config

    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("model spec needs a 'kind' field")
    kind = spec["kind"]
    if kind == "spaceform":
        periods = spec.get("periods")
        if periods is not None:
            periods = tuple(periods)
        return space_form(float(spec.get("K", 0.0)),
                          dim=int(spec.get("dim", 2)),
                          periods=periods)
    if kind == "surface":
        if "chart" not in spec:
            raise ConfigError("surface model spec needs a 'chart' section")
        return surface_model(chart_from_config(spec["chart"]))
    raise ConfigError(f"unknown model kind {kind!r}")


# ---------------------------------------------------------------------------
# Geodesic integration


def _rk4_geodesic(model, x0, v0, length, n_steps, want_jacobi, collect):
    """Fixed-step RK4 on (x, v[, j, j']). Returns final state or samples."""
    n = model.dim
    h = length / n_steps if n_steps else 0.0
    x = tuple(float(c) for c in x0)
    v = tuple(float(c) for c in v0)
    j, jp = 0.0, 1.0
    rhs = model._geo_rhs
    if want_jacobi:
        gauss = model.gauss_at
    samples = None
    if collect:
        samples = ([np.array(x)], [np.array(v)], [j])

    def stage(xs, vs):
        a = rhs(xs, vs)
        if want_jacobi:
            return vs, a, gauss(xs)
        return vs, a, 0.0

    for _ in range(n_steps):
        k1x, k1v, K1 = stage(x, v)
        x2 = tuple(x[i] + 0.5 * h * k1x[i] for i in range(n))
        v2 = tuple(v[i] + 0.5 * h * k1v[i] for i in range(n))
        k2x, k2v, K2 = stage(x2, v2)
        x3 = tuple(x[i] + 0.5 * h * k2x[i] for i in range(n))
        v3 = tuple(v[i] + 0.5 * h * k2v[i] for i in range(n))
        k3x, k3v, K3 = stage(x3, v3)
        x4 = tuple(x[i] + h * k3x[i] for i in range(n))
        v4 = tuple(v[i] + h * k3v[i] for i in range(n))
        k4x, k4v, K4 = stage(x4, v4)
        x = tuple(x[i] + (h / 6.0) * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i])
                  for i in range(n))
        v = tuple(v[i] + (h / 6.0) * (k1v[i] + 2 * k2v[i] + 2 * k3v[i] + k4v[i])
                  for i in range(n))
        if want_jacobi:
            # j'' = -K j integrated with the same stages
            k1j, k1jp = jp, -K1 * j
            k2j, k2jp = jp + 0.5 * h * k1jp, -K2 * (j + 0.5 * h * k1j)
            k3j, k3jp = jp + 0.5 * h * k2jp, -K3 * (j + 0.5 * h * k2j)
            k4j, k4jp = jp + h * k3jp, -K4 * (j + h * k3j)
            j, jp = (j + (h / 6.0) * (k1j + 2 * k2j + 2 * k3j + k4j),
                     jp + (h / 6.0) * (k1jp + 2 * k2jp + 2 * k3jp + k4jp))
        if collect:
            samples[0].append(np.array(x))
            samples[1].append(np.array(v))
            samples[2].append(j)
    if collect:
        return samples
    return np.array(x), np.array(v)


def exp_map(model, p, v, length, steps=None, want_jacobi=True,
            allow_long_pole=False, check_drift=True):
    """Shoot a unit-speed geodesic of given length; return sampled pole.

    steps defaults to length/(length/200) = 200 fixed RK4 steps. The scalar
    Jacobi equation is co-integrated on 2D models (j(0)=0, j'(0)=1); the flag
    `conjugate` is set when j dips to zero or below inside (0, length].
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    model.check_point(p)
    nv = model.norm(p, v)
    if abs(nv - 1.0) > 1e-8:
        raise ValueError(
            f"exp_map needs a unit tangent (|v|_g = {nv!r}); normalize first")
    if length < 0:
        raise ValueError("pole length must be nonnegative")
    if (model.conjugate_scale is not None and not allow_long_pole
            and length >= model.conjugate_scale):
        raise ValueError(
            f"pole length {length!r} reaches the conjugate scale "
            f"{model.conjugate_scale!r}; pass allow_long_pole=True if intended")
    if steps is None:
        steps = 200
    steps = max(4, int(steps))
    if length == 0.0:
        u = np.array([0.0])
        return PoleGeodesic(u, p[None, :].copy(), v[None, :].copy(), 0.0,
                            jacobi=np.array([0.0]), conjugate=False)

    want_j = want_jacobi and model.dim == 2
    if isinstance(model, FlatModel):
        # straight lines; RK4 on zero curvature is exact, sample directly
        u = np.linspace(0.0, length, steps + 1)
        pts = p[None, :] + u[:, None] * v[None, :]
        tans = np.repeat(v[None, :], steps + 1, axis=0)
        jac = u.copy() if model.dim == 2 else None
        if want_jacobi and model.dim == 3:
            jac = u.copy()  # flat scalar reduction holds in any flat chart
        return PoleGeodesic(u, pts, tans, float(length), jacobi=jac,
                            conjugate=False)

    xs, vs, js = _rk4_geodesic(model, p, v, length, steps, want_j,
                               collect=True)
    u = np.linspace(0.0, length, steps + 1)
    pts = np.vstack(xs)
    tans = np.vstack(vs)
    jac = np.array(js) if want_j else None
    if check_drift:
        drift = max(abs(model.norm(pts[i], tans[i]) - 1.0)
                    for i in range(0, steps + 1, max(1, steps // 16)))
        if drift > _DRIFT_TOL:
            raise StepTooLargeError(
                f"unit-speed drift {drift:.3e} exceeds {_DRIFT_TOL}; "
                "reduce the pole step")
    conj = bool(want_j and steps > 0 and np.any(jac[1:] <= _CONJ_TOL))
    return PoleGeodesic(u, pts, tans, float(length), jacobi=jac,
                        conjugate=conj)


def _endpoint(model, p, v, length, steps):
    if isinstance(model, FlatModel):
        q = np.asarray(p, float) + length * np.asarray(v, float)
        return q, np.asarray(v, float)
    x, vv = _rk4_geodesic(model, p, v, length, steps, False, collect=False)
    return x, vv


def geodesic_shoot(model, p, q, length, v_guess=None, tol=_SHOOT_TOL,
                   max_iter=_SHOOT_MAX_ITER, steps=None,
                   allow_long_pole=False):
    """Solve exp_p(length * v) = q for the unit tangent v.

    Damped Newton on the direction angle with a forward-difference Jacobian
    (h = 1e-6); a closed-form warm start is used on space forms, v_guess on
    surfaces. Residual is measured on the same fixed-step endpoint map that
    exp_map uses, in chart coordinates.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    model.check_point(p)
    model.check_point(q)
    if steps is None:
        steps = 200
    if isinstance(model, FlatModel):
        d = q - p
        L = float(np.linalg.norm(d))
        if abs(L - length) > max(tol, 1e-9 * max(1.0, L)):
            raise NoConvergenceError(
                f"flat shoot: |q-p| = {L!r} does not match length {length!r}")
        return d / L

    frame = model.frame_at(p)
    if model.has_closed_geodesy:
        v0, _ = model.log_map(p, q)
        alpha = model.angle_of(p, v0, frame)
    elif v_guess is not None:
        alpha = model.angle_of(p, np.asarray(v_guess, float), frame)
    else:
        # chart chord as a last-resort start
        g = model.metric_at(p)
        d = q - p
        nn = math.sqrt(max(float(d @ g @ d), 1e-300))
        alpha = model.angle_of(p, d / nn, frame)

    def residual(a):
        v = model.tangent_from_angle(p, a, frame)
        end, _ = _endpoint(model, p, v, length, steps)
        return end - q

    r = residual(alpha)
    rn = float(np.linalg.norm(r))
    for _ in range(max_iter):
        if rn < tol:
            break
        jcol = (residual(alpha + _SHOOT_FD_H) - r) / _SHOOT_FD_H
        denom = float(jcol @ jcol)
        if denom < 1e-300:
            raise NoConvergenceError("shooting Jacobian vanished")
        step = -float(jcol @ r) / denom
        damp = 1.0
        while True:
            r_new = residual(alpha + damp * step)
            rn_new = float(np.linalg.norm(r_new))
            if rn_new <= rn or damp < 1e-6:
                break
            damp *= 0.5
        alpha += damp * step
        r, rn = r_new, rn_new
    if rn >= tol:
        raise NoConvergenceError(
            f"shooting stalled at residual {rn:.3e} (tol {tol:g})")
    return model.tangent_from_angle(p, alpha, frame)


def connect(model, p, q, v_guess=None, L_guess=None, steps=48,
            tol=1e-11, max_iter=_SHOOT_MAX_ITER):
    """Two-point geodesic: returns (unit v at p, length, unit tangent at q).

    Space forms use closed forms. Surfaces solve for (direction angle,
    length) jointly by damped Newton; the length column of the Jacobian is
    the endpoint velocity, the angle column is a forward difference.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if model.has_closed_geodesy:
        v, L = model.log_map(p, q)
        if isinstance(model, FlatModel):
            return v, L, v.copy()
        _, t_end = model.exp_point(p, v, L)
        return v, L, t_end

    frame = model.frame_at(p)
    g = model.metric_at(p)
    d = q - p
    chord = math.sqrt(max(float(d @ g @ d), 1e-300))
    if v_guess is not None:
        alpha = model.angle_of(p, np.asarray(v_guess, float), frame)
    else:
        alpha = model.angle_of(p, d / chord, frame)
    L = float(L_guess) if L_guess else chord

    def endpoint(a, ell):
        v = model.tangent_from_angle(p, a, frame)
        return _endpoint(model, p, v, ell, steps)

    end, t_end = endpoint(alpha, L)
    r = end - q
    rn = float(np.linalg.norm(r))
    scale = max(1.0, float(np.linalg.norm(q - p)))
    for _ in range(max_iter):
        if rn < tol * scale:
            break
        da = (endpoint(alpha + _SHOOT_FD_H, L)[0] - end) / _SHOOT_FD_H
        J = np.column_stack([da, t_end])
        try:
            delta = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergenceError(f"connect Jacobian singular: {exc}")
        damp = 1.0
        while True:
            a_new = alpha + damp * delta[0]
            L_new = max(L + damp * delta[1], 1e-12)
            end_new, t_new = endpoint(a_new, L_new)
            r_new = end_new - q
            rn_new = float(np.linalg.norm(r_new))
            if rn_new <= rn or damp < 1e-6:
                break
            damp *= 0.5
        alpha, L, end, t_end, r, rn = a_new, L_new, end_new, t_new, r_new, rn_new
    if rn >= max(tol * scale, 1e-9):
        raise NoConvergenceError(
            f"connect stalled at residual {rn:.3e} between {p} and {q}")
    v = model.tangent_from_angle(p, alpha, frame)
    t_end = t_end / max(model.norm(q, t_end), 1e-300)
    return v, L, t_end


def distance(model, p, q, **kw):
    """Geodesic distance; closed form on space forms, connect otherwise."""
    if model.has_closed_geodesy:
        return model.distance_closed(p, q)
    return connect(model, p, q, **kw)[1]


def parallel_transport(model, points, w0, substeps=4):
    """Transport w0 along a sampled curve; returns w at every sample.

    The curve is taken piecewise-linear in chart coordinates; on each
    segment dw/dt = -Gamma(xdot, w) is integrated with RK4 substeps.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 1:
        raise ValueError("points must be a (m, dim) sample array")
    n = model.dim
    w = np.asarray(w0, dtype=float).copy()
    out = [w.copy()]
    if isinstance(model, FlatModel):
        return np.repeat(w[None, :], len(pts), axis=0)

    def rhs(x, wv, xdot):
        G = model.christoffel_at(x)
        return -np.einsum("kij,i,j->k", G, xdot, wv)

    for a, b in zip(pts[:-1], pts[1:]):
        seg = b - a
        h = 1.0 / substeps
        for m in range(substeps):
            t0 = m * h
            x0 = a + t0 * seg
            k1 = rhs(x0, w, seg)
            k2 = rhs(a + (t0 + h / 2) * seg, w + 0.5 * h * k1, seg)
            k3 = rhs(a + (t0 + h / 2) * seg, w + 0.5 * h * k2, seg)
            k4 = rhs(a + (t0 + h) * seg, w + h * k3, seg)
            w = w + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(w.copy())
    return np.vstack(out)


def jacobi_scalar(model, p, v, length, steps=None, allow_long_pole=False):
    """Scalar Jacobi profile along the pole from p in direction v.

    Returns (u, j, conjugate). Uses the closed form on space forms and the
    co-integrated j'' + K(x(u)) j = 0 reduction on surfaces (exact in 2D).
    """
    if model.dim != 2 and not isinstance(model, FlatModel):
        raise ValueError("scalar Jacobi reduction needs a 2D model")
    if model.kind == "spaceform":
        if steps is None:
            steps = 200
        u = np.linspace(0.0, length, int(steps) + 1)
        j = jacobi_reference(model.K, u)
        conj = bool(np.any(j[1:] <= _CONJ_TOL))
        return u, j, conj
    pole = exp_map(model, p, v, length, steps=steps,
                   allow_long_pole=allow_long_pole)
    return pole.u, pole.jacobi, pole.conjugate
