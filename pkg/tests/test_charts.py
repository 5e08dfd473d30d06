import math

import numpy as np
import pytest

from tractrix.charts import (
    EllipsoidChart,
    GraphChart,
    HillyChart,
    ParaboloidChart,
    PlaneChart,
    PseudosphereChart,
    SphereChart,
    chart_from_config,
)
from tractrix.errors import ConfigError, OutOfDomainError

CHARTS = [
    (SphereChart(1.0), (1.1, 0.4)),
    (SphereChart(2.5), (0.7, -1.2)),
    (EllipsoidChart(1.0, 1.0, 1.2), (1.0, 0.3)),
    (EllipsoidChart(1.5, 0.8, 1.1), (0.9, 2.0)),
    (PseudosphereChart(1.0), (1.3, 0.5)),
    (ParaboloidChart(), (0.3, -0.2)),
    (HillyChart(0.5, 1.0), (0.8, 1.7)),
    (PlaneChart(), (0.2, 0.9)),
    (GraphChart(poly=[(2, 1, 0.5), (1, 0, -1.0), (0, 3, 0.25)],
                sinsin=[(0.3, 2.0, 0.1, 1.5, -0.2)]), (0.4, 0.6)),
]


def _central(f, u, v, h, wrt):
    if wrt == "u":
        a, b = f(u + h, v), f(u - h, v)
    else:
        a, b = f(u, v + h), f(u, v - h)
    return [(x - y) / (2 * h) for x, y in zip(a, b)]


@pytest.mark.parametrize("chart,pt", CHARTS, ids=lambda c: getattr(c, "name", str(c)))
def test_first_derivatives_match_finite_differences(chart, pt):
    u, v = pt
    h = 1e-5
    for wrt, an in (("u", chart.du(u, v)), ("v", chart.dv(u, v))):
        fd = _central(chart.point, u, v, h, wrt)
        assert np.allclose(an, fd, atol=5e-9, rtol=1e-7)


@pytest.mark.parametrize("chart,pt", CHARTS, ids=lambda c: getattr(c, "name", str(c)))
def test_second_derivatives_match_finite_differences(chart, pt):
    u, v = pt
    h = 1e-5
    cases = [
        (chart.duu(u, v), chart.du, "u"),
        (chart.duv(u, v), chart.du, "v"),
        (chart.duv(u, v), chart.dv, "u"),
        (chart.dvv(u, v), chart.dv, "v"),
    ]
    for an, f, wrt in cases:
        fd = _central(f, u, v, h, wrt)
        assert np.allclose(an, fd, atol=5e-8, rtol=1e-6)


def test_sphere_domain_check():
    ch = SphereChart(1.0)
    with pytest.raises(OutOfDomainError):
        ch.check_domain(-0.1, 0.0)
    with pytest.raises(OutOfDomainError):
        ch.check_domain(3.3, 0.0)
    ch.check_domain(1.0, 100.0)  # longitude unbounded


def test_pseudosphere_domain_excludes_rim():
    ch = PseudosphereChart(1.0)
    with pytest.raises(OutOfDomainError):
        ch.check_domain(-0.5, 0.0)
    assert not ch.contains(-0.5, 0.0)


def test_exact_curvature_ranges():
    rect = ((0.9, 1.3), (0.0, 2.0))
    assert SphereChart(2.0).gauss_range(rect) == (0.25, 0.25)
    assert PlaneChart().gauss_range(rect) == (0.0, 0.0)
    assert PseudosphereChart(1.0).gauss_range(rect) == (-1.0, -1.0)

    lo, hi = ParaboloidChart().gauss_range(((0.0, 0.3), (-0.2, 0.0)))
    assert hi == 4.0  # rect contains the apex
    assert lo == pytest.approx(1.7313019390581717, rel=1e-12)

    lo, hi = EllipsoidChart(1, 1, 1.2).gauss_range(((1.0, math.pi / 2), (0, 1)))
    assert lo == pytest.approx(0.69444444444444444, rel=1e-12)
    assert hi == pytest.approx(0.83712683256463423, rel=1e-12)
    # general ellipsoid has no closed-form range here
    assert EllipsoidChart(1.5, 0.8, 1.1).gauss_range(rect) is None


def test_chart_from_config():
    ch = chart_from_config({"name": "ellipsoid", "a": 1, "b": 1, "c": 1.2})
    assert isinstance(ch, EllipsoidChart)
    assert chart_from_config("paraboloid").name == "paraboloid"
    with pytest.raises(ConfigError):
        chart_from_config({"name": "torus"})
    with pytest.raises(ConfigError):
        chart_from_config({"name": "sphere", "radius": -1})
    with pytest.raises(ConfigError):
        chart_from_config({"name": "sphere", "bogus": 2})
