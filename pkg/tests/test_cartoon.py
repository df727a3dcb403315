import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from scatstab import (
    CartoonSpec, DomainB, Grid, Signal, SmoothPart, boundary_length, decay_constant,
    estimate_size, l2_norm, sample_cartoon, verify_decay,
)

G1 = Grid.regular(1, 1024, 32.0)
G2 = Grid.regular(2, 128, 8.0)


def polygon_length(points):
    closed = np.vstack([points, points[:1]])
    return float(np.sum(np.linalg.norm(np.diff(closed, axis=0), axis=1)))


def test_indicator_cartoon():
    spec = CartoonSpec(SmoothPart.zero(), SmoothPart.constant(1.0), DomainB.interval(-1, 1))
    g = Grid(1, (8192,), 2.0**-10)
    f = sample_cartoon(spec, g)
    x = g.points()[..., 0]
    np.testing.assert_array_equal(f.samples, ((x >= -1) & (x < 1)).astype(float))


def test_zero_cartoon():
    spec = CartoonSpec(SmoothPart.zero(), SmoothPart.zero(), DomainB.disc(1.0))
    assert np.all(sample_cartoon(spec, G2).samples == 0)
    assert estimate_size(spec, G2).K == 0


def test_cartoon_without_f2_is_its_smooth_part():
    part = SmoothPart.gaussian(0.7, (0.2, -0.1), 0.8)
    spec = CartoonSpec(part, SmoothPart.zero(), DomainB.disc(1.0))
    np.testing.assert_array_equal(sample_cartoon(spec, G2).samples, part(G2.points()))


def test_sampling_is_linear_in_the_parts():
    dom = DomainB.ellipse(1.5, 0.8, angle=0.3)
    a, b = SmoothPart.gaussian(1.0, 0.0, 1.0), SmoothPart.gaussian(0.5, (0.3, 0.3), 0.6)
    c, d = SmoothPart.bump(2.0, 0.0, 1.5, 3), SmoothPart.constant(0.4)
    lhs = sample_cartoon(CartoonSpec(a, c, dom), G2) + sample_cartoon(CartoonSpec(b, d, dom), G2)
    pts = G2.points()
    rhs = a(pts) + b(pts) + dom.contains(pts) * (c(pts) + d(pts))
    np.testing.assert_allclose(lhs.samples, rhs, atol=1e-14)


def test_membership_triangle_inequality():
    f1, f2 = SmoothPart.gaussian(1.0, 0.0, 0.7), SmoothPart.gaussian(2.0, (0.5, 0.0), 0.5)
    spec = CartoonSpec(f1, f2, DomainB.star(1.0, [(3, 0.2, 0.0)]))
    pts = G2.points()
    total = l2_norm(sample_cartoon(spec, G2))
    assert total <= l2_norm(Signal(G2, f1(pts))) + l2_norm(Signal(G2, f2(pts)))


def test_domain_outside_safe_region_is_rejected():
    spec = CartoonSpec(SmoothPart.zero(), SmoothPart.constant(), DomainB.disc(3.0))
    with pytest.raises(ValueError):
        sample_cartoon(spec, G2)


def test_interval_membership_is_half_open():
    dom = DomainB.interval(-1, 1)
    assert dom.contains(np.array([[-1.0], [1.0], [0.999]])).tolist() == [True, False, True]


def test_domain_validation():
    with pytest.raises(ValueError):
        DomainB.interval(1, 1)
    with pytest.raises(ValueError):
        DomainB.disc(0.0)
    with pytest.raises(ValueError):
        DomainB.star(0.5, [(2, 0.6, 0.0)])
    with pytest.raises(ValueError):
        DomainB.disc(1.0).contains(np.zeros((3, 1)))


def test_boundary_length_simple_shapes():
    assert boundary_length(DomainB.interval(-1, 1)) == 2.0
    assert boundary_length(DomainB.disc(1.0)) == pytest.approx(2 * math.pi, rel=1e-15)
    assert boundary_length(DomainB.disc(0.5)) == pytest.approx(math.pi, rel=1e-15)


def test_ellipse_perimeter_against_polygon():
    t = np.linspace(0, 2 * np.pi, 200_000, endpoint=False)
    poly = polygon_length(np.stack([2 * np.cos(t), np.sin(t)], axis=1))
    assert boundary_length(DomainB.ellipse(2.0, 1.0, angle=0.4)) == pytest.approx(poly, rel=1e-5)


def test_star_perimeter_against_polygon():
    dom = DomainB.star(1.0, [(3, 0.2, 0.05), (5, 0.0, 0.1)])
    t = np.linspace(0, 2 * np.pi, 200_000, endpoint=False)
    r = 1.0 + 0.2 * np.cos(3 * t) + 0.05 * np.sin(3 * t) + 0.1 * np.sin(5 * t)
    poly = polygon_length(np.stack([r * np.cos(t), r * np.sin(t)], axis=1))
    assert boundary_length(dom) == pytest.approx(poly, rel=1e-5)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1.5, 1.5, (50, 2))
    h = 1e-6
    for part in (SmoothPart.gaussian(1.3, (0.2, 0.1), 0.7),
                 SmoothPart.mixture([(1.0, (0.0, 0.0), 1.0), (-0.5j, (0.5, 0.5), 0.4)]),
                 SmoothPart.bump(0.8, (0.1, 0.0), 1.2, 3)):
        grad = part.gradient(pts)
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            fd = (part(pts + e) - part(pts - e)) / (2 * h)
            np.testing.assert_allclose(grad[:, j], fd, atol=1e-7)


def test_decay_constant_of_gaussian_matches_optimizer():
    a, w = 1.0, 1.0
    ratio = lambda x: -abs(a * x / w**2 * math.exp(-x * x / (2 * w * w))) * math.sqrt(1 + x * x)
    best = optimize.minimize_scalar(ratio, bounds=(0, 5), method="bounded", options={"xatol": 1e-10})
    assert decay_constant(SmoothPart.gaussian(a, 0.0, w), G1) == pytest.approx(-best.fun, rel=1e-4)


def test_verify_decay_outcomes():
    unit = SmoothPart.gaussian(1.0, 0.0, 1.0)
    assert verify_decay(unit, 10.0, G1).passed
    assert verify_decay(SmoothPart.zero(), 1e-9, G1).passed
    # unit-slope bump far from the origin, where <x>^{-1} is about 0.1
    amp = 1.0 / (math.sqrt(2) * math.exp(-0.5))
    far = SmoothPart.gaussian(amp, 10.0, 1.0)
    result = verify_decay(far, 1.0, G1)
    assert not result.passed and not result
    assert 6.0 < result.point[0] < 10.0
    assert result.worst_ratio > 5


def test_size_of_indicator_and_disc():
    ind = CartoonSpec(SmoothPart.zero(), SmoothPart.constant(1.0), DomainB.interval(-1, 1))
    assert estimate_size(ind, G1).K == 2.0
    disc = CartoonSpec(SmoothPart.zero(), SmoothPart.constant(1.0), DomainB.disc(1.0))
    assert estimate_size(disc, G2).K == pytest.approx(2 * math.pi)


@given(st.floats(1.0, 50.0))
def test_size_scales_with_f2(c):
    spec = CartoonSpec(SmoothPart.zero(), SmoothPart.gaussian(0.8, (0.0, 0.0), 1.0), DomainB.disc(1.0))
    base = estimate_size(spec, G2)
    scaled = estimate_size(spec.scaled_f2(c), G2)
    assert scaled.f2_sup == pytest.approx(c * base.f2_sup, rel=1e-14)


def test_declared_size_check():
    spec = CartoonSpec(SmoothPart.zero(), SmoothPart.constant(3.0), DomainB.disc(1.0), size=5.0)
    problems = spec.check(G2)
    assert any("boundary" in p for p in problems)
    ok = CartoonSpec(SmoothPart.zero(), SmoothPart.constant(1.0), DomainB.disc(1.0), size=7.0)
    assert ok.check(G2) == []


def test_multi_component_sup_is_sampled():
    mix = SmoothPart.mixture([(1.0, 0.0, 1.0), (1.0, 0.1, 1.0)])
    assert mix.sup_abs(G1) == pytest.approx(2 * math.exp(-0.05**2 / 2), rel=1e-5)
    with pytest.raises(ValueError):
        mix.sup_abs()


def test_smooth_part_validation():
    with pytest.raises(ValueError):
        SmoothPart("spline")
    with pytest.raises(ValueError):
        SmoothPart.gaussian(1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        SmoothPart.bump(1.0, 0.0, 1.0, 1)
