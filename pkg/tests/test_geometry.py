import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from swhops import rng
from swhops.errors import ValidationError
from swhops.geometry import (
    Domain,
    Point,
    annulus_index,
    dist,
    region_area_minus_ball,
    sample_uniform_domain,
    sample_uniform_minus_ball,
)


class FixedStream:
    """Feeds a scripted sequence of unit draws (cycling)."""

    def __init__(self, values):
        self.values = list(values)
        self.i = 0

    def u01(self):
        v = self.values[self.i % len(self.values)]
        self.i += 1
        return v


# ---------------------------------------------------------------- dist


def test_dist_pythagorean_triple():
    assert dist(Point(0, 0), Point(3, 4)) == 5.0


def test_dist_identity():
    assert dist(Point(2.5, -7.1), Point(2.5, -7.1)) == 0.0


def test_dist_unit_diagonal_high_precision():
    # Oracle: 200-digit square root, compared at double precision.
    mpmath.mp.dps = 200
    expected = float(mpmath.sqrt(2))
    assert dist(Point(0, 0), Point(1, 1)) == pytest.approx(expected, abs=1e-15)


def test_dist_symmetry_and_triangle_inequality():
    # Property run over 1e4 random triples.
    u = rng.u01_block(rng.stream_seed(11, 0), 0, 60_000).reshape(10_000, 6) * 100 - 50
    for ax, ay, bx, by, cx, cy in u[:10_000]:
        a, b, c = Point(ax, ay), Point(bx, by), Point(cx, cy)
        ab, ba = dist(a, b), dist(b, a)
        assert ab == ba >= 0.0
        assert dist(a, c) <= ab + dist(b, c) + 1e-12


def test_point_rejects_non_finite():
    with pytest.raises(ValidationError):
        Point(float("nan"), 0.0)
    with pytest.raises(ValidationError):
        Point(0.0, float("inf"))


# ---------------------------------------------------------------- annulus_index


def test_annulus_index_floor_cases():
    assert annulus_index(2.5, 1.0) == 2
    assert annulus_index(0.0, 1.0) == 0
    # Exact band boundary is half-open at k*r.
    assert annulus_index(2.0, 1.0) == 2
    assert annulus_index(3 * 0.5, 0.5) == 3


def test_annulus_index_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        annulus_index(1.0, 0.0)
    with pytest.raises(ValidationError):
        annulus_index(1.0, -2.0)
    with pytest.raises(ValidationError):
        annulus_index(-0.5, 1.0)


def test_annulus_index_exact_rational_boundaries():
    # Fraction arithmetic keeps k*r on the k side even for non-dyadic r.
    r = 0.7
    d = float(Fraction(7, 10) * 4)  # exactly representable? verified below
    k = annulus_index(d, r)
    assert k == math.floor(Fraction(d) / Fraction(r))


# ---------------------------------------------------------------- sampling


def test_sample_uniform_domain_scales_unit_draws():
    p = sample_uniform_domain(FixedStream([0.5, 0.5]), Domain(10.0))
    assert (p.x, p.y) == (5.0, 5.0)


def test_sample_uniform_domain_mean_and_containment():
    dom = Domain(7.0)
    s = rng.Stream(rng.stream_seed(21, 0))
    n = 100_000
    block = s.u01_block(2 * n) * dom.R
    xs, ys = block[0::2], block[1::2]
    assert np.all((xs >= 0) & (xs <= dom.R) & (ys >= 0) & (ys <= dom.R))
    # 4 sigma of the uniform-mean estimator, sigma = R/sqrt(12 n).
    bound = 4 * dom.R / math.sqrt(12 * n)
    assert abs(xs.mean() - dom.R / 2) < bound
    assert abs(ys.mean() - dom.R / 2) < bound


def test_minus_ball_zero_radius_reduces_to_uniform():
    dom = Domain(5.0)
    a = sample_uniform_domain(rng.Stream(rng.stream_seed(3, 1)), dom)
    b = sample_uniform_minus_ball(rng.Stream(rng.stream_seed(3, 1)), dom, Point(2, 2), 0.0)
    assert (a.x, a.y) == (b.x, b.y)


def test_minus_ball_never_inside_ball():
    dom = Domain(10.0)
    center = Point(4.0, 6.0)
    radius = 2.5
    s = rng.Stream(rng.stream_seed(5, 2))
    for _ in range(2000):
        p = sample_uniform_minus_ball(s, dom, center, radius)
        assert dom.contains(p)
        assert dist(p, center) >= radius


def test_minus_ball_rejects_covering_ball():
    with pytest.raises(ValidationError):
        sample_uniform_minus_ball(rng.Stream(1), Domain(1.0), Point(0.5, 0.5), 5.0)


def test_minus_ball_rect_fraction_matches_quadrature():
    # Fraction of samples in a test rectangle = area(A - B)/area(D - B), 4 sigma.
    dom = Domain(10.0)
    center = Point(5.0, 5.0)
    radius = 2.0
    rect = (3.0, 8.0, 2.0, 6.0)
    num = region_area_minus_ball(dom, rect, center, radius)
    den = region_area_minus_ball(dom, (0, dom.R, 0, dom.R), center, radius)
    p_pred = num / den
    s = rng.Stream(rng.stream_seed(8, 4))
    n = 40_000
    hits = 0
    for _ in range(n):
        p = sample_uniform_minus_ball(s, dom, center, radius)
        if rect[0] <= p.x <= rect[1] and rect[2] <= p.y <= rect[3]:
            hits += 1
    sigma = math.sqrt(p_pred * (1 - p_pred) / n)
    assert abs(hits / n - p_pred) < 4 * sigma


# ---------------------------------------------------------------- areas


def test_area_disjoint_rect_is_exact():
    dom = Domain(20.0)
    assert region_area_minus_ball(dom, (0, 3, 0, 2), Point(15, 15), 1.0) == 6.0


def test_area_full_square_minus_interior_ball():
    dom = Domain(20.0)
    r = 1.0
    a = region_area_minus_ball(dom, (0, 20, 0, 20), Point(10, 10), r)
    # Midpoint quadrature at cell = r/200; error bound ~ perimeter * cell.
    assert abs(a - (400 - math.pi * r * r)) < 4 * r * (r / 200.0)


def test_area_corner_ball_vs_monte_carlo():
    # Ball centered on a rect corner, ball inside rect: quadrature vs a
    # 1e6-point Monte Carlo hit count (independent oracle).
    dom = Domain(10.0)
    rect = (2.0, 8.0, 2.0, 8.0)
    center = Point(5.0, 5.0)
    radius = 1.5
    a = region_area_minus_ball(dom, rect, center, radius)
    n = 1_000_000
    u = rng.u01_block(rng.stream_seed(77, 0), 0, 2 * n)
    xs = rect[0] + u[0::2] * (rect[1] - rect[0])
    ys = rect[2] + u[1::2] * (rect[3] - rect[2])
    outside = (xs - center.x) ** 2 + (ys - center.y) ** 2 >= radius * radius
    p_hat = outside.mean()
    rect_area = (rect[1] - rect[0]) * (rect[3] - rect[2])
    sigma = math.sqrt(p_hat * (1 - p_hat) / n) * rect_area
    assert abs(a - p_hat * rect_area) < 4 * sigma + 0.01


def test_area_ball_on_rect_corner_quarter():
    dom = Domain(10.0)
    rect = (4.0, 9.0, 4.0, 9.0)
    radius = 1.0
    a = region_area_minus_ball(dom, rect, Point(4.0, 4.0), radius)
    assert abs(a - (25.0 - math.pi / 4)) < 0.01


def test_area_monotone_in_rect():
    dom = Domain(12.0)
    center = Point(6.0, 6.0)
    radius = 1.8
    s = rng.Stream(rng.stream_seed(31, 3))
    for _ in range(25):
        x0, y0 = s.u01() * 5, s.u01() * 5
        w, h = s.u01() * 3, s.u01() * 3
        grow = 1.0 + s.u01() * 2
        small = (x0, x0 + w, y0, y0 + h)
        big = (x0, min(12.0, x0 + w + grow), y0, min(12.0, y0 + h + grow))
        assert region_area_minus_ball(dom, big, center, radius) >= region_area_minus_ball(
            dom, small, center, radius
        ) - 1e-9


def test_rect_outside_domain_rejected():
    with pytest.raises(ValidationError):
        region_area_minus_ball(Domain(5.0), (0, 6, 0, 1), Point(1, 1), 0.5)
