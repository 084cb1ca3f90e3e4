import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heg.config import TOL
from heg.geometry import Beta, Overlap, Shape, contact_data, overlap_test
from heg.oracle import finite_difference, overlap_area, overlap_area_estimate, time_scan

HALF_PI = math.pi / 2


def lens_area(r, D):
    if D >= 2 * r:
        return 0.0
    return 2 * r * r * math.acos(D / (2 * r)) - 0.5 * D * math.sqrt(4 * r * r - D * D)


def grid_area(shape, pose_a, pose_b, n=1500):
    """Independent cell-count estimate of the intersection area."""
    R = max(shape.semi_axes)
    lo = np.minimum(pose_a[0], pose_b[0]) - R
    hi = np.maximum(pose_a[0], pose_b[0]) + R
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)

    def inside(pose):
        c, a = np.asarray(pose[0], float), pose[1]
        rot = np.array([[math.cos(a), math.sin(a)], [-math.sin(a), math.cos(a)]])
        y = (pts - c) @ rot.T
        e1, e2 = np.diag(shape.matrix)
        return e1 * y[:, 0] ** 2 + e2 * y[:, 1] ** 2 <= 1.0

    cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
    return float(np.count_nonzero(inside(pose_a) & inside(pose_b)) * cell)


def test_identical_poses_full_area():
    s = Shape.ellipse(0.5)
    area = overlap_area(s, ((0, 0), 0.0), ((0, 0), 0.0), resolution=512)
    assert area == pytest.approx(math.pi / 0.5, rel=1e-2)


def test_tangent_stacked_is_zero():
    s = Shape.ellipse(0.5)
    assert overlap_area(s, ((0, 0), 0.0), ((0, 2), 0.0)) <= TOL.overlap


def test_stacked_monotone_in_depth():
    s = Shape.ellipse(0.3)
    c = contact_data(s, Beta(0.0, HALF_PI))
    areas = [overlap_area(s, ((0, 0), 0.0), ((0, c.d - gap), 0.0)) for gap in (0.01, 0.02, 0.04)]
    assert 0.0 < areas[0] < areas[1] < areas[2]


@pytest.mark.parametrize("D", [0.1, 0.5, 0.9, 0.999])
def test_disk_lens_closed_form(D):
    s = Shape.disk()
    area = overlap_area(s, ((0, 0), 0.0), ((D * 0.6, D * 0.8), 1.0), resolution=512)
    assert area == pytest.approx(lens_area(0.5, D), rel=1e-4, abs=1e-9)


@pytest.mark.parametrize("pose_b", [((1.5, 0.4), 0.7), ((0.2, 1.3), 2.0), ((2.8, -0.3), 1.2)])
def test_matches_cell_count(pose_b):
    s = Shape.ellipse(0.4)
    pose_a = ((0, 0), 0.0)
    a = overlap_area(s, pose_a, pose_b, resolution=512)
    assert a == pytest.approx(grid_area(s, pose_a, pose_b), rel=1e-2)


def test_resolution_floor():
    with pytest.raises(ValueError):
        overlap_area(Shape.disk(), ((0, 0), 0.0), ((0, 0), 0.0), resolution=16)


def test_deterministic():
    s = Shape.ellipse(0.37)
    args = (s, ((0.1, -0.2), 0.3), ((1.4, 0.9), 2.1))
    assert overlap_area_estimate(*args) == overlap_area_estimate(*args)


def _random_overlapping(rng):
    s = Shape.ellipse(rng.uniform(0.2, 0.9))
    while True:
        pose_b = (rng.uniform(-2, 2, size=2), rng.uniform(0, 2 * math.pi))
        if overlap_test(s, ((0, 0), 0.0), pose_b) is Overlap.OVERLAPPING:
            return s, pose_b


def test_quadrature_convergence(rng):
    for _ in range(20):
        s, pose_b = _random_overlapping(rng)
        _, err128 = overlap_area_estimate(s, ((0, 0), 0.0), pose_b, resolution=128)
        _, err512 = overlap_area_estimate(s, ((0, 0), 0.0), pose_b, resolution=512)
        assert err512 * 3 <= err128 or err128 < 1e-13


def test_agreement_with_predicate(rng):
    n = 0
    while n < 500:
        s = Shape.ellipse(rng.uniform(0.2, 0.9))
        pose_b = (rng.uniform(-3, 3, size=2) * s.diameter / 2, rng.uniform(0, 2 * math.pi))
        status = overlap_test(s, ((0, 0), 0.0), pose_b)
        # skip the tangency band, where either answer is acceptable
        if overlap_test(s, ((0, 0), 0.0), pose_b, tol=1e-4) is Overlap.TANGENT:
            continue
        n += 1
        area = overlap_area(s, ((0, 0), 0.0), pose_b, resolution=128)
        assert (area > TOL.overlap) == (status is Overlap.OVERLAPPING)


def test_scan_static():
    s = Shape.ellipse(0.5)
    scan = time_scan(s, Beta(0.0, HALF_PI), np.zeros(6), 0.1, 16)
    assert all(x.status is Overlap.TANGENT for x in scan.samples)
    assert scan.clean_negative and scan.clean_positive


def test_scan_separating_translation():
    s = Shape.ellipse(0.5)
    scan = time_scan(s, Beta(0.0, HALF_PI), [0, 0, 0, 1, 0, 0], 0.1, 16)
    # the same motion run backwards pushes body 2 into body 1
    assert scan.clean_positive
    assert not scan.clean_negative
    for x in scan.samples:
        if x.t < 0:
            assert x.area > 0.0


def test_scan_certificate_both_sides(cert03):
    s = Shape.ellipse(0.3)
    scan = time_scan(s, cert03.beta, cert03.Ustar, cert03.delta, 16, contact=cert03.contact)
    assert all(x.status is Overlap.OVERLAPPING for x in scan.samples)
    assert all(x.area > 0.0 for x in scan.samples)
    assert not scan.clean_negative and not scan.clean_positive


def test_scan_validation():
    with pytest.raises(ValueError):
        time_scan(Shape.disk(), Beta(0, 0), np.zeros(6), 0.0, 16)
    with pytest.raises(ValueError):
        time_scan(Shape.disk(), Beta(0, 0), np.zeros(6), 0.1, 4)


def test_finite_difference():
    assert finite_difference(lambda t: t * t, 0.0, 2, 1e-4) == pytest.approx(2.0, abs=1e-6)
    assert finite_difference(lambda t: t ** 3, 0.0, 1, 1e-4) == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(ValueError):
        finite_difference(math.sin, 0.0, 3, 1e-3)


@settings(max_examples=30, deadline=None)
@given(eps=st.floats(0.2, 0.9), x=st.floats(-3, 3), y=st.floats(-3, 3), a=st.floats(0, 6.3))
def test_area_symmetric_and_bounded(eps, x, y, a):
    s = Shape.ellipse(eps)
    pa, pb = ((0.0, 0.0), 0.0), ((x, y), a)
    ab = overlap_area(s, pa, pb, resolution=128)
    ba = overlap_area(s, pb, pa, resolution=128)
    assert ab == pytest.approx(ba, rel=1e-9, abs=1e-12)
    assert 0.0 <= ab <= s.area * (1 + 1e-3)
