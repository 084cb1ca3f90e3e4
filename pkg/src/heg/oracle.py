"""Brute-force ground truth: overlap areas, trajectory scans, finite differences.

Nothing here uses Taylor coefficients or contact normals, so the other
modules can be checked against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .config import TOL
from .geometry import Beta, ContactData, Overlap, Shape, contact_data, overlap_status, \
    rotation, trajectory_poses


def _chord_coefficients(shape: Shape, pose):
    center, angle = pose
    rot = rotation(angle)
    m = rot @ shape.matrix @ rot.T
    det = m[0, 0] * m[1, 1] - m[0, 1] ** 2
    half_width = math.sqrt(m[1, 1] / det)
    return float(center[0]), float(center[1]), m[0, 1], m[1, 1], det, half_width


def _chord(coef, x):
    """Vertical chord [lo, hi] of a placed body at abscissae ``x``."""
    cx, cy, m12, m22, det, _ = coef
    dx = x - cx
    disc = m22 - det * dx * dx
    root = np.sqrt(np.maximum(disc, 0.0))
    mid = cy - m12 * dx / m22
    lo = np.where(disc >= 0.0, mid - root / m22, np.inf)
    hi = np.where(disc >= 0.0, mid + root / m22, -np.inf)
    return lo, hi


def _midpoint(length, a, b, n):
    h = (b - a) / n
    x = a + h * (np.arange(n) + 0.5)
    # fixed-order summation keeps results bit-reproducible
    return math.fsum(np.maximum(length(x), 0.0)) * h


def overlap_area_estimate(shape: Shape, pose_a, pose_b, resolution: int = 256,
                          shape_b: Shape | None = None) -> tuple[float, float]:
    """Intersection area and a Richardson error estimate.

    Each vertical line cuts both bodies in an interval whose endpoints are
    closed form; the overlap length of the two intervals is integrated in x
    with the midpoint rule over the exact x-support of the intersection, at
    ``resolution`` and ``2 * resolution`` nodes.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    shape_b = shape if shape_b is None else shape_b
    ca = _chord_coefficients(shape, pose_a)
    cb = _chord_coefficients(shape_b, pose_b)
    x_lo = max(ca[0] - ca[5], cb[0] - cb[5])
    x_hi = min(ca[0] + ca[5], cb[0] + cb[5])
    if x_hi <= x_lo:
        return 0.0, 0.0

    def length(x):
        lo_a, hi_a = _chord(ca, x)
        lo_b, hi_b = _chord(cb, x)
        return np.minimum(hi_a, hi_b) - np.maximum(lo_a, lo_b)

    def g(x):
        # chord-overlap length is concave on [x_lo, x_hi]
        return float(length(np.array([x]))[0])

    peak = minimize_scalar(lambda x: -g(x), bounds=(x_lo, x_hi), method="bounded",
                           options={"xatol": 1e-14 * max(1.0, x_hi - x_lo)})
    x_peak = float(peak.x)
    if g(x_peak) <= 0.0:
        return 0.0, 0.0
    a = brentq(g, x_lo, x_peak, xtol=1e-15) if g(x_lo) < 0.0 else x_lo
    b = brentq(g, x_peak, x_hi, xtol=1e-15) if g(x_hi) < 0.0 else x_hi

    coarse = _midpoint(length, a, b, resolution)
    fine = _midpoint(length, a, b, 2 * resolution)
    return fine, abs(fine - coarse)


def overlap_area(shape: Shape, pose_a, pose_b, resolution: int = 256,
                 shape_b: Shape | None = None) -> float:
    """Area of the intersection of two placed bodies; 0 below the overlap tolerance."""
    area, _ = overlap_area_estimate(shape, pose_a, pose_b, resolution, shape_b)
    return area if area > TOL.overlap else 0.0


@dataclass(frozen=True)
class ScanSample:
    t: float
    status: Overlap
    level: float
    area: float | None


@dataclass(frozen=True)
class ScanResult:
    samples: tuple[ScanSample, ...]
    clean_negative: bool
    clean_positive: bool

    def statuses(self, side: int) -> list[Overlap]:
        return [s.status for s in self.samples if s.t * side > 0]


def scan_times(horizon: float, samples: int) -> np.ndarray:
    k = np.arange(1, samples + 1)
    pos = horizon * k / samples
    return np.concatenate([-pos[::-1], pos])


def time_scan(shape: Shape, beta: Beta, U, horizon: float, samples: int,
              contact: ContactData | None = None, compute_area: bool = True,
              resolution: int = 128) -> ScanResult:
    """Overlap status along the constant-velocity trajectory at ``t = +-horizon k / samples``."""
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    if samples < 8:
        raise ValueError("samples must be at least 8")
    d = (contact or contact_data(shape, beta)).d
    t = scan_times(horizon, samples)
    ca, aa, cb, ab = trajectory_poses(beta, d, U, t)
    codes, levels = overlap_status(shape, ca, aa, cb, ab)
    out = []
    for i, ti in enumerate(t):
        status = Overlap(int(codes[i]))
        area = None
        if compute_area:
            area = 0.0
            if status is Overlap.OVERLAPPING:
                area = overlap_area(shape, (ca[i], aa[i]), (cb[i], ab[i]), resolution)
        out.append(ScanSample(float(ti), status, float(levels[i]), area))
    clean_neg = all(s.status is not Overlap.OVERLAPPING for s in out if s.t < 0)
    clean_pos = all(s.status is not Overlap.OVERLAPPING for s in out if s.t > 0)
    return ScanResult(tuple(out), clean_neg, clean_pos)


def finite_difference(f, t0: float, order: int, h: float) -> float:
    """Central difference of order 1 or 2, error O(h^2)."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    if order == 1:
        return (f(t0 + h) - f(t0 - h)) / (2.0 * h)
    if order == 2:
        return (f(t0 + h) - 2.0 * f(t0) + f(t0 - h)) / (h * h)
    raise ValueError("order must be 1 or 2")
