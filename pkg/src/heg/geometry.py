"""Planar disk / ellipse algebra: level functions, overlap, contact data.

Bodies are centred quadratic regions ``{y : y . E y <= 1}`` placed by a pose
``(center, angle)``.  The first body of a collision configuration sits at the
origin unrotated; the second is rotated by ``theta`` and centred at
``d * e(psi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import BOUNDARY_SAMPLES, NEWTON_STEPS, TOL

TWO_PI = 2.0 * math.pi
_GRID = np.linspace(0.0, TWO_PI, BOUNDARY_SAMPLES, endpoint=False)
_GRID_BASIS = np.stack([np.cos(_GRID), np.sin(_GRID), np.cos(2 * _GRID), np.sin(2 * _GRID)])
DISK_RADIUS = 0.5


class GeometryError(ValueError):
    pass


class ContactDegenerate(GeometryError):
    """Tangency residual stayed above tolerance after refinement."""


class Overlap(Enum):
    DISJOINT = 0
    TANGENT = 1
    OVERLAPPING = 2


@dataclass(frozen=True)
class Shape:
    kind: str
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind == "ellipse":
            if self.epsilon is None or not 0.0 < self.epsilon < 1.0:
                raise GeometryError(f"ellipse needs 0 < epsilon < 1, got {self.epsilon}")
        elif self.kind == "disk":
            if self.epsilon is not None:
                raise GeometryError("disk takes no epsilon")
        else:
            raise GeometryError(f"unknown shape kind {self.kind!r}")

    @classmethod
    def ellipse(cls, epsilon: float) -> Shape:
        return cls("ellipse", float(epsilon))

    @classmethod
    def disk(cls) -> Shape:
        return cls("disk")

    @property
    def is_disk(self) -> bool:
        return self.kind == "disk"

    @property
    def semi_axes(self) -> tuple[float, float]:
        if self.is_disk:
            return DISK_RADIUS, DISK_RADIUS
        return 1.0 / self.epsilon, 1.0

    @property
    def matrix(self) -> np.ndarray:
        """Shape matrix E with the reference body ``y . E y <= 1``."""
        a, b = self.semi_axes
        return np.diag([1.0 / a**2, 1.0 / b**2])

    @property
    def diameter(self) -> float:
        return 2.0 * max(self.semi_axes)

    @property
    def area(self) -> float:
        a, b = self.semi_axes
        return math.pi * a * b

    @property
    def polar_moment(self) -> float:
        """Planar second moment of area about the centre (unit density)."""
        a, b = self.semi_axes
        return self.area * (a * a + b * b) / 4.0

    def label(self) -> str:
        return "disk" if self.is_disk else f"ellipse(eps={self.epsilon:g})"


def wrap_angle(angle: float) -> float:
    """Representative of ``angle`` in [0, 2 pi)."""
    r = math.fmod(angle, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod can round up to exactly 2 pi for tiny negative inputs
    return 0.0 if r >= TWO_PI else r


@dataclass(frozen=True)
class Beta:
    """Boundary configuration: orientation of body 2 and offset direction."""

    theta: float
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "psi", wrap_angle(float(self.psi)))

    @property
    def direction(self) -> np.ndarray:
        return np.array([math.cos(self.psi), math.sin(self.psi)])


@dataclass(frozen=True)
class ContactData:
    d: float
    p: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    n: np.ndarray = field(repr=False)
    u: float

    def __repr__(self):
        f = lambda w: f"({w[0]:.12g}, {w[1]:.12g})"
        return (f"ContactData(d={self.d:.12g}, p={f(self.p)}, q={f(self.q)}, "
                f"n={f(self.n)}, u={self.u:.12g})")


def rotation(angle) -> np.ndarray:
    """R(angle); broadcasts to shape (..., 2, 2) for array input."""
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def perp(w) -> np.ndarray:
    """Rotation by +pi/2: (w1, w2) -> (-w2, w1)."""
    w = np.asarray(w, dtype=float)
    return np.stack([-w[..., 1], w[..., 0]], -1)


def level_value(shape: Shape, pose, y) -> float:
    """F0(R(angle)^T (y - center)): negative inside, zero on the boundary."""
    center, angle = pose
    local = rotation(angle).T @ (np.asarray(y, float) - np.asarray(center, float))
    return float(local @ shape.matrix @ local - 1.0)


def boundary_point(shape: Shape, u: float) -> np.ndarray:
    a, b = shape.semi_axes
    return np.array([a * math.cos(u), b * math.sin(u)])


def boundary_parameter(shape: Shape, y) -> float:
    a, b = shape.semi_axes
    return wrap_angle(math.atan2(y[1] / b, y[0] / a))


def boundary_point_from_normal(shape: Shape, w) -> np.ndarray:
    """Reference boundary point whose outward unit normal is ``w``."""
    w = np.asarray(w, dtype=float)
    e_inv_w = w / np.diag(shape.matrix)
    return e_inv_w / math.sqrt(w @ e_inv_w)


def outward_normal(shape: Shape, pose, y) -> np.ndarray:
    center, angle = pose
    rot = rotation(angle)
    g = rot @ (shape.matrix @ (rot.T @ (np.asarray(y, float) - np.asarray(center, float))))
    return g / np.linalg.norm(g)


def _local_offset(center_a, angle_a, center_b, angle_b):
    """B's centre in A's frame and the relative angle, batched."""
    center_a = np.asarray(center_a, float)
    center_b = np.asarray(center_b, float)
    delta = center_b - center_a
    c, s = np.cos(angle_a), np.sin(angle_a)
    z0 = np.stack([c * delta[..., 0] + s * delta[..., 1],
                   -s * delta[..., 0] + c * delta[..., 1]], -1)
    return z0, np.asarray(angle_b, float) - np.asarray(angle_a, float)


def min_boundary_level(shape_a: Shape, center_a, angle_a, center_b, angle_b,
                       shape_b: Shape | None = None):
    """Minimum of A's level function over B's boundary curve.

    Batched over leading axes of the pose arrays.  A dense scan of the
    boundary parameter locates the basin of the global minimum, then Newton
    steps on the derivative (closed form, the restriction is a trigonometric
    polynomial of degree two) polish it.

    Returns
    -------
    value : array
        Minimum level value; negative means B's boundary enters A's interior.
    s : array
        Boundary parameter of B attaining it.
    """
    shape_b = shape_a if shape_b is None else shape_b
    e1, e2 = shape_a.matrix[0, 0], shape_a.matrix[1, 1]
    ab, bb = shape_b.semi_axes
    z0, phi = _local_offset(center_a, angle_a, center_b, angle_b)
    z0 = np.atleast_2d(z0)
    phi = np.atleast_1d(phi)
    cphi, sphi = np.cos(phi), np.sin(phi)
    # z(s) = z0 + r1 cos s + r2 sin s; F(z(s)) = A0 + A1 cos s + B1 sin s + A2 cos 2s + B2 sin 2s
    r1x, r1y = ab * cphi, ab * sphi
    r2x, r2y = -bb * sphi, bb * cphi
    zx, zy = z0[:, 0], z0[:, 1]
    n11 = e1 * r1x * r1x + e2 * r1y * r1y
    n22 = e1 * r2x * r2x + e2 * r2y * r2y
    coef = np.stack([
        2.0 * (e1 * zx * r1x + e2 * zy * r1y),
        2.0 * (e1 * zx * r2x + e2 * zy * r2y),
        0.5 * (n11 - n22),
        e1 * r1x * r2x + e2 * r1y * r2y,
    ], axis=1)
    A0 = e1 * zx * zx + e2 * zy * zy - 1.0 + 0.5 * (n11 + n22)
    A1, B1, A2, B2 = coef.T

    vals = coef @ _GRID_BASIS
    k = np.argmin(vals, axis=1)
    best_val = A0 + vals[np.arange(vals.shape[0]), k]
    s = _GRID[k]
    max_step = TWO_PI / BOUNDARY_SAMPLES

    for _ in range(NEWTON_STEPS):
        c, sn = np.cos(s), np.sin(s)
        c2, s2 = c * c - sn * sn, 2.0 * c * sn
        g1 = B1 * c - A1 * sn + 2.0 * (B2 * c2 - A2 * s2)
        g2 = -(A1 * c + B1 * sn) - 4.0 * (A2 * c2 + B2 * s2)
        convex = g2 > 0.0
        step = np.where(convex, -g1 / np.where(convex, g2, 1.0), -np.sign(g1) * max_step)
        step = np.minimum(np.maximum(step, -max_step), max_step)
        s = s + step
        if np.max(np.abs(step)) < 1e-15:
            break

    newton_val = A0 + A1 * np.cos(s) + B1 * np.sin(s) + A2 * np.cos(2.0 * s) + B2 * np.sin(2.0 * s)
    use_newton = newton_val <= best_val
    value = np.where(use_newton, newton_val, best_val)
    s_best = np.where(use_newton, s, _GRID[k])
    return value, np.mod(s_best, TWO_PI)


def _centre_inside(shape_in: Shape, center_in, angle_in, point, tol):
    z0, _ = _local_offset(center_in, angle_in, point, 0.0)
    z0 = np.atleast_2d(z0)
    e1, e2 = np.diag(shape_in.matrix)
    return e1 * z0[:, 0] ** 2 + e2 * z0[:, 1] ** 2 - 1.0 < -tol


def overlap_status(shape: Shape, center_a, angle_a, center_b, angle_b,
                   tol: float = TOL.geom, shape_b: Shape | None = None):
    """Batched overlap classification.

    Returns integer codes (``Overlap.value``) and the minimum boundary levels.
    """
    shape_b = shape if shape_b is None else shape_b
    level, _ = min_boundary_level(shape, center_a, angle_a, center_b, angle_b, shape_b)
    contained = (_centre_inside(shape, center_a, angle_a, center_b, tol)
                 | _centre_inside(shape_b, center_b, angle_b, center_a, tol))
    codes = np.where(level < -tol, Overlap.OVERLAPPING.value,
                     np.where(level <= tol, Overlap.TANGENT.value, Overlap.DISJOINT.value))
    codes = np.where(contained, Overlap.OVERLAPPING.value, codes)
    return codes, level


def overlap_test(shape: Shape, pose_a, pose_b, tol: float = TOL.geom,
                 shape_b: Shape | None = None) -> Overlap:
    """Disjoint / Tangent / Overlapping for two placed bodies.

    ``tol`` is the width of the tangency band in level-function units; pass
    ``tol=0`` for the strict predicate.
    """
    codes, _ = overlap_status(shape, pose_a[0], pose_a[1], pose_b[0], pose_b[1], tol, shape_b)
    return Overlap(int(codes[0]))


def _strictly_overlapping(shape: Shape, theta: float, direction: np.ndarray, d: float) -> bool:
    codes, _ = overlap_status(shape, (0.0, 0.0), 0.0, d * direction, theta, tol=0.0)
    return codes[0] == Overlap.OVERLAPPING.value


def closest_approach_distance(shape: Shape, beta: Beta, tol: float = TOL.dca) -> float:
    """Smallest separation along e(psi) with measure-zero overlap.

    The overlapping separations form an interval [0, d_beta) for convex
    bodies, so bisection on the strict overlap predicate converges.  The
    inscribed and circumscribed circles bracket d_beta in [2 b, 2 a].
    """
    direction = beta.direction
    lo, hi = 2.0 * min(shape.semi_axes), 2.0 * max(shape.semi_axes)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _strictly_overlapping(shape, beta.theta, direction, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def contact_data(shape: Shape, beta: Beta) -> ContactData:
    """Contact point, conjugate vector and normal at closest approach."""
    d = closest_approach_distance(shape, beta)
    center_b = d * beta.direction
    _, s = min_boundary_level(shape, (0.0, 0.0), 0.0, center_b, beta.theta)
    p_world = center_b + rotation(beta.theta) @ boundary_point(shape, float(s[0]))
    u = boundary_parameter(shape, p_world)
    p = boundary_point(shape, u)
    g = shape.matrix @ p
    n = g / np.linalg.norm(g)
    contact = ContactData(d=d, p=p, q=center_b - p, n=n, u=u)

    pose_b = (center_b, beta.theta)
    residual = abs(level_value(shape, pose_b, p))
    mismatch = float(np.linalg.norm(n + outward_normal(shape, pose_b, p)))
    if residual > TOL.geom or mismatch > TOL.geom:
        raise ContactDegenerate(
            f"tangency residual {residual:.3e}, normal mismatch {mismatch:.3e} at {beta}")
    return contact


def config_from_contact(shape: Shape, u: float, theta: float) -> tuple[Beta, ContactData]:
    """Build the configuration whose contact sits at boundary parameter ``u``."""
    p = boundary_point(shape, u)
    g = shape.matrix @ p
    n = g / np.linalg.norm(g)
    rot = rotation(theta)
    q_body = boundary_point_from_normal(shape, -(rot.T @ n))
    center_b = p - rot @ q_body
    d = float(np.linalg.norm(center_b))
    psi = math.atan2(center_b[1], center_b[0])
    beta = Beta(theta, psi)
    return beta, ContactData(d=d, p=p, q=center_b - p, n=n, u=wrap_angle(u))


def trajectory_poses(beta: Beta, d: float, U, t):
    """Poses of both bodies at times ``t`` under the constant velocity ``U``.

    Body 1 starts at the origin unrotated, body 2 at ``d e(psi)`` with angle
    ``theta``.  Returns ``(center_a, angle_a, center_b, angle_b)``, batched
    over ``t`` when ``t`` is an array.
    """
    U = np.asarray(U, float)
    if np.ndim(t) == 0:
        return (t * U[0:2], float(t * U[4]),
                d * beta.direction + t * U[2:4], float(beta.theta + t * U[5]))
    t = np.asarray(t, float)[:, None]
    center_a = t * U[0:2]
    center_b = d * beta.direction + t * U[2:4]
    return center_a, t[:, 0] * U[4], center_b, beta.theta + t[:, 0] * U[5]
