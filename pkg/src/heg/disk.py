"""Hard disks of radius 1/2: the squared centre distance is an exact quadratic in t."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Beta, ContactData, DISK_RADIUS
from .germs import Germ, GermClass, TaylorEvidence, as_velocity

DISK_A = np.array([
    [1.0, 0.0, -1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, -1.0, 0.0, 0.0],
    [-1.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, -1.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
])
DISK_A.setflags(write=False)


@dataclass(frozen=True)
class DiskQuadratic:
    gamma: np.ndarray
    A: np.ndarray

    def linear(self, U) -> float:
        return float(self.gamma @ as_velocity(U))

    def quadratic(self, U) -> float:
        U = as_velocity(U)
        return float(U @ self.A @ U)


def disk_contact(beta: Beta) -> ContactData:
    """Closed-form contact data: unit separation, contact at the midpoint."""
    n = beta.direction
    p = DISK_RADIUS * n
    return ContactData(d=1.0, p=p, q=n - p, n=n, u=beta.psi)


def disk_quadratic(beta: Beta) -> DiskQuadratic:
    n = beta.direction
    gamma = np.array([-2.0 * n[0], -2.0 * n[1], 2.0 * n[0], 2.0 * n[1], 0.0, 0.0])
    return DiskQuadratic(gamma, DISK_A)


def tracking_phi(beta: Beta, U, t):
    """|x(t) - xbar(t)|^2 - 1 along the constant-velocity trajectory."""
    U = as_velocity(U)
    t = np.asarray(t, dtype=float)
    rel = (np.multiply.outer(t, U[0:2]) - beta.direction
           - np.multiply.outer(t, U[2:4]))
    return np.sum(rel * rel, axis=-1) - 1.0


def classify_disk(beta: Beta, U, tol: float = 0.0) -> GermClass:
    """Exact partition: the quadratic coefficient |v - vbar|^2 is never negative.

    ``tol`` widens the grazing band for velocities built numerically on the
    hyperplane ``gamma . U = 0``.
    """
    quad = disk_quadratic(beta)
    a1 = quad.linear(U)
    a2 = 2.0 * quad.quadratic(U)
    ev = TaylorEvidence(a1, a2, a1 / 2.0)
    if a1 < -tol:
        return GermClass(Germ.PRE, ev)
    if a1 > tol:
        return GermClass(Germ.POST, ev)
    return GermClass(Germ.GRAZING, ev)
