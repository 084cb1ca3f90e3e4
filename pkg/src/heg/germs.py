"""Tracking function and local classification of constant collision velocities.

A constant velocity ``U = [v1, v2, vbar1, vbar2, omega, omegabar]`` moves
body 1 from the origin and body 2 from ``d e(psi)``.  The tracking function
follows the material point of body 2 that sits at the contact point ``p`` at
``t = 0`` and evaluates body 1's level function there; its sign near
``t = 0`` decides the germ class.

Body 2's contact arm is ``p - d e(psi) = -q``, so its contact point moves
with ``vbar - omegabar q_perp`` and accelerates with ``omegabar**2 q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import TOL
from .geometry import Beta, ContactData, Shape, contact_data, perp
from .oracle import ScanResult, time_scan


class ClassificationConflict(RuntimeError):
    """Taylor classification and trajectory scan disagree outside the noise band."""


class Germ(Enum):
    PRE = "Pre"
    POST = "Post"
    GRAZING = "Grazing"
    INADMISSIBLE = "Inadmissible"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class TaylorEvidence:
    a1: float
    a2: float
    nu_dot_u: float


@dataclass(frozen=True)
class GermClass:
    label: Germ
    evidence: TaylorEvidence
    horizon: float | None = None

    def __str__(self):
        return f"{self.label.value} (a1={self.evidence.a1:.6g}, a2={self.evidence.a2:.6g})"


def velocity6(v=(0.0, 0.0), vbar=(0.0, 0.0), omega=0.0, omegabar=0.0) -> np.ndarray:
    return np.array([v[0], v[1], vbar[0], vbar[1], omega, omegabar], dtype=float)


def as_velocity(U) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.shape != (6,) or not np.all(np.isfinite(U)):
        raise ValueError(f"velocity must be six finite reals, got {U!r}")
    return U


def contact_velocity(contact: ContactData, U) -> np.ndarray:
    """Velocity of body 2's contact point relative to body 1's, seen in body 1's frame."""
    U = as_velocity(U)
    return U[2:4] - U[5] * perp(contact.q) - U[0:2] - U[4] * perp(contact.p)


def _turn(angle, w):
    """(R(angle) - I) w without cancellation for small angles; batched over angle."""
    c1 = -2.0 * np.sin(0.5 * angle) ** 2
    sn = np.sin(angle)
    return np.stack([c1 * w[..., 0] - sn * w[..., 1], sn * w[..., 0] + c1 * w[..., 1]], -1)


def tracking_psi(shape: Shape, beta: Beta, contact: ContactData, U, t):
    """Body 1's level function at the tracked material point of body 2.

    Evaluated through the displacement from the contact point, so that the
    constant part never cancels against the small motion.
    """
    U = as_velocity(U)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    p = contact.p
    # body 2's arm to the contact point, in world orientation at t = 0
    arm = p - contact.d * beta.direction
    moved = np.multiply.outer(t, U[2:4] - U[0:2]) + _turn(t * U[5], np.broadcast_to(arm, (len(t), 2)))
    # back into body 1's frame: y = R(-omega t)(p + moved) = p + delta
    delta = _turn(-t * U[4], p + moved) + moved
    E = np.diag(shape.matrix)
    g = E * p
    psi = (float(g @ p) - 1.0) + 2.0 * delta @ g + np.sum(E * delta * delta, axis=-1)
    return float(psi[0]) if scalar else psi


def nu_vector(contact: ContactData) -> np.ndarray:
    """Normal of the grazing hyperplane: ``nu . U`` is the normal contact velocity."""
    n = contact.n
    return np.array([-n[0], -n[1], n[0], n[1],
                     -perp(contact.p) @ n, -perp(contact.q) @ n])


def psi_dot0(shape: Shape, contact: ContactData, U) -> float:
    g = shape.matrix @ contact.p
    return float(2.0 * g @ contact_velocity(contact, U))


def psi_ddot0(shape: Shape, contact: ContactData, U) -> float:
    """Second Taylor coefficient of the tracking function at 0."""
    U = as_velocity(U)
    E = shape.matrix
    g = E @ contact.p
    w = contact_velocity(contact, U)
    omega, omegabar = U[4], U[5]
    return float(4.0 * omega * perp(g) @ w
                 + 2.0 * g @ (omega**2 * contact.p + omegabar**2 * contact.q)
                 + 2.0 * w @ E @ w)


def quadratic_form_matrix(shape: Shape, contact: ContactData) -> np.ndarray:
    """Symmetric 6x6 matrix A with ``psi_ddot0(U) = U . A U``, by polarisation."""
    basis = np.eye(6)
    diag = [psi_ddot0(shape, contact, e) for e in basis]
    A = np.diag(diag)
    for i in range(6):
        for j in range(i + 1, 6):
            A[i, j] = A[j, i] = 0.5 * (psi_ddot0(shape, contact, basis[i] + basis[j])
                                       - diag[i] - diag[j])
    return A


def grazing_basis(contact: ContactData) -> np.ndarray:
    """Orthonormal basis (as columns) of the hyperplane ``nu . U = 0``."""
    nu = nu_vector(contact)
    _, _, vt = np.linalg.svd(nu[None, :])
    return vt[1:].T


def min_grazing_eigenvalue(shape: Shape, contact: ContactData) -> float:
    """Smallest eigenvalue of the second Taylor form restricted to the grazing hyperplane.

    Negative values mean inadmissible directions exist at this configuration.
    """
    N = grazing_basis(contact)
    return float(np.linalg.eigvalsh(N.T @ quadratic_form_matrix(shape, contact) @ N)[0])


def taylor_evidence(shape: Shape, contact: ContactData, U) -> TaylorEvidence:
    return TaylorEvidence(psi_dot0(shape, contact, U), psi_ddot0(shape, contact, U),
                          float(nu_vector(contact) @ as_velocity(U)))


def label_from_taylor(a1: float, a2: float, tol: float = TOL.class_) -> Germ:
    if a1 < -tol:
        return Germ.PRE
    if a1 > tol:
        return Germ.POST
    if a2 > tol:
        return Germ.GRAZING
    if a2 < -tol:
        return Germ.INADMISSIBLE
    return Germ.UNDETERMINED


def classify_local(shape: Shape, contact: ContactData, U) -> GermClass:
    ev = taylor_evidence(shape, contact, U)
    return GermClass(label_from_taylor(ev.a1, ev.a2), ev)


def label_from_scan(scan: ScanResult) -> Germ:
    return {
        (True, True): Germ.GRAZING,
        (True, False): Germ.PRE,
        (False, True): Germ.POST,
        (False, False): Germ.INADMISSIBLE,
    }[(scan.clean_negative, scan.clean_positive)]


def classify_certified(shape: Shape, beta: Beta, U, horizon: float = 1e-2,
                       samples: int = 64, contact: ContactData | None = None,
                       max_refine: int = 60) -> GermClass:
    """Germ class read off an overlap scan of the trajectory.

    When the scan and the Taylor label disagree while the first-order term
    is outside the noise band, the horizon is halved until the scan resolves
    the first-order regime.  If the predicted penetration at the first
    sample falls below the predicate's resolution the result is
    Undetermined; if first order dominates the whole window and the labels
    still differ, ClassificationConflict is raised.
    """
    contact = contact or contact_data(shape, beta)
    local = classify_local(shape, contact, U)
    a1, a2 = local.evidence.a1, local.evidence.a2
    h = horizon
    for _ in range(max_refine):
        scan = time_scan(shape, beta, U, h, samples, contact=contact, compute_area=False)
        label = label_from_scan(scan)
        if label is local.label or abs(a1) <= TOL.class_:
            return GermClass(label, local.evidence, h)
        t1 = h / samples
        if max(abs(a1) * t1, 0.5 * abs(a2) * t1 * t1) <= 100.0 * TOL.geom:
            return GermClass(Germ.UNDETERMINED, local.evidence, h)
        if abs(a1) > 10.0 * TOL.class_ and abs(a1) >= 10.0 * abs(a2) * h:
            raise ClassificationConflict(
                f"scan says {label.value}, Taylor says {local.label.value} "
                f"(a1={a1:.3e}, a2={a2:.3e}, horizon={h:.3e}) at {beta}")
        h *= 0.5
    return GermClass(Germ.UNDETERMINED, local.evidence, h)
