"""Constructive inadmissible velocities for hard ellipses.

For a contact at boundary parameter ``u`` of the ellipse with semi-axes
``(1/eps, 1)``, the velocity in which body 1 spins at unit rate and body 2
translates along the grazing hyperplane has second Taylor coefficient
``-2 K`` with

    K = ((1 - eps^2)^2 / eps^2) (sin^2 u + eps^2 / (1 - eps^2))^2 - 1,

which is positive exactly when ``sin^2 u > eps / (1 + eps)``.  The bodies then
interpenetrate on both sides of the collision time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .geometry import Beta, ContactData, GeometryError, Overlap, Shape, config_from_contact, \
    contact_data, trajectory_poses
from .germs import nu_vector, psi_ddot0, psi_dot0
from .oracle import overlap_area, time_scan

MAX_HALVINGS = 40
VERIFY_LEVELS = (1, 2, 3, 4)
SCAN_SAMPLES = 16


class DegenerateContact(GeometryError):
    pass


class EpsilonOutOfRange(ValueError):
    pass


class VerificationFailed(RuntimeError):
    pass


def k_beta(epsilon: float, u: float) -> float:
    e2 = epsilon * epsilon
    return (1.0 - e2) ** 2 / e2 * (math.sin(u) ** 2 + e2 / (1.0 - e2)) ** 2 - 1.0


def k_beta_from_point(epsilon: float, p) -> float:
    """Same margin written in the contact point coordinates."""
    e2 = epsilon * epsilon
    return (e2 - 1.0) ** 2 / e2 * p[1] ** 4 + e2 + 1.0 - 2.0 * e2 * (p[0] ** 2 + p[1] ** 2)


def poly_P(epsilon: float, x: float) -> float:
    e2 = epsilon * epsilon
    return (1.0 - e2) ** 2 / e2 * (x + e2 / (1.0 - e2)) ** 2 - 1.0


def threshold(epsilon: float) -> float:
    """Root of P in [0, 1]."""
    return epsilon / (1.0 + epsilon)


def special_velocity(epsilon: float, contact: ContactData) -> np.ndarray:
    """Body 1 spinning at unit rate, body 2 translating on the grazing hyperplane.

    The horizontal translation minimises the second Taylor coefficient; the
    vertical one is fixed by ``nu . U = 0``.
    """
    p, n = contact.p, contact.n
    if abs(p[1]) < 1e-6 or abs(n[1]) < 1e-6:
        raise DegenerateContact(f"contact point {p} has vanishing second coordinate")
    e2 = epsilon * epsilon
    vbar1 = (1.0 - e2) / e2 * p[1] ** 3
    p_perp_n = -p[1] * n[0] + p[0] * n[1]
    vbar2 = (p_perp_n - n[0] * vbar1) / n[1]
    return np.array([0.0, 0.0, vbar1, vbar2, 1.0, 0.0])


@dataclass(frozen=True)
class Certificate:
    epsilon: float
    u: float
    theta: float
    beta: Beta
    contact: ContactData
    Ustar: np.ndarray = field(repr=False)
    a1: float
    a2: float
    K: float
    delta: float
    overlap_samples: tuple[tuple[float, float], ...] = field(repr=False)


@dataclass(frozen=True)
class Verdict:
    valid: bool
    failures: tuple[str, ...] = ()
    samples: tuple[tuple[float, float], ...] = ()

    def __bool__(self):
        return self.valid

    def __str__(self):
        return "Valid" if self.valid else "Invalid: " + "; ".join(self.failures)


def sample_times(delta: float) -> list[float]:
    return [sign * delta * 2.0 ** -k for k in VERIFY_LEVELS for sign in (-1.0, 1.0)]


def _overlap_samples(shape: Shape, beta: Beta, d: float, U, delta: float):
    ts = sample_times(delta)
    ca, aa, cb, ab = trajectory_poses(beta, d, U, np.array(ts))
    return tuple((t, overlap_area(shape, (ca[i], aa[i]), (cb[i], ab[i]), resolution=256))
                 for i, t in enumerate(ts))


def _two_sided(shape: Shape, beta: Beta, contact: ContactData, U, delta: float):
    """Scan statuses and area samples; returns (ok, samples)."""
    scan = time_scan(shape, beta, U, delta, SCAN_SAMPLES, contact=contact, compute_area=False)
    if any(s.status is not Overlap.OVERLAPPING for s in scan.samples):
        return False, ()
    samples = _overlap_samples(shape, beta, contact.d, U, delta)
    return all(area > TOL.overlap for _, area in samples), samples


def find_inadmissible(epsilon: float, u: float = math.pi / 2, theta: float = 0.0,
                      research: bool = False) -> Certificate:
    """Build and verify an inadmissible configuration-velocity pair.

    ``research=True`` lifts the ``epsilon < 1/2`` gate to the whole of (0, 1).
    """
    upper = 1.0 if research else 0.5
    if not 0.0 < epsilon < upper:
        raise EpsilonOutOfRange(f"epsilon {epsilon} outside (0, {upper:g})")
    if math.sin(u) ** 2 <= threshold(epsilon):
        raise ValueError(f"sin^2 u = {math.sin(u) ** 2:.6g} does not exceed "
                         f"eps/(1+eps) = {threshold(epsilon):.6g}; K is not positive")
    shape = Shape.ellipse(epsilon)
    beta, contact = config_from_contact(shape, u, theta)
    U = special_velocity(epsilon, contact)
    a1 = psi_dot0(shape, contact, U)
    a2 = psi_ddot0(shape, contact, U)
    K = k_beta(epsilon, u)

    delta = min(1.0, 1.0 / float(np.linalg.norm(U)))
    for _ in range(MAX_HALVINGS):
        ok, samples = _two_sided(shape, beta, contact, U, delta)
        if ok:
            break
        delta *= 0.5
    else:
        raise VerificationFailed(f"no two-sided overlap window found for epsilon={epsilon}")

    cert = Certificate(epsilon, contact.u, beta.theta, beta, contact, U, a1, a2, K, delta,
                       samples)
    verdict = verify_certificate(cert)
    if not verdict:
        raise VerificationFailed(str(verdict))
    return cert


def verify_certificate(cert: Certificate) -> Verdict:
    """Re-derive everything the certificate claims and check it against the oracle."""
    failures = []
    eps = cert.epsilon
    if not 0.0 < eps < 1.0:
        return Verdict(False, (f"epsilon {eps} outside (0, 1)",))
    shape = Shape.ellipse(eps)
    U = np.asarray(cert.Ustar, dtype=float)
    norm_u = float(np.linalg.norm(U))

    fresh = contact_data(shape, cert.beta)
    drift = max(abs(fresh.d - cert.contact.d),
                float(np.linalg.norm(fresh.p - cert.contact.p)),
                float(np.linalg.norm(fresh.n - cert.contact.n)))
    if drift > 1e-6:
        failures.append(f"stored contact differs from re-derived contact by {drift:.3e}")
    contact = cert.contact

    a1 = psi_dot0(shape, contact, U)
    a2 = psi_ddot0(shape, contact, U)
    K = k_beta(eps, contact.u)
    if abs(a1 - cert.a1) > 1e-9 * (1.0 + norm_u) or abs(a2 - cert.a2) > 1e-9 * (1.0 + norm_u**2):
        failures.append(f"Taylor coefficients do not reproduce (a1={a1:.6g}, a2={a2:.6g})")
    if abs(K - cert.K) > 1e-9 * (1.0 + abs(K)):
        failures.append(f"K does not reproduce ({K:.12g} vs {cert.K:.12g})")
    if abs(a1) > 1e-9 * (1.0 + norm_u):
        failures.append(f"first Taylor coefficient {a1:.3e} is not zero")
    if not K > 0.0:
        failures.append(f"K = {K:.6g} is not positive")
    if a2 > -2.0 * K + 1e-6:
        failures.append(f"second Taylor coefficient {a2:.6g} exceeds -2K = {-2 * K:.6g}")
    nu_u = float(nu_vector(contact) @ U)
    if abs(nu_u) > 1e-10:
        failures.append(f"nu . U = {nu_u:.3e}, velocity is off the grazing hyperplane")
    if not cert.delta > 0.0:
        failures.append("delta must be positive")
        return Verdict(False, tuple(failures))

    scan = time_scan(shape, cert.beta, U, cert.delta, SCAN_SAMPLES, contact=contact,
                     compute_area=False)
    missing = [s.t for s in scan.samples if s.status is not Overlap.OVERLAPPING]
    if missing:
        failures.append(f"no overlap at {len(missing)} of {len(scan.samples)} scan times "
                        f"(first t={missing[0]:.3e})")
    samples = _overlap_samples(shape, cert.beta, contact.d, U, cert.delta)
    thin = [t for t, area in samples if not area > TOL.overlap]
    if thin:
        failures.append(f"overlap area below {TOL.overlap:g} at t={thin}")
    if not ({t > 0 for t, _ in cert.overlap_samples} >= {True, False}):
        failures.append("stored overlap samples do not cover both signs of t")
    if any(area <= 0.0 for t, area in cert.overlap_samples if t != 0.0):
        failures.append("stored overlap samples contain non-positive areas")
    return Verdict(not failures, tuple(failures), samples)
