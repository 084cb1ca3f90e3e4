"""Boltzmann scattering for congruent planar bodies and conservation checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ContactData, Shape
from .germs import as_velocity, nu_vector


@dataclass(frozen=True)
class MassInertia:
    m: float
    J: float

    @classmethod
    def of(cls, shape: Shape) -> MassInertia:
        return cls(shape.area, shape.polar_moment)

    @property
    def weights(self) -> np.ndarray:
        """Diagonal of the square-root mass-inertia matrix."""
        sm, sj = math.sqrt(self.m), math.sqrt(self.J)
        return np.array([sm, sm, sm, sm, sj, sj])


@dataclass(frozen=True)
class ScatterOperator:
    nu_hat: np.ndarray
    weights: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """s = M^-1 (I - 2 nu_hat nu_hat^T) M."""
        refl = np.eye(6) - 2.0 * np.outer(self.nu_hat, self.nu_hat)
        return refl * self.weights[None, :] / self.weights[:, None]


@dataclass(frozen=True)
class ConservationReport:
    linear: tuple[float, float]
    angular: float
    energy: float

    @property
    def worst(self) -> float:
        return max(*self.linear, self.angular, self.energy)


def conserved_vectors(contact: ContactData, mi: MassInertia):
    """Linear momentum covectors E1, E2 and the angular momentum covector Gamma."""
    e1 = np.array([1.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0, 1.0, 0.0, 0.0])
    # d e(psi) = p + q; avoids re-deriving psi from the contact
    offset = contact.p + contact.q
    gamma = np.array([0.0, 0.0, -mi.m * offset[1], mi.m * offset[0], mi.J, mi.J])
    return e1, e2, gamma


def build_scatter(contact: ContactData, mi: MassInertia) -> ScatterOperator:
    nu = nu_vector(contact)
    c = 1.0 / math.sqrt(2.0 / mi.m + (nu[4] ** 2 + nu[5] ** 2) / mi.J)
    w = mi.weights
    return ScatterOperator(c * nu / w, w)


def apply_scatter(op: ScatterOperator, U) -> np.ndarray:
    """U - 2 (nu_hat . M U) M^-1 nu_hat."""
    U = as_velocity(U)
    return U - 2.0 * (op.nu_hat @ (op.weights * U)) * op.nu_hat / op.weights


def check_conservation(contact: ContactData, mi: MassInertia, U, U_post) -> ConservationReport:
    U, U_post = as_velocity(U), as_velocity(U_post)
    e1, e2, gamma = conserved_vectors(contact, mi)
    dU = U_post - U
    w = mi.weights
    energy = abs(np.sum((w * U_post) ** 2) - np.sum((w * U) ** 2))
    return ConservationReport((abs(e1 @ dU), abs(e2 @ dU)), abs(gamma @ dU), float(energy))
