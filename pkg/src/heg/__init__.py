"""Collision germs of hard disks and hard ellipses in the plane."""

__version__ = "0.1.0"

from .config import TOL
from .geometry import (Beta, ContactData, ContactDegenerate, GeometryError, Overlap, Shape,
                       boundary_point_from_normal, closest_approach_distance, config_from_contact,
                       contact_data, level_value, overlap_test, perp)
from .germs import (ClassificationConflict, Germ, GermClass, TaylorEvidence, classify_certified,
                    classify_local, nu_vector, psi_ddot0, psi_dot0, tracking_psi, velocity6)
from .disk import classify_disk, disk_contact, disk_quadratic, tracking_phi
from .scattering import (MassInertia, ScatterOperator, apply_scatter, build_scatter,
                         check_conservation, conserved_vectors)
from .counterexample import (Certificate, DegenerateContact, EpsilonOutOfRange,
                             VerificationFailed, find_inadmissible, k_beta, poly_P,
                             special_velocity, verify_certificate)
from .oracle import finite_difference, overlap_area, time_scan
