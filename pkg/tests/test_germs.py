import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heg.disk import disk_contact
from heg.geometry import Beta, Overlap, Shape, contact_data, overlap_test, trajectory_poses
from heg.germs import (Germ, GermClass, TaylorEvidence, as_velocity, classify_certified,
                       classify_local, grazing_basis, label_from_taylor, min_grazing_eigenvalue,
                       nu_vector, psi_ddot0, psi_dot0, quadratic_form_matrix, tracking_psi)
from heg.oracle import finite_difference

HALF_PI = math.pi / 2
STACKED = Beta(0.0, HALF_PI)
UP = np.array([0, 0, 0, 1.0, 0, 0])


@pytest.fixture(scope="module")
def stacked():
    s = Shape.ellipse(0.5)
    return s, contact_data(s, STACKED)


def test_as_velocity_rejects_bad_input():
    with pytest.raises(ValueError):
        as_velocity([1, 2, 3])
    with pytest.raises(ValueError):
        as_velocity([0, 0, 0, 0, 0, math.nan])


def test_tracking_psi_examples(stacked):
    s, c = stacked
    assert tracking_psi(s, STACKED, c, np.zeros(6), 0.37) == pytest.approx(0.0, abs=1e-8)
    assert tracking_psi(s, STACKED, c, UP, 1.0) == pytest.approx(3.0, abs=1e-8)
    assert tracking_psi(s, STACKED, c, -UP, 0.1) == pytest.approx(-0.19, abs=1e-8)


def test_tracking_psi_vectorised(stacked):
    s, c = stacked
    t = np.array([-0.2, 0.0, 0.5])
    out = tracking_psi(s, STACKED, c, UP, t)
    np.testing.assert_allclose(out, (1 + t) ** 2 - 1, atol=1e-8)


def test_nu_vector_examples(cert03):
    np.testing.assert_allclose(nu_vector(cert03.contact), (0, -1, 0, 1, 0, 0), atol=1e-12)
    np.testing.assert_allclose(nu_vector(disk_contact(Beta(0, 0))), (-1, 0, 1, 0, 0, 0), atol=0)
    c = contact_data(Shape.ellipse(0.5), Beta(HALF_PI, 0.0))
    np.testing.assert_allclose(nu_vector(c), (-1, 0, 1, 0, 0, 0), atol=1e-7)


def test_taylor_examples(stacked, cert03):
    s, c = stacked
    assert psi_dot0(s, c, np.zeros(6)) == 0.0
    assert psi_ddot0(s, c, np.zeros(6)) == 0.0
    assert psi_dot0(s, c, UP) == pytest.approx(2.0, abs=1e-7)
    assert psi_ddot0(s, c, UP) == pytest.approx(2.0, abs=1e-7)
    s3 = Shape.ellipse(0.3)
    np.testing.assert_allclose(cert03.Ustar, (0, 0, 1 / 0.09 - 1, 0, 1, 0), atol=1e-9)
    assert psi_dot0(s3, cert03.contact, cert03.Ustar) == pytest.approx(0.0, abs=1e-9)
    assert psi_ddot0(s3, cert03.contact, cert03.Ustar) == pytest.approx(-20.2222222222, abs=1e-5)


def test_label_thresholds():
    assert label_from_taylor(-1e-8, 0) is Germ.PRE
    assert label_from_taylor(1e-8, 0) is Germ.POST
    assert label_from_taylor(0, 1e-8) is Germ.GRAZING
    assert label_from_taylor(0, -1e-8) is Germ.INADMISSIBLE
    assert label_from_taylor(1e-10, -1e-10) is Germ.UNDETERMINED


def test_germclass_str():
    g = GermClass(Germ.PRE, TaylorEvidence(-4.0, 8.0, -2.0))
    assert str(g) == "Pre (a1=-4, a2=8)"


def test_classify_examples(stacked, cert03):
    s, c = stacked
    assert classify_local(s, c, -UP).label is Germ.PRE
    assert classify_local(s, c, UP).label is Germ.POST
    assert classify_local(Shape.ellipse(0.3), cert03.contact, cert03.Ustar).label is Germ.INADMISSIBLE


def test_certified_examples(stacked, cert03):
    s, c = stacked
    assert classify_certified(s, STACKED, -UP, 1e-2, 64, contact=c).label is Germ.PRE
    assert classify_certified(s, STACKED, UP, 1e-2, 64, contact=c).label is Germ.POST
    assert classify_certified(s, STACKED, np.zeros(6), 1e-2, 64, contact=c).label is Germ.GRAZING
    s3 = Shape.ellipse(0.3)
    g = classify_certified(s3, cert03.beta, cert03.Ustar, 1e-2, 64, contact=cert03.contact)
    assert g.label is Germ.INADMISSIBLE


def test_certified_disk_grazing_never_inadmissible(rng):
    s = Shape.disk()
    for _ in range(25):
        beta = Beta(*rng.uniform(0, 2 * math.pi, 2))
        c = disk_contact(beta)
        U = grazing_basis(c) @ rng.uniform(-1, 1, 5)
        g = classify_certified(s, beta, U, 1e-2, 16, contact=c)
        assert g.label in (Germ.GRAZING, Germ.POST)


def test_quadratic_form_matrix_reproduces(rng):
    s = Shape.ellipse(0.4)
    c = contact_data(s, Beta(0.3, 1.1))
    A = quadratic_form_matrix(s, c)
    np.testing.assert_allclose(A, A.T)
    for _ in range(10):
        U = rng.normal(size=6)
        assert U @ A @ U == pytest.approx(psi_ddot0(s, c, U), rel=1e-10, abs=1e-10)


def test_grazing_basis_orthonormal(cert03):
    N = grazing_basis(cert03.contact)
    np.testing.assert_allclose(N.T @ N, np.eye(5), atol=1e-12)
    np.testing.assert_allclose(nu_vector(cert03.contact) @ N, 0, atol=1e-12)


def test_min_grazing_eigenvalue_signs(cert03):
    assert min_grazing_eigenvalue(Shape.ellipse(0.3), cert03.contact) < 0
    assert min_grazing_eigenvalue(Shape.disk(), disk_contact(Beta(0, 1))) >= -1e-12


def _case(rng):
    eps = rng.uniform(0.15, 0.95)
    s = Shape.ellipse(eps) if rng.random() > 0.2 else Shape.disk()
    beta = Beta(*rng.uniform(0, 2 * math.pi, 2))
    U = rng.uniform(-1, 1, 6)
    U *= rng.uniform(0.1, 2) / np.linalg.norm(U)
    return s, beta, U


def test_finite_difference_consistency(rng):
    for _ in range(200):
        s, beta, U = _case(rng)
        c = contact_data(s, beta)
        f = lambda t: tracking_psi(s, beta, c, U, t)
        assert abs(psi_dot0(s, c, U) - finite_difference(f, 0.0, 1, 1e-5)) <= 1e-6
        assert abs(psi_ddot0(s, c, U) - finite_difference(f, 0.0, 2, 1e-5)) <= 1e-4


def test_collinearity(rng):
    for _ in range(200):
        s, beta, U = _case(rng)
        c = contact_data(s, beta)
        g = np.linalg.norm(s.matrix @ c.p)
        assert psi_dot0(s, c, U) == pytest.approx(2 * g * (nu_vector(c) @ U), abs=1e-9)


def test_local_certified_agreement(rng):
    n = 0
    while n < 30:
        s, beta, U = _case(rng)
        c = contact_data(s, beta)
        local = classify_local(s, c, U)
        if abs(local.evidence.a1) <= 1e-6:
            continue
        n += 1
        assert classify_certified(s, beta, U, 1e-2, 16, contact=c).label is local.label


def test_sign_semantics(rng):
    hits = 0
    for _ in range(100):
        s, beta, U = _case(rng)
        c = contact_data(s, beta)
        t = np.linspace(-0.3, 0.3, 13)
        psi = tracking_psi(s, beta, c, U, t)
        ca, aa, cb, ab = trajectory_poses(beta, c.d, U, t)
        for i in np.nonzero(psi < -1e-6)[0]:
            hits += 1
            assert overlap_test(s, (ca[i], aa[i]), (cb[i], ab[i])) is Overlap.OVERLAPPING
    assert hits > 50


@settings(max_examples=40, deadline=None)
@given(eps=st.floats(0.15, 0.95), th=st.floats(0, 6.28), ps=st.floats(0, 6.28),
       U=st.lists(st.floats(-2, 2), min_size=6, max_size=6), scale=st.sampled_from([0.1, 10.0]))
def test_scaling_covariance(eps, th, ps, U, scale):
    s = Shape.ellipse(eps)
    c = contact_data(s, Beta(th, ps))
    U = np.array(U)
    base = classify_local(s, c, U)
    scaled = classify_local(s, c, scale * U)
    assert scaled.evidence.a1 == pytest.approx(scale * base.evidence.a1, rel=1e-9, abs=1e-12)
    assert scaled.evidence.a2 == pytest.approx(scale ** 2 * base.evidence.a2, rel=1e-9, abs=1e-12)
    # labels can only change when scaling moves a coefficient across the noise band
    a1, a2 = abs(base.evidence.a1), abs(base.evidence.a2)
    if a1 > 1e-7 or (a1 < 1e-11 and a2 > 1e-7):
        assert scaled.label is base.label
