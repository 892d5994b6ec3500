import numpy as np
import pytest

from layered_fsi import ConfigurationError, DomainDegeneracyError, GeometryConfig, PreconditionError
from layered_fsi.ale import ValidityMonitor, check_validity, evaluate_ale, interface_values
from layered_fsi.mesh import build_fluid_mesh


@pytest.fixture(scope="module")
def mesh():
    return build_fluid_mesh(GeometryConfig(L=2.0, R=0.5, nz=2, nr_f=2))


def test_interface_values_reproduce_quadratics(mesh):
    z = np.linspace(0, 2.0, 5)
    vals, dvals = interface_values(mesh, z * (2.0 - z))
    ale = evaluate_ale(np.zeros(5), None, mesh)
    np.testing.assert_allclose(vals, ale.z * (2.0 - ale.z), atol=1e-14)
    np.testing.assert_allclose(dvals, 2.0 - 2 * ale.z, atol=1e-13)


def test_coefficients_against_stretch(mesh):
    # eta = a z (L - z): exact J, transformed-gradient coefficients and w
    a = 0.05
    z = np.linspace(0, 2.0, 5)
    eta = a * z * (2.0 - z)
    v = 3 * eta
    ale = evaluate_ale(eta, v, mesh)
    e = a * ale.z * (2.0 - ale.z)
    de = a * (2.0 - 2 * ale.z)
    np.testing.assert_allclose(ale.J, 1 + e / 0.5, atol=1e-14)
    np.testing.assert_allclose(ale.coef_rr, 0.5 / (0.5 + e), atol=1e-13)
    # d(r_ref)/d(r_phys) chain: r_phys = r (R + eta) / R
    np.testing.assert_allclose(ale.coef_zr, -ale.r * de / (0.5 + e), atol=1e-13)
    np.testing.assert_allclose(ale.w_r, 3 * e * ale.r / 0.5, atol=1e-13)
    np.testing.assert_allclose(ale.dJdt, 3 * e / 0.5, atol=1e-13)


def test_transformed_gradient_of_physical_coordinate(mesh):
    # f = r_phys(z, r) = r (R + eta) / R has physical gradient (0, 1)
    a = 0.1
    z = np.linspace(0, 2.0, 5)
    eta = a * z * (2.0 - z)
    ale = evaluate_ale(eta, None, mesh)
    e = a * ale.z * (2.0 - ale.z)
    de = a * (2.0 - 2 * ale.z)
    dfz = ale.r * de / 0.5
    dfr = (0.5 + e) / 0.5
    np.testing.assert_allclose(dfz + ale.coef_zr * dfr, 0.0, atol=1e-13)
    np.testing.assert_allclose(ale.coef_rr * dfr, 1.0, atol=1e-13)


def test_endpoint_precondition(mesh):
    with pytest.raises(PreconditionError):
        evaluate_ale(np.array([0.1, 0, 0, 0, 0]), None, mesh)


def test_negative_jacobian(mesh):
    with pytest.raises(DomainDegeneracyError) as exc:
        evaluate_ale(np.array([0, -0.3, -0.8, -0.3, 0]), None, mesh)
    assert exc.value.value <= 0
    assert 0 < exc.value.location < 2.0


def test_validity_monitor():
    mon = ValidityMonitor(R=1.0, R_min=0.1)
    rep = check_validity([0, -0.5, -0.95, 0.3, 0], mon)
    assert rep.degenerate and rep.location == 2
    assert tuple(rep) == pytest.approx((0.05, 1.3))
    assert not check_validity(np.zeros(5), mon).degenerate
    assert ValidityMonitor(R=2.0).R_min == pytest.approx(2e-3)
    with pytest.raises(ConfigurationError):
        ValidityMonitor(R=1.0, R_min=1.5)
