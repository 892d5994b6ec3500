import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracle
from layered_fsi import FormWeights, GeometryConfig, build_forms
from layered_fsi.ale import evaluate_ale
from layered_fsi.fem.assembly import (assemble_advection, assemble_boundary_load, assemble_thick_elasticity,
                                      assemble_thin_wall, assemble_transformed_divergence,
                                      assemble_transformed_stiffness, assemble_weighted_mass)

GEOMETRIES = [(1.0, 1.0, 1.0, 2, 2, 1), (2.0, 0.5, 0.7, 2, 2, 1), (1.0, 1.0, 1.0, 2, 2, 2), (1.5, 2.0, 0.5, 2, 2, 2)]
TOL = 1e-12


def _random_eta(rng, nz, R, amp=0.2):
    eta = amp * R * rng.uniform(-1, 1, 2 * nz + 1)
    eta[[0, -1]] = 0.0
    return eta


@pytest.mark.parametrize("L,R,H,nz,nr_f,nr_s", GEOMETRIES)
def test_fluid_matrices_match_oracle(L, R, H, nz, nr_f, nr_s, rng):
    f = build_forms(GeometryConfig(L=L, R=R, H=H, nz=nz, nr_f=nr_f, nr_s=nr_s))
    eta = _random_eta(rng, nz, R)
    v = rng.standard_normal(2 * nz + 1)
    u = rng.standard_normal(f.fluid.n_vector_dofs)
    ale = evaluate_ale(eta, v, f.fluid)
    M, K, N, B = oracle.fluid_forms(L, R, nz, nr_f, eta, v, u, mu=0.7)
    np.testing.assert_allclose(assemble_weighted_mass(f.fluid, ale.J, vector=True).toarray(), M, rtol=0, atol=TOL)
    np.testing.assert_allclose(assemble_transformed_stiffness(f.fluid, ale, 0.7).toarray(), K, rtol=0,
                               atol=TOL * max(1, np.abs(K).max()))
    np.testing.assert_allclose(assemble_advection(f.fluid, ale, u).toarray(), N, rtol=0, atol=TOL)
    np.testing.assert_allclose(assemble_transformed_divergence(f.fluid, ale).toarray(), B, rtol=0, atol=TOL)


@pytest.mark.parametrize("L,R,H,nz,nr_f,nr_s", GEOMETRIES)
def test_solid_and_wall_match_oracle(L, R, H, nz, nr_f, nr_s):
    g = GeometryConfig(L=L, R=R, H=H, nz=nz, nr_f=nr_f, nr_s=nr_s)
    w = FormWeights(mu_s=0.8, lam=2.5, rho_s2=3.0, rho_s1h=0.4, c2=1.7)
    f = build_forms(g, w)
    Ms, Ks = oracle.solid_forms(L, R, H, nz, nr_s, mu_s=0.8, lam=2.5)
    np.testing.assert_allclose(f.M_s1.toarray(), Ms, rtol=0, atol=TOL)
    np.testing.assert_allclose(f.M_s.toarray(), 3.0 * Ms, rtol=0, atol=TOL)
    np.testing.assert_allclose(assemble_thick_elasticity(f.solid, w).toarray(), Ks, rtol=0, atol=TOL * 10)
    Mw, Sw = oracle.wall_forms(L, nz)
    Mw_p, Kw_p, Dw_p = assemble_thin_wall(f.maps.z, w)
    np.testing.assert_allclose(Mw_p.toarray(), 0.4 * Mw, rtol=0, atol=TOL)
    np.testing.assert_allclose(Kw_p.toarray(), 1.7 * Sw, rtol=0, atol=TOL * 10)
    assert abs(Dw_p).max() == 0
    np.testing.assert_allclose(f.g_in, oracle.boundary_load(L, R, nz, nr_f, False), rtol=0, atol=TOL)
    np.testing.assert_allclose(f.g_out, oracle.boundary_load(L, R, nz, nr_f, True), rtol=0, atol=TOL)


def test_thin_wall_optional_terms():
    z = np.linspace(0, 1, 5)
    Mw, Sw = oracle.wall_forms(1.0, 2)
    M, K, D = assemble_thin_wall(z, FormWeights(C0=2.0, C1=0.5, D0=0.3, D1=0.2))
    np.testing.assert_allclose(K.toarray(), 2.0 * Mw + 1.5 * Sw, atol=1e-12)
    np.testing.assert_allclose(D.toarray(), 0.3 * Mw + 0.2 * Sw, atol=1e-12)


def test_boundary_load_integrates_to_radius():
    f = build_forms(GeometryConfig(R=1.3, nz=2, nr_f=3))
    g = assemble_boundary_load(f.fluid, "inlet")
    # applied to u_z = 1 the load is the inlet length
    assert g[: f.fluid.n_nodes].sum() == pytest.approx(1.3, abs=1e-14)
    assert np.all(g[f.fluid.n_nodes:] == 0)


def test_mass_is_weighted_volume():
    f = build_forms(GeometryConfig(L=2.0, R=0.5, nz=2, nr_f=2))
    eta = np.array([0, 0.1, 0.2, 0.1, 0])
    ale = evaluate_ale(eta, None, f.fluid)
    M = assemble_weighted_mass(f.fluid, ale.J)
    one = np.ones(f.fluid.n_nodes)
    # area of the deformed channel: L R + int eta, Simpson exact for quadratics
    area = 2.0 * 0.5 + (0.5 * (0 + 4 * 0.1 + 0.2) / 6 * 2) * 2
    assert one @ M @ one == pytest.approx(area, rel=1e-13)


eta_strategy = st.lists(st.floats(-0.4, 0.4), min_size=3, max_size=3).map(lambda x: np.array([0.0, *x, 0.0]))


@settings(max_examples=25, deadline=None)
@given(eta=eta_strategy, seed=st.integers(0, 2 ** 31))
def test_advection_skew_part(eta, seed):
    f = build_forms(GeometryConfig(nz=2, nr_f=2, nr_s=1))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(5)
    u = rng.standard_normal(f.fluid.n_vector_dofs)
    ale = evaluate_ale(eta, v, f.fluid)
    N = assemble_advection(f.fluid, ale, u).toarray()
    # symmetric part is the half-weighted mass of dJ/dt
    S = 0.5 * (N + N.T)
    Mdot = assemble_weighted_mass(f.fluid, 0.5 * ale.dJdt, vector=True).toarray()
    np.testing.assert_allclose(S, Mdot, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(eta=eta_strategy)
def test_viscous_matrix_psd(eta):
    f = build_forms(GeometryConfig(nz=2, nr_f=2, nr_s=1))
    ale = evaluate_ale(eta, None, f.fluid)
    K = assemble_transformed_stiffness(f.fluid, ale, 1.0).toarray()
    np.testing.assert_allclose(K, K.T, atol=1e-13)
    assert np.linalg.eigvalsh(K).min() > -1e-11
