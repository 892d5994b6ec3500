"""Vectorized element assembly of every form used by the splitting scheme.

Element matrices are computed for all elements at once with ``einsum`` and
scattered through a COO triplet list; ``tocsr`` sums duplicates in a fixed
order, so assembly is deterministic.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..ale import AleOperators, interface_values
from ..mesh import FemMesh
from .basis import DEFAULT_RULE, QuadRule, gauss_legendre, lagrange_1d
from .weights import FormWeights


def _vector_dofs(mesh: FemMesh) -> np.ndarray:
    e = mesh.elements
    return np.concatenate([e, e + mesh.n_nodes], axis=1)


def _scatter(rows, cols, Ke, shape) -> sp.csr_matrix:
    R = np.broadcast_to(rows[:, :, None], Ke.shape)
    C = np.broadcast_to(cols[:, None, :], Ke.shape)
    A = sp.coo_matrix((Ke.ravel(), (R.ravel(), C.ravel())), shape=shape).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def _block_vector(Ks) -> np.ndarray:
    """Stack a 2x2 nested list of ``(n_el, 9, 9)`` blocks into ``(n_el, 18, 18)``."""
    return np.concatenate([np.concatenate(row, axis=2) for row in Ks], axis=1)


def _dx(mesh: FemMesh, quad: QuadRule) -> np.ndarray:
    return np.broadcast_to(quad.weights[None, :] * (mesh.hz * mesh.hr), (mesh.n_elements, quad.n_points))


def _plain_gradients(mesh: FemMesh, quad: QuadRule):
    gz = np.broadcast_to(quad.dN2_dxi / mesh.hz, (mesh.n_elements,) + quad.dN2_dxi.shape)
    gr = np.broadcast_to(quad.dN2_dzeta / mesh.hr, gz.shape)
    return gz, gr


def symmetrize(A: sp.spmatrix) -> sp.csr_matrix:
    S = (0.5 * (A + A.T)).tocsr()
    S.sort_indices()
    return S


def assemble_weighted_mass(mesh: FemMesh, weight=1.0, vector: bool = False,
                           quad: QuadRule = DEFAULT_RULE) -> sp.csr_matrix:
    """``M[i, j] = int w phi_i phi_j`` on the Q2 space (block diagonal for
    vector fields). ``weight`` is a scalar or an ``(n_el, n_pts)`` array
    sampled on ``quad``."""
    w = np.broadcast_to(np.asarray(weight, dtype=float), (mesh.n_elements, quad.n_points))
    Me = np.einsum("eq,qa,qb->eab", w * _dx(mesh, quad), quad.N2, quad.N2)
    if not vector:
        return _scatter(mesh.elements, mesh.elements, Me, (mesh.n_nodes,) * 2)
    Z = np.zeros_like(Me)
    dofs = _vector_dofs(mesh)
    return _scatter(dofs, dofs, _block_vector([[Me, Z], [Z, Me]]), (mesh.n_vector_dofs,) * 2)


def assemble_transformed_stiffness(mesh: FemMesh, ale: AleOperators, mu: float) -> sp.csr_matrix:
    """Viscous form ``2 mu int J D_eta(u) : D_eta(q)`` (symmetric PSD)."""
    gz, gr = ale.gradients(mesh)
    c = mu * ale.J * ale.dx
    gg = np.einsum("eq,eqa,eqb->eab", c, gz, gz)
    rr = np.einsum("eq,eqa,eqb->eab", c, gr, gr)
    rz = np.einsum("eq,eqa,eqb->eab", c, gr, gz)
    lap = gg + rr
    Ke = _block_vector([[lap + gg, rz], [rz.transpose(0, 2, 1), lap + rr]])
    dofs = _vector_dofs(mesh)
    return symmetrize(_scatter(dofs, dofs, Ke, (mesh.n_vector_dofs,) * 2))


def transport_field(mesh: FemMesh, ale: AleOperators, transport_u):
    """``u - w`` at the quadrature points for the advection form."""
    u = np.asarray(transport_u, dtype=float)
    N = ale.quad.N2
    e = mesh.elements
    bz = u[e] @ N.T
    br = u[e + mesh.n_nodes] @ N.T - ale.w_r
    return bz, br


def assemble_advection(mesh: FemMesh, ale: AleOperators, transport_u, interface_v=None,
                       fused: bool = True):
    """Skew-symmetrized ALE advection plus the Jacobian-rate mass term.

    ``q^T N_skew u = 1/2 int J ((b . grad_eta) u . q - (b . grad_eta) q . u)``
    with ``b = u_transport - w``, and ``q^T M_rate u = 1/2 int (dJ/dt) u . q``.
    Returns ``N_skew + M_rate`` when ``fused`` else the pair.
    If ``interface_v`` is given it replaces the interface velocity carried by
    ``ale`` in both ``w`` and ``dJ/dt``.
    """
    if interface_v is not None:
        vq, _ = interface_values(mesh, interface_v, ale.quad)
        rn = ale.r / mesh.r1
        ale = AleOperators(ale.J, ale.deta, ale.coef_zr, ale.coef_rr, vq * rn, vq / mesh.r1,
                           ale.dx, ale.z, ale.r, ale.quad)
    N = ale.quad.N2
    gz, gr = ale.gradients(mesh)
    bz, br = transport_field(mesh, ale, transport_u)
    bg = bz[:, :, None] * gz + br[:, :, None] * gr
    c = 0.5 * ale.J * ale.dx
    half = np.einsum("eq,eqb,qa->eab", c, bg, N)
    S = half - half.transpose(0, 2, 1)
    Mr = np.einsum("eq,qa,qb->eab", 0.5 * ale.dJdt * ale.dx, N, N)
    Z = np.zeros_like(S)
    dofs = _vector_dofs(mesh)
    shape = (mesh.n_vector_dofs,) * 2
    Nskew = _scatter(dofs, dofs, _block_vector([[S, Z], [Z, S]]), shape)
    Nskew = (0.5 * (Nskew - Nskew.T)).tocsr()
    Nskew.sort_indices()
    Mrate = _scatter(dofs, dofs, _block_vector([[Mr, Z], [Z, Mr]]), shape)
    if fused:
        return (Nskew + Mrate).tocsr()
    return Nskew, Mrate


def assemble_transformed_divergence(mesh: FemMesh, ale: AleOperators) -> sp.csr_matrix:
    """``(B u)_p = int J psi_p (grad_eta . u)`` with Q1 pressure tests."""
    gz, gr = ale.gradients(mesh)
    c = ale.J * ale.dx
    Bz = np.einsum("eq,qp,eqb->epb", c, ale.quad.N1, gz)
    Br = np.einsum("eq,qp,eqb->epb", c, ale.quad.N1, gr)
    Be = np.concatenate([Bz, Br], axis=2)
    return _scatter(mesh.p_elements, _vector_dofs(mesh), Be, (mesh.n_p_nodes, mesh.n_vector_dofs))


def assemble_thick_elasticity(mesh: FemMesh, weights: FormWeights,
                              quad: QuadRule = DEFAULT_RULE) -> sp.csr_matrix:
    """``a_S(d, psi) = int 2 mu_s D(d):D(psi) + lam div d div psi``."""
    gz, gr = _plain_gradients(mesh, quad)
    dx = _dx(mesh, quad)
    mu, lam = weights.mu_s, weights.lam
    gg = np.einsum("eq,eqa,eqb->eab", dx, gz, gz)
    rr = np.einsum("eq,eqa,eqb->eab", dx, gr, gr)
    rz = np.einsum("eq,eqa,eqb->eab", dx, gr, gz)
    zr = rz.transpose(0, 2, 1)
    lap = gg + rr
    Ke = _block_vector([[mu * (lap + gg) + lam * gg, mu * rz + lam * zr],
                        [mu * zr + lam * rz, mu * (lap + rr) + lam * rr]])
    dofs = _vector_dofs(mesh)
    return symmetrize(_scatter(dofs, dofs, Ke, (mesh.n_vector_dofs,) * 2))


def assemble_thin_wall(z_nodes, weights: FormWeights, n_points: int = 3):
    """Mass, stiffness and damping of the thin wall on quadratic 1D elements.

    Returns full matrices over all ``2 nz + 1`` interface nodes (Dirichlet
    ends are removed by the caller):

    * ``M = rho_s1h int eta psi``
    * ``K = (c2 + C1) int eta' psi' + C0 int eta psi``
    * ``D = D0 int eta psi + D1 int eta' psi'``
    """
    weights.validate()
    z = np.asarray(z_nodes, dtype=float)
    n = z.size
    if n < 3 or n % 2 == 0:
        raise ValueError("quadratic interface grid needs an odd number (>= 3) of nodes")
    x, w = gauss_legendre(n_points)
    L, dL = lagrange_1d(2, x)
    first = np.arange(0, n - 2, 2)
    conn = first[:, None] + np.arange(3)[None, :]
    h = z[conn[:, 2]] - z[conn[:, 0]]
    mass_e = np.einsum("q,qa,qb->ab", w, L, L)[None] * h[:, None, None]
    stiff_e = np.einsum("q,qa,qb->ab", w, dL, dL)[None] / h[:, None, None]

    def scatter(Ke):
        return _scatter(conn, conn, Ke, (n, n))

    Mb, Kb = scatter(mass_e), scatter(stiff_e)
    M = weights.rho_s1h * Mb
    K = weights.membrane * Kb + weights.C0 * Mb
    D = weights.D0 * Mb + weights.D1 * Kb
    return M.tocsr(), K.tocsr(), D.tocsr()


def assemble_boundary_load(mesh: FemMesh, tag: str, n_points: int = 3) -> np.ndarray:
    """``g_i = int_edge phi_i`` along a vertical boundary, placed in the
    ``z`` component; ``g . q = int q_z`` over that edge."""
    x, w = gauss_legendre(n_points)
    L, _ = lagrange_1d(2, x)
    edges = mesh.edge_nodes(tag)
    g = np.zeros(mesh.n_vector_dofs)
    lengths = np.abs(mesh.coords[edges[:, 2], 1] - mesh.coords[edges[:, 0], 1])
    local = (w @ L)[None, :] * lengths[:, None]
    np.add.at(g, edges.ravel(), local.ravel())
    return g
