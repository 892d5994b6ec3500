"""ALE map of the radially stretched channel and its pulled-back operators.

The reference channel ``(0, L) x (0, R)`` is mapped onto the physical one by
``(z, r) -> (z, r (R + eta(z)) / R)``. With ``J = 1 + eta / R`` the
transformed gradient of a scalar ``f`` is::

    grad_eta f = (d_z f - r (eta' / R) / J * d_r f,  d_r f / J)

and the mesh velocity is ``w = (0, v r / R)``. For ``R = 1`` these are
exactly the stretch, Jacobian and operators of the classical construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainDegeneracyError, PreconditionError
from .fem.basis import DEFAULT_RULE, QuadRule
from .mesh import FemMesh


def interface_values(mesh: FemMesh, values, quad: QuadRule = DEFAULT_RULE):
    """Interpolate an interface field (``2 nz + 1`` nodal values) to every
    quadrature point of every element. Returns value and z-derivative arrays
    of shape ``(n_elements, n_points)``."""
    values = np.asarray(values, dtype=float)
    if values.shape != (2 * mesh.nz + 1,):
        raise ValueError(f"interface field needs {2 * mesh.nz + 1} values, got {values.shape}")
    col = np.arange(mesh.n_elements) % mesh.nz
    local = values[2 * col[:, None] + np.arange(3)[None, :]]
    f = local @ quad.L2.T
    df = local @ quad.dL2.T / mesh.hz
    return f, df


@dataclass(frozen=True)
class AleOperators:
    """ALE coefficients sampled at the quadrature points of a fluid mesh.

    All arrays have shape ``(n_elements, n_points)``.
    """

    J: np.ndarray
    deta: np.ndarray
    coef_zr: np.ndarray
    coef_rr: np.ndarray
    w_r: np.ndarray
    dJdt: np.ndarray
    dx: np.ndarray
    z: np.ndarray
    r: np.ndarray
    quad: QuadRule

    def gradients(self, mesh: FemMesh):
        """Transformed gradients of the Q2 basis, each ``(n_el, n_pts, 9)``."""
        q = self.quad
        dz = q.dN2_dxi / mesh.hz
        dr = q.dN2_dzeta / mesh.hr
        gz = dz[None, :, :] + self.coef_zr[:, :, None] * dr[None, :, :]
        gr = self.coef_rr[:, :, None] * dr[None, :, :]
        return gz, gr


def evaluate_ale(eta, v_for_w, mesh: FemMesh, quad: QuadRule = DEFAULT_RULE,
                 check_endpoints: bool = True) -> AleOperators:
    """Sample ``J``, the transformed-gradient coefficients and the domain
    velocity on every fluid quadrature point.

    Raises :class:`DomainDegeneracyError` if ``J <= 0`` anywhere.
    """
    eta = np.asarray(eta, dtype=float)
    v = np.zeros_like(eta) if v_for_w is None else np.asarray(v_for_w, dtype=float)
    if check_endpoints and (eta[0] != 0.0 or eta[-1] != 0.0):
        raise PreconditionError("interface displacement must vanish at both channel ends")
    R = mesh.r1
    eta_q, deta_q = interface_values(mesh, eta, quad)
    v_q, _ = interface_values(mesh, v, quad)
    J = 1.0 + eta_q / R
    if np.any(J <= 0.0):
        e, k = np.unravel_index(int(np.argmin(J)), J.shape)
        zq = mesh.element_origin()[e, 0] + quad.xi[k] * mesh.hz
        raise DomainDegeneracyError(f"ALE Jacobian {J[e, k]:.6g} <= 0 at z={zq:.6g}",
                                    location=float(zq), value=float(J[e, k]))
    origin = mesh.element_origin()
    z = origin[:, 0:1] + quad.xi[None, :] * mesh.hz
    r = origin[:, 1:2] + quad.zeta[None, :] * mesh.hr
    rn = r / R
    coef_zr = -r * (deta_q / R) / J
    coef_rr = 1.0 / J
    dx = np.broadcast_to(quad.weights[None, :] * (mesh.hz * mesh.hr), J.shape)
    return AleOperators(J, deta_q, coef_zr, coef_rr, v_q * rn, v_q / R, dx, z, r, quad)


@dataclass(frozen=True)
class ValidityMonitor:
    R: float = 1.0
    R_min: float | None = None
    R_max: float | None = None

    def __post_init__(self):
        if self.R_min is None:
            object.__setattr__(self, "R_min", 1e-3 * self.R)
        if self.R_max is None:
            object.__setattr__(self, "R_max", 10.0 * self.R)
        if not (0.0 < self.R_min < self.R < self.R_max):
            raise ConfigurationError(
                f"guards need 0 < R_min < R < R_max, got R_min={self.R_min}, R={self.R}, R_max={self.R_max}")


@dataclass(frozen=True)
class ValidityReport:
    min_radius: float
    max_radius: float
    degenerate: bool
    location: int

    def __iter__(self):
        return iter((self.min_radius, self.max_radius))


def check_validity(eta, mon: ValidityMonitor) -> ValidityReport:
    """Min/max channel radius ``R + eta`` over the interface nodes; flags
    degeneracy when the minimum drops to ``R_min`` or below."""
    radius = mon.R + np.asarray(eta, dtype=float)
    k = int(np.argmin(radius))
    lo, hi = float(radius[k]), float(radius.max())
    return ValidityReport(lo, hi, lo <= mon.R_min, k)
