"""Implicit elastodynamics step of the coupled thin and thick wall.

The thin-wall displacement and the radial trace of the thick-wall
displacement are a single unknown. The horizontal trace is pinned to zero,
the lateral ends are clamped and the top is traction free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import StageMismatchError
from .fem.linalg import Factorization
from .forms import STAGE_STRUCTURE, CoupledState, Forms
from . import energy


def _fixed_solid_dofs(forms: Forms) -> np.ndarray:
    s = forms.solid
    lateral = np.concatenate([s.nodes_with("solid_inlet"), s.nodes_with("solid_outlet")])
    return np.unique(np.concatenate([s.dof(0, lateral), s.dof(1, lateral), forms.maps.pinned,
                                     forms.maps.triples[:, 2]]))


class StructureSystem:
    """Reduced SPD system of the structure step with a per-``dt`` cache of
    factorizations.

    Unknowns are the interior thin-wall values followed by the free
    thick-wall DOFs. ``P_eta`` and ``P_d`` prolongate a reduced vector to the
    full interface and solid vectors.
    """

    def __init__(self, forms: Forms):
        self.forms = forms
        maps = forms.maps
        interior = maps.interior
        fixed = _fixed_solid_dofs(forms)
        mask = np.ones(forms.solid.n_vector_dofs, dtype=bool)
        mask[fixed] = False
        self.solid_free = np.flatnonzero(mask)
        ni, ns = interior.size, self.solid_free.size
        self.n_unknowns = ni + ns
        k = np.arange(ni)
        self.P_eta = sp.csr_matrix((np.ones(ni), (interior, k)), shape=(maps.n_interface, self.n_unknowns))
        rows = np.concatenate([maps.triples[interior, 2], self.solid_free])
        cols = np.concatenate([k, ni + np.arange(ns)])
        self.P_d = sp.csr_matrix((np.ones(rows.size), (rows, cols)),
                                 shape=(forms.solid.n_vector_dofs, self.n_unknowns))
        self._cache: dict[float, Factorization] = {}
        self.n_factorizations = 0

    def matrix(self, dt: float) -> sp.csc_matrix:
        f = self.forms
        wall = f.M_w + dt * f.D_w + dt * dt * f.K_w
        solid = f.M_s + dt * dt * f.K_s
        A = self.P_eta.T @ wall @ self.P_eta + self.P_d.T @ solid @ self.P_d
        A = 0.5 * (A + A.T)
        return sp.csc_matrix(A)

    def factorization(self, dt: float) -> Factorization:
        dt = float(dt)
        if dt not in self._cache:
            self._cache[dt] = Factorization(self.matrix(dt), "spd")
            self.n_factorizations += 1
        return self._cache[dt]

    def rhs(self, eta, v, d, V, dt: float) -> np.ndarray:
        f = self.forms
        wall = f.M_w @ (eta + dt * v) + dt * (f.D_w @ eta)
        solid = f.M_s @ (d + dt * V)
        return self.P_eta.T @ wall + self.P_d.T @ solid

    def solve(self, eta, v, d, V, dt: float):
        """Return ``(eta, v, d, V)`` at the half step."""
        if not dt > 0:
            raise ValueError(f"time step must be positive, got {dt!r}")
        x = self.factorization(dt).solve(self.rhs(eta, v, d, V, dt))
        eta_h = self.P_eta @ x
        d_h = self.P_d @ x
        return eta_h, (eta_h - eta) / dt, d_h, (d_h - d) / dt


def structure_advance(state: CoupledState, dt: float, sys: StructureSystem,
                      t_next: float | None = None) -> CoupledState:
    """Structure half step from a post-fluid (or initial) state. ``t_next``
    overrides the accumulated time ``t + dt``."""
    if state.stage == STAGE_STRUCTURE:
        raise StageMismatchError("structure step expects a post-fluid or initial state")
    eta, v, d, V = sys.solve(state.eta, state.v, state.d, state.V, dt)
    return state.replace(eta=eta, v=v, v_star=v, d=d, V=V, eta_prev=np.array(state.eta),
                         stage=STAGE_STRUCTURE, t=state.t + dt if t_next is None else t_next)


@dataclass(frozen=True)
class StructureAudit:
    residual: float
    lhs: float
    rhs: float
    numerical_dissipation: float
    wall_dissipation: float

    @property
    def scale(self) -> float:
        return 1.0 + self.rhs


def structure_energy_audit(before: CoupledState, after: CoupledState, dt: float, forms: Forms,
                           M_fluid=None) -> StructureAudit:
    """Signed residual ``LHS - RHS`` of the structure-step energy equality.

    ``M_fluid`` is the fluid mass weighted by ``1 + eta^n / R``; the fluid
    kinetic energy is identical on both sides and is included only so that
    the scale matches the total energy.
    """
    f = forms
    kin_b = energy.kinetic_energy(before, forms, M_fluid=M_fluid, eta=before.eta)
    kin_a = energy.kinetic_energy(after, forms, M_fluid=M_fluid, eta=before.eta)
    el_b = energy.elastic_energy(before, forms)
    el_a = energy.elastic_energy(after, forms)
    dv, dV = after.v - before.v, after.V - before.V
    de, dd = after.eta - before.eta, after.d - before.d
    num = 0.5 * (dv @ (f.M_w @ dv) + dV @ (f.M_s @ dV) + de @ (f.K_w @ de) + dd @ (f.K_s @ dd))
    wall = dt * float(after.v @ (f.D_w @ after.v))
    lhs = kin_a + el_a + num + wall
    rhs = kin_b + el_b
    return StructureAudit(float(lhs - rhs), float(lhs), float(rhs), float(num), wall)
