"""State containers and the state-independent matrices of a model."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .ale import ValidityMonitor
from .fem.assembly import (assemble_boundary_load, assemble_thick_elasticity, assemble_thin_wall,
                           assemble_weighted_mass)
from .fem.weights import FormWeights
from .mesh import (FemMesh, GeometryConfig, InterfaceMaps, build_fluid_mesh,
                   build_interface_maps, build_solid_mesh)

STAGE_INITIAL, STAGE_STRUCTURE, STAGE_FLUID = 0, 1, 2


@dataclass(frozen=True)
class CoupledState:
    """Snapshot of every unknown after a half step.

    ``eta_prev`` is the interface position that freezes the fluid domain for
    the next fluid solve: ``eta^n`` after the structure step, equal to
    ``eta`` after the fluid step. ``v_star`` is the structure-step velocity
    ``v^{n-1/2}`` kept alongside the fluid-step trace ``v``.
    """

    u: np.ndarray
    p: np.ndarray
    eta: np.ndarray
    v: np.ndarray
    v_star: np.ndarray
    d: np.ndarray
    V: np.ndarray
    eta_prev: np.ndarray
    t: float = 0.0
    n: int = 0
    stage: int = STAGE_INITIAL

    def replace(self, **changes) -> "CoupledState":
        return replace(self, **changes)

    def copy(self) -> "CoupledState":
        arrays = {name: np.array(getattr(self, name)) for name in
                  ("u", "p", "eta", "v", "v_star", "d", "V", "eta_prev")}
        return replace(self, **arrays)


@dataclass
class Forms:
    """Meshes, interface maps and every matrix that does not depend on the
    state. Mass matrices with a ``1`` suffix are unweighted L2 Gram
    matrices; the others carry the material densities."""

    geometry: GeometryConfig
    weights: FormWeights
    fluid: FemMesh
    solid: FemMesh
    maps: InterfaceMaps
    monitor: ValidityMonitor
    M_w: sp.csr_matrix = field(repr=False)
    K_w: sp.csr_matrix = field(repr=False)
    D_w: sp.csr_matrix = field(repr=False)
    M_w1: sp.csr_matrix = field(repr=False)
    K_w1: sp.csr_matrix = field(repr=False)
    M_s: sp.csr_matrix = field(repr=False)
    M_s1: sp.csr_matrix = field(repr=False)
    K_s: sp.csr_matrix = field(repr=False)
    M_f1: sp.csr_matrix = field(repr=False)
    g_in: np.ndarray = field(repr=False)
    g_out: np.ndarray = field(repr=False)

    @property
    def n_interface(self) -> int:
        return self.maps.n_interface

    def zero_state(self) -> CoupledState:
        f, s = self.fluid, self.solid
        zi = np.zeros(self.n_interface)
        return CoupledState(u=np.zeros(f.n_vector_dofs), p=np.zeros(f.n_p_nodes), eta=zi.copy(),
                            v=zi.copy(), v_star=zi.copy(), d=np.zeros(s.n_vector_dofs),
                            V=np.zeros(s.n_vector_dofs), eta_prev=zi.copy())


def build_forms(geometry: GeometryConfig | None = None, weights: FormWeights | None = None,
                monitor: ValidityMonitor | None = None) -> Forms:
    geometry = geometry or GeometryConfig()
    weights = weights or FormWeights()
    geometry.validate()
    weights.validate()
    monitor = monitor or ValidityMonitor(R=geometry.R)
    fluid = build_fluid_mesh(geometry)
    solid = build_solid_mesh(geometry)
    maps = build_interface_maps(fluid, solid)
    M_w, K_w, D_w = assemble_thin_wall(maps.z, weights)
    unit = FormWeights(rho_s1h=1.0, c2=1.0)
    M_w1, K_w1, _ = assemble_thin_wall(maps.z, unit)
    M_s1 = assemble_weighted_mass(solid, 1.0, vector=True)
    return Forms(geometry, weights, fluid, solid, maps, monitor,
                 M_w, K_w, D_w, M_w1, K_w1, weights.rho_s2 * M_s1, M_s1,
                 assemble_thick_elasticity(solid, weights),
                 assemble_weighted_mass(fluid, 1.0, vector=True),
                 assemble_boundary_load(fluid, "inlet"), assemble_boundary_load(fluid, "outlet"))
