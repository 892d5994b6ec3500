"""Structured reference meshes for the fluid channel and the thick wall.

Both meshes are tensor-product quadrilateral grids that share the same
partition of ``(0, L)``. Nodes of the biquadratic (Q2) family are numbered
row by row, ``k = j * (2 nz + 1) + i`` with ``i`` along ``z`` and ``j`` along
``r``; bilinear (Q1) pressure nodes follow the same pattern on the coarse
vertex grid. Vector fields are stored component-blocked: the ``z`` components
of all nodes first, then the ``r`` components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, MeshError

MATCH_TOL = 1e-12

FLUID_TAGS = ("interface", "axis", "inlet", "outlet")
SOLID_TAGS = ("interface", "external", "solid_inlet", "solid_outlet")


@dataclass(frozen=True)
class GeometryConfig:
    L: float = 1.0
    R: float = 1.0
    H: float = 1.0
    nz: int = 8
    nr_f: int = 8
    nr_s: int = 1

    def validate(self) -> None:
        errors = []
        for name in ("L", "R", "H"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                errors.append(f"geometry.{name} must be positive, got {value!r}")
        for name, minimum in (("nz", 2), ("nr_f", 2), ("nr_s", 1)):
            value = getattr(self, name)
            if int(value) != value or value < minimum:
                errors.append(f"geometry.{name} must be an integer >= {minimum}, got {value!r}")
        if errors:
            raise ConfigurationError(errors)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FemMesh:
    """Structured Q2/Q1 mesh of the rectangle ``(z0, z1) x (r0, r1)``."""

    kind: str
    z0: float
    z1: float
    r0: float
    r1: float
    nz: int
    nr: int
    coords: np.ndarray
    elements: np.ndarray
    p_coords: np.ndarray
    p_elements: np.ndarray
    tags: dict = field(repr=False)

    @property
    def hz(self) -> float:
        return (self.z1 - self.z0) / self.nz

    @property
    def hr(self) -> float:
        return (self.r1 - self.r0) / self.nr

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def n_p_nodes(self) -> int:
        return self.p_coords.shape[0]

    @property
    def n_vector_dofs(self) -> int:
        return 2 * self.n_nodes

    @property
    def row_length(self) -> int:
        return 2 * self.nz + 1

    def node(self, i: int, j: int) -> int:
        return j * self.row_length + i

    def dof(self, component: int, node) -> np.ndarray:
        """Vector DOF index of ``component`` (0 = z, 1 = r) at ``node``."""
        return component * self.n_nodes + np.asarray(node)

    def nodes_with(self, tag: str) -> np.ndarray:
        return self.tags[tag]

    def tags_of(self, node: int) -> set:
        return {name for name, nodes in self.tags.items() if node in nodes}

    def edge_nodes(self, tag: str) -> np.ndarray:
        """Boundary edges on ``tag`` as ``(n_edges, 3)`` quadratic node triples,
        ordered along the edge direction."""
        nodes = self.tags[tag]
        return np.stack([nodes[0:-1:2], nodes[1::2], nodes[2::2]], axis=1)

    def element_areas(self) -> np.ndarray:
        c = self.coords
        e = self.elements
        dz = c[e[:, 8], 0] - c[e[:, 0], 0]
        dr = c[e[:, 8], 1] - c[e[:, 0], 1]
        return dz * dr

    def element_origin(self) -> np.ndarray:
        return self.coords[self.elements[:, 0]]


def _structured(kind, z0, z1, r0, r1, nz, nr, tag_rules):
    zq = np.linspace(z0, z1, 2 * nz + 1)
    rq = np.linspace(r0, r1, 2 * nr + 1)
    Z, Rr = np.meshgrid(zq, rq)
    coords = np.column_stack([Z.ravel(), Rr.ravel()])
    row = 2 * nz + 1

    ei, ej = np.meshgrid(np.arange(nz), np.arange(nr))
    ei, ej = ei.ravel(), ej.ravel()
    local = [(a, b) for b in range(3) for a in range(3)]
    elements = np.stack([(2 * ej + b) * row + (2 * ei + a) for a, b in local], axis=1)

    zp = np.linspace(z0, z1, nz + 1)
    rp = np.linspace(r0, r1, nr + 1)
    Zp, Rp = np.meshgrid(zp, rp)
    p_coords = np.column_stack([Zp.ravel(), Rp.ravel()])
    p_local = [(a, b) for b in range(2) for a in range(2)]
    p_elements = np.stack([(ej + b) * (nz + 1) + (ei + a) for a, b in p_local], axis=1)

    jj, ii = np.divmod(np.arange(coords.shape[0]), row)
    tags = {}
    for name, (axis, index) in tag_rules.items():
        if axis == "z":
            sel = ii == (0 if index == 0 else 2 * nz)
            order = np.argsort(jj[sel], kind="stable")
        else:
            sel = jj == (0 if index == 0 else 2 * nr)
            order = np.argsort(ii[sel], kind="stable")
        tags[name] = _frozen(np.flatnonzero(sel)[order])

    return FemMesh(kind, float(z0), float(z1), float(r0), float(r1), int(nz), int(nr),
                   _frozen(coords), _frozen(elements), _frozen(p_coords),
                   _frozen(p_elements), tags)


def build_fluid_mesh(cfg: GeometryConfig) -> FemMesh:
    """Q2 velocity / Q1 pressure mesh of the reference channel ``(0,L) x (0,R)``."""
    cfg.validate()
    rules = {"interface": ("r", 1), "axis": ("r", 0), "inlet": ("z", 0), "outlet": ("z", 1)}
    return _structured("fluid", 0.0, cfg.L, 0.0, cfg.R, cfg.nz, cfg.nr_f, rules)


def build_solid_mesh(cfg: GeometryConfig) -> FemMesh:
    """Q2 displacement mesh of the thick wall ``(0,L) x (R,R+H)``."""
    cfg.validate()
    rules = {"interface": ("r", 0), "external": ("r", 1),
             "solid_inlet": ("z", 0), "solid_outlet": ("z", 1)}
    return _structured("solid", 0.0, cfg.L, cfg.R, cfg.R + cfg.H, cfg.nz, cfg.nr_s, rules)


@dataclass(frozen=True)
class InterfaceMaps:
    """Identification of the fluid trace, the thin wall and the solid trace.

    ``triples[k] = (fluid u_r dof, interface node k, solid d_r dof)`` for the
    ``2 nz + 1`` interface nodes ordered by ``z``.
    """

    triples: np.ndarray
    dirichlet: np.ndarray
    pinned: np.ndarray
    z: np.ndarray

    @property
    def n_interface(self) -> int:
        return self.triples.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.dirichlet)


def build_interface_maps(fluid: FemMesh, solid: FemMesh) -> InterfaceMaps:
    f_nodes = fluid.nodes_with("interface")
    s_nodes = solid.nodes_with("interface")
    if f_nodes.size != s_nodes.size:
        raise MeshError(f"interface node counts differ: fluid {f_nodes.size}, solid {s_nodes.size}")
    fc = fluid.coords[f_nodes]
    sc = solid.coords[s_nodes]
    gap = np.abs(fc - sc)
    if gap.max() > MATCH_TOL:
        k = int(np.argmax(gap.max(axis=1)))
        raise MeshError(f"interface coordinates do not match at node {k}: "
                        f"fluid {tuple(fc[k])}, solid {tuple(sc[k])}")
    n = f_nodes.size
    triples = np.column_stack([fluid.dof(1, f_nodes), np.arange(n), solid.dof(1, s_nodes)])
    dirichlet = np.zeros(n, dtype=bool)
    dirichlet[[0, n - 1]] = True
    pinned = solid.dof(0, s_nodes)
    return InterfaceMaps(_frozen(triples), _frozen(dirichlet), _frozen(pinned), _frozen(fc[:, 0].copy()))
