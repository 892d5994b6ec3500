"""Linearized fluid step on the frozen reference domain.

The interface radial velocity is a fluid unknown; the thin-wall inertia
enters its row as a Robin-type mass term, which enforces the kinematic
coupling implicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import energy
from .ale import check_validity, evaluate_ale
from .errors import ConfigurationError, DomainDegeneracyError, NullspaceError, StageMismatchError
from .fem.assembly import (assemble_advection, assemble_transformed_divergence,
                           assemble_transformed_stiffness, assemble_weighted_mass)
from .fem.linalg import Factorization
from .forms import STAGE_FLUID, STAGE_STRUCTURE, CoupledState, Forms

PRESSURE_KINDS = ("constant", "pulse", "table")


@dataclass(frozen=True)
class PressureSignal:
    """A time-dependent boundary pressure.

    ``constant``: ``value``. ``pulse``: ``amplitude/2 (1 - cos(2 pi t / duration))``
    for ``0 <= t <= duration`` and zero afterwards. ``table``: linear
    interpolation of ``(times, values)``, held constant outside the samples.
    """

    kind: str = "constant"
    value: float = 0.0
    amplitude: float = 0.0
    duration: float = 1.0
    times: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        errors = []
        if self.kind not in PRESSURE_KINDS:
            errors.append(f"pressure kind must be one of {PRESSURE_KINDS}, got {self.kind!r}")
        if self.kind == "pulse" and not self.duration > 0:
            errors.append(f"pulse duration must be positive, got {self.duration!r}")
        if self.kind == "table":
            t = np.asarray(self.times, dtype=float)
            if t.size < 1 or t.size != len(self.values):
                errors.append("tabulated pressure needs matching, non-empty times and values")
            elif np.any(np.diff(t) <= 0):
                errors.append("tabulated pressure times must be strictly increasing")
        if errors:
            raise ConfigurationError(errors)

    @classmethod
    def constant(cls, value: float) -> "PressureSignal":
        return cls("constant", value=float(value))

    @classmethod
    def pulse(cls, amplitude: float, duration: float) -> "PressureSignal":
        return cls("pulse", amplitude=float(amplitude), duration=float(duration))

    @classmethod
    def table(cls, times, values) -> "PressureSignal":
        return cls("table", times=tuple(float(t) for t in times), values=tuple(float(v) for v in values))

    @property
    def is_zero(self) -> bool:
        if self.kind == "constant":
            return self.value == 0
        if self.kind == "pulse":
            return self.amplitude == 0
        return all(v == 0 for v in self.values)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.value)
        if self.kind == "pulse":
            inside = (t >= 0) & (t <= self.duration)
            return np.where(inside, 0.5 * self.amplitude * (1 - np.cos(2 * np.pi * t / self.duration)), 0.0)
        return np.interp(t, self.times, self.values)

    def _pulse_primitive(self, x: float, square: bool) -> float:
        T = self.duration
        x = min(max(x, 0.0), T)
        k = 2 * math.pi / T
        if not square:
            return 0.5 * self.amplitude * (x - math.sin(k * x) / k)
        return 0.25 * self.amplitude ** 2 * (1.5 * x - 2 * math.sin(k * x) / k + math.sin(2 * k * x) / (4 * k))

    def _breakpoints(self, a: float, b: float) -> np.ndarray:
        inner = [t for t in self.times if a < t < b]
        return np.array([a, *inner, b])

    def integral(self, a: float, b: float) -> float:
        """Exact integral over ``[a, b]``."""
        if self.kind == "constant":
            return self.value * (b - a)
        if self.kind == "pulse":
            return self._pulse_primitive(b, False) - self._pulse_primitive(a, False)
        x = self._breakpoints(a, b)
        y = self(x)
        return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))

    def square_integral(self, a: float, b: float) -> float:
        """Exact integral of the square over ``[a, b]``."""
        if self.kind == "constant":
            return self.value ** 2 * (b - a)
        if self.kind == "pulse":
            return self._pulse_primitive(b, True) - self._pulse_primitive(a, True)
        # Simpson is exact for the square of a linear piece
        x = self._breakpoints(a, b)
        y = self(x)
        ym = self(0.5 * (x[1:] + x[:-1]))
        return float(np.sum(np.diff(x) / 6 * (y[:-1] ** 2 + 4 * ym ** 2 + y[1:] ** 2)))

    def average(self, a: float, b: float) -> float:
        return self.integral(a, b) / (b - a)


@dataclass(frozen=True)
class PressureData:
    inlet: PressureSignal = field(default_factory=PressureSignal)
    outlet: PressureSignal = field(default_factory=PressureSignal)

    @property
    def is_zero(self) -> bool:
        return self.inlet.is_zero and self.outlet.is_zero

    def norm_sq(self, T: float) -> float:
        """``|P_in|^2 + |P_out|^2`` in ``L2(0, T)``."""
        return self.inlet.square_integral(0.0, T) + self.outlet.square_integral(0.0, T)


def pressure_average(data: PressureData, n: int, dt: float) -> tuple[float, float]:
    """Exact averages of the inlet and outlet pressure over step ``n``."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt!r}")
    a, b = n * dt, (n + 1) * dt
    return data.inlet.average(a, b), data.outlet.average(a, b)


@dataclass
class FluidStepRecord:
    """Matrices of one fluid solve, kept for the same-matrix audit."""

    dt: float
    loads: tuple[float, float]
    M_n: sp.csr_matrix
    K: sp.csr_matrix
    B: sp.csr_matrix
    eta_next: np.ndarray
    divergence_norm: float
    trace_constant: float = 0.0
    _M_next: sp.csr_matrix | None = None
    forms: Forms | None = None

    @property
    def M_next(self) -> sp.csr_matrix:
        if self._M_next is None:
            self._M_next = energy.fluid_mass(self.forms, self.eta_next)
        return self._M_next


class FluidSystem:
    """DOF bookkeeping of the fluid step.

    ``rigid_wall`` replaces the interface coupling by ``u_r = 0`` on the wall
    (a frozen channel). ``closed_ends`` also clamps ``u_z`` at the inlet and
    outlet. With both, no boundary carries net flux, the pressure is
    determined only up to a constant and the solve raises
    :class:`NullspaceError`.
    """

    def __init__(self, forms: Forms, rigid_wall: bool = False, closed_ends: bool = False):
        self.forms = forms
        self.rigid_wall = rigid_wall
        f = forms.fluid
        ur_fixed = np.concatenate([f.nodes_with("axis"), f.nodes_with("inlet"), f.nodes_with("outlet")])
        uz_fixed = [f.nodes_with("interface")]
        if rigid_wall:
            ur_fixed = np.concatenate([ur_fixed, f.nodes_with("interface")])
        if closed_ends:
            uz_fixed += [f.nodes_with("inlet"), f.nodes_with("outlet")]
        fixed = np.unique(np.concatenate([f.dof(1, ur_fixed), f.dof(0, np.concatenate(uz_fixed))]))
        mask = np.ones(f.n_vector_dofs, dtype=bool)
        mask[fixed] = False
        self.fixed = fixed
        self.free = np.flatnonzero(mask)
        self.interface_dofs = forms.maps.triples[:, 0]
        n_if = forms.n_interface
        self.E = sp.csr_matrix((np.ones(n_if), (self.interface_dofs, np.arange(n_if))),
                               shape=(f.n_vector_dofs, n_if))
        self.M_gamma = (self.E @ forms.M_w @ self.E.T).tocsr()

    def check_domain(self, eta, label: str, t: float) -> None:
        rep = check_validity(eta, self.forms.monitor)
        if rep.degenerate:
            z = float(self.forms.maps.z[rep.location])
            raise DomainDegeneracyError(
                f"channel radius {rep.min_radius:.6g} at z={z:.6g} is at or below R_min="
                f"{self.forms.monitor.R_min:.6g} ({label})", location=z, value=rep.min_radius, time=t)

    def _saddle(self, A_ff, B_f) -> sp.csc_matrix:
        npres = B_f.shape[0]
        return sp.bmat([[A_ff, -B_f.T], [-B_f, sp.csr_matrix((npres, npres))]], format="csc")

    def _check_nullspace(self, B_f) -> None:
        col = np.asarray(B_f.sum(axis=0)).ravel()
        scale = float(np.abs(B_f).max()) if B_f.nnz else 1.0
        if np.abs(col).max(initial=0.0) <= 1e-12 * scale * np.sqrt(B_f.shape[0]):
            raise NullspaceError("pressure is determined only up to a constant: no velocity DOF "
                                 "carries net flux through the boundary")

    def trace_constant(self, K, B, g_in, g_out) -> float:
        """Largest ``sup (g.u)^2 / int J |D_eta u|^2`` over discretely
        divergence-free admissible velocities, divided by ``2 mu``, for the
        inlet and outlet functionals."""
        fr = self.free
        S = self._saddle(K[fr][:, fr], B[:, fr])
        lu = Factorization(S, "symmetric-indefinite")
        out = 0.0
        npres = B.shape[0]
        for g in (g_in, g_out):
            x = lu.solve(np.concatenate([g[fr], np.zeros(npres)]))
            out = max(out, float(g[fr] @ x[:fr.size]))
        return out

    def advance(self, state: CoupledState, dt: float, loads=(0.0, 0.0),
                with_trace_constant: bool | None = None):
        """Fluid half step from a post-structure state. Returns the new state
        and the :class:`FluidStepRecord`."""
        if state.stage != STAGE_STRUCTURE:
            raise StageMismatchError("fluid step expects a post-structure state")
        if not dt > 0:
            raise ValueError(f"time step must be positive, got {dt!r}")
        forms, mesh, w = self.forms, self.forms.fluid, self.forms.weights
        self.check_domain(state.eta_prev, "start of step", state.t)
        self.check_domain(state.eta, "after structure step", state.t)
        v_half = state.v
        ale = evaluate_ale(state.eta_prev, v_half, mesh)
        M_n = assemble_weighted_mass(mesh, ale.J, vector=True)
        K = assemble_transformed_stiffness(mesh, ale, w.mu)
        N = assemble_advection(mesh, ale, state.u)
        B = assemble_transformed_divergence(mesh, ale)
        A = w.rho_f * (M_n / dt + N) + K
        rhs = w.rho_f * (M_n @ state.u) / dt
        if not self.rigid_wall:
            A = A + self.M_gamma / dt
            rhs = rhs + self.E @ (forms.M_w @ v_half) / dt
        P_in, P_out = loads
        rhs = rhs + P_in * forms.g_in - P_out * forms.g_out
        fr = self.free
        B_f = B[:, fr]
        self._check_nullspace(B_f)
        S = self._saddle(A.tocsr()[fr][:, fr], B_f)
        x = Factorization(S, "general").solve(np.concatenate([rhs[fr], np.zeros(B.shape[0])]))
        u = np.zeros(mesh.n_vector_dofs)
        u[fr] = x[:fr.size]
        p = x[fr.size:]
        v = u[self.interface_dofs].copy()
        div = float(np.linalg.norm(B @ u))
        if with_trace_constant is None:
            with_trace_constant = bool(P_in != 0 or P_out != 0)
        C = self.trace_constant(K, B, forms.g_in, forms.g_out) if with_trace_constant else 0.0
        new = state.replace(u=u, p=p, v=v, v_star=np.array(v_half), eta_prev=np.array(state.eta),
                            stage=STAGE_FLUID, n=state.n + 1)
        record = FluidStepRecord(dt, (float(P_in), float(P_out)), M_n, K, B, np.array(state.eta), div,
                                 C, forms=forms)
        return new, record


def fluid_advance(state: CoupledState, dt: float, loads, sys: FluidSystem) -> CoupledState:
    return sys.advance(state, dt, loads)[0]


@dataclass(frozen=True)
class FluidAudit:
    slack: float
    residual: float
    boundary_work: float
    dissipation: float
    trace_constant: float
    E_before: float
    E_after: float
    fluid_increment: float
    v_increment: float

    @property
    def scale(self) -> float:
        return 1.0 + max(self.E_before, self.E_after)


def fluid_energy_audit(before: CoupledState, after: CoupledState, record: FluidStepRecord,
                       forms: Forms) -> FluidAudit:
    """Energy balance of one fluid step.

    ``residual`` is the exact balance ``E^{n+1} + increments + 2 mu D -
    E^{n+1/2} - dt W`` with the boundary work ``W = P_in int u_z|in - P_out
    int u_z|out``. ``slack`` is ``E^{n+1/2} + C dt (P_in^2 + P_out^2) - E^{n+1}
    - increments - mu D`` with the measured trace constant ``C``.
    """
    w, dt = forms.weights, record.dt
    P_in, P_out = record.loads
    E_b = energy.kinetic_energy(before, forms, M_fluid=record.M_n)
    E_a = energy.kinetic_energy(after, forms, M_fluid=record.M_next)
    du = after.u - before.u
    dv = after.v - before.v
    inc_u = w.rho_f * float(du @ (record.M_n @ du))
    inc_v = float(dv @ (forms.M_w @ dv))
    D = energy.dissipation_increment(after.u, dt, record.K, w.mu)
    work = dt * float(P_in * (forms.g_in @ after.u) - P_out * (forms.g_out @ after.u))
    residual = E_a + 0.5 * (inc_u + inc_v) + 2 * w.mu * D - E_b - work
    slack = E_b + record.trace_constant * dt * (P_in ** 2 + P_out ** 2) - (E_a + 0.5 * (inc_u + inc_v) + w.mu * D)
    return FluidAudit(float(slack), float(residual), work, D, record.trace_constant, E_b, E_a, inc_u, inc_v)
