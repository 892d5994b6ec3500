"""Lie-splitting time loop: structure step, then fluid step, with audits."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import energy
from .ale import ValidityMonitor, check_validity
from .energy import EnergyLedger, LedgerRow, StepTerms
from .errors import CompatibilityError, DomainDegeneracyError, StageMismatchError
from .fem.weights import FormWeights
from .fluid import FluidAudit, FluidSystem, PressureData, fluid_energy_audit, pressure_average
from .forms import STAGE_FLUID, STAGE_INITIAL, STAGE_STRUCTURE, CoupledState, Forms, build_forms
from .mesh import GeometryConfig
from .structure import StructureAudit, StructureSystem, structure_advance, structure_energy_audit

log = logging.getLogger(__name__)

PROFILE_KINDS = ("zero", "sine", "bump", "values")


@dataclass(frozen=True)
class Profile:
    """An interface profile: ``zero``, ``sine`` (``amp sin(pi z / L)``),
    ``bump`` (``16 amp (z/L)^2 (1 - z/L)^2``) or nodal ``values``."""

    kind: str = "zero"
    amplitude: float = 0.0
    values: tuple = ()

    @classmethod
    def parse(cls, text: str) -> "Profile":
        text = text.strip()
        kind, _, arg = text.partition(":")
        kind = kind.strip()
        if kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile {kind!r}; expected one of {PROFILE_KINDS}")
        if kind == "zero":
            if arg.strip():
                raise ValueError("profile 'zero' takes no argument")
            return cls()
        if kind == "values":
            vals = tuple(float(x) for x in arg.replace(",", " ").split())
            return cls("values", values=vals)
        return cls(kind, amplitude=float(arg))

    def __str__(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "values":
            return "values:" + ",".join(repr(v) for v in self.values)
        return f"{self.kind}:{self.amplitude!r}"

    def sample(self, z, L: float) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        s = z / L
        if self.kind == "zero":
            return np.zeros_like(z)
        if self.kind == "sine":
            out = self.amplitude * np.sin(np.pi * s)
            out[[0, -1]] = 0.0
            return out
        if self.kind == "bump":
            return 16.0 * self.amplitude * s ** 2 * (1 - s) ** 2
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != z.shape:
            raise ValueError(f"profile needs {z.size} nodal values (2 nz + 1), got {vals.size}")
        return vals.copy()


@dataclass(frozen=True)
class InitialData:
    """Initial interface displacement and velocity. The thick-wall fields
    decay linearly in ``r`` from the interface value to zero at the top and
    the fluid velocity is ``(0, v0 r / R)``, so the trace conditions hold."""

    eta0: Profile = field(default_factory=Profile)
    v0: Profile = field(default_factory=Profile)


@dataclass(frozen=True)
class OutputConfig:
    cadence: int = 0
    formats: tuple = ("csv",)
    directory: str | None = None


@dataclass(frozen=True)
class RunConfig:
    T: float = 0.1
    N: int = 10
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    weights: FormWeights = field(default_factory=FormWeights)
    pressure: PressureData = field(default_factory=PressureData)
    initial: InitialData = field(default_factory=InitialData)
    output: OutputConfig = field(default_factory=OutputConfig)
    R_min: float | None = None
    R_max: float | None = None

    @property
    def dt(self) -> float:
        return self.T / self.N

    def monitor(self) -> ValidityMonitor:
        return ValidityMonitor(R=self.geometry.R, R_min=self.R_min, R_max=self.R_max)

    def with_steps(self, N: int) -> "RunConfig":
        from dataclasses import replace
        return replace(self, N=int(N))


def initial_state(forms: Forms, initial: InitialData) -> CoupledState:
    g = forms.geometry
    z = forms.maps.z
    eta = initial.eta0.sample(z, g.L)
    v = initial.v0.sample(z, g.L)
    st = forms.zero_state()
    s, fl = forms.solid, forms.fluid
    # thick wall: radial component decays linearly to the top
    col = np.rint(2 * s.coords[:, 0] / s.hz).astype(int)
    decay = 1.0 - (s.coords[:, 1] - g.R) / g.H
    d = np.zeros(s.n_vector_dofs)
    V = np.zeros(s.n_vector_dofs)
    d[s.n_nodes:] = eta[col] * decay
    V[s.n_nodes:] = v[col] * decay
    colf = np.rint(2 * fl.coords[:, 0] / fl.hz).astype(int)
    u = np.zeros(fl.n_vector_dofs)
    u[fl.n_nodes:] = v[colf] * fl.coords[:, 1] / g.R
    return st.replace(u=u, eta=eta, v=v.copy(), v_star=v.copy(), d=d, V=V, eta_prev=eta.copy())


def validate_initial(forms: Forms, state: CoupledState, tol: float = 0.0) -> None:
    """Compatibility of initial data; collects every violation."""
    errors = []
    maps, fl = forms.maps, forms.fluid
    for name in ("eta", "v"):
        x = getattr(state, name)
        if x[0] != 0 or x[-1] != 0:
            errors.append(f"initial {name} must vanish at both channel ends, got {x[0]!r} and {x[-1]!r}")
    if np.max(np.abs(state.d[maps.triples[:, 2]] - state.eta)) > tol:
        errors.append("initial thick-wall radial trace must equal eta0")
    if np.max(np.abs(state.d[maps.pinned]), initial=0.0) > tol:
        errors.append("initial thick-wall horizontal trace must vanish on the interface")
    if np.max(np.abs(state.u[maps.triples[:, 0]] - state.v)) > tol:
        errors.append("initial fluid radial trace must equal v0 on the interface")
    if np.max(np.abs(state.u[fl.dof(0, fl.nodes_with("interface"))])) > tol:
        errors.append("initial fluid axial velocity must vanish on the interface")
    rep = check_validity(state.eta, forms.monitor)
    if rep.min_radius <= 0:
        errors.append(f"initial channel radius must stay positive, minimum is {rep.min_radius!r}")
    if errors:
        raise CompatibilityError(errors)


def random_admissible_state(forms: Forms, rng: np.random.Generator, scale: float = 0.1,
                            structure: StructureSystem | None = None,
                            fluid: FluidSystem | None = None) -> CoupledState:
    """Random state satisfying every constraint of a post-fluid state; the
    interface displacement is scaled so the channel stays well open."""
    structure = structure or StructureSystem(forms)
    fluid = fluid or FluidSystem(forms)
    x = rng.standard_normal(structure.n_unknowns)
    y = rng.standard_normal(structure.n_unknowns)
    eta = structure.P_eta @ x
    m = np.abs(eta).max()
    factor = scale * forms.geometry.R / m if m > 0 else 0.0
    eta = eta * factor
    d = structure.P_d @ x * factor
    v = structure.P_eta @ y
    V = structure.P_d @ y
    u = rng.standard_normal(forms.fluid.n_vector_dofs)
    u[fluid.fixed] = 0.0
    u[fluid.interface_dofs] = v
    p = np.zeros(forms.fluid.n_p_nodes)
    return CoupledState(u, p, eta, v, v.copy(), d, V, eta.copy())


def check_stage_invariants(state: CoupledState, forms: Forms, fluid: FluidSystem) -> None:
    maps = forms.maps
    if not np.array_equal(state.d[maps.triples[:, 2]], state.eta):
        raise StageMismatchError(f"thick-wall trace differs from eta at step {state.n}")
    if state.stage == STAGE_FLUID and not fluid.rigid_wall:
        if not np.array_equal(state.u[fluid.interface_dofs], state.v):
            raise StageMismatchError(f"fluid trace differs from v at step {state.n}")


class SplittingModel:
    """Forms, step systems and pressure data of one configuration."""

    def __init__(self, forms: Forms, pressure: PressureData | None = None, rigid_wall: bool = False,
                 check_invariants: bool = True):
        self.forms = forms
        self.pressure = pressure or PressureData()
        self.structure = StructureSystem(forms)
        self.fluid = FluidSystem(forms, rigid_wall=rigid_wall)
        self.check_invariants = check_invariants
        self._mass_cache: tuple[bytes, object] | None = None

    @classmethod
    def from_config(cls, cfg: RunConfig, **kw) -> "SplittingModel":
        return cls(build_forms(cfg.geometry, cfg.weights, cfg.monitor()), cfg.pressure, **kw)

    def fluid_mass(self, eta):
        key = np.asarray(eta).tobytes()
        if self._mass_cache is None or self._mass_cache[0] != key:
            self._mass_cache = (key, energy.fluid_mass(self.forms, eta))
        return self._mass_cache[1]

    def initial_row(self, state: CoupledState) -> LedgerRow:
        f = self.forms
        rep = check_validity(state.eta, f.monitor)
        return LedgerRow(state.n, STAGE_INITIAL, state.t,
                         energy.kinetic_energy(state, f, self.fluid_mass(state.eta)),
                         energy.elastic_energy(state, f), min_radius=rep.min_radius,
                         max_radius=rep.max_radius)


@dataclass(frozen=True)
class StepResult:
    half: CoupledState
    state: CoupledState
    structure_audit: StructureAudit
    fluid_audit: FluidAudit


def advance_one_step(state: CoupledState, model: SplittingModel, dt: float,
                     ledger: EnergyLedger | None = None, t_next: float | None = None) -> StepResult:
    """One structure step then one fluid step; both audits are appended to
    ``ledger`` when given."""
    if state.stage == STAGE_STRUCTURE:
        raise StageMismatchError("a full step must start from a post-fluid or initial state")
    f = model.forms
    n = state.n
    M_n = model.fluid_mass(state.eta)
    half = structure_advance(state, dt, model.structure, t_next)
    s_audit = structure_energy_audit(state, half, dt, f, M_fluid=M_n)
    rep = check_validity(half.eta, f.monitor)
    if ledger is not None:
        ledger.append(LedgerRow(n + 1, STAGE_STRUCTURE, half.t, energy.kinetic_energy(half, f, M_fluid=M_n),
                                energy.elastic_energy(half, f), structure_residual=s_audit.residual,
                                min_radius=rep.min_radius, max_radius=rep.max_radius))
    if model.check_invariants:
        check_stage_invariants(half, f, model.fluid)
    loads = pressure_average(model.pressure, n, dt)
    new, record = model.fluid.advance(half, dt, loads)
    record._M_next = model.fluid_mass(new.eta)
    fa = fluid_energy_audit(half, new, record, f)
    if model.check_invariants:
        check_stage_invariants(new, f, model.fluid)
    gap_vec = new.v - new.v_star
    gap = float(np.sqrt(max(gap_vec @ (f.M_w1 @ gap_vec), 0.0)))
    if ledger is not None:
        ledger.append(LedgerRow(n + 1, STAGE_FLUID, new.t, fa.E_after,
                                energy.elastic_energy(new, f), D=fa.dissipation,
                                fluid_slack=fa.slack, boundary_work=fa.boundary_work,
                                min_radius=rep.min_radius, max_radius=rep.max_radius, v_vstar_gap=gap))
        dv, dV = half.v - state.v, half.V - state.V
        de, dd = half.eta - state.eta, half.d - state.d
        ledger.add_terms(StepTerms(
            n + 1, dt, fluid_increment=fa.fluid_increment, v_fluid_increment=fa.v_increment,
            v_structure_increment=float(dv @ (f.M_w @ dv)), V_increment=float(dV @ (f.M_s @ dV)),
            eta_increment=float(de @ (f.K_w @ de)), d_increment=float(dd @ (f.K_s @ dd)),
            wall_dissipation=s_audit.wall_dissipation, viscous_work=2 * f.weights.mu * fa.dissipation,
            fluid_residual=fa.residual, trace_constant=fa.trace_constant, P_in=loads[0], P_out=loads[1]))
    return StepResult(half, new, s_audit, fa)


SERIES_FIELDS = ("eta", "v", "v_star", "u", "d", "V")


@dataclass
class RunResult:
    config: RunConfig
    state: CoupledState
    ledger: EnergyLedger
    snapshots: list[CoupledState]
    series: dict[str, np.ndarray] | None = None
    halted: bool = False
    touching_time: float | None = None
    error: DomainDegeneracyError | None = None
    forms: Forms | None = None

    @property
    def times(self) -> np.ndarray:
        return self.series["t"]


def run(cfg: RunConfig, model: SplittingModel | None = None, record_series: bool = True,
        on_snapshot: Callable[[CoupledState], None] | None = None,
        state: CoupledState | None = None) -> RunResult:
    """March ``N`` steps or until the channel degenerates.

    A degenerate channel does not raise: the result carries ``halted``, the
    touching time and the error, and the ledger holds every completed half
    step.
    """
    if not cfg.T > 0 or cfg.N < 1:
        raise ValueError(f"need T > 0 and N >= 1, got T={cfg.T!r}, N={cfg.N!r}")
    model = model or SplittingModel.from_config(cfg)
    f = model.forms
    if state is None:
        state = initial_state(f, cfg.initial)
        validate_initial(f, state)
    dt = cfg.dt
    t0 = state.t
    ledger = EnergyLedger()
    ledger.append(model.initial_row(state))
    snapshots = [state]
    series = {k: [np.array(getattr(state, k))] for k in SERIES_FIELDS} if record_series else None
    times = [state.t]
    cadence = cfg.output.cadence
    if on_snapshot:
        on_snapshot(state)
    result = RunResult(cfg, state, ledger, snapshots, forms=f)
    for n in range(cfg.N):
        try:
            step = advance_one_step(state, model, dt, ledger, t0 + (n + 1) * dt)
        except DomainDegeneracyError as exc:
            t_hit = exc.time if exc.time is not None else state.t
            result.halted, result.touching_time, result.error = True, t_hit, exc
            log.warning("run halted at step %d: %s", n, exc)
            break
        state = step.state
        if series is not None:
            for k in SERIES_FIELDS:
                series[k].append(np.array(getattr(state, k)))
            times.append(state.t)
        last = n == cfg.N - 1
        if (cadence and (n + 1) % cadence == 0) or last:
            snapshots.append(state)
            if on_snapshot:
                on_snapshot(state)
    result.state = state
    if series is not None:
        result.series = {k: np.array(v) for k, v in series.items()}
        result.series["t"] = np.array(times)
    return result
