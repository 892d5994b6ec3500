"""Discrete energies, dissipation and the per-half-step audit ledger.

Every number here is a quadratic form in the matrices the steps themselves
assemble, so the algebraic balances of the scheme can be checked to solver
precision.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, field, fields

import numpy as np

from .ale import evaluate_ale
from .errors import StageMismatchError
from .fem.assembly import assemble_weighted_mass
from .forms import STAGE_STRUCTURE, CoupledState, Forms

LEDGER_COLUMNS = ("step", "stage", "time", "E_kin", "E_el", "D", "structure_residual",
                  "fluid_slack", "boundary_work", "min_radius", "max_radius", "v_vstar_gap")


def stage_weight(state: CoupledState) -> np.ndarray:
    """Interface displacement that weights the fluid kinetic energy: the
    domain the current fluid velocity was computed on."""
    return state.eta_prev if state.stage == STAGE_STRUCTURE else state.eta


def fluid_mass(forms: Forms, eta) -> "np.ndarray":
    """Unweighted-by-density fluid mass with Jacobian weight ``1 + eta / R``."""
    ale = evaluate_ale(eta, None, forms.fluid, check_endpoints=False)
    return assemble_weighted_mass(forms.fluid, ale.J, vector=True)


def kinetic_energy(state: CoupledState, forms: Forms, M_fluid=None, eta=None) -> float:
    """``1/2 (rho_f u.M_J u + rho_s1h v.M_w v + rho_s2 V.M_s V)``.

    ``eta`` (or the displacement ``M_fluid`` was built from) must be the
    stage-correct weight; a different one raises
    :class:`StageMismatchError`.
    """
    expected = stage_weight(state)
    if eta is not None and not np.array_equal(np.asarray(eta), expected):
        raise StageMismatchError(f"kinetic energy weight does not match stage {state.stage} of step {state.n}")
    if M_fluid is None:
        M_fluid = fluid_mass(forms, expected)
    f = forms
    return 0.5 * float(f.weights.rho_f * (state.u @ (M_fluid @ state.u)) + state.v @ (f.M_w @ state.v)
                       + state.V @ (f.M_s @ state.V))


def elastic_energy(state: CoupledState, forms: Forms) -> float:
    return 0.5 * float(state.eta @ (forms.K_w @ state.eta) + state.d @ (forms.K_s @ state.d))


def total_energy(state: CoupledState, forms: Forms, M_fluid=None) -> float:
    return kinetic_energy(state, forms, M_fluid) + elastic_energy(state, forms)


def dissipation_increment(u, dt: float, K_visc, mu: float) -> float:
    """``dt * int J |D_eta u|^2`` recovered from the viscous matrix, which
    carries the factor ``2 mu``."""
    u = np.asarray(u, dtype=float)
    return float(dt * (u @ (K_visc @ u)) / (2.0 * mu))


@dataclass(frozen=True)
class LedgerRow:
    step: int
    stage: int
    time: float
    E_kin: float
    E_el: float
    D: float = 0.0
    structure_residual: float = 0.0
    fluid_slack: float = 0.0
    boundary_work: float = 0.0
    min_radius: float = 1.0
    max_radius: float = 1.0
    v_vstar_gap: float = 0.0

    @property
    def energy(self) -> float:
        return self.E_kin + self.E_el

    def values(self) -> tuple:
        return astuple(self)


@dataclass(frozen=True)
class StepTerms:
    """Per-step quantities that do not fit the fixed ledger columns.

    The increment sums are density weighted, exactly as they appear in the
    two half-step balances.
    """

    step: int
    dt: float
    fluid_increment: float = 0.0
    v_fluid_increment: float = 0.0
    v_structure_increment: float = 0.0
    V_increment: float = 0.0
    eta_increment: float = 0.0
    d_increment: float = 0.0
    wall_dissipation: float = 0.0
    viscous_work: float = 0.0
    fluid_residual: float = 0.0
    trace_constant: float = 0.0
    P_in: float = 0.0
    P_out: float = 0.0


@dataclass
class EnergyLedger:
    rows: list[LedgerRow] = field(default_factory=list)
    terms: list[StepTerms] = field(default_factory=list)

    def append(self, row: LedgerRow) -> None:
        if self.rows and (row.step, row.stage) <= (self.rows[-1].step, self.rows[-1].stage):
            last = self.rows[-1]
            raise ValueError(f"ledger rows must increase: ({row.step}, {row.stage}) after "
                             f"({last.step}, {last.stage})")
        for name in ("E_kin", "E_el", "D"):
            if getattr(row, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(row, name)!r}")
        self.rows.append(row)

    def add_terms(self, terms: StepTerms) -> None:
        self.terms.append(terms)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def energies(self) -> np.ndarray:
        return self.column("E_kin") + self.column("E_el")

    def stage_rows(self, stage: int) -> list[LedgerRow]:
        return [r for r in self.rows if r.stage == stage]

    def term(self, name: str) -> np.ndarray:
        return np.array([getattr(t, name) for t in self.terms], dtype=float)


@dataclass(frozen=True)
class BoundReport:
    E0: float
    max_energy: float
    final_energy: float
    dissipation_sum: float
    fluid_sums: float
    structure_sums: float
    C_tilde: float
    pressure_norm_sq: float
    bound: float
    growth_ratio: float
    telescoping_gap: float
    passed: dict

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def uniform_bound_report(ledger: EnergyLedger, mu: float = 1.0, pressure_norm_sq: float | None = None,
                         C_tilde: float | None = None, rtol: float = 1e-9) -> BoundReport:
    """Check the four uniform estimates against ``E0 + C (|P_in|^2 + |P_out|^2)``.

    ``C_tilde`` defaults to the largest per-step trace constant measured
    during the run and ``pressure_norm_sq`` to the sum of ``dt P^2`` over the
    step averages. The increment sums are compared with a factor 1/2, which
    is how they enter the telescoped balance. ``telescoping_gap`` is
    ``E0 - E_N`` minus everything the balances say was removed; it vanishes
    up to solver error when no pressure acts.
    """
    E = ledger.energies()
    E0 = float(E[0]) if E.size else 0.0
    if C_tilde is None:
        C_tilde = float(ledger.term("trace_constant").max()) if ledger.terms else 0.0
    dts = ledger.term("dt")
    if pressure_norm_sq is None:
        pressure_norm_sq = float(np.sum(dts * (ledger.term("P_in") ** 2 + ledger.term("P_out") ** 2)))
    bound = E0 + C_tilde * pressure_norm_sq
    tol = rtol * (1.0 + bound) * max(1, len(ledger.terms))
    D = ledger.column("D")
    fluid = float(np.sum(ledger.term("fluid_increment") + ledger.term("v_fluid_increment")
                         + ledger.term("v_structure_increment") + ledger.term("V_increment")))
    struct = float(np.sum(ledger.term("eta_increment") + ledger.term("d_increment")))
    removed = (0.5 * (fluid + struct) + float(np.sum(ledger.term("viscous_work")))
               + float(np.sum(ledger.term("wall_dissipation"))))
    work = float(np.sum(ledger.column("boundary_work")))
    final = float(E[-1]) if E.size else 0.0
    gap = (E0 - final) - removed + work
    passed = {
        "energy": bool(E.max(initial=0.0) <= bound + tol),
        "dissipation": bool(mu * D.sum() <= bound + tol),
        "fluid_sums": bool(0.5 * fluid <= bound + tol),
        "structure_sums": bool(0.5 * struct <= bound + tol),
    }
    growth = (float(E.max(initial=0.0)) - E0) / pressure_norm_sq if pressure_norm_sq > 0 else 0.0
    return BoundReport(E0, float(E.max(initial=0.0)), final, float(D.sum()), fluid, struct, C_tilde,
                       pressure_norm_sq, bound, growth, gap, passed)


def ledger_field_names() -> tuple[str, ...]:
    return tuple(f.name for f in fields(LedgerRow))


@dataclass(frozen=True)
class AuditResult:
    name: str
    ok: bool
    worst: float
    detail: str = ""


def audit_ledger(ledger: EnergyLedger, rtol: float = 1e-9) -> list[AuditResult]:
    """Half-step checks of a ledger, each relative to ``1 + E`` of the state
    the half step started from."""
    E = ledger.energies()
    worst_s = worst_f = 0.0
    worst_slack = np.inf
    k_term = 0
    for i, row in enumerate(ledger.rows):
        if i == 0:
            continue
        scale = 1.0 + max(E[i - 1], row.energy)
        if row.stage == STAGE_STRUCTURE:
            worst_s = max(worst_s, abs(row.structure_residual) / scale)
        else:
            worst_slack = min(worst_slack, row.fluid_slack / scale)
            if k_term < len(ledger.terms):
                worst_f = max(worst_f, abs(ledger.terms[k_term].fluid_residual) / scale)
                k_term += 1
    if not np.isfinite(worst_slack):
        worst_slack = 0.0
    return [
        AuditResult("structure energy equality", worst_s <= rtol, worst_s,
                    f"max |residual|/(1+E) = {worst_s:.3e}"),
        AuditResult("fluid energy inequality", worst_slack >= -rtol, worst_slack,
                    f"min slack/(1+E) = {worst_slack:.3e}"),
        AuditResult("fluid energy balance", worst_f <= rtol, worst_f,
                    f"max |residual|/(1+E) = {worst_f:.3e}"),
    ]
