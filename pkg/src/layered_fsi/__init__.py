"""Kinematically coupled splitting solver for flow in a channel bounded by a
thin elastic membrane backed by a thick linearly elastic layer."""

__version__ = "0.1.0"

from .driver import (InitialData, Profile, RunConfig, RunResult, SplittingModel, advance_one_step,
                     initial_state, random_admissible_state, run)
from .energy import EnergyLedger, LedgerRow, audit_ledger, uniform_bound_report
from .errors import (CompatibilityError, ConfigurationError, DomainDegeneracyError, FsiError, MeshError,
                     NullspaceError, PreconditionError, SolverError, StageMismatchError)
from .fem.weights import FormWeights
from .fluid import FluidSystem, PressureData, PressureSignal, fluid_advance, fluid_energy_audit, pressure_average
from .forms import CoupledState, Forms, build_forms
from .mesh import GeometryConfig
from .structure import StructureSystem, structure_advance, structure_energy_audit

__all__ = [
    "CompatibilityError", "ConfigurationError", "CoupledState", "DomainDegeneracyError", "EnergyLedger",
    "FluidSystem", "FormWeights", "Forms", "FsiError", "GeometryConfig", "InitialData", "LedgerRow",
    "MeshError", "NullspaceError", "PreconditionError", "PressureData", "PressureSignal", "Profile",
    "RunConfig", "RunResult", "SolverError", "SplittingModel", "StageMismatchError", "StructureSystem",
    "advance_one_step", "audit_ledger", "build_forms", "fluid_advance", "fluid_energy_audit",
    "initial_state", "pressure_average", "random_admissible_state", "run", "structure_advance",
    "structure_energy_audit", "uniform_bound_report",
]
