"""Ledger, snapshot and manifest files.

All numbers are written with 17 significant digits so every file parses
back to the exact doubles.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .energy import LEDGER_COLUMNS, EnergyLedger, LedgerRow
from .forms import CoupledState, Forms

FMT = "%.17g"
FLUID_COLUMNS = ("z", "r", "u_z", "u_r", "p")
SOLID_COLUMNS = ("z", "r", "d_z", "d_r", "V_z", "V_r")
INTERFACE_COLUMNS = ("z", "eta", "v", "v_star")


def _fmt(x) -> str:
    return FMT % x


def write_ledger_csv(ledger: EnergyLedger, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LEDGER_COLUMNS)
        for row in ledger.rows:
            vals = row.values()
            w.writerow([str(vals[0]), str(vals[1])] + [_fmt(v) for v in vals[2:]])
    return path


def read_ledger_csv(path) -> EnergyLedger:
    ledger = EnergyLedger()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != LEDGER_COLUMNS:
            raise ValueError(f"unexpected ledger header {header}")
        for rec in reader:
            ledger.append(LedgerRow(int(rec[0]), int(rec[1]), *(float(x) for x in rec[2:])))
    return ledger


def write_table(path, columns, data) -> Path:
    path = Path(path)
    data = np.asarray(data, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in data:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def read_table(path):
    """Return ``(columns, array)`` of a snapshot CSV."""
    with open(path, encoding="utf-8") as fh:
        columns = tuple(fh.readline().strip().split(","))
        rows = [[float(x) for x in line.split(",")] for line in fh if line.strip()]
    return columns, np.array(rows, dtype=float).reshape(-1, len(columns))


def pressure_on_velocity_nodes(p, nz: int, nr: int) -> np.ndarray:
    """Bilinear interpolation of Q1 nodal pressure onto the Q2 node grid."""
    P = np.asarray(p, dtype=float).reshape(nr + 1, nz + 1)
    F = np.zeros((2 * nr + 1, 2 * nz + 1))
    F[::2, ::2] = P
    F[::2, 1::2] = 0.5 * (P[:, 1:] + P[:, :-1])
    F[1::2, ::2] = 0.5 * (P[1:, :] + P[:-1, :])
    F[1::2, 1::2] = 0.25 * (P[1:, 1:] + P[1:, :-1] + P[:-1, 1:] + P[:-1, :-1])
    return F.ravel()


def physical_radius(forms: Forms, eta) -> np.ndarray:
    """Radial coordinate of every fluid node after the ALE stretch."""
    fl, R = forms.fluid, forms.geometry.R
    col = np.rint(2 * (fl.coords[:, 0] - fl.z0) / fl.hz).astype(int)
    return fl.coords[:, 1] * (R + np.asarray(eta)[col]) / R


def snapshot_tables(state: CoupledState, forms: Forms) -> dict[str, tuple]:
    fl, so = forms.fluid, forms.solid
    nf, ns = fl.n_nodes, so.n_nodes
    p = pressure_on_velocity_nodes(state.p, fl.nz, fl.nr)
    ref = np.column_stack([fl.coords, state.u[:nf], state.u[nf:], p])
    phys = ref.copy()
    phys[:, 1] = physical_radius(forms, state.eta)
    solid = np.column_stack([so.coords, state.d[:ns], state.d[ns:], state.V[:ns], state.V[ns:]])
    iface = np.column_stack([forms.maps.z, state.eta, state.v, state.v_star])
    return {"fluid": (FLUID_COLUMNS, ref), "fluid_physical": (FLUID_COLUMNS, phys),
            "solid": (SOLID_COLUMNS, solid), "interface": (INTERFACE_COLUMNS, iface)}


def _vtk_grid(path, title: str, nx: int, ny: int, points: np.ndarray, vectors: dict, scalars: dict):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title + "\nASCII\nDATASET STRUCTURED_GRID\n")
        fh.write(f"DIMENSIONS {nx} {ny} 1\nPOINTS {len(points)} double\n")
        for z, r in points:
            fh.write(f"{_fmt(z)} {_fmt(r)} 0\n")
        fh.write(f"POINT_DATA {len(points)}\n")
        for name, (a, b) in vectors.items():
            fh.write(f"VECTORS {name} double\n")
            for x, y in zip(a, b):
                fh.write(f"{_fmt(x)} {_fmt(y)} 0\n")
        for name, a in scalars.items():
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for x in a:
                fh.write(_fmt(x) + "\n")
    return Path(path)


def write_field_snapshot(state: CoupledState, forms: Forms, directory, formats=("csv",),
                         prefix: str | None = None) -> list[str]:
    """Write one snapshot; returns the file names (relative to
    ``directory``)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    prefix = prefix or f"step{state.n:06d}"
    tables = snapshot_tables(state, forms)
    names = []
    if "csv" in formats:
        for key, (cols, data) in tables.items():
            name = f"{prefix}_{key}.csv"
            write_table(directory / name, cols, data)
            names.append(name)
    if "vtk" in formats:
        fl, so = forms.fluid, forms.solid
        _, phys = tables["fluid_physical"]
        name = f"{prefix}_fluid.vtk"
        _vtk_grid(directory / name, f"fluid t={_fmt(state.t)}", 2 * fl.nz + 1, 2 * fl.nr + 1,
                  phys[:, :2], {"u": (phys[:, 2], phys[:, 3])}, {"p": phys[:, 4]})
        names.append(name)
        _, sol = tables["solid"]
        name = f"{prefix}_solid.vtk"
        _vtk_grid(directory / name, f"solid t={_fmt(state.t)}", 2 * so.nz + 1, 2 * so.nr + 1,
                  sol[:, :2], {"d": (sol[:, 2], sol[:, 3]), "V": (sol[:, 4], sol[:, 5])}, {})
        names.append(name)
    return names


class SnapshotArchive:
    """Directory of snapshots plus ``manifest.json``."""

    MANIFEST = "manifest.json"

    def __init__(self, directory, forms: Forms, config_hash: str, formats=("csv",)):
        self.directory = Path(directory)
        self.forms = forms
        self.config_hash = config_hash
        self.formats = tuple(formats)
        self.entries: list[dict] = []
        self.directory.mkdir(parents=True, exist_ok=True)

    def __call__(self, state: CoupledState) -> None:
        self.add(state)

    def add(self, state: CoupledState) -> None:
        files = write_field_snapshot(state, self.forms, self.directory, self.formats)
        self.entries.append({"step": state.n, "time": state.t, "stage": state.stage, "files": files})
        self.flush()

    def flush(self) -> Path:
        path = self.directory / self.MANIFEST
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"config_hash": self.config_hash, "snapshots": self.entries}, fh, indent=1)
            fh.write("\n")
        os.replace(tmp, path)
        return path


def read_manifest(directory, expected_hash: str | None = None) -> dict:
    with open(Path(directory) / SnapshotArchive.MANIFEST, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if expected_hash is not None and manifest.get("config_hash") != expected_hash:
        raise ValueError("snapshot archive was produced by a different configuration")
    return manifest
