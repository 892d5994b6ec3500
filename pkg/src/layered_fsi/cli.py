"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 channel degeneracy,
4 audit or verification failure, 5 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import config_hash, load_config
from .driver import RunResult, SplittingModel, run
from .energy import audit_ledger, uniform_bound_report
from .errors import ConfigurationError, DomainDegeneracyError, PreconditionError, SolverError
from .io import SnapshotArchive, write_ledger_csv
from .verify import (BC_VIOLATING, STREAM_FUNCTIONS, ManufacturedField, interpolant_inequality_check,
                     korn_check, parse_boundary, temporal_self_convergence, v_vstar_gap)

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_AUDIT, EXIT_SOLVER = 0, 2, 3, 4, 5
OUT_ENV = "LAYERED_FSI_OUT"
log = logging.getLogger("layered_fsi")


def _line(ok: bool, name: str, detail: str = "") -> str:
    return f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")


def _out_dir(args, cfg) -> Path:
    return Path(args.out or cfg.output.directory or os.environ.get(OUT_ENV) or "fsi_output")


def _report_halt(res: RunResult) -> None:
    print(f"halted: channel degenerated at t={res.touching_time:.17g} ({res.error})")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    model = SplittingModel.from_config(cfg)
    # with cadence 0 only the first and last states are written
    archive = SnapshotArchive(out / "snapshots", model.forms, config_hash(cfg), cfg.output.formats)
    res = run(cfg, model, record_series=False, on_snapshot=archive)
    if res.halted:
        archive.add(res.state)
    write_ledger_csv(res.ledger, out / "ledger.csv")
    print(f"steps: {res.state.n}/{cfg.N}  final time: {res.state.t:.6g}")
    print(f"ledger: {out / 'ledger.csv'}")
    print(f"snapshots: {len(archive.entries)} in {out / 'snapshots'}")
    if res.halted:
        _report_halt(res)
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_energy_audit(args) -> int:
    cfg = load_config(args.config)
    res = run(cfg)
    ok = True
    for a in audit_ledger(res.ledger, args.rtol):
        print(_line(a.ok, a.name, a.detail))
        ok &= a.ok
    rep = uniform_bound_report(res.ledger, cfg.weights.mu, rtol=args.rtol)
    for name, passed in rep.passed.items():
        print(_line(passed, f"uniform bound ({name})", f"bound = {rep.bound:.6e}"))
        ok &= passed
    print(f"E0 = {rep.E0:.6e}  max E = {rep.max_energy:.6e}  C = {rep.C_tilde:.6e}  "
          f"|P|^2 = {rep.pressure_norm_sq:.6e}")
    for chk in interpolant_inequality_check(res):
        print(_line(chk.ok, f"interpolant inequality ({chk.channel})", f"{chk.lhs:.6e} <= {chk.rhs:.6e}"))
        ok &= chk.ok
    if res.halted:
        _report_halt(res)
        return EXIT_DEGENERATE
    return EXIT_OK if ok else EXIT_AUDIT


def cmd_convergence(args) -> int:
    if args.levels < 3:
        raise ConfigurationError([f"--levels must be at least 3, got {args.levels}"])
    cfg = load_config(args.config)
    runs = []
    for k in range(args.levels):
        res = run(cfg.with_steps(cfg.N * 2 ** k))
        if res.halted:
            _report_halt(res)
            return EXIT_DEGENERATE
        runs.append(res)
    conv = temporal_self_convergence(runs)
    print("N: " + ", ".join(str(n) for n in conv.steps))
    for ch, order in conv.orders.items():
        errs = ", ".join(f"{e:.3e}" for e in conv.errors[ch])
        tag = "exact" if order is None else f"{order:.3f}"
        print(f"  {ch:>3}: differences [{errs}]  order {tag}")
    print(_line(conv.ok, "temporal order on eta and v", f"window {conv.window}"))
    gap = v_vstar_gap(runs)
    slope = "n/a" if gap.slope is None else f"{gap.slope:.3f}"
    print(_line(gap.ok, "v/v* gap rate", f"slope {slope} ({gap.status})"))
    return EXIT_OK if conv.ok and gap.ok else EXIT_AUDIT


def cmd_korn(args) -> int:
    specs = [args.eta] if args.eta else ["zero", "bump:0.1", "sawtooth:0.05:8"]
    ok = True
    for spec in specs:
        eta = parse_boundary(spec)
        for name, phi in STREAM_FUNCTIONS.items():
            r = korn_check(ManufacturedField(phi, eta, name))
            good = r.mismatch <= args.tol
            ok &= good
            print(_line(good, f"Korn equality {name} on eta={spec}", f"mismatch {r.mismatch:.3e}"))
        neg = korn_check(ManufacturedField(BC_VIOLATING, eta, "violating"), allow_bc_violation=True)
        good = neg.mismatch > 1e-2
        ok &= good
        print(_line(good, f"negative control on eta={spec}", f"mismatch {neg.mismatch:.3e}"))
    return EXIT_OK if ok else EXIT_AUDIT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="layered-fsi", description="Kinematically coupled splitting "
                                "solver for a channel with a two-layer elastic wall.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a simulation and write the ledger and snapshots")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("convergence-study", help="self-convergence in time over N, 2N, 4N, ...")
    c.add_argument("--config", required=True)
    c.add_argument("--levels", type=int, default=3)
    c.set_defaults(func=cmd_convergence)
    e = sub.add_parser("energy-audit", help="run and check every energy estimate")
    e.add_argument("--config", required=True)
    e.add_argument("--rtol", type=float, default=1e-9)
    e.set_defaults(func=cmd_energy_audit)
    k = sub.add_parser("korn-check", help="Korn equality on manufactured fields")
    k.add_argument("--eta", help="zero, bump:a or sawtooth:a[:terms]")
    k.add_argument("--tol", type=float, default=1e-8)
    k.set_defaults(func=cmd_korn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (PreconditionError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainDegeneracyError as exc:
        print(f"halted: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
