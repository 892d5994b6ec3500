"""INI configuration files.

Every section is optional except ``[time]``; unknown sections and keys are
rejected and all problems are reported together::

    [time]
    T = 0.5
    N = 100

    [pressure]
    inlet = pulse:1.0:0.25
    outlet = constant:0
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import asdict, fields, replace

from .ale import ValidityMonitor
from .driver import InitialData, OutputConfig, Profile, RunConfig, initial_state, validate_initial
from .errors import CompatibilityError, ConfigurationError
from .fem.weights import FormWeights
from .fluid import PressureData, PressureSignal
from .forms import build_forms
from .mesh import GeometryConfig

_GEOMETRY = {f.name: f.type for f in fields(GeometryConfig)}
_PHYSICS = {f.name for f in fields(FormWeights)}
SECTIONS = {
    "geometry": set(_GEOMETRY),
    "physics": _PHYSICS,
    "time": {"T", "N", "dt"},
    "pressure": {"inlet", "outlet"},
    "initial": {"eta0", "v0"},
    "output": {"cadence", "formats", "directory"},
    "guards": {"R_min", "R_max"},
}
INTEGER_KEYS = {"nz", "nr_f", "nr_s", "N", "cadence"}
FORMATS = ("csv", "vtk")


def parse_pressure(text: str) -> PressureSignal:
    """``constant:c``, ``pulse:amplitude:duration`` or
    ``table:t0 p0, t1 p1, ...``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip()
    if kind == "constant":
        return PressureSignal.constant(float(rest))
    if kind == "pulse":
        amp, dur = rest.split(":")
        return PressureSignal.pulse(float(amp), float(dur))
    if kind == "table":
        pairs = [p.split() for p in rest.split(",") if p.strip()]
        if any(len(p) != 2 for p in pairs):
            raise ValueError("table entries must be 'time value' pairs separated by commas")
        return PressureSignal.table([float(p[0]) for p in pairs], [float(p[1]) for p in pairs])
    raise ValueError(f"unknown pressure kind {kind!r}; use constant, pulse or table")


def _number(section: str, key: str, raw: str, errors: list):
    try:
        if key in INTEGER_KEYS:
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError
        return value
    except ValueError:
        kind = "an integer" if key in INTEGER_KEYS else "a finite number"
        errors.append(f"{section}.{key} must be {kind}, got {raw!r}")
        return None


def parse_config(text: str, check_compatibility: bool = True) -> RunConfig:
    """Parse and validate a configuration document.

    Raises :class:`ConfigurationError` listing every problem. Initial data
    are checked against the layer compatibility conditions unless
    ``check_compatibility`` is false.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError([f"malformed configuration: {exc}"]) from exc
    errors: list[str] = []
    values: dict[str, dict] = {}
    for section in cp.sections():
        if section not in SECTIONS:
            errors.append(f"unknown section [{section}]")
            continue
        values[section] = {}
        for key, raw in cp.items(section):
            if key not in SECTIONS[section]:
                errors.append(f"unknown key {section}.{key}")
                continue
            values[section][key] = raw

    def numbers(section):
        out = {}
        for key, raw in values.get(section, {}).items():
            v = _number(section, key, raw, errors)
            if v is not None:
                out[key] = v
        return out

    geometry = GeometryConfig(**numbers("geometry"))
    try:
        geometry.validate()
    except ConfigurationError as exc:
        errors.extend(exc.errors)
    weights = FormWeights(**numbers("physics"))
    try:
        weights.validate()
    except ConfigurationError as exc:
        errors.extend(exc.errors)

    time = numbers("time")
    T, N = time.get("T"), time.get("N")
    if "T" not in values.get("time", {}):
        errors.append("missing required key time.T")
    elif T is not None and T <= 0:
        errors.append(f"time.T must be positive, got {T!r}")
    if "dt" in time:
        dt = time["dt"]
        if dt <= 0:
            errors.append(f"time.dt must be positive, got {dt!r}")
        elif T is not None and T > 0:
            steps = T / dt
            if abs(steps - round(steps)) > 1e-9 * steps:
                errors.append(f"time.dt={dt!r} does not divide T={T!r}")
            elif N is not None and N != round(steps):
                errors.append(f"time.N={N} disagrees with T/dt={round(steps)}")
            else:
                N = int(round(steps))
    if N is None and "dt" not in values.get("time", {}) and "N" not in values.get("time", {}):
        errors.append("missing required key time.N (or time.dt)")
    elif N is not None and N < 1:
        errors.append(f"time.N must be >= 1, got {N!r}")

    signals = {}
    for key in ("inlet", "outlet"):
        raw = values.get("pressure", {}).get(key)
        try:
            signals[key] = parse_pressure(raw) if raw is not None else PressureSignal()
        except ConfigurationError as exc:
            errors.extend(f"pressure.{key}: {e}" for e in exc.errors)
        except ValueError as exc:
            errors.append(f"pressure.{key}: {exc}")
    profiles = {}
    for key in ("eta0", "v0"):
        raw = values.get("initial", {}).get(key)
        try:
            profiles[key] = Profile.parse(raw) if raw is not None else Profile()
        except ValueError as exc:
            errors.append(f"initial.{key}: {exc}")

    out = values.get("output", {})
    cadence = _number("output", "cadence", out["cadence"], errors) if "cadence" in out else 0
    if cadence is not None and cadence < 0:
        errors.append(f"output.cadence must be >= 0, got {cadence!r}")
    formats = tuple(f.strip() for f in out.get("formats", "csv").split(",") if f.strip())
    for f in formats:
        if f not in FORMATS:
            errors.append(f"output.formats: unknown format {f!r}; use {', '.join(FORMATS)}")

    guards = numbers("guards")
    R_min, R_max = guards.get("R_min"), guards.get("R_max")
    if R_min is not None and R_min <= 0:
        errors.append(f"guards.R_min must be positive, got {R_min!r}")
    elif R_max is not None and R_max <= 0:
        errors.append(f"guards.R_max must be positive, got {R_max!r}")
    elif not errors:
        try:
            ValidityMonitor(geometry.R, R_min, R_max)
        except ConfigurationError as exc:
            errors.extend(exc.errors)
    if errors:
        raise ConfigurationError(errors)

    cfg = RunConfig(T=T, N=N, geometry=geometry, weights=weights,
                    pressure=PressureData(signals["inlet"], signals["outlet"]),
                    initial=InitialData(profiles["eta0"], profiles["v0"]),
                    output=OutputConfig(cadence or 0, formats, out.get("directory")),
                    R_min=R_min, R_max=R_max)
    if check_compatibility:
        check_initial_data(cfg)
    return cfg


def check_initial_data(cfg: RunConfig) -> None:
    forms = build_forms(cfg.geometry, cfg.weights, cfg.monitor())
    try:
        state = initial_state(forms, cfg.initial)
    except ValueError as exc:
        raise CompatibilityError([f"compatibility condition violated: {exc}"]) from exc
    try:
        validate_initial(forms, state)
    except CompatibilityError as exc:
        raise CompatibilityError([f"compatibility condition violated: {e}" for e in exc.errors]) from exc


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["N"] = cfg.N
    d["initial"] = {k: str(getattr(cfg.initial, k)) for k in ("eta0", "v0")}
    return d


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the resolved configuration (output directory excluded)."""
    d = config_dict(replace(cfg, output=replace(cfg.output, directory=None)))
    blob = json.dumps(d, sort_keys=True, default=repr, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
