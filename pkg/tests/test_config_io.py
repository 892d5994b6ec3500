import json

import numpy as np
import pytest

from layered_fsi import CompatibilityError, ConfigurationError, GeometryConfig, RunConfig, build_forms, run
from layered_fsi.config import config_hash, load_config, parse_config, parse_pressure
from layered_fsi.driver import OutputConfig
from layered_fsi.io import (SnapshotArchive, pressure_on_velocity_nodes, read_ledger_csv, read_manifest,
                            read_table, snapshot_tables, write_field_snapshot, write_ledger_csv)

BASE = """
[geometry]
nz = 2
nr_f = 2
nr_s = 1

[time]
T = 0.1
N = 5

[pressure]
inlet = pulse:1.0:0.25

[initial]
eta0 = sine:0.05
"""


def test_parse_config():
    cfg = parse_config(BASE)
    assert cfg.N == 5 and cfg.geometry.nz == 2
    assert cfg.pressure.inlet.kind == "pulse" and cfg.pressure.outlet.is_zero
    assert str(cfg.initial.eta0) == "sine:0.05"


def test_dt_instead_of_n():
    cfg = parse_config(BASE.replace("N = 5", "dt = 0.02"))
    assert cfg.N == 5
    with pytest.raises(ConfigurationError, match="does not divide"):
        parse_config(BASE.replace("N = 5", "dt = 0.03"))


def test_all_errors_collected():
    text = BASE.replace("nz = 2", "nz = 1").replace("T = 0.1", "T = -1") + "\n[extra]\nx = 1\n"
    with pytest.raises(ConfigurationError) as exc:
        parse_config(text)
    msgs = " | ".join(exc.value.errors)
    assert "geometry.nz" in msgs and "time.T" in msgs and "[extra]" in msgs


def test_missing_keys_and_bad_values():
    with pytest.raises(ConfigurationError, match="time.T"):
        parse_config("[time]\nN = 3\n")
    with pytest.raises(ConfigurationError, match="integer"):
        parse_config("[time]\nT = 1\nN = 2.5\n")
    with pytest.raises(ConfigurationError, match="bending"):
        parse_config("[time]\nT = 1\nN = 2\n[physics]\nC2 = 1\n")


def test_compatibility_error():
    text = BASE.replace("eta0 = sine:0.05", "eta0 = values:0.1,0,0,0,0")
    with pytest.raises(CompatibilityError) as exc:
        parse_config(text)
    assert all(e.startswith("compatibility condition violated") for e in exc.value.errors)
    parse_config(text, check_compatibility=False)


def test_pressure_parsing():
    assert parse_pressure("constant:2").value == 2.0
    tab = parse_pressure("table:0 0, 1 2")
    assert tab(0.5) == 1.0
    with pytest.raises(ValueError):
        parse_pressure("square:1")


def test_config_hash_ignores_directory():
    cfg = parse_config(BASE)
    from dataclasses import replace
    other = replace(cfg, output=OutputConfig(directory="/tmp/elsewhere"))
    assert config_hash(cfg) == config_hash(other)
    assert config_hash(cfg) != config_hash(cfg.with_steps(6))


def test_ledger_csv_roundtrip(tmp_path):
    res = run(parse_config(BASE))
    path = write_ledger_csv(res.ledger, tmp_path / "ledger.csv")
    back = read_ledger_csv(path)
    assert [r.values() for r in back.rows] == [r.values() for r in res.ledger.rows]
    assert b"\r" not in path.read_bytes()


def test_pressure_interpolation():
    p = np.arange(9.0)  # p = i + 3 j is bilinear, reproduced exactly
    F = pressure_on_velocity_nodes(p, 2, 2).reshape(5, 5)
    j, i = np.mgrid[0:5, 0:5]
    np.testing.assert_allclose(F, i / 2 + 3 * j / 2)


def test_snapshot_files(tmp_path):
    cfg = parse_config(BASE)
    res = run(cfg)
    f = res.forms
    names = write_field_snapshot(res.state, f, tmp_path, ("csv", "vtk"))
    assert len(names) == 6
    cols, data = read_table(tmp_path / names[0])
    ref_cols, ref = snapshot_tables(res.state, f)["fluid"]
    assert cols == ref_cols
    np.testing.assert_array_equal(data, ref)
    vtk = (tmp_path / "step000005_fluid.vtk").read_text().splitlines()
    assert vtk[0] == "# vtk DataFile Version 3.0" and vtk[4] == "DIMENSIONS 5 5 1"


def test_manifest(tmp_path):
    cfg = parse_config(BASE)
    f = build_forms(cfg.geometry)
    arch = SnapshotArchive(tmp_path, f, config_hash(cfg))
    run(cfg, on_snapshot=arch)
    m = read_manifest(tmp_path, config_hash(cfg))
    assert [e["step"] for e in m["snapshots"]] == [0, 5]
    with pytest.raises(ValueError):
        read_manifest(tmp_path, "0" * 64)
    assert json.loads((tmp_path / "manifest.json").read_text())["config_hash"] == config_hash(cfg)


def test_load_config(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text(BASE)
    assert load_config(p).T == 0.1
