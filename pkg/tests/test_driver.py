import numpy as np
import pytest

from layered_fsi import (CompatibilityError, GeometryConfig, InitialData, PressureData, PressureSignal,
                         Profile, RunConfig, SplittingModel, StageMismatchError, advance_one_step,
                         initial_state, run)
from layered_fsi.driver import validate_initial
from layered_fsi.energy import EnergyLedger


def test_profile_parse_roundtrip():
    for text in ("zero", "sine:0.1", "bump:-0.25", "values:0.0,0.1,0.0"):
        assert str(Profile.parse(str(Profile.parse(text)))) == str(Profile.parse(text))
    with pytest.raises(ValueError):
        Profile.parse("square:1")
    with pytest.raises(ValueError):
        Profile.parse("zero:1")


def test_profile_samples():
    z = np.linspace(0, 2, 5)
    np.testing.assert_allclose(Profile.parse("sine:0.1").sample(z, 2.0), [0, 0.1 / np.sqrt(2), 0.1, 0.1 / np.sqrt(2), 0])
    assert Profile.parse("bump:0.1").sample(z, 2.0)[2] == pytest.approx(0.1)
    with pytest.raises(ValueError):
        Profile.parse("values:1,2").sample(z, 2.0)


def test_initial_state_is_compatible(small_forms):
    st = initial_state(small_forms, InitialData(Profile.parse("sine:0.1"), Profile.parse("bump:0.3")))
    validate_initial(small_forms, st)
    m = small_forms.maps
    np.testing.assert_array_equal(st.d[m.triples[:, 2]], st.eta)
    np.testing.assert_array_equal(st.u[m.triples[:, 0]], st.v)


def test_incompatible_initial_data_reports_all(small_forms):
    vals = "values:" + ",".join(["0.1"] * 9)
    st = initial_state(small_forms, InitialData(Profile.parse(vals), Profile.parse(vals)))
    with pytest.raises(CompatibilityError) as exc:
        validate_initial(small_forms, st)
    assert len(exc.value.errors) == 2


def test_step_appends_two_rows(small_forms):
    model = SplittingModel(small_forms)
    st = initial_state(small_forms, InitialData(Profile.parse("sine:0.05")))
    led = EnergyLedger()
    led.append(model.initial_row(st))
    out = advance_one_step(st, model, 0.01, led)
    assert [(r.step, r.stage) for r in led.rows] == [(0, 0), (1, 1), (1, 2)]
    assert len(led.terms) == 1
    assert out.state.n == 1 and out.half.stage == 1
    with pytest.raises(StageMismatchError):
        advance_one_step(out.half, model, 0.01)


def test_run_records_series_and_exact_times():
    cfg = RunConfig(T=0.5, N=50, geometry=GeometryConfig(nz=2, nr_f=2, nr_s=1),
                    pressure=PressureData(PressureSignal.pulse(1.0, 0.25)))
    res = run(cfg)
    assert not res.halted
    assert res.series["v"].shape == (51, 5)
    np.testing.assert_array_equal(res.times, np.arange(51) * 0.01)
    assert res.state.t == 0.5
    assert len(res.ledger) == 1 + 2 * 50
    assert len(res.snapshots) == 2


def test_snapshot_cadence():
    from layered_fsi.driver import OutputConfig
    cfg = RunConfig(T=0.1, N=10, geometry=GeometryConfig(nz=2, nr_f=2, nr_s=1), output=OutputConfig(cadence=3))
    seen = []
    res = run(cfg, on_snapshot=lambda s: seen.append(s.n), record_series=False)
    assert seen == [0, 3, 6, 9, 10]
    assert res.series is None


def test_halt_on_degeneracy():
    cfg = RunConfig(T=2.0, N=200, geometry=GeometryConfig(nz=4, nr_f=4, nr_s=1),
                    pressure=PressureData(PressureSignal.constant(-40.0), PressureSignal.constant(-40.0)), R_min=0.1)
    res = run(cfg, record_series=False)
    assert res.halted
    assert 0 < res.touching_time < 2.0
    assert res.ledger.rows[-1].min_radius <= 0.1


def test_bad_run_parameters():
    with pytest.raises(ValueError):
        run(RunConfig(T=0.0, N=10))


def test_zero_data_stays_zero():
    res = run(RunConfig(T=1.0, N=100, geometry=GeometryConfig(nz=2, nr_f=2, nr_s=1)))
    for row in res.ledger.rows:
        assert row.energy == 0 and row.D == 0 and row.fluid_slack == 0 and row.structure_residual == 0
    assert not np.any(res.state.u)


def test_single_step_run_equals_manual_step(small_forms):
    cfg = RunConfig(T=0.01, N=1, geometry=small_forms.geometry,
                    initial=InitialData(Profile.parse("sine:0.05"), Profile.parse("sine:0.3")),
                    pressure=PressureData(PressureSignal.constant(0.5)))
    res = run(cfg)
    model = SplittingModel(small_forms, cfg.pressure)
    out = advance_one_step(initial_state(small_forms, cfg.initial), model, 0.01)
    for name in ("u", "p", "eta", "v", "v_star", "d", "V"):
        np.testing.assert_array_equal(getattr(res.state, name), getattr(out.state, name))


def test_deterministic_ledger():
    cfg = RunConfig(T=0.1, N=10, geometry=GeometryConfig(nz=4, nr_f=2, nr_s=1),
                    initial=InitialData(Profile.parse("bump:0.05")),
                    pressure=PressureData(PressureSignal.pulse(1.0, 0.05)))
    a, b = run(cfg), run(cfg)
    assert [r.values() for r in a.ledger.rows] == [r.values() for r in b.ledger.rows]


def test_pulse_radius_within_guards():
    cfg = RunConfig(T=0.5, N=50, geometry=GeometryConfig(nz=8, nr_f=8, nr_s=2),
                    pressure=PressureData(PressureSignal.pulse(1.0, 0.25)))
    res = run(cfg, record_series=False)
    lo, hi = res.ledger.column("min_radius").min(), res.ledger.column("max_radius").max()
    assert cfg.monitor().R_min < lo <= hi < cfg.monitor().R_max
