import numpy as np
import pytest
import sympy as sp

from layered_fsi import GeometryConfig, InitialData, PreconditionError, Profile, RunConfig, run
from layered_fsi.verify import (BC_VIOLATING, STREAM_FUNCTIONS, ManufacturedField, ShiftSeries, eta_drift,
                                interpolant_gap, interpolant_inequality_check, korn_check, parse_boundary,
                                temporal_self_convergence, v_vstar_gap, z_)


def test_shift_series():
    s = ShiftSeries(np.arange(5.0), 0.1)
    t = s.shift(0.2)
    assert t.at(0.3) == 1.0
    np.testing.assert_allclose(t.times, [0.2, 0.3, 0.4, 0.5, 0.6])
    with pytest.raises(ValueError):
        s.shift(0.05)
    with pytest.raises(ValueError):
        s.at(0.9)


def test_parse_boundary():
    assert parse_boundary("zero") == 0
    assert sp.simplify(parse_boundary("bump:0.2") - 0.2 * z_ * (1 - z_)) == 0
    saw = parse_boundary("sawtooth:0.05:3")
    assert len(saw.args) == 3 or saw.is_Mul
    with pytest.raises(ValueError):
        parse_boundary("triangle:1")


@pytest.mark.parametrize("name", sorted(STREAM_FUNCTIONS))
def test_fields_are_divergence_free(name):
    fld = ManufacturedField(STREAM_FUNCTIONS[name], parse_boundary("bump:0.1"), name)
    assert fld.divergence_max(n=2000) < 1e-12
    assert fld.boundary_violation() < 1e-12


def test_korn_equality_on_bump():
    r = korn_check(ManufacturedField(STREAM_FUNCTIONS["poly"], parse_boundary("bump:0.1")))
    assert r.mismatch <= 1e-8


def test_korn_negative_control():
    fld = ManufacturedField(BC_VIOLATING, parse_boundary("zero"))
    with pytest.raises(PreconditionError):
        korn_check(fld)
    assert korn_check(fld, allow_bc_violation=True).mismatch > 1e-2


def test_interpolant_single_dof_equality():
    lhs, rhs = interpolant_gap([0.0, 1.0], 0.1)
    assert lhs == pytest.approx(0.1 / 3, rel=1e-14)
    assert rhs == pytest.approx(0.1 / 3, rel=1e-14)


def test_interpolant_inequality_random(rng):
    vals = rng.standard_normal((30, 4))
    M = np.diag([1.0, 2.0, 0.5, 3.0])
    lhs, rhs = interpolant_gap(vals, 0.02, M)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.fixture(scope="module")
def runs():
    cfg = RunConfig(T=0.2, N=10, geometry=GeometryConfig(nz=2, nr_f=2, nr_s=1),
                    initial=InitialData(Profile.parse("sine:0.05"), Profile.parse("sine:0.5")))
    return [run(cfg.with_steps(10 * 2 ** k)) for k in range(3)]


def test_gap_and_convergence_reports(runs):
    gap = v_vstar_gap(runs)
    assert gap.status in ("pass", "fail") and gap.slope is not None
    assert gap.gaps[0] > gap.gaps[-1]
    conv = temporal_self_convergence(runs)
    assert conv.steps == (10, 20, 40)
    assert set(conv.orders) == {"eta", "v", "u", "d", "V"}
    for chk in interpolant_inequality_check(runs[0]):
        assert chk.ok
    with pytest.raises(PreconditionError):
        v_vstar_gap(runs[:2])
    with pytest.raises(PreconditionError):
        temporal_self_convergence([runs[0], runs[2], runs[1]])


def test_gap_exact_for_rest_state():
    cfg = RunConfig(T=0.1, N=5, geometry=GeometryConfig(nz=2, nr_f=2, nr_s=1))
    rep = v_vstar_gap([run(cfg.with_steps(n)) for n in (5, 10, 20)])
    assert rep.status == "exact" and rep.ok


def test_eta_drift():
    np.testing.assert_allclose(eta_drift([[0, 0], [0.1, -0.3], [0, 0.2]]), [0, 0.3, 0.2])
