"""Executable checks of analytical facts behind the scheme.

Nothing here uses the FEM assembly: the Korn check integrates closed-form
fields with its own Gauss rule, and the run-based checks only read stored
series and the unweighted Gram matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy as sp_

from .errors import PreconditionError
from .fem.basis import gauss_legendre

z_, r_, x_ = sp_.symbols("z r x", real=True)


# -- time series --------------------------------------------------------------

@dataclass(frozen=True)
class ShiftSeries:
    """Snapshots ``values[k]`` of one field at ``t0 + k * dt``."""

    values: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("snapshot spacing must be positive")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    def shift(self, h: float) -> "ShiftSeries":
        """``tau_h f(t) = f(t - h)``; ``h`` must be a multiple of ``dt``."""
        k = h / self.dt
        if abs(k - round(k)) > 1e-9:
            raise ValueError(f"shift {h} is not a multiple of the snapshot spacing {self.dt}")
        return ShiftSeries(self.values, self.dt, self.t0 + round(k) * self.dt)

    def at(self, t: float) -> np.ndarray:
        k = (t - self.t0) / self.dt
        if abs(k - round(k)) > 1e-9 or not 0 <= round(k) < len(self.values):
            raise ValueError(f"no snapshot at t={t}")
        return self.values[int(round(k))]


# -- Korn equality ------------------------------------------------------------

def _sawtooth(amp: float, terms: int):
    return amp * sum(sp_.sin(2 * sp_.pi * k * z_) / k for k in range(1, terms + 1))


def parse_boundary(spec: str):
    """Symbolic boundary displacement on ``(0, 1)``: ``zero``, ``bump:a``
    (``a z (1 - z)``) or ``sawtooth:a[:terms]`` (a truncated sine series of a
    sawtooth, smooth but with large slopes)."""
    kind, _, rest = spec.strip().partition(":")
    args = [float(a) for a in rest.split(":") if a]
    if kind == "zero" and not args:
        return sp_.Integer(0)
    if kind == "bump" and len(args) <= 1:
        return (args[0] if args else 0.1) * z_ * (1 - z_)
    if kind == "sawtooth" and len(args) <= 2:
        amp = args[0] if args else 0.05
        terms = int(args[1]) if len(args) > 1 else 8
        return _sawtooth(amp, terms)
    raise ValueError(f"bad boundary spec {spec!r}; use zero, bump:a or sawtooth:a[:terms]")


STREAM_FUNCTIONS = {
    "poly": z_ ** 2 * (1 - z_) ** 2 * r_ ** 2 * (1 - r_) ** 2,
    "trig": sp_.sin(sp_.pi * z_) ** 2 * r_ ** 2 * (1 - r_) ** 2,
    "exp": z_ ** 2 * (1 - z_) ** 2 * r_ ** 2 * (1 - r_) ** 2 * sp_.exp(z_ + r_),
}
# u_z does not vanish on the moving wall (and u_r varies along it, so the
# boundary term of the integration by parts survives even for a flat wall)
BC_VIOLATING = z_ ** 2 * (1 - z_) ** 2 * r_ ** 2


@dataclass
class ManufacturedField:
    """Divergence-free velocity on the physical channel ``0 < x < 1 + eta(z)``
    built from a stream function ``phi(z, rho)`` with ``rho = x / (1 + eta)``:
    ``u = (d_x psi, -d_z psi)``, ``psi(z, x) = phi(z, x / (1 + eta(z)))``.
    """

    phi: sp_.Expr
    eta: sp_.Expr = field(default_factory=lambda: sp_.Integer(0))
    name: str = "field"

    @cached_property
    def physical(self):
        psi = self.phi.subs(r_, x_ / (1 + self.eta))
        return sp_.diff(psi, x_), -sp_.diff(psi, z_)

    @cached_property
    def reference(self):
        """Pull-back to the reference channel and its plain derivatives."""
        uz, ur = self.physical
        sub = {x_: r_ * (1 + self.eta)}
        comps = [c.subs(sub) for c in (uz, ur)]
        derivs = [(sp_.diff(c, z_), sp_.diff(c, r_)) for c in comps]
        return comps, derivs

    def _lambdas(self):
        comps, derivs = self.reference
        flat = [d for pair in derivs for d in pair]
        f = sp_.lambdify((z_, r_), flat, "numpy")
        eta = sp_.lambdify(z_, self.eta, "numpy")
        deta = sp_.lambdify(z_, sp_.diff(self.eta, z_), "numpy")
        return f, eta, deta

    def divergence_max(self, n: int = 10_000, seed: int = 0) -> float:
        uz, ur = self.physical
        div = sp_.lambdify((z_, x_), sp_.diff(uz, z_) + sp_.diff(ur, x_), "numpy")
        etaf = sp_.lambdify(z_, self.eta, "numpy")
        rng = np.random.default_rng(seed)
        z = rng.random(n)
        x = rng.random(n) * (1 + np.broadcast_to(etaf(z), z.shape))
        return float(np.max(np.abs(np.broadcast_to(div(z, x), z.shape))))

    def boundary_violation(self, n: int = 257) -> float:
        """Largest boundary value that should vanish: ``u_z`` on the wall,
        ``u_r`` on the axis and the channel ends."""
        comps, _ = self.reference
        uz = sp_.lambdify((z_, r_), comps[0], "numpy")
        ur = sp_.lambdify((z_, r_), comps[1], "numpy")
        s = np.linspace(0, 1, n)
        one, zero = np.ones_like(s), np.zeros_like(s)
        vals = [uz(s, one), ur(s, zero), ur(zero, s), ur(one, s)]
        return float(max(np.max(np.abs(np.broadcast_to(v, s.shape))) for v in vals))


@dataclass(frozen=True)
class KornResult:
    name: str
    gradient: float
    symmetric: float
    mismatch: float


def korn_check(fld: ManufacturedField, cells: int = 16, order: int = 8,
               allow_bc_violation: bool = False) -> KornResult:
    """Compare ``2 int J |D_eta u|^2`` with ``int J |grad_eta u|^2`` on the
    reference channel using an ``order x order`` Gauss rule on each of
    ``cells x cells`` cells. Returns the relative mismatch."""
    if not allow_bc_violation and fld.boundary_violation() > 1e-12:
        raise PreconditionError(f"{fld.name}: field violates the boundary conditions of the "
                                "divergence-free space")
    f, etaf, detaf = fld._lambdas()
    x, w = gauss_legendre(order)
    edges = np.arange(cells) / cells
    pts = (edges[:, None] + x[None, :] / cells).ravel()
    wts = np.tile(w / cells, cells)
    Z, Rr = np.meshgrid(pts, pts, indexing="ij")
    W = np.outer(wts, wts)
    dzuz, druz, dzur, drur = (np.broadcast_to(np.asarray(a, dtype=float), Z.shape) for a in f(Z, Rr))
    J = 1 + np.broadcast_to(etaf(Z), Z.shape)
    c = -Rr * np.broadcast_to(detaf(Z), Z.shape) / J
    # transformed gradient rows: (d_z + c d_r, d_r / J)
    g = np.array([[dzuz + c * druz, druz / J], [dzur + c * drur, drur / J]])
    grad = float(np.sum(W * J * np.sum(g ** 2, axis=(0, 1))))
    sym = 0.5 * (g + g.transpose(1, 0, 2, 3))
    dsym = float(np.sum(W * J * np.sum(sym ** 2, axis=(0, 1))))
    return KornResult(fld.name, grad, 2 * dsym, abs(2 * dsym - grad) / grad)


def korn_suite(boundaries=("zero", "bump:0.1", "sawtooth:0.05:8"), **kw) -> list[KornResult]:
    out = []
    for spec in boundaries:
        eta = parse_boundary(spec)
        for name, phi in STREAM_FUNCTIONS.items():
            out.append(korn_check(ManufacturedField(phi, eta, f"{name}@{spec}"), **kw))
    return out


# -- run-based checks ---------------------------------------------------------

def _mnorm_sq(diff: np.ndarray, M) -> np.ndarray:
    diff = np.atleast_2d(diff)
    return np.einsum("ki,ki->k", diff, (M @ diff.T).T)


@dataclass(frozen=True)
class GapReport:
    dts: tuple
    gaps: tuple
    slope: float | None
    status: str

    @property
    def ok(self) -> bool:
        return self.status in ("exact", "pass")


def gap_norm(v: np.ndarray, v_star: np.ndarray, dt: float, M) -> float:
    """``|v_N - v*_N|`` in ``L2((0, T) x (0, L))`` for piecewise-constant
    series (row 0 is the initial value and is skipped)."""
    d = np.asarray(v)[1:] - np.asarray(v_star)[1:]
    return float(np.sqrt(dt * np.sum(_mnorm_sq(d, M))))


def v_vstar_gap(runs, M=None, min_slope: float = 0.4) -> GapReport:
    """Slope of ``log |v_N - v*_N|`` against ``log dt`` over at least three
    runs (objects with ``series``, ``config`` and ``forms``)."""
    runs = list(runs)
    if len(runs) < 3:
        raise PreconditionError(f"need at least 3 refinement levels, got {len(runs)}")
    dts, gaps, nonzero = [], [], False
    for res in runs:
        Mw = M if M is not None else res.forms.M_w1
        dts.append(res.config.dt)
        gaps.append(gap_norm(res.series["v"], res.series["v_star"], res.config.dt, Mw))
        nonzero |= bool(np.any(res.ledger.energies() > 0))
    g = np.array(gaps)
    if np.all(g == 0):
        return GapReport(tuple(dts), tuple(gaps), None, "suspicious" if nonzero else "exact")
    if np.any(g == 0):
        return GapReport(tuple(dts), tuple(gaps), None, "fail")
    slope = float(np.polyfit(np.log(dts), np.log(g), 1)[0])
    return GapReport(tuple(dts), tuple(gaps), slope, "pass" if slope >= min_slope else "fail")


CHANNEL_MASS = {"eta": "M_w1", "v": "M_w1", "u": "M_f1", "d": "M_s1", "V": "M_s1"}


@dataclass(frozen=True)
class ConvergenceReport:
    steps: tuple
    errors: dict
    orders: dict
    window: tuple = (0.8, 1.3)
    required: tuple = ("eta", "v")

    @property
    def ok(self) -> bool:
        lo, hi = self.window
        return all(self.orders[c] is None or lo <= self.orders[c] <= hi for c in self.required)


def _matched_difference(coarse, fine, dt: float, M) -> float:
    """Discrete ``L2(0, T)`` distance at the coarse grid times."""
    ratio = (len(fine) - 1) // (len(coarse) - 1)
    if ratio * (len(coarse) - 1) != len(fine) - 1:
        raise PreconditionError("refinement levels are not nested")
    d = np.asarray(coarse)[1:] - np.asarray(fine)[ratio::ratio]
    return float(np.sqrt(dt * np.sum(_mnorm_sq(d, M))))


def temporal_self_convergence(runs, channels=("eta", "v", "u", "d", "V"),
                              window=(0.8, 1.3)) -> ConvergenceReport:
    """Observed order from nested runs ``N, 2N, 4N, ...``: for consecutive
    differences ``e_k = |X_{2^k N} - X_{2^{k+1} N}|`` the order is
    ``log2(e_{k} / e_{k+1})`` (last pair reported)."""
    runs = list(runs)
    if len(runs) < 3:
        raise PreconditionError(f"need at least 3 refinement levels, got {len(runs)}")
    cfgs = [r.config for r in runs]
    for a, b in zip(cfgs, cfgs[1:]):
        if b.N != 2 * a.N or b.T != a.T or b.geometry != a.geometry or b.weights != a.weights \
                or b.pressure != a.pressure or b.initial != a.initial:
            raise PreconditionError("runs must share a configuration and double N at each level")
    errors, orders = {}, {}
    forms = runs[0].forms
    for ch in channels:
        M = getattr(forms, CHANNEL_MASS[ch])
        e = [_matched_difference(a.series[ch], b.series[ch], a.config.dt, M) for a, b in zip(runs, runs[1:])]
        errors[ch] = tuple(e)
        if e[-2] == 0 and e[-1] == 0:
            orders[ch] = None
        elif e[-1] == 0 or e[-2] == 0:
            orders[ch] = float("nan")
        else:
            orders[ch] = float(np.log2(e[-2] / e[-1]))
    return ConvergenceReport(tuple(c.N for c in cfgs), errors, orders, tuple(window))


@dataclass(frozen=True)
class InterpolantCheck:
    channel: str
    lhs: float
    rhs: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-10) + 1e-300


def interpolant_gap(values, dt: float, M=None, n_points: int = 3) -> tuple[float, float]:
    """``|f_N - f~_N|^2`` in ``L2(0, T)`` (piecewise constant taking the right
    end value versus the piecewise-linear interpolant), by Gauss quadrature in
    time, and the bound ``dt/3 sum |f^{n+1} - f^n|^2``."""
    f = np.asarray(values, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if M is None:
        M = np.eye(f.shape[1])
    x, w = gauss_legendre(n_points)
    lhs = 0.0
    for n in range(len(f) - 1):
        for s, ws in zip(x, w):
            lin = (1 - s) * f[n] + s * f[n + 1]
            d = f[n + 1] - lin
            lhs += dt * ws * float(d @ (M @ d))
    jumps = np.diff(f, axis=0)
    rhs = dt / 3.0 * float(np.sum(_mnorm_sq(jumps, M))) if len(jumps) else 0.0
    return lhs, rhs


def interpolant_inequality_check(result, channels=("v", "u", "eta", "V", "d")) -> list[InterpolantCheck]:
    out = []
    for ch in channels:
        M = getattr(result.forms, CHANNEL_MASS[ch])
        out.append(InterpolantCheck(ch, *interpolant_gap(result.series[ch], result.config.dt, M)))
    return out


def eta_drift(series_eta) -> np.ndarray:
    """Sup-norm distance of each interface snapshot from the initial one."""
    e = np.asarray(series_eta)
    return np.max(np.abs(e - e[0]), axis=1)
